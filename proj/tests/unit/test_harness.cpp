#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "tlbee/harness.hpp"

using namespace tlbee;

TEST_SUITE_BEGIN("harness");

namespace {

std::string temp_path(const std::string& name) {
  return (std::filesystem::temp_directory_path() / name).string();
}

void write_file(const std::string& path, const std::string& text) {
  std::ofstream out(path);
  out << text;
}

std::string slurp(const std::string& path) {
  std::ifstream in(path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

ExperimentConfig tiny_sweep_config() {
  ExperimentConfig cfg;
  cfg.d = 2;
  cfg.alphas = {0.5};
  cfg.n_s_list = {20};
  cfg.n_t_list = {10};
  cfg.tau = 0.2;
  cfg.N_d = 2;
  cfg.N_p = 1;
  cfg.N_is = 100;
  cfg.n_test = 200;
  cfg.n_test_per_theta = 50;
  cfg.classifier = "qda";
  cfg.seed = 99;
  return cfg;
}

}  // namespace

TEST_CASE("synthetic hyper recipe") {
  HyperRecipe r;
  JointHyper h = make_synthetic_hyper(3, 0.5, 0.8, r, false);
  CHECK(h.d == 3);
  CHECK(h.nu == doctest::Approx(23.0));  // d + 20
  CHECK(h.kappa_t[0] == doctest::Approx(100.0));
  CHECK(h.m_t[0].isZero());
  CHECK(h.m_t[1].isApprox(Vec::Constant(3, 0.8)));
  CHECK(h.m_s[0].isApprox(Vec::Constant(3, 10.0)));
  CHECK(h.m_s[1].isApprox(Vec::Constant(3, 10.8)));
  CHECK(h.M_ts[0].isApprox(0.5 * Mat::Identity(3, 3)));
  CHECK_NOTHROW(h.validate());

  JointHyper f = make_synthetic_hyper(3, 0.5, 0.8, r, true);
  CHECK(f.m_s[0].isApprox(Vec::Constant(3, 10.8)));  // flipped: m_t1 + offset
  CHECK(f.m_s[1].isApprox(Vec::Constant(3, 10.0)));
}

TEST_CASE("experiment config from toml") {
  const TomlLite t = TomlLite::parse_string(R"(
[experiment]
d = 5
alphas = [0.1, 0.9]
n_s = [10, 50]
n_t = [20]
tau = 0.3
n_datasets = 7
n_priors = 2
classifier = "lda"
estimators = ["bee", "resub"]
seed = 123
mode = "flipped"
loop_order = "prior_inner"
)");
  ExperimentConfig cfg = ExperimentConfig::from_toml(t);
  CHECK(cfg.d == 5);
  CHECK(cfg.alphas == std::vector<double>{0.1, 0.9});
  CHECK(cfg.n_s_list == std::vector<int>{10, 50});
  CHECK(cfg.tau == doctest::Approx(0.3));
  CHECK(cfg.N_d == 7);
  CHECK(cfg.N_p == 2);
  CHECK(cfg.classifier == "lda");
  CHECK(cfg.estimators == std::vector<std::string>{"bee", "resub"});
  CHECK(cfg.seed == 123);
  CHECK(cfg.mode == "flipped");
  CHECK(cfg.loop_order == "prior_inner");
  CHECK_NOTHROW(cfg.validate());
}

TEST_CASE("config validation") {
  ExperimentConfig cfg = tiny_sweep_config();
  cfg.tau = 0.7;
  CHECK_THROWS(cfg.validate());
  cfg = tiny_sweep_config();
  cfg.classifier = "svm";
  CHECK_THROWS(cfg.validate());
  cfg = tiny_sweep_config();
  cfg.alphas = {1.2};
  CHECK_THROWS(cfg.validate());
}

TEST_CASE("calibration reaches the requested bayes error") {
  Rng rng = derive_rng(61, 0);
  HyperRecipe recipe;
  JointHyper h = make_synthetic_hyper(2, 0.5, 0.0, recipe, false);
  std::array<Mat, 2> lambda_t;
  for (int y = 0; y < 2; ++y) {
    Mat lt, ls;
    sample_joint_precisions(h.joint_scale(y), h.nu, rng, lt, ls);
    lambda_t[static_cast<std::size_t>(y)] = lt;
  }
  CalibrationResult cal =
      calibrate_bayes_error(2, recipe, lambda_t, 0.2, 0.005, 50, 1000, rng);
  CHECK(cal.converged);
  CHECK(std::abs(cal.achieved_error - 0.2) <= 0.005 + 1e-12);
  CHECK(cal.theta > 0.0);
}

TEST_CASE("sweep records are reproducible and thread-count invariant") {
  ExperimentConfig cfg = tiny_sweep_config();
  auto r1 = run_fixed_classifier_sweep(cfg);
  auto r2 = run_fixed_classifier_sweep(cfg);
  REQUIRE(r1.size() == r2.size());
  REQUIRE(!r1.empty());
  for (std::size_t i = 0; i < r1.size(); ++i) {
    CHECK(r1[i].mse == r2[i].mse);
    CHECK(r1[i].n_reps == r2[i].n_reps);
  }
  cfg.threads = 2;
  auto r3 = run_fixed_classifier_sweep(cfg);
  REQUIRE(r3.size() == r1.size());
  for (std::size_t i = 0; i < r1.size(); ++i) CHECK(r1[i].mse == r3[i].mse);
  CHECK(r1[0].d == 2);
  CHECK(r1[0].estimator == "bee");
  CHECK(r1[0].mse >= 0.0);
}

TEST_CASE("record writer") {
  const std::string path = temp_path("tlbee_test_records.csv");
  write_records({}, path, {{"note", "empty"}});
  const std::string header = slurp(path);
  CHECK(header ==
        "d,alpha,n_s,n_t,tau,classifier,estimator,mse,n_reps,skipped,seed,"
        "runtime_s,flags\n");

  MseRecord rec;
  rec.d = 2;
  rec.alpha = 0.9;
  rec.n_s = 200;
  rec.n_t = 10;
  rec.tau = 0.2;
  rec.classifier = "qda";
  rec.estimator = "bee";
  rec.mse = 0.001234;
  rec.n_reps = 500;
  rec.seed = 7;
  write_records({rec}, path, {{"mode", "standard"}});
  const std::string body = slurp(path);
  CHECK(body.find("qda,bee,0.001234") != std::string::npos);
  write_records({rec}, path, {{"mode", "standard"}});
  CHECK(slurp(path) == body);  // deterministic bytes
  const std::string meta = slurp(path + ".meta.json");
  CHECK(meta.find("\"mode\": \"standard\"") != std::string::npos);
  CHECK(meta.find("tlbee") != std::string::npos);
  std::remove(path.c_str());
  std::remove((path + ".meta.json").c_str());
}

TEST_CASE("rnaseq ingestion standardizes per domain") {
  const std::string tpath = temp_path("tlbee_test_target.csv");
  const std::string spath = temp_path("tlbee_test_source.csv");
  write_file(tpath,
             "g1,g2,g3,label\n"
             "1.0,10.0,5.0,control\n"
             "2.0,12.0,6.0,control\n"
             "3.0,14.0,7.0,case\n"
             "4.0,16.0,8.0,case\n");
  write_file(spath,
             "g1,g2,g3,label\n"
             "0.5,1.0,2.0,0\n"
             "1.5,3.0,4.0,0\n"
             "2.5,5.0,6.0,1\n"
             "3.5,7.0,8.0,1\n");
  RnaSeqConfig cfg;
  cfg.target_csv = tpath;
  cfg.source_csv = spath;
  cfg.features = {"g1", "g3"};
  LabeledDataset target, source;
  IngestMeta meta;
  ingest_rnaseq_csv(cfg, target, source, meta);
  CHECK(target.n() == 4);
  CHECK(target.points.cols() == 2);
  CHECK(target.labels == std::vector<int>{0, 0, 1, 1});
  for (int j = 0; j < 2; ++j) {
    CHECK(target.points.col(j).mean() == doctest::Approx(0.0).epsilon(1e-12));
    const double var = (target.points.col(j).array() -
                        target.points.col(j).mean())
                           .square()
                           .sum() /
                       3.0;
    CHECK(var == doctest::Approx(1.0).epsilon(1e-12));
  }
  CHECK(meta.target_mean[0] == doctest::Approx(2.5));

  // already standardized input passes through unchanged
  const std::string rpath = temp_path("tlbee_test_restd.csv");
  std::ostringstream again;
  again.precision(17);
  again << "g1,g3,label\n";
  for (int i = 0; i < 4; ++i)
    again << target.points(i, 0) << "," << target.points(i, 1) << ","
          << target.labels[static_cast<std::size_t>(i)] << "\n";
  write_file(rpath, again.str());
  RnaSeqConfig cfg2 = cfg;
  cfg2.target_csv = rpath;
  LabeledDataset target2, source2;
  IngestMeta meta2;
  ingest_rnaseq_csv(cfg2, target2, source2, meta2);
  CHECK((target2.points - target.points).cwiseAbs().maxCoeff() < 1e-9);

  // constant feature column is rejected
  const std::string cpath = temp_path("tlbee_test_const.csv");
  write_file(cpath,
             "g1,g3,label\n"
             "1.0,1.0,0\n"
             "2.0,1.0,0\n"
             "3.0,1.0,1\n");
  RnaSeqConfig cfg3 = cfg;
  cfg3.target_csv = cpath;
  CHECK_THROWS(ingest_rnaseq_csv(cfg3, target2, source2, meta2));

  // missing feature is rejected
  RnaSeqConfig cfg4 = cfg;
  cfg4.features = {"g1", "nope"};
  CHECK_THROWS(ingest_rnaseq_csv(cfg4, target2, source2, meta2));

  std::remove(tpath.c_str());
  std::remove(spath.c_str());
  std::remove(rpath.c_str());
  std::remove(cpath.c_str());
}

TEST_CASE("rnaseq alpha sweep on provided datasets") {
  Rng rng = derive_rng(62, 0);
  HyperRecipe recipe;
  JointHyper h = make_synthetic_hyper(2, 0.5, 2.0, recipe, false);
  GenerativeInstance g = sample_generative_instance(h, rng);
  LabeledDataset target =
      generate_dataset(g.target, {15, 15}, Domain::target, rng);
  LabeledDataset source =
      generate_dataset(g.source, {20, 20}, Domain::source, rng);
  RnaSeqConfig cfg;
  cfg.n_t_per_class = 5;
  cfg.n_s_list = {10};
  cfg.alpha_grid = {0.5};
  cfg.replicates = 1;
  cfg.permutations = 1;
  cfg.N_is = 50;
  cfg.seed = 5;
  auto recs = run_rnaseq_alpha_sweep(cfg, target, source);
  REQUIRE(recs.size() == 1);
  CHECK(recs[0].alpha == doctest::Approx(0.5));
  CHECK(recs[0].n_s == 10);
  CHECK(recs[0].mse >= 0.0);
  auto recs2 = run_rnaseq_alpha_sweep(cfg, target, source);
  CHECK(recs[0].mse == recs2[0].mse);
}

TEST_SUITE_END();
