#include <CLI11.hpp>
#include <fstream>
#include <iostream>
#include <json.hpp>

#include "tlbee/harness.hpp"
#include "tlbee/specfun.hpp"

using nlohmann::json;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitValidation = 2;
constexpr int kExitPartial = 3;

tlbee::EigenSpectrum make_spectrum(const std::vector<double>& eigs, double tau,
                                   int d) {
  if (!eigs.empty()) return eigs;
  if (d < 1) throw std::invalid_argument("specfun: need --spectrum or --tau with --d");
  return tlbee::EigenSpectrum(static_cast<std::size_t>(d), tau);
}

int run_specfun(const std::string& fn, double a, double b, double c,
                const std::vector<double>& eigs, double tau, int d,
                const std::string& method, int k_max, double rel_tol,
                double x) {
  json out;
  out["method"] = method;
  if (fn == "incbeta") {
    out["value"] = tlbee::reg_inc_beta(x, a, b);
  } else if (fn == "mvgamma") {
    out["log_value"] = tlbee::ln_mv_gamma(d, a);
  } else {
    const tlbee::EigenSpectrum sp = make_spectrum(eigs, tau, d);
    if (method == "series") {
      const tlbee::TruncationPolicy tp{k_max, rel_tol};
      const tlbee::SeriesResult r =
          (fn == "1f1") ? tlbee::hyp1f1_series(a, b, sp, tp)
                        : tlbee::hyp2f1_series(a, b, c, sp, tp);
      out["value"] = r.value;
      out["log_value"] = std::log(std::abs(r.value));
      out["achieved_tol"] = r.achieved_rel_tol;
      out["degree_used"] = r.degree_used;
      out["converged"] = r.converged;
    } else if (method == "laplace") {
      const tlbee::LaplaceResult r =
          (fn == "1f1") ? tlbee::hyp1f1_laplace_ln(a, b, sp)
                        : tlbee::hyp2f1_laplace_ln(a, b, c, sp);
      out["value"] = std::exp(r.log_value);
      out["log_value"] = r.log_value;
      out["integral_valid"] = r.integral_valid;
    } else {
      throw std::invalid_argument("specfun: method must be series or laplace");
    }
  }
  std::cout << out.dump(2) << "\n";
  return kExitOk;
}

std::vector<std::string> split_cells(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  for (char ch : line) {
    if (ch == ',') {
      out.push_back(cur);
      cur.clear();
    } else if (ch != '\r') {
      cur += ch;
    }
  }
  out.push_back(cur);
  return out;
}

// CSV: header "x1,...,xd,label", labels in {0,1}.
tlbee::LabeledDataset read_dataset(const std::string& path,
                                   tlbee::Domain domain) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error("empty file " + path);
  const auto header = split_cells(line);
  if (header.empty() || header.back() != "label")
    throw std::runtime_error(path + ": last column must be 'label'");
  const int d = static_cast<int>(header.size()) - 1;
  std::vector<std::vector<double>> rows;
  std::vector<int> labels;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto cells = split_cells(line);
    if (static_cast<int>(cells.size()) != d + 1)
      throw std::runtime_error(path + ": ragged row");
    std::vector<double> row;
    for (int j = 0; j < d; ++j)
      row.push_back(std::stod(cells[static_cast<std::size_t>(j)]));
    labels.push_back(std::stoi(cells.back()));
    rows.push_back(std::move(row));
  }
  tlbee::LabeledDataset ds;
  ds.domain = domain;
  ds.points.resize(static_cast<int>(rows.size()), d);
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (int j = 0; j < d; ++j)
      ds.points(static_cast<int>(i), j) = rows[i][static_cast<std::size_t>(j)];
  ds.labels = labels;
  ds.validate();
  return ds;
}

tlbee::Vec toml_vec(const tlbee::TomlLite& t, const std::string& key, int d,
                    double fallback) {
  if (!t.has(key)) return tlbee::Vec::Constant(d, fallback);
  const auto v = t.get_number_list(key);
  if (static_cast<int>(v.size()) != d)
    throw std::runtime_error("hyper: '" + key + "' must have " +
                             std::to_string(d) + " entries");
  tlbee::Vec out(d);
  for (int i = 0; i < d; ++i) out(i) = v[static_cast<std::size_t>(i)];
  return out;
}

tlbee::JointHyper hyper_from_toml(const tlbee::TomlLite& t) {
  tlbee::JointHyper h;
  h.d = static_cast<int>(t.get_int("hyper.d"));
  h.nu = t.get_number_or("hyper.nu", h.d + 20.0);
  const double kt = t.get_number_or("hyper.kappa_t", 100.0);
  const double ks = t.get_number_or("hyper.kappa_s", 100.0);
  h.kappa_t = {kt, kt};
  h.kappa_s = {ks, ks};
  tlbee::Mat M_t, M_s, M_ts;
  tlbee::build_scale_matrix(t.get_number_or("hyper.k_t", 1.0),
                            t.get_number_or("hyper.k_s", 1.0),
                            t.get_number_or("hyper.alpha", 0.0), h.d, M_t, M_s,
                            M_ts);
  h.m_t[0] = toml_vec(t, "hyper.m_t0", h.d, 0.0);
  h.m_t[1] = toml_vec(t, "hyper.m_t1", h.d, 0.0);
  h.m_s[0] = toml_vec(t, "hyper.m_s0", h.d, 0.0);
  h.m_s[1] = toml_vec(t, "hyper.m_s1", h.d, 0.0);
  for (int y = 0; y < 2; ++y) {
    const auto yy = static_cast<std::size_t>(y);
    h.M_t[yy] = M_t;
    h.M_s[yy] = M_s;
    h.M_ts[yy] = M_ts;
  }
  h.c = t.get_number_or("hyper.c", 0.5);
  h.validate();
  return h;
}

tlbee::Classifier build_classifier(const std::string& kind,
                                   const tlbee::LabeledDataset& d_t,
                                   const tlbee::LabeledDataset* d_s,
                                   const tlbee::JointHyper& hyper) {
  if (kind == "const0") return tlbee::ConstantClassifier{0};
  if (kind == "const1") return tlbee::ConstantClassifier{1};
  const auto stats_t = tlbee::compute_stats(d_t);
  if (kind == "lda") return tlbee::lda_from_sample(stats_t[0], stats_t[1]);
  if (kind == "obtl") {
    std::array<tlbee::ClassStats, 2> stats_s{
        tlbee::ClassStats::empty(hyper.d), tlbee::ClassStats::empty(hyper.d)};
    if (d_s != nullptr) stats_s = tlbee::compute_stats(*d_s);
    return tlbee::obtl_from_posteriors(
        tlbee::theorem1_params(hyper, 0, stats_t[0], stats_s[0]),
        tlbee::theorem1_params(hyper, 1, stats_t[1], stats_s[1]));
  }
  if (kind == "qda") {
    auto fit = [](const tlbee::ClassStats& st) {
      tlbee::DomainClassParams p;
      p.mu = st.xbar;
      const tlbee::Mat cov = st.S / std::max(st.n - 1, 1);
      p.lambda = cov.llt().solve(
          tlbee::Mat::Identity(cov.rows(), cov.cols()));
      return p;
    };
    return tlbee::qda_from_params(fit(stats_t[0]), fit(stats_t[1]));
  }
  throw std::invalid_argument("unknown classifier " + kind);
}

int run_estimate(const std::string& target_path, const std::string& source_path,
                 const std::string& hyper_path, const std::string& kind,
                 const std::vector<std::string>& estimators, std::uint64_t seed,
                 int N, int n_test_per_theta, bool control_variate) {
  const tlbee::TomlLite hyper_toml = tlbee::TomlLite::parse_file(hyper_path);
  const tlbee::JointHyper hyper = hyper_from_toml(hyper_toml);
  const tlbee::LabeledDataset d_t =
      read_dataset(target_path, tlbee::Domain::target);
  tlbee::LabeledDataset d_s;
  const bool have_source = !source_path.empty();
  if (have_source) d_s = read_dataset(source_path, tlbee::Domain::source);

  const tlbee::Classifier clf =
      build_classifier(kind, d_t, have_source ? &d_s : nullptr, hyper);
  tlbee::BeeConfig cfg;
  cfg.N = N;
  cfg.n_test_per_theta = n_test_per_theta;
  cfg.use_control_variate = control_variate;
  cfg.c = hyper.c;

  for (const std::string& est : estimators) {
    tlbee::Rng rng = tlbee::derive_rng(seed, std::hash<std::string>{}(est));
    json out;
    out["estimator"] = est;
    out["classifier"] = kind;
    if (est == "tl-bee" || est == "bee") {
      if (!have_source) throw std::invalid_argument("tl-bee needs --source");
      const tlbee::BeeResult r = tlbee::tl_bee(clf, d_t, d_s, hyper, cfg, rng);
      out["estimate"] = r.estimate;
      out["per_class"] = r.per_class;
      out["beta_hat"] = r.beta_hat;
      out["cv_correlation"] = r.cv_correlation;
      out["ess"] = r.ess;
      out["flags"] = r.flags;
    } else if (est == "target-bee") {
      const tlbee::BeeResult r = tlbee::target_bee(clf, d_t, hyper, cfg, rng);
      out["estimate"] = r.estimate;
      out["per_class"] = r.per_class;
      out["ess"] = r.ess;
      out["flags"] = r.flags;
    } else {
      tlbee::TrainableRule rule = [&](const tlbee::LabeledDataset& ds) {
        return build_classifier(kind, ds, have_source ? &d_s : nullptr, hyper);
      };
      if (est == "resub")
        out["estimate"] = tlbee::resubstitution(rule, d_t);
      else if (est == "cv")
        out["estimate"] = tlbee::cross_validation(rule, d_t, 5, 1, rng);
      else if (est == "loo")
        out["estimate"] = tlbee::loo(rule, d_t);
      else if (est == "boot")
        out["estimate"] = tlbee::bootstrap632(rule, d_t, 100, rng);
      else
        throw std::invalid_argument("unknown estimator " + est);
    }
    std::cout << out.dump(2) << "\n";
  }
  return kExitOk;
}

int finish_sweep(const std::vector<tlbee::MseRecord>& records,
                 const std::string& out_path,
                 const std::map<std::string, std::string>& meta) {
  if (out_path.empty())
    throw std::invalid_argument("no output path: set --out or config out");
  tlbee::write_records(records, out_path, meta);
  int skipped = 0, succeeded = 0;
  for (const auto& r : records) {
    skipped += r.skipped;
    succeeded += r.n_reps;
  }
  std::cerr << "wrote " << records.size() << " records to " << out_path << " ("
            << succeeded << " replicates, " << skipped << " skipped)\n";
  if (skipped > 0 && succeeded > 0) return kExitPartial;
  if (succeeded == 0 && !records.empty()) return kExitValidation;
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"transfer-learning Bayesian error estimation toolkit"};
  app.require_subcommand(1);

  // specfun
  auto* sf = app.add_subcommand("specfun", "evaluate special functions");
  std::string sf_fn, sf_method = "series";
  double sf_a = 0, sf_b = 0, sf_c = 0, sf_tau = 0, sf_x = 0, sf_rtol = 1e-9;
  int sf_d = 0, sf_kmax = 200;
  std::vector<double> sf_spectrum;
  sf->add_option("function", sf_fn, "1f1 | 2f1 | incbeta | mvgamma")->required();
  sf->add_option("--a", sf_a);
  sf->add_option("--b", sf_b);
  sf->add_option("--c", sf_c);
  sf->add_option("--tau", sf_tau, "isotropic eigenvalue");
  sf->add_option("--d", sf_d, "dimension");
  sf->add_option("--spectrum", sf_spectrum, "explicit eigenvalues");
  sf->add_option("--x", sf_x, "incbeta argument");
  sf->add_option("--method", sf_method, "series | laplace");
  sf->add_option("--kmax", sf_kmax, "series degree cap");
  sf->add_option("--rtol", sf_rtol, "series relative tolerance");

  // estimate
  auto* est = app.add_subcommand("estimate", "error estimates for one dataset");
  std::string est_target, est_source, est_hyper, est_kind = "lda";
  std::vector<std::string> est_list{"tl-bee"};
  std::uint64_t est_seed = 0;
  int est_N = 1000, est_ntt = 1000;
  bool est_cv = true;
  est->add_option("--target", est_target)->required();
  est->add_option("--source", est_source);
  est->add_option("--hyper", est_hyper, "hyperparameter TOML")->required();
  est->add_option("--classifier", est_kind, "qda | lda | obtl | const0 | const1");
  est->add_option("--estimators", est_list);
  est->add_option("--seed", est_seed)->required();
  est->add_option("--N", est_N, "importance-sample count");
  est->add_option("--n-test-per-theta", est_ntt);
  est->add_flag("--control-variate,!--no-control-variate", est_cv);

  // simulate / calibrate / rnaseq share config + seed + out
  std::string cfg_path, out_path;
  std::uint64_t sim_seed = 0;
  int threads = 0;
  auto add_common = [&](CLI::App* cmd) {
    cmd->add_option("--config", cfg_path)->required();
    cmd->add_option("--seed", sim_seed)->required();
    cmd->add_option("--out", out_path);
    cmd->add_option("--threads", threads);
  };
  auto* sim = app.add_subcommand("simulate", "run a synthetic MSE sweep");
  add_common(sim);
  auto* cal = app.add_subcommand("calibrate", "calibration feasibility run");
  add_common(cal);
  int cal_draws = 100;
  cal->add_option("--draws", cal_draws, "number of prior draws");
  auto* rna = app.add_subcommand("rnaseq", "expression-data relatedness sweep");
  add_common(rna);

  CLI11_PARSE(app, argc, argv);

  try {
    if (sf->parsed())
      return run_specfun(sf_fn, sf_a, sf_b, sf_c, sf_spectrum, sf_tau, sf_d,
                         sf_method, sf_kmax, sf_rtol, sf_x);
    if (est->parsed())
      return run_estimate(est_target, est_source, est_hyper, est_kind, est_list,
                          est_seed, est_N, est_ntt, est_cv);

    const tlbee::TomlLite toml = tlbee::TomlLite::parse_file(cfg_path);
    std::map<std::string, std::string> meta{{"config", cfg_path},
                                            {"seed", std::to_string(sim_seed)}};
    if (sim->parsed()) {
      tlbee::ExperimentConfig cfg = tlbee::ExperimentConfig::from_toml(toml);
      cfg.seed = sim_seed;
      if (threads > 0) cfg.threads = threads;
      if (!out_path.empty()) cfg.out_path = out_path;
      meta["mode"] = cfg.mode;
      meta["classifier"] = cfg.classifier;
      meta["assumed_defaults"] = "cv_folds=" + std::to_string(cfg.cv_folds) +
                                 ",bootstrap_B=" + std::to_string(cfg.boot_B);
      const auto records = cfg.classifier == "obtl"
                               ? tlbee::run_obtl_comparison(cfg)
                               : tlbee::run_fixed_classifier_sweep(cfg);
      return finish_sweep(records, cfg.out_path, meta);
    }
    if (cal->parsed()) {
      tlbee::ExperimentConfig cfg = tlbee::ExperimentConfig::from_toml(toml);
      cfg.seed = sim_seed;
      if (!out_path.empty()) cfg.out_path = out_path;
      std::vector<tlbee::MseRecord> records;
      int converged = 0;
      for (int i = 0; i < cal_draws; ++i) {
        tlbee::Rng rng = tlbee::derive_rng(cfg.seed, 0xca1,
                                           static_cast<std::uint64_t>(i));
        const tlbee::JointHyper h = tlbee::make_synthetic_hyper(
            cfg.d, cfg.alphas.front(), 0.0, cfg.recipe, false);
        std::array<tlbee::Mat, 2> lt, ls;
        for (int y = 0; y < 2; ++y)
          tlbee::sample_joint_precisions(h.joint_scale(y), h.nu, rng,
                                         lt[static_cast<std::size_t>(y)],
                                         ls[static_cast<std::size_t>(y)]);
        const tlbee::CalibrationResult r = tlbee::calibrate_bayes_error(
            cfg.d, cfg.recipe, lt, cfg.tau, cfg.calib_tol, cfg.calib_max_iter,
            cfg.n_test, rng);
        tlbee::MseRecord rec;
        rec.d = cfg.d;
        rec.alpha = cfg.alphas.front();
        rec.tau = cfg.tau;
        rec.classifier = "qda";
        rec.estimator = "calibration";
        rec.mse = r.achieved_error;
        rec.n_reps = r.converged ? 1 : 0;
        rec.skipped = r.converged ? 0 : 1;
        rec.seed = cfg.seed;
        rec.flags = r.converged ? "" : "not converged";
        records.push_back(rec);
        if (r.converged) ++converged;
      }
      std::cerr << converged << "/" << cal_draws << " calibrations converged\n";
      return finish_sweep(records, cfg.out_path, meta);
    }
    if (rna->parsed()) {
      tlbee::RnaSeqConfig cfg = tlbee::RnaSeqConfig::from_toml(toml);
      cfg.seed = sim_seed;
      if (!out_path.empty()) cfg.out_path = out_path;
      const auto records = tlbee::run_rnaseq_alpha_sweep(cfg);
      return finish_sweep(records, cfg.out_path, meta);
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitValidation;
  }
  return kExitOk;
}
