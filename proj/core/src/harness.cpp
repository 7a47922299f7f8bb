#include "tlbee/harness.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <stdexcept>
#include <thread>

namespace tlbee {

namespace {

double elapsed_s(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
      .count();
}

double effective_nu(int d, const HyperRecipe& r) {
  return r.nu > 0.0 ? r.nu : static_cast<double>(d) + 20.0;
}

DomainClassParams fit_gaussian(const ClassStats& st) {
  if (st.n < static_cast<int>(st.S.rows()) + 1)
    throw std::domain_error("fit_gaussian: need at least d + 1 points per class");
  DomainClassParams p;
  p.mu = st.xbar;
  const Mat cov = st.S / static_cast<double>(st.n - 1);
  Eigen::LLT<Mat> llt(cov);
  if (llt.info() != Eigen::Success)
    throw std::domain_error("fit_gaussian: singular sample covariance");
  p.lambda = llt.solve(Mat::Identity(cov.rows(), cov.cols()));
  return p;
}

LabeledDataset concat(const LabeledDataset& a, const LabeledDataset& b) {
  LabeledDataset out;
  out.domain = a.domain;
  out.points.resize(a.n() + b.n(), a.points.cols());
  out.points.topRows(a.n()) = a.points;
  out.points.bottomRows(b.n()) = b.points;
  out.labels = a.labels;
  out.labels.insert(out.labels.end(), b.labels.begin(), b.labels.end());
  return out;
}

// Everything fixed for one prior replicate of a synthetic sweep.
struct PriorDraw {
  bool ok = false;
  std::string failure;
  JointHyper hyper;  // at the calibrated offset
  std::array<DomainClassParams, 2> target;
  std::array<DomainClassParams, 2> source;
  double true_err_qda = 0.0;  // Bayes-error probe, also QDA truth
};

PriorDraw draw_prior(const ExperimentConfig& cfg, double alpha, Rng& rng) {
  const bool flip = cfg.mode != "standard";
  PriorDraw pd;
  pd.hyper = make_synthetic_hyper(cfg.d, alpha, 0.0, cfg.recipe, flip);
  std::array<Mat, 2> lambda_t, lambda_s;
  for (int y = 0; y < 2; ++y)
    sample_joint_precisions(pd.hyper.joint_scale(y), pd.hyper.nu, rng,
                            lambda_t[static_cast<std::size_t>(y)],
                            lambda_s[static_cast<std::size_t>(y)]);
  const CalibrationResult cal =
      calibrate_bayes_error(cfg.d, cfg.recipe, lambda_t, cfg.tau, cfg.calib_tol,
                            cfg.calib_max_iter, cfg.n_test, rng);
  if (!cal.converged) {
    pd.failure = "calibration did not converge (best " +
                 std::to_string(cal.achieved_error) + ")";
    return pd;
  }
  pd.hyper = make_synthetic_hyper(cfg.d, alpha, cal.theta, cfg.recipe, flip);
  pd.target = cal.target_params;
  for (int y = 0; y < 2; ++y) {
    const auto yy = static_cast<std::size_t>(y);
    pd.source[yy].lambda = lambda_s[yy];
    pd.source[yy].mu = sample_mean(pd.hyper.m_s[yy], pd.hyper.kappa_s[yy],
                                   lambda_s[yy], rng);
  }
  const Classifier qda = qda_from_params(pd.target[0], pd.target[1]);
  pd.true_err_qda =
      mc_true_error(qda, pd.target[0], pd.target[1], 0.5, cfg.n_test, rng).eps;
  pd.ok = true;
  return pd;
}

struct CellAccum {
  double sum_sq = 0.0;
  int n = 0;
  int skipped = 0;
};

MseRecord make_record(const ExperimentConfig& cfg, double alpha, int n_s,
                      int n_t, const std::string& estimator,
                      const CellAccum& acc, double runtime) {
  MseRecord rec;
  rec.d = cfg.d;
  rec.alpha = alpha;
  rec.n_s = n_s;
  rec.n_t = n_t;
  rec.tau = cfg.tau;
  rec.classifier = cfg.classifier;
  rec.estimator = estimator;
  rec.mse = acc.n > 0 ? acc.sum_sq / acc.n : 0.0;
  rec.n_reps = acc.n;
  rec.skipped = acc.skipped;
  rec.seed = cfg.seed;
  rec.runtime_s = runtime;
  if (acc.n == 0) rec.flags = "no successful replicates";
  return rec;
}

std::uint64_t cell_key(std::size_t ai, std::size_t ti, std::size_t si) {
  return (static_cast<std::uint64_t>(ai) << 40) |
         (static_cast<std::uint64_t>(ti) << 20) |
         static_cast<std::uint64_t>(si);
}

// Runs tasks 0..n_tasks-1 on cfg.threads workers; each task writes only
// its own slot, so the merged result is thread-count invariant.
void run_tasks(int n_tasks, int threads, const std::function<void(int)>& fn) {
  if (threads <= 1) {
    for (int t = 0; t < n_tasks; ++t) fn(t);
    return;
  }
  std::atomic<int> next{0};
  std::vector<std::thread> pool;
  const int n_workers = std::min(threads, n_tasks);
  pool.reserve(static_cast<std::size_t>(n_workers));
  for (int w = 0; w < n_workers; ++w) {
    pool.emplace_back([&]() {
      for (int t = next.fetch_add(1); t < n_tasks; t = next.fetch_add(1)) fn(t);
    });
  }
  for (auto& th : pool) th.join();
}

using SweepAccum = std::map<std::string, CellAccum>;  // estimator -> accum

// One dataset replicate of the fixed-classifier sweep.
void fixed_replicate(const ExperimentConfig& cfg, const PriorDraw& pd,
                     const Classifier& clf, double true_err, int n_t, int n_s,
                     Rng& rng, SweepAccum& acc) {
  BeeConfig bee_cfg;
  bee_cfg.N = cfg.N_is;
  bee_cfg.n_test_per_theta = cfg.n_test_per_theta;
  bee_cfg.use_control_variate = cfg.use_control_variate;
  LabeledDataset d_t =
      generate_dataset(pd.target, {n_t, n_t}, Domain::target, rng);
  LabeledDataset d_s =
      generate_dataset(pd.source, {n_s, n_s}, Domain::source, rng);
  for (const std::string& est : cfg.estimators) {
    double value = 0.0;
    if (est == "bee") {
      if (cfg.mode == "mislabeled") {
        LabeledDataset mixed = concat(d_t, d_s);
        value = target_bee(clf, mixed, pd.hyper, bee_cfg, rng).estimate;
      } else {
        value = tl_bee(clf, d_t, d_s, pd.hyper, bee_cfg, rng).estimate;
      }
    } else if (est == "target-bee") {
      value = target_bee(clf, d_t, pd.hyper, bee_cfg, rng).estimate;
    } else {
      throw std::invalid_argument("fixed sweep: unsupported estimator " + est);
    }
    auto& cell = acc[est];
    cell.sum_sq += (value - true_err) * (value - true_err);
    cell.n += 1;
  }
}

}  // namespace

JointHyper make_synthetic_hyper(int d, double alpha, double theta,
                                const HyperRecipe& recipe, bool flip_source) {
  JointHyper h;
  h.d = d;
  h.nu = effective_nu(d, recipe);
  h.kappa_t = {recipe.kappa_t, recipe.kappa_t};
  h.kappa_s = {recipe.kappa_s, recipe.kappa_s};
  Mat M_t, M_s, M_ts;
  build_scale_matrix(recipe.k_t, recipe.k_s, alpha, d, M_t, M_s, M_ts);
  const Vec ones = Vec::Ones(d);
  std::array<Vec, 2> m_t{Vec(Vec::Zero(d)), Vec(theta * ones)};
  for (int y = 0; y < 2; ++y) {
    const auto yy = static_cast<std::size_t>(y);
    h.m_t[yy] = m_t[yy];
    const auto src = static_cast<std::size_t>(flip_source ? 1 - y : y);
    h.m_s[yy] = m_t[src] + recipe.source_offset * ones;
    h.M_t[yy] = M_t;
    h.M_s[yy] = M_s;
    h.M_ts[yy] = M_ts;
  }
  h.validate();
  return h;
}

CalibrationResult calibrate_bayes_error(int d, const HyperRecipe& recipe,
                                        const std::array<Mat, 2>& lambda_t,
                                        double tau, double tol, int max_iter,
                                        int n_test, Rng& rng) {
  if (tau <= 0.0 || tau > 0.5)
    throw std::invalid_argument("calibrate_bayes_error: tau must be in (0, 0.5]");
  const std::uint64_t crn_seed = rng();
  const Vec ones = Vec::Ones(d);
  CalibrationResult best;
  best.achieved_error = 2.0;

  auto measure = [&](double theta) {
    // common random numbers: the same stream for every candidate offset
    Rng r = derive_rng(crn_seed, 0xca11b);
    CalibrationResult cand;
    cand.theta = theta;
    for (int y = 0; y < 2; ++y) {
      const auto yy = static_cast<std::size_t>(y);
      const Vec m = (y == 0) ? Vec(Vec::Zero(d)) : Vec(theta * ones);
      cand.target_params[yy].lambda = lambda_t[yy];
      cand.target_params[yy].mu =
          sample_mean(m, recipe.kappa_t, lambda_t[yy], r);
    }
    const Classifier qda =
        qda_from_params(cand.target_params[0], cand.target_params[1]);
    cand.achieved_error = mc_true_error(qda, cand.target_params[0],
                                        cand.target_params[1], 0.5, n_test, r)
                              .eps;
    if (std::abs(cand.achieved_error - tau) <
        std::abs(best.achieved_error - tau))
      best = cand;
    return cand.achieved_error;
  };

  int iters = 0;
  double lo = 0.0;
  double err_lo = measure(lo);
  ++iters;
  if (err_lo < tau - tol) {
    best.iterations = iters;
    return best;  // tau unreachable from above; bracket invalid
  }
  double hi = 1.0;
  double err_hi = measure(hi);
  ++iters;
  while (err_hi > tau && iters < max_iter && hi < 1e6) {
    hi *= 2.0;
    err_hi = measure(hi);
    ++iters;
  }
  while (iters < max_iter) {
    if (std::abs(best.achieved_error - tau) <= tol) break;
    const double mid = 0.5 * (lo + hi);
    const double err_mid = measure(mid);
    ++iters;
    if (err_mid > tau)
      lo = mid;
    else
      hi = mid;
  }
  best.iterations = iters;
  best.converged = std::abs(best.achieved_error - tau) <= tol;
  return best;
}

void ExperimentConfig::validate() const {
  if (d < 1) throw std::invalid_argument("config: d must be positive");
  if (tau <= 0.0 || tau > 0.5)
    throw std::invalid_argument("config: tau must be in (0, 0.5]");
  if (N_d < 1 || N_p < 1 || N_is < 2 || n_test < 1 || n_test_per_theta < 1)
    throw std::invalid_argument("config: counts must be positive");
  if (alphas.empty() || n_s_list.empty() || n_t_list.empty())
    throw std::invalid_argument("config: sweep lists must be non-empty");
  for (double a : alphas)
    if (std::abs(a) >= 1.0)
      throw std::invalid_argument("config: |alpha| must be < 1");
  if (classifier != "qda" && classifier != "lda" && classifier != "obtl")
    throw std::invalid_argument("config: unknown classifier " + classifier);
  if (mode != "standard" && mode != "flipped" && mode != "mislabeled")
    throw std::invalid_argument("config: unknown mode " + mode);
  if (loop_order != "prior_outer" && loop_order != "prior_inner")
    throw std::invalid_argument("config: unknown loop_order " + loop_order);
}

ExperimentConfig ExperimentConfig::from_toml(const TomlLite& t) {
  ExperimentConfig c;
  c.d = static_cast<int>(t.get_int_or("experiment.d", c.d));
  if (t.has("experiment.alphas"))
    c.alphas = t.get_number_list("experiment.alphas");
  if (t.has("experiment.n_s")) {
    c.n_s_list.clear();
    for (double v : t.get_number_list("experiment.n_s"))
      c.n_s_list.push_back(static_cast<int>(v));
  }
  if (t.has("experiment.n_t")) {
    c.n_t_list.clear();
    for (double v : t.get_number_list("experiment.n_t"))
      c.n_t_list.push_back(static_cast<int>(v));
  }
  c.tau = t.get_number_or("experiment.tau", c.tau);
  c.N_d = static_cast<int>(t.get_int_or("experiment.n_datasets", c.N_d));
  c.N_p = static_cast<int>(t.get_int_or("experiment.n_priors", c.N_p));
  c.N_is = static_cast<int>(t.get_int_or("experiment.n_importance", c.N_is));
  c.n_test = static_cast<int>(t.get_int_or("experiment.n_test", c.n_test));
  c.n_test_per_theta = static_cast<int>(
      t.get_int_or("experiment.n_test_per_theta", c.n_test_per_theta));
  c.classifier = t.get_string_or("experiment.classifier", c.classifier);
  if (t.has("experiment.estimators"))
    c.estimators = t.get_string_list("experiment.estimators");
  c.seed = static_cast<std::uint64_t>(t.get_int_or("experiment.seed", 0));
  c.threads = static_cast<int>(t.get_int_or("experiment.threads", c.threads));
  c.out_path = t.get_string_or("experiment.out", "");
  c.mode = t.get_string_or("experiment.mode", c.mode);
  c.loop_order = t.get_string_or("experiment.loop_order", c.loop_order);
  c.use_control_variate =
      t.get_bool_or("experiment.control_variate", c.use_control_variate);
  c.calib_tol = t.get_number_or("calibration.tol", c.calib_tol);
  c.calib_max_iter =
      static_cast<int>(t.get_int_or("calibration.max_iter", c.calib_max_iter));
  c.cv_folds = static_cast<int>(t.get_int_or("baselines.cv_folds", c.cv_folds));
  c.cv_reps = static_cast<int>(t.get_int_or("baselines.cv_reps", c.cv_reps));
  c.boot_B = static_cast<int>(t.get_int_or("baselines.bootstrap_B", c.boot_B));
  c.recipe.nu = t.get_number_or("hyper.nu", c.recipe.nu);
  c.recipe.kappa_t = t.get_number_or("hyper.kappa_t", c.recipe.kappa_t);
  c.recipe.kappa_s = t.get_number_or("hyper.kappa_s", c.recipe.kappa_s);
  c.recipe.k_t = t.get_number_or("hyper.k_t", c.recipe.k_t);
  c.recipe.k_s = t.get_number_or("hyper.k_s", c.recipe.k_s);
  c.recipe.source_offset =
      t.get_number_or("hyper.source_offset", c.recipe.source_offset);
  c.validate();
  return c;
}

RnaSeqConfig RnaSeqConfig::from_toml(const TomlLite& t) {
  RnaSeqConfig c;
  c.target_csv = t.get_string_or("rnaseq.target_csv", "");
  c.source_csv = t.get_string_or("rnaseq.source_csv", "");
  if (t.has("rnaseq.features")) c.features = t.get_string_list("rnaseq.features");
  c.n_t_per_class =
      static_cast<int>(t.get_int_or("rnaseq.n_t_per_class", c.n_t_per_class));
  if (t.has("rnaseq.n_s")) {
    c.n_s_list.clear();
    for (double v : t.get_number_list("rnaseq.n_s"))
      c.n_s_list.push_back(static_cast<int>(v));
  }
  if (t.has("rnaseq.alphas")) c.alpha_grid = t.get_number_list("rnaseq.alphas");
  c.replicates =
      static_cast<int>(t.get_int_or("rnaseq.replicates", c.replicates));
  c.permutations =
      static_cast<int>(t.get_int_or("rnaseq.permutations", c.permutations));
  c.nu = t.get_number_or("rnaseq.nu", c.nu);
  c.N_is = static_cast<int>(t.get_int_or("rnaseq.n_importance", c.N_is));
  c.seed = static_cast<std::uint64_t>(t.get_int_or("rnaseq.seed", 0));
  c.out_path = t.get_string_or("rnaseq.out", "");
  return c;
}

std::vector<MseRecord> run_fixed_classifier_sweep(const ExperimentConfig& cfg) {
  cfg.validate();
  if (cfg.classifier == "obtl")
    throw std::invalid_argument(
        "fixed sweep: obtl is data-trained; use the comparison runner");
  const auto t0 = std::chrono::steady_clock::now();

  struct Task {
    std::size_t ai, ti;
    int p;
  };
  std::vector<Task> tasks;
  const int n_priors = cfg.loop_order == "prior_outer" ? cfg.N_p : cfg.N_d;
  for (std::size_t ai = 0; ai < cfg.alphas.size(); ++ai)
    for (std::size_t ti = 0; ti < cfg.n_t_list.size(); ++ti)
      for (int p = 0; p < n_priors; ++p) tasks.push_back({ai, ti, p});

  // results[task][si] -> estimator accumulators
  std::vector<std::vector<SweepAccum>> results(
      tasks.size(), std::vector<SweepAccum>(cfg.n_s_list.size()));

  run_tasks(static_cast<int>(tasks.size()), cfg.threads, [&](int t) {
    const Task& task = tasks[static_cast<std::size_t>(t)];
    const double alpha = cfg.alphas[task.ai];
    const int n_t = cfg.n_t_list[task.ti];
    const int reps = cfg.loop_order == "prior_outer" ? cfg.N_d : 1;

    // The alpha index is deliberately left out of the stream keys: every
    // alpha cell replays the same underlying draws, so MSE comparisons
    // across the relatedness grid are paired rather than independent.
    Rng prior_rng =
        derive_rng(cfg.seed, cell_key(0, task.ti, 0xfffff),
                   0x9000u + static_cast<std::uint64_t>(task.p));
    const PriorDraw pd = draw_prior(cfg, alpha, prior_rng);
    auto& slot = results[static_cast<std::size_t>(t)];
    if (!pd.ok) {
      for (std::size_t si = 0; si < cfg.n_s_list.size(); ++si)
        for (const std::string& est : cfg.estimators)
          slot[si][est].skipped += reps;
      return;
    }
    Classifier clf;
    double true_err = 0.0;
    if (cfg.classifier == "qda") {
      clf = qda_from_params(pd.target[0], pd.target[1]);
      true_err = pd.true_err_qda;
    } else {
      const LinearClassifier lda = lda_from_params(pd.target[0], pd.target[1]);
      clf = lda;
      true_err = 0.5 * (linear_true_error(lda, pd.target[0], 0) +
                        linear_true_error(lda, pd.target[1], 1));
    }
    for (std::size_t si = 0; si < cfg.n_s_list.size(); ++si) {
      for (int r = 0; r < reps; ++r) {
        const std::uint64_t rep_id =
            static_cast<std::uint64_t>(task.p) * static_cast<std::uint64_t>(reps) +
            static_cast<std::uint64_t>(r);
        Rng rep_rng = derive_rng(cfg.seed, cell_key(0, task.ti, si), rep_id);
        fixed_replicate(cfg, pd, clf, true_err, n_t, cfg.n_s_list[si], rep_rng,
                        slot[si]);
      }
    }
  });

  std::vector<MseRecord> records;
  const double runtime = elapsed_s(t0);
  for (std::size_t ai = 0; ai < cfg.alphas.size(); ++ai) {
    for (std::size_t ti = 0; ti < cfg.n_t_list.size(); ++ti) {
      for (std::size_t si = 0; si < cfg.n_s_list.size(); ++si) {
        SweepAccum merged;
        for (std::size_t t = 0; t < tasks.size(); ++t) {
          if (tasks[t].ai != ai || tasks[t].ti != ti) continue;
          for (const auto& [est, acc] : results[t][si]) {
            merged[est].sum_sq += acc.sum_sq;
            merged[est].n += acc.n;
            merged[est].skipped += acc.skipped;
          }
        }
        for (const std::string& est : cfg.estimators)
          records.push_back(make_record(cfg, cfg.alphas[ai], cfg.n_s_list[si],
                                        cfg.n_t_list[ti], est, merged[est],
                                        runtime));
      }
    }
  }
  return records;
}

std::vector<MseRecord> run_flipped_means_sweep(const ExperimentConfig& cfg) {
  ExperimentConfig c = cfg;
  if (c.mode == "standard") c.mode = "flipped";
  return run_fixed_classifier_sweep(c);
}

std::vector<MseRecord> run_obtl_comparison(const ExperimentConfig& cfg) {
  cfg.validate();
  if (cfg.classifier != "obtl")
    throw std::invalid_argument("obtl comparison: classifier must be obtl");
  const auto t0 = std::chrono::steady_clock::now();

  struct Task {
    std::size_t ai, ti, si;
    int p;
  };
  std::vector<Task> tasks;
  for (std::size_t ai = 0; ai < cfg.alphas.size(); ++ai)
    for (std::size_t ti = 0; ti < cfg.n_t_list.size(); ++ti)
      for (std::size_t si = 0; si < cfg.n_s_list.size(); ++si)
        for (int p = 0; p < cfg.N_p; ++p) tasks.push_back({ai, ti, si, p});

  std::vector<SweepAccum> results(tasks.size());

  run_tasks(static_cast<int>(tasks.size()), cfg.threads, [&](int t) {
    const Task& task = tasks[static_cast<std::size_t>(t)];
    const double alpha = cfg.alphas[task.ai];
    const int n_t = cfg.n_t_list[task.ti];
    const int n_s = cfg.n_s_list[task.si];

    Rng prior_rng =
        derive_rng(cfg.seed, cell_key(task.ai, task.ti, 0xffffe),
                   0x9000u + static_cast<std::uint64_t>(task.p));
    const PriorDraw pd = draw_prior(cfg, alpha, prior_rng);
    auto& slot = results[static_cast<std::size_t>(t)];
    if (!pd.ok) {
      for (const std::string& est : cfg.estimators)
        slot[est].skipped += cfg.N_d;
      return;
    }

    BeeConfig bee_cfg;
    bee_cfg.N = cfg.N_is;
    bee_cfg.n_test_per_theta = cfg.n_test_per_theta;
    bee_cfg.use_control_variate = cfg.use_control_variate;

    for (int r = 0; r < cfg.N_d; ++r) {
      const std::uint64_t rep_id =
          static_cast<std::uint64_t>(task.p) * static_cast<std::uint64_t>(cfg.N_d) +
          static_cast<std::uint64_t>(r);
      Rng rng = derive_rng(cfg.seed, cell_key(task.ai, task.ti, task.si), rep_id);
      LabeledDataset d_t =
          generate_dataset(pd.target, {n_t, n_t}, Domain::target, rng);
      LabeledDataset d_s =
          generate_dataset(pd.source, {n_s, n_s}, Domain::source, rng);
      const auto stats_s = compute_stats(d_s);

      auto train = [&](const LabeledDataset& ds) -> Classifier {
        const auto stats_t = compute_stats(ds);
        return obtl_from_posteriors(
            theorem1_params(pd.hyper, 0, stats_t[0], stats_s[0]),
            theorem1_params(pd.hyper, 1, stats_t[1], stats_s[1]));
      };
      const Classifier clf = train(d_t);
      const double true_err =
          mc_true_error(clf, pd.target[0], pd.target[1], 0.5, cfg.n_test, rng)
              .eps;

      for (const std::string& est : cfg.estimators) {
        double value = 0.0;
        if (est == "bee") {
          value = tl_bee(clf, d_t, d_s, pd.hyper, bee_cfg, rng).estimate;
        } else if (est == "target-bee") {
          value = target_bee(clf, d_t, pd.hyper, bee_cfg, rng).estimate;
        } else if (est == "resub") {
          value = resubstitution(train, d_t);
        } else if (est == "cv") {
          value = cross_validation(train, d_t, cfg.cv_folds, cfg.cv_reps, rng);
        } else if (est == "loo") {
          value = loo(train, d_t);
        } else if (est == "boot") {
          value = bootstrap632(train, d_t, cfg.boot_B, rng);
        } else {
          throw std::invalid_argument("obtl comparison: unknown estimator " +
                                      est);
        }
        slot[est].sum_sq += (value - true_err) * (value - true_err);
        slot[est].n += 1;
      }
    }
  });

  std::vector<MseRecord> records;
  const double runtime = elapsed_s(t0);
  for (std::size_t ai = 0; ai < cfg.alphas.size(); ++ai) {
    for (std::size_t ti = 0; ti < cfg.n_t_list.size(); ++ti) {
      for (std::size_t si = 0; si < cfg.n_s_list.size(); ++si) {
        SweepAccum merged;
        for (std::size_t t = 0; t < tasks.size(); ++t) {
          if (tasks[t].ai != ai || tasks[t].ti != ti || tasks[t].si != si)
            continue;
          for (const auto& [est, acc] : results[t]) {
            merged[est].sum_sq += acc.sum_sq;
            merged[est].n += acc.n;
            merged[est].skipped += acc.skipped;
          }
        }
        for (const std::string& est : cfg.estimators)
          records.push_back(make_record(cfg, cfg.alphas[ai], cfg.n_s_list[si],
                                        cfg.n_t_list[ti], est, merged[est],
                                        runtime));
      }
    }
  }
  return records;
}

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
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

LabeledDataset read_labeled_csv(const std::string& path,
                                const std::vector<std::string>& features,
                                Domain domain, std::vector<double>& mean,
                                std::vector<double>& scale) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("rnaseq: cannot open " + path);
  std::string line;
  if (!std::getline(in, line))
    throw std::runtime_error("rnaseq: empty file " + path);
  const auto header = split_csv_line(line);
  std::vector<int> cols;
  for (const std::string& f : features) {
    const auto it = std::find(header.begin(), header.end(), f);
    if (it == header.end())
      throw std::runtime_error("rnaseq: feature '" + f + "' missing in " + path);
    cols.push_back(static_cast<int>(it - header.begin()));
  }
  const auto lab_it = std::find(header.begin(), header.end(), "label");
  if (lab_it == header.end())
    throw std::runtime_error("rnaseq: no 'label' column in " + path);
  const int lab_col = static_cast<int>(lab_it - header.begin());

  std::vector<std::vector<double>> rows;
  std::vector<int> labels;
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const auto cells = split_csv_line(line);
    if (cells.size() != header.size())
      throw std::runtime_error("rnaseq: ragged row " + std::to_string(line_no) +
                               " in " + path);
    std::vector<double> row;
    for (int c : cols) {
      try {
        row.push_back(std::stod(cells[static_cast<std::size_t>(c)]));
      } catch (const std::exception&) {
        throw std::runtime_error("rnaseq: non-numeric cell at row " +
                                 std::to_string(line_no) + " column " +
                                 header[static_cast<std::size_t>(c)] + " in " +
                                 path);
      }
    }
    const std::string& lab = cells[static_cast<std::size_t>(lab_col)];
    int y;
    if (lab == "0" || lab == "control")
      y = 0;
    else if (lab == "1" || lab == "case")
      y = 1;
    else
      throw std::runtime_error("rnaseq: bad label '" + lab + "' at row " +
                               std::to_string(line_no) + " in " + path);
    rows.push_back(std::move(row));
    labels.push_back(y);
  }
  const int n = static_cast<int>(rows.size());
  const int d = static_cast<int>(features.size());
  if (std::count(labels.begin(), labels.end(), 0) == 0 ||
      std::count(labels.begin(), labels.end(), 1) == 0)
    throw std::runtime_error("rnaseq: a class is empty in " + path);

  LabeledDataset ds;
  ds.domain = domain;
  ds.points.resize(n, d);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < d; ++j)
      ds.points(i, j) = rows[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
  ds.labels = labels;

  mean.assign(static_cast<std::size_t>(d), 0.0);
  scale.assign(static_cast<std::size_t>(d), 0.0);
  for (int j = 0; j < d; ++j) {
    const double mu = ds.points.col(j).mean();
    const double var =
        (ds.points.col(j).array() - mu).square().sum() / std::max(n - 1, 1);
    if (var <= 0.0)
      throw std::runtime_error("rnaseq: zero-variance feature '" +
                               features[static_cast<std::size_t>(j)] + "' in " +
                               path);
    const double sd = std::sqrt(var);
    ds.points.col(j) = (ds.points.col(j).array() - mu) / sd;
    mean[static_cast<std::size_t>(j)] = mu;
    scale[static_cast<std::size_t>(j)] = sd;
  }
  ds.validate();
  return ds;
}

}  // namespace

void ingest_rnaseq_csv(const RnaSeqConfig& cfg, LabeledDataset& target,
                       LabeledDataset& source, IngestMeta& meta) {
  if (cfg.features.empty())
    throw std::invalid_argument("rnaseq: feature list must be non-empty");
  meta.features = cfg.features;
  target = read_labeled_csv(cfg.target_csv, cfg.features, Domain::target,
                            meta.target_mean, meta.target_scale);
  source = read_labeled_csv(cfg.source_csv, cfg.features, Domain::source,
                            meta.source_mean, meta.source_scale);
}

std::vector<MseRecord> run_rnaseq_alpha_sweep(const RnaSeqConfig& cfg,
                                              const LabeledDataset& target,
                                              const LabeledDataset& source) {
  const int d = static_cast<int>(target.points.cols());
  std::array<std::vector<int>, 2> tgt_idx, src_idx;
  for (int i = 0; i < target.n(); ++i)
    tgt_idx[static_cast<std::size_t>(target.labels[static_cast<std::size_t>(i)])]
        .push_back(i);
  for (int i = 0; i < source.n(); ++i)
    src_idx[static_cast<std::size_t>(source.labels[static_cast<std::size_t>(i)])]
        .push_back(i);
  for (int y = 0; y < 2; ++y) {
    if (static_cast<int>(tgt_idx[static_cast<std::size_t>(y)].size()) <
        cfg.n_t_per_class + 1)
      throw std::invalid_argument("rnaseq: too few target points in a class");
  }

  // pooled per-domain means for m_t / m_s, shared across classes
  const Vec m_t = target.points.colwise().mean();
  const Vec m_s = source.points.colwise().mean();

  std::map<std::pair<std::size_t, std::size_t>, CellAccum> accum;
  const auto t0 = std::chrono::steady_clock::now();

  for (int rep = 0; rep < cfg.replicates; ++rep) {
    Rng rep_rng = derive_rng(cfg.seed, 0x5eed, static_cast<std::uint64_t>(rep));
    // held-out split of the target data, stratified
    std::array<std::vector<int>, 2> train_idx, test_idx;
    for (int y = 0; y < 2; ++y) {
      auto idx = tgt_idx[static_cast<std::size_t>(y)];
      std::shuffle(idx.begin(), idx.end(), rep_rng);
      train_idx[static_cast<std::size_t>(y)] = {
          idx.begin(), idx.begin() + cfg.n_t_per_class};
      test_idx[static_cast<std::size_t>(y)] = {idx.begin() + cfg.n_t_per_class,
                                               idx.end()};
    }
    std::vector<int> train_all = train_idx[0];
    train_all.insert(train_all.end(), train_idx[1].begin(), train_idx[1].end());

    LabeledDataset d_t;
    d_t.domain = Domain::target;
    d_t.points.resize(static_cast<int>(train_all.size()), d);
    for (std::size_t i = 0; i < train_all.size(); ++i) {
      d_t.points.row(static_cast<int>(i)) = target.points.row(train_all[i]);
      d_t.labels.push_back(
          target.labels[static_cast<std::size_t>(train_all[i])]);
    }

    const auto stats_t = compute_stats(d_t);
    Classifier clf;
    try {
      clf = qda_from_params(fit_gaussian(stats_t[0]), fit_gaussian(stats_t[1]));
    } catch (const std::exception&) {
      for (std::size_t ai = 0; ai < cfg.alpha_grid.size(); ++ai)
        for (std::size_t si = 0; si < cfg.n_s_list.size(); ++si)
          accum[{ai, si}].skipped += cfg.permutations;
      continue;
    }

    // test error on the held-out remainder
    int wrong = 0, total = 0;
    for (int y = 0; y < 2; ++y) {
      for (int i : test_idx[static_cast<std::size_t>(y)]) {
        if (predict(clf, target.points.row(i).transpose()) != y) ++wrong;
        ++total;
      }
    }
    const double test_err = static_cast<double>(wrong) / total;

    for (std::size_t si = 0; si < cfg.n_s_list.size(); ++si) {
      const int n_s = cfg.n_s_list[si];
      for (int perm = 0; perm < cfg.permutations; ++perm) {
        Rng perm_rng = derive_rng(
            cfg.seed, 0xa110 + static_cast<std::uint64_t>(si),
            static_cast<std::uint64_t>(rep) * 1000u +
                static_cast<std::uint64_t>(perm));
        // random source subset, n_s per class (capped at availability)
        LabeledDataset d_s;
        d_s.domain = Domain::source;
        std::vector<int> chosen;
        for (int y = 0; y < 2; ++y) {
          auto idx = src_idx[static_cast<std::size_t>(y)];
          std::shuffle(idx.begin(), idx.end(), perm_rng);
          const int take =
              std::min(n_s, static_cast<int>(idx.size()));
          chosen.insert(chosen.end(), idx.begin(), idx.begin() + take);
        }
        d_s.points.resize(static_cast<int>(chosen.size()), d);
        for (std::size_t i = 0; i < chosen.size(); ++i) {
          d_s.points.row(static_cast<int>(i)) = source.points.row(chosen[i]);
          d_s.labels.push_back(
              source.labels[static_cast<std::size_t>(chosen[i])]);
        }

        BeeConfig bee_cfg;
        bee_cfg.N = cfg.N_is;
        bee_cfg.n_test_per_theta = 250;

        for (std::size_t ai = 0; ai < cfg.alpha_grid.size(); ++ai) {
          JointHyper h;
          h.d = d;
          h.nu = cfg.nu;
          h.kappa_t = {static_cast<double>(cfg.n_t_per_class),
                       static_cast<double>(cfg.n_t_per_class)};
          const double ks = static_cast<double>(n_s);
          h.kappa_s = {ks, ks};
          Mat M_t, M_s, M_ts;
          build_scale_matrix(1.0 / cfg.nu, 1.0 / cfg.nu, cfg.alpha_grid[ai], d,
                             M_t, M_s, M_ts);
          for (int y = 0; y < 2; ++y) {
            const auto yy = static_cast<std::size_t>(y);
            h.m_t[yy] = m_t;
            h.m_s[yy] = m_s;
            h.M_t[yy] = M_t;
            h.M_s[yy] = M_s;
            h.M_ts[yy] = M_ts;
          }
          h.validate();
          Rng est_rng(perm_rng());
          const double est =
              tl_bee(clf, d_t, d_s, h, bee_cfg, est_rng).estimate;
          auto& cell = accum[{ai, si}];
          cell.sum_sq += (est - test_err) * (est - test_err);
          cell.n += 1;
        }
      }
    }
  }

  std::vector<MseRecord> records;
  const double runtime = elapsed_s(t0);
  for (std::size_t ai = 0; ai < cfg.alpha_grid.size(); ++ai) {
    for (std::size_t si = 0; si < cfg.n_s_list.size(); ++si) {
      const CellAccum& acc = accum[{ai, si}];
      MseRecord rec;
      rec.d = d;
      rec.alpha = cfg.alpha_grid[ai];
      rec.n_s = cfg.n_s_list[si];
      rec.n_t = cfg.n_t_per_class;
      rec.tau = 0.0;
      rec.classifier = "qda";
      rec.estimator = "bee";
      rec.mse = acc.n > 0 ? acc.sum_sq / acc.n : 0.0;
      rec.n_reps = acc.n;
      rec.skipped = acc.skipped;
      rec.seed = cfg.seed;
      rec.runtime_s = runtime;
      records.push_back(rec);
    }
  }
  return records;
}

std::vector<MseRecord> run_rnaseq_alpha_sweep(const RnaSeqConfig& cfg) {
  LabeledDataset target, source;
  IngestMeta meta;
  ingest_rnaseq_csv(cfg, target, source, meta);
  return run_rnaseq_alpha_sweep(cfg, target, source);
}

namespace {

std::string json_escape(const std::string& s) {
  std::string out;
  for (char ch : s) {
    switch (ch) {
      case '"': out += "\\\""; break;
      case '\\': out += "\\\\"; break;
      case '\n': out += "\\n"; break;
      case '\t': out += "\\t"; break;
      default: out += ch;
    }
  }
  return out;
}

}  // namespace

void write_records(const std::vector<MseRecord>& records,
                   const std::string& path,
                   const std::map<std::string, std::string>& meta) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("write_records: cannot open " + path);
  out << "d,alpha,n_s,n_t,tau,classifier,estimator,mse,n_reps,skipped,seed,"
         "runtime_s,flags\n";
  out << std::setprecision(12);
  for (const MseRecord& r : records) {
    out << r.d << ',' << r.alpha << ',' << r.n_s << ',' << r.n_t << ','
        << r.tau << ',' << r.classifier << ',' << r.estimator << ',' << r.mse
        << ',' << r.n_reps << ',' << r.skipped << ',' << r.seed << ','
        << r.runtime_s << ',' << r.flags << '\n';
  }
  if (!out) throw std::runtime_error("write_records: write failed for " + path);
  out.close();

  std::ofstream side(path + ".meta.json");
  if (!side)
    throw std::runtime_error("write_records: cannot open " + path +
                             ".meta.json");
  side << "{\n  \"library\": \"tlbee 1.0.0\"";
  for (const auto& [k, v] : meta)
    side << ",\n  \"" << json_escape(k) << "\": \"" << json_escape(v) << "\"";
  side << "\n}\n";
}

}  // namespace tlbee
