#include "tlbee/estimators.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "tlbee/specfun.hpp"

namespace tlbee {

namespace {

double clamp01(double v, BeeResult& res, const char* what) {
  if (v < 0.0 || v > 1.0) {
    res.flags.push_back(std::string(what) + " clamped to [0,1]");
    return std::clamp(v, 0.0, 1.0);
  }
  return v;
}

LabeledDataset subset(const LabeledDataset& ds, const std::vector<int>& idx) {
  LabeledDataset out;
  out.domain = ds.domain;
  out.points.resize(static_cast<int>(idx.size()), ds.points.cols());
  out.labels.reserve(idx.size());
  for (std::size_t i = 0; i < idx.size(); ++i) {
    out.points.row(static_cast<int>(i)) = ds.points.row(idx[i]);
    out.labels.push_back(ds.labels[static_cast<std::size_t>(idx[i])]);
  }
  return out;
}

double error_on(const Classifier& clf, const LabeledDataset& ds,
                const std::vector<int>& idx) {
  if (idx.empty()) return 0.0;
  int wrong = 0;
  for (int i : idx)
    if (predict(clf, ds.points.row(i).transpose()) !=
        ds.labels[static_cast<std::size_t>(i)])
      ++wrong;
  return static_cast<double>(wrong) / static_cast<double>(idx.size());
}

std::vector<int> all_indices(const LabeledDataset& ds) {
  std::vector<int> idx(static_cast<std::size_t>(ds.n()));
  std::iota(idx.begin(), idx.end(), 0);
  return idx;
}

// Shared IS loop; `transfer` toggles coupled-posterior weights vs. all-ones.
BeeResult bee_impl(const Classifier& clf, const LabeledDataset& data_t,
                   const LabeledDataset* data_s, const JointHyper& hyper,
                   const BeeConfig& cfg, Rng& rng) {
  if (cfg.N < 2) throw std::invalid_argument("bee: N must be >= 2");
  if (cfg.n_test_per_theta < 1)
    throw std::invalid_argument("bee: n_test_per_theta must be >= 1");
  const auto stats_t = compute_stats(data_t);
  std::array<ClassStats, 2> stats_s{ClassStats::empty(hyper.d),
                                    ClassStats::empty(hyper.d)};
  if (data_s != nullptr) stats_s = compute_stats(*data_s);
  for (int y = 0; y < 2; ++y)
    if (stats_t[static_cast<std::size_t>(y)].n < 1)
      throw std::invalid_argument(
          "bee: at least one target point per class is required");

  BeeResult res;
  LinearClassifier g;
  bool have_cv = false;
  if (cfg.use_control_variate) {
    try {
      g = lda_from_sample(stats_t[0], stats_t[1]);
      have_cv = true;
    } catch (const std::exception& e) {
      res.flags.push_back(std::string("control variate disabled: ") + e.what());
    }
  }

  for (int y = 0; y < 2; ++y) {
    const auto yy = static_cast<std::size_t>(y);
    const TargetPosterior post =
        theorem1_params(hyper, y, stats_t[yy], stats_s[yy]);
    const ImportanceDensity phi = lemma1_params(hyper, y, stats_t[yy]);
    const auto thetas = sample_phi(phi, cfg.N, rng);

    std::vector<double> eps(thetas.size()), lw(thetas.size());
    for (std::size_t i = 0; i < thetas.size(); ++i) {
      eps[i] = class_error_given_theta(clf, thetas[i], y, cfg, rng);
      lw[i] = (data_s != nullptr) ? log_weight(thetas[i], post, phi) : 0.0;
    }

    const double lw_max = *std::max_element(lw.begin(), lw.end());
    std::vector<double> w(lw.size());
    double w_sum = 0.0, w_sq = 0.0, ew_sum = 0.0;
    for (std::size_t i = 0; i < lw.size(); ++i) {
      w[i] = std::exp(lw[i] - lw_max);
      w_sum += w[i];
      w_sq += w[i] * w[i];
      ew_sum += eps[i] * w[i];
    }
    double est = ew_sum / w_sum;
    res.ess[yy] = w_sum * w_sum / w_sq;

    const bool eps_degenerate =
        *std::max_element(eps.begin(), eps.end()) ==
        *std::min_element(eps.begin(), eps.end());
    if (have_cv && !eps_degenerate) {
      const double delta = cv_expectation(phi, g, y);
      const double w_mean = w_sum / static_cast<double>(cfg.N);
      double v_mean = 0.0;
      std::vector<double> v(thetas.size()), zeta(thetas.size());
      for (std::size_t i = 0; i < thetas.size(); ++i) {
        v[i] = linear_true_error(g, thetas[i], y);
        v_mean += v[i];
        zeta[i] = eps[i] * w[i] / w_mean;
      }
      v_mean /= static_cast<double>(cfg.N);
      double var_v = 0.0, var_z = 0.0, cov = 0.0;
      for (std::size_t i = 0; i < thetas.size(); ++i) {
        const double dv = v[i] - delta;
        const double dz = zeta[i] - est;
        var_v += dv * dv;
        var_z += dz * dz;
        cov += dz * dv;
      }
      var_v /= static_cast<double>(cfg.N);
      var_z /= static_cast<double>(cfg.N);
      cov /= static_cast<double>(cfg.N);
      if (var_v > 0.0) {
        const double beta = cov / var_v;
        est -= beta * (v_mean - delta);
        res.beta_hat[yy] = beta;
        res.cv_correlation[yy] =
            (var_z > 0.0) ? cov / std::sqrt(var_v * var_z) : 0.0;
      } else {
        res.flags.push_back("control variate degenerate for class " +
                            std::to_string(y));
      }
    }
    res.per_class[yy] = clamp01(est, res, "per-class estimate");
  }
  res.estimate = cfg.c * res.per_class[0] + (1.0 - cfg.c) * res.per_class[1];
  return res;
}

}  // namespace

double class_error_given_theta(const Classifier& clf,
                               const DomainClassParams& theta_y, int y,
                               const BeeConfig& cfg, Rng& rng) {
  if (const auto* lin = std::get_if<LinearClassifier>(&clf))
    return linear_true_error(*lin, theta_y, y);
  const Mat data = generate_class_data(theta_y, cfg.n_test_per_theta, rng);
  int wrong = 0;
  for (int i = 0; i < data.rows(); ++i)
    if (predict(clf, data.row(i).transpose()) != y) ++wrong;
  return static_cast<double>(wrong) / static_cast<double>(data.rows());
}

double cv_expectation(const ImportanceDensity& phi, const LinearClassifier& g,
                      int y) {
  if (g.a.norm() == 0.0)
    throw std::domain_error("cv_expectation: degenerate direction a = 0");
  const int d = static_cast<int>(phi.m_tn.size());
  const double sign_y = (y == 0) ? 1.0 : -1.0;
  const double A = sign_y * (g.a.dot(phi.m_tn) + g.b) *
                   std::sqrt(phi.kappa_tn / (1.0 + phi.kappa_tn));
  if (A == 0.0) return 0.5;
  Eigen::LLT<Mat> llt(phi.M_tn);
  if (llt.info() != Eigen::Success)
    throw std::domain_error("cv_expectation: M_tn not positive definite");
  const double quad = g.a.dot(llt.solve(g.a));
  const double x = A * A / (A * A + quad);
  const double beta_b = 0.5 * (phi.dof - d + 1.0);
  const double sgn = (A > 0.0) ? 1.0 : -1.0;
  return 0.5 + 0.5 * sgn * reg_inc_beta(x, 0.5, beta_b);
}

BeeResult tl_bee(const Classifier& clf, const LabeledDataset& data_t,
                 const LabeledDataset& data_s, const JointHyper& hyper,
                 const BeeConfig& cfg, Rng& rng) {
  return bee_impl(clf, data_t, &data_s, hyper, cfg, rng);
}

BeeResult target_bee(const Classifier& clf, const LabeledDataset& data_t,
                     const JointHyper& hyper, const BeeConfig& cfg, Rng& rng) {
  return bee_impl(clf, data_t, nullptr, hyper, cfg, rng);
}

double resubstitution(const TrainableRule& rule, const LabeledDataset& data_t) {
  if (data_t.n() == 0)
    throw std::invalid_argument("resubstitution: empty training set");
  const Classifier clf = rule(data_t);
  return error_on(clf, data_t, all_indices(data_t));
}

double cross_validation(const TrainableRule& rule, const LabeledDataset& data_t,
                        int k, int reps, Rng& rng) {
  if (k < 2 || k > data_t.n())
    throw std::invalid_argument("cross_validation: need 2 <= k <= n");
  if (reps < 1) throw std::invalid_argument("cross_validation: reps must be >= 1");
  double total = 0.0;
  for (int r = 0; r < reps; ++r) {
    // stratified assignment: shuffle within class, deal to folds round-robin
    // with a fold counter shared across classes (k = n reduces to LOO).
    std::vector<std::vector<int>> folds(static_cast<std::size_t>(k));
    int counter = 0;
    for (int y = 0; y < 2; ++y) {
      std::vector<int> idx;
      for (int i = 0; i < data_t.n(); ++i)
        if (data_t.labels[static_cast<std::size_t>(i)] == y) idx.push_back(i);
      std::shuffle(idx.begin(), idx.end(), rng);
      for (int i : idx)
        folds[static_cast<std::size_t>(counter++ % k)].push_back(i);
    }
    int wrong = 0;
    for (const auto& fold : folds) {
      if (fold.empty()) continue;
      std::vector<int> train;
      for (int i = 0; i < data_t.n(); ++i)
        if (std::find(fold.begin(), fold.end(), i) == fold.end())
          train.push_back(i);
      const Classifier clf = rule(subset(data_t, train));
      for (int i : fold)
        if (predict(clf, data_t.points.row(i).transpose()) !=
            data_t.labels[static_cast<std::size_t>(i)])
          ++wrong;
    }
    total += static_cast<double>(wrong) / static_cast<double>(data_t.n());
  }
  return total / static_cast<double>(reps);
}

double loo(const TrainableRule& rule, const LabeledDataset& data_t) {
  if (data_t.n() < 2) throw std::invalid_argument("loo: need at least 2 points");
  int wrong = 0;
  for (int i = 0; i < data_t.n(); ++i) {
    std::vector<int> train;
    for (int j = 0; j < data_t.n(); ++j)
      if (j != i) train.push_back(j);
    const Classifier clf = rule(subset(data_t, train));
    if (predict(clf, data_t.points.row(i).transpose()) !=
        data_t.labels[static_cast<std::size_t>(i)])
      ++wrong;
  }
  return static_cast<double>(wrong) / static_cast<double>(data_t.n());
}

double bootstrap632(const TrainableRule& rule, const LabeledDataset& data_t,
                    int B, Rng& rng) {
  if (B < 1) throw std::invalid_argument("bootstrap632: B must be >= 1");
  const int n = data_t.n();
  if (n < 2) throw std::invalid_argument("bootstrap632: need at least 2 points");
  const double resub = resubstitution(rule, data_t);
  std::uniform_int_distribution<int> pick(0, n - 1);
  double boot0 = 0.0;
  for (int b = 0; b < B; ++b) {
    std::vector<int> sample;
    std::vector<int> oob;
    bool ok = false;
    for (int attempt = 0; attempt < 100 && !ok; ++attempt) {
      sample.clear();
      std::vector<bool> in_bag(static_cast<std::size_t>(n), false);
      bool has0 = false, has1 = false;
      for (int i = 0; i < n; ++i) {
        const int j = pick(rng);
        sample.push_back(j);
        in_bag[static_cast<std::size_t>(j)] = true;
        (data_t.labels[static_cast<std::size_t>(j)] == 0 ? has0 : has1) = true;
      }
      oob.clear();
      for (int i = 0; i < n; ++i)
        if (!in_bag[static_cast<std::size_t>(i)]) oob.push_back(i);
      ok = has0 && has1 && !oob.empty();
    }
    if (!ok)
      throw std::runtime_error(
          "bootstrap632: could not draw a resample with both classes");
    const Classifier clf = rule(subset(data_t, sample));
    boot0 += error_on(clf, data_t, oob);
  }
  boot0 /= static_cast<double>(B);
  return 0.368 * resub + 0.632 * boot0;
}

}  // namespace tlbee
