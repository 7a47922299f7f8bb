#ifndef TLBEE_POSTERIOR_HPP
#define TLBEE_POSTERIOR_HPP

#include <vector>

#include "tlbee/model.hpp"

namespace tlbee {

/// Per-class sufficient statistics: count, mean, scatter.
struct ClassStats {
  int n = 0;
  Vec xbar;  // undefined when n == 0 (size 0)
  Mat S;     // sum (x - xbar)(x - xbar)^T

  static ClassStats from_data(const Mat& data);
  static ClassStats empty(int d);
};

/// Split a dataset into per-class statistics, indexed by label.
std::array<ClassStats, 2> compute_stats(const LabeledDataset& ds);

/// Target-posterior parameters for one class after conditioning on both the
/// target and the coupled source data.
struct TargetPosterior {
  double kappa_tn = 0.0;
  Vec m_tn;
  Mat T_t;  // SPD
  Mat T_s;  // SPD
  Mat F;
  Mat C;    // SPD Schur complement
  double nu = 0.0;
  int n_t = 0;
  int n_s = 0;
};

/// Gaussian-Wishart importance density for one class: the conjugate
/// posterior given target data only.
struct ImportanceDensity {
  double kappa_tn = 0.0;
  Vec m_tn;
  Mat M_tn;  // SPD
  double dof = 0.0;
};

TargetPosterior theorem1_params(const JointHyper& hyper, int y,
                                const ClassStats& stats_t,
                                const ClassStats& stats_s);

ImportanceDensity lemma1_params(const JointHyper& hyper, int y,
                                const ClassStats& stats_t);

/// N exact conjugate draws from the importance density.
std::vector<DomainClassParams> sample_phi(const ImportanceDensity& phi, int N,
                                          Rng& rng);

/// Log importance weight log L(Lambda); exactly 0 when the domains are
/// decoupled (F == 0).
double log_weight(const DomainClassParams& theta, const TargetPosterior& post,
                  const ImportanceDensity& phi);

}  // namespace tlbee

#endif  // TLBEE_POSTERIOR_HPP
