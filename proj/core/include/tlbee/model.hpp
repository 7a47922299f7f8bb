#ifndef TLBEE_MODEL_HPP
#define TLBEE_MODEL_HPP

#include <Eigen/Dense>
#include <array>
#include <vector>

#include "tlbee/rng.hpp"

namespace tlbee {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

enum class Domain { target, source };

/// Hyperparameters of the two-domain Gaussian-Wishart prior.  The scale
/// blocks, nu and kappa are stored per class even though every experiment
/// shares them across classes.
struct JointHyper {
  int d = 1;
  double nu = 2.0;
  std::array<double, 2> kappa_t{1.0, 1.0};
  std::array<double, 2> kappa_s{1.0, 1.0};
  std::array<Vec, 2> m_t;
  std::array<Vec, 2> m_s;
  std::array<Mat, 2> M_t;
  std::array<Mat, 2> M_s;
  std::array<Mat, 2> M_ts;
  double c = 0.5;

  /// Assembled 2d x 2d scale matrix [[M_t, M_ts], [M_ts^T, M_s]].
  Mat joint_scale(int y) const;
  void validate() const;
};

/// Mean and precision of one class in one domain.
struct DomainClassParams {
  Vec mu;
  Mat lambda;
};

struct LabeledDataset {
  Mat points;               // n x d
  std::vector<int> labels;  // values in {0, 1}
  Domain domain = Domain::target;

  int n() const { return static_cast<int>(points.rows()); }
  void validate() const;
};

/// Parameters drawn from the joint prior: index [y] is the class,
/// with separate target and source entries.
struct GenerativeInstance {
  std::array<DomainClassParams, 2> target;
  std::array<DomainClassParams, 2> source;
};

/// Isotropic scale-block construction with cross-block k_ts = alpha
/// sqrt(k_t k_s).  Requires |alpha| < 1 and positive k's.
void build_scale_matrix(double k_t, double k_s, double alpha, int d, Mat& M_t,
                        Mat& M_s, Mat& M_ts);

/// Wishart draw W_p(scale, nu) via Bartlett decomposition.
Mat sample_wishart(const Mat& scale, double nu, Rng& rng);

/// Draws Lambda ~ W_2d(M, nu) and returns its diagonal d x d blocks.
void sample_joint_precisions(const Mat& M, double nu, Rng& rng, Mat& lambda_t,
                             Mat& lambda_s);

/// mu ~ N(m, (kappa Lambda)^{-1}).
Vec sample_mean(const Vec& m, double kappa, const Mat& lambda, Rng& rng);

/// n i.i.d. rows from N(mu, Lambda^{-1}).
Mat generate_class_data(const DomainClassParams& theta, int n, Rng& rng);

/// Full joint-prior draw: precisions for both domains, then means.
GenerativeInstance sample_generative_instance(const JointHyper& hyper,
                                              Rng& rng);

/// Convenience: datasets for both domains given instance parameters.
/// n_per_class[y] points are drawn for class y.
LabeledDataset generate_dataset(const std::array<DomainClassParams, 2>& params,
                                const std::array<int, 2>& n_per_class,
                                Domain domain, Rng& rng);

}  // namespace tlbee

#endif  // TLBEE_MODEL_HPP
