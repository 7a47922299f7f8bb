#ifndef TLBEE_CLASSIFIERS_HPP
#define TLBEE_CLASSIFIERS_HPP

#include <array>
#include <variant>

#include "tlbee/posterior.hpp"

namespace tlbee {

struct LinearClassifier {
  Vec a;
  double b = 0.0;
};

struct QuadraticClassifier {
  Mat A;  // symmetric
  Vec b;
  double c = 0.0;
};

/// Per-class evaluation cache for the OBTL density.  T_x differs from T_t
/// by a rank-one update, so per-point work reduces to one matrix-vector
/// product plus a small eigensolve for the coupled term.
struct ObtlClassCache {
  Vec m_tn;
  Mat T_t;
  double kappa_ratio = 0.0;  // kappa_tn / (kappa_tn + 1)
  double nu_n = 0.0;         // nu + n_t
  double ln_det_Tt = 0.0;
  double log_const = 0.0;    // x-independent part of the log density
  bool coupled = false;
  Mat G;         // L_s^T F with T_s = L_s L_s^T
  Mat base_arg;  // G T_t G^T
  double a = 0.0;  // (nu + n_s) / 2
  double c = 0.0;  // nu / 2
};

/// Optimal Bayesian transfer-learning classifier: argmax over the
/// effective class-conditional densities.
struct ObtlClassifier {
  std::array<ObtlClassCache, 2> cls;
};

/// Always predicts the stored label; test plumbing.
struct ConstantClassifier {
  int label = 0;
};

using Classifier = std::variant<LinearClassifier, QuadraticClassifier,
                                ObtlClassifier, ConstantClassifier>;

/// Bayes-optimal quadratic discriminant for known class parameters,
/// equal class priors.
QuadraticClassifier qda_from_params(const DomainClassParams& theta0,
                                    const DomainClassParams& theta1);

/// Linear discriminant with averaged covariance (Lambda0^-1 + Lambda1^-1)/2.
LinearClassifier lda_from_params(const DomainClassParams& theta0,
                                 const DomainClassParams& theta1);

/// Sample plug-in LDA with pooled covariance and ln(n1/n0) offset.
/// Requires n0 + n1 >= d + 2.
LinearClassifier lda_from_sample(const ClassStats& stats0,
                                 const ClassStats& stats1);

ObtlClassifier obtl_from_posteriors(const TargetPosterior& post0,
                                    const TargetPosterior& post1);

/// Log effective class-conditional density of the OBTL classifier at x.
double obtl_log_density(const ObtlClassifier& clf, const Vec& x, int y);

/// Label per the sign/argmax convention; exact ties go to class 0.
int predict(const Classifier& clf, const Vec& x);

/// Exact class-y error of a linear rule under N(mu, Lambda^{-1}):
/// Phi((-1)^y g(mu) / sqrt(a^T Lambda^{-1} a)).
double linear_true_error(const LinearClassifier& clf,
                         const DomainClassParams& theta, int y);

struct McError {
  double eps = 0.0;
  double eps0 = 0.0;
  double eps1 = 0.0;
};

/// Misclassification fractions on n_test fresh draws per class.
McError mc_true_error(const Classifier& clf, const DomainClassParams& theta0,
                      const DomainClassParams& theta1, double c, int n_test,
                      Rng& rng);

}  // namespace tlbee

#endif  // TLBEE_CLASSIFIERS_HPP
