#ifndef TLBEE_SPECFUN_HPP
#define TLBEE_SPECFUN_HPP

#include <unordered_map>
#include <vector>

#include "tlbee/partition.hpp"

namespace tlbee {

/// Eigenvalues of the (real symmetric) matrix argument.
using EigenSpectrum = std::vector<double>;

struct TruncationPolicy {
  int k_max = 30;        // maximum total series degree
  double rel_tol = 1e-9; // relative tail tolerance
};

struct SeriesResult {
  double value = 0.0;
  double achieved_rel_tol = 0.0; // last layer contribution / |total|
  int degree_used = 0;
  bool converged = false;
};

struct LaplaceResult {
  double log_value = 0.0;
  // False when the parameters fall outside the validity region of the
  // underlying integral representation (b-a, resp. c-a, <= (d-1)/2).
  // The value is still computed; callers decide whether to trust it.
  bool integral_valid = true;
};

/// log of the multivariate gamma function Gamma_d(a),
/// Gamma_d(a) = pi^{d(d-1)/4} prod_{i=1..d} Gamma(a - (i-1)/2).
/// Requires a > (d-1)/2.
double ln_mv_gamma(int d, double a);

/// Generalized hypergeometric coefficient (a)_kappa =
/// prod_i (a - (i-1)/2)_{k_i} with rising factorials.
double gen_pochhammer(double a, const Partition& kappa, int d);

/// Same in sign/log form; sign 0 when a factor vanishes.
struct LogSigned {
  double log_abs;
  int sign;
};
LogSigned ln_gen_pochhammer(double a, const Partition& kappa);

/// Evaluates zonal polynomials C_kappa at a fixed spectrum, with the
/// normalization sum_{kappa of k} C_kappa(X) = (tr X)^k.  Values are
/// computed through the Jack-polynomial branching rule (alpha = 2) and
/// memoized per spectrum, so reuse the evaluator across partitions.
class ZonalEvaluator {
 public:
  explicit ZonalEvaluator(EigenSpectrum eigs);
  double zonal(const Partition& kappa);

 private:
  double jack_p(const Partition& p, int nvars);
  EigenSpectrum eigs_;
  std::unordered_map<std::uint64_t, double> memo_;
};

/// One-shot convenience wrapper around ZonalEvaluator.
double zonal(const Partition& kappa, const EigenSpectrum& eigs);

/// log C_kappa(I_d) via the closed-form principal specialization.
double ln_zonal_identity(const Partition& kappa, int d);

/// Truncated zonal series for the confluent function 1F1(a; b; X).
SeriesResult hyp1f1_series(double a, double b, const EigenSpectrum& eigs,
                           const TruncationPolicy& trunc = {});

/// Truncated zonal series for the Gauss function 2F1(a, b; c; X).
/// Requires max |eig| < 1.
SeriesResult hyp2f1_series(double a, double b, double c,
                           const EigenSpectrum& eigs,
                           const TruncationPolicy& trunc = {});

/// Calibrated Laplace approximation to log 1F1(a; b; X).
LaplaceResult hyp1f1_laplace_ln(double a, double b, const EigenSpectrum& eigs);

/// Calibrated Laplace approximation to log 2F1(a, b; c; X).
/// Requires max |eig| < 1.
LaplaceResult hyp2f1_laplace_ln(double a, double b, double c,
                                const EigenSpectrum& eigs);

/// Regularized incomplete beta function I(x; a, b).
double reg_inc_beta(double x, double a, double b);

/// Standard normal CDF.
double std_normal_cdf(double z);

}  // namespace tlbee

#endif  // TLBEE_SPECFUN_HPP
