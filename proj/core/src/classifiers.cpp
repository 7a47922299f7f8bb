#include "tlbee/classifiers.hpp"

#include <cmath>
#include <stdexcept>

#include "tlbee/specfun.hpp"

namespace tlbee {

namespace {

Eigen::LLT<Mat> checked_llt(const Mat& m, const char* what) {
  Eigen::LLT<Mat> llt(m);
  if (llt.info() != Eigen::Success)
    throw std::domain_error(std::string(what) + ": matrix not positive definite");
  return llt;
}

double ln_det_spd(const Mat& m, const char* what) {
  const Mat L = checked_llt(m, what).matrixL();
  return 2.0 * L.diagonal().array().log().sum();
}

double checked_hyp2f1_ln(double a, double b, double c, const EigenSpectrum& sp,
                         const char* what) {
  for (double e : sp)
    if (e >= 1.0)
      throw std::domain_error(std::string(what) +
                              ": 2F1 argument has eigenvalue >= 1");
  return hyp2f1_laplace_ln(a, b, c, sp).log_value;
}

}  // namespace

QuadraticClassifier qda_from_params(const DomainClassParams& theta0,
                                    const DomainClassParams& theta1) {
  QuadraticClassifier q;
  q.A = -0.5 * (theta1.lambda - theta0.lambda);
  q.b = theta1.lambda * theta1.mu - theta0.lambda * theta0.mu;
  q.c = -0.5 * (theta1.mu.dot(theta1.lambda * theta1.mu) -
                theta0.mu.dot(theta0.lambda * theta0.mu)) -
        0.5 * (ln_det_spd(theta0.lambda, "qda Lambda0") -
               ln_det_spd(theta1.lambda, "qda Lambda1"));
  return q;
}

LinearClassifier lda_from_params(const DomainClassParams& theta0,
                                 const DomainClassParams& theta1) {
  const int d = static_cast<int>(theta0.mu.size());
  const Mat S = 0.5 * (checked_llt(theta0.lambda, "lda Lambda0")
                           .solve(Mat::Identity(d, d)) +
                       checked_llt(theta1.lambda, "lda Lambda1")
                           .solve(Mat::Identity(d, d)));
  LinearClassifier l;
  l.a = checked_llt(S, "lda S_t").solve(theta1.mu - theta0.mu);
  if (l.a.norm() == 0.0)
    throw std::domain_error("lda_from_params: equal means give a degenerate classifier");
  l.b = -0.5 * l.a.dot(theta1.mu + theta0.mu);
  return l;
}

LinearClassifier lda_from_sample(const ClassStats& stats0,
                                 const ClassStats& stats1) {
  if (stats0.n < 1 || stats1.n < 1)
    throw std::invalid_argument("lda_from_sample: need at least one point per class");
  const int d = static_cast<int>(stats0.xbar.size());
  const int N = stats0.n + stats1.n;
  if (N < d + 2)
    throw std::domain_error(
        "lda_from_sample: pooled covariance needs N_t >= d + 2 samples");
  // scatter = (n - 1) * sample covariance, so the pooled covariance is
  // the summed scatter over N - 2.
  const Mat S = (stats0.S + stats1.S) / (N - 2);
  Eigen::LLT<Mat> llt(S);
  if (llt.info() != Eigen::Success)
    throw std::domain_error(
        "lda_from_sample: singular pooled covariance; N_t >= d + 2 required");
  LinearClassifier l;
  l.a = llt.solve(stats1.xbar - stats0.xbar);
  l.b = -0.5 * l.a.dot(stats1.xbar + stats0.xbar) +
        std::log(static_cast<double>(stats1.n) / stats0.n);
  return l;
}

ObtlClassifier obtl_from_posteriors(const TargetPosterior& post0,
                                    const TargetPosterior& post1) {
  ObtlClassifier clf;
  for (int y = 0; y < 2; ++y) {
    const TargetPosterior& p = (y == 0) ? post0 : post1;
    ObtlClassCache& cc = clf.cls[static_cast<std::size_t>(y)];
    const int d = static_cast<int>(p.m_tn.size());
    cc.m_tn = p.m_tn;
    cc.T_t = p.T_t;
    cc.kappa_ratio = p.kappa_tn / (p.kappa_tn + 1.0);
    cc.nu_n = p.nu + p.n_t;
    cc.ln_det_Tt = ln_det_spd(p.T_t, "obtl T_t");
    cc.log_const = -0.5 * d * std::log(M_PI) +
                   0.5 * d * std::log(cc.kappa_ratio) +
                   ln_mv_gamma(d, 0.5 * (cc.nu_n + 1.0)) -
                   ln_mv_gamma(d, 0.5 * cc.nu_n);
    cc.coupled = p.F.norm() != 0.0;
    if (cc.coupled) {
      const Mat L = checked_llt(p.T_s, "obtl T_s").matrixL();
      cc.G = L.transpose() * p.F;
      cc.base_arg = cc.G * p.T_t * cc.G.transpose();
      cc.a = 0.5 * (p.nu + p.n_s);
      cc.c = 0.5 * p.nu;
      Eigen::SelfAdjointEigenSolver<Mat> es(
          0.5 * (cc.base_arg + cc.base_arg.transpose()));
      const EigenSpectrum sp(es.eigenvalues().data(),
                             es.eigenvalues().data() + es.eigenvalues().size());
      cc.log_const -= checked_hyp2f1_ln(cc.a, 0.5 * cc.nu_n, cc.c, sp,
                                        "obtl_from_posteriors");
    }
  }
  return clf;
}

double obtl_log_density(const ObtlClassifier& clf, const Vec& x, int y) {
  const ObtlClassCache& cc = clf.cls[static_cast<std::size_t>(y)];
  // (T_x)^{-1} = (T_t)^{-1} + r diff diff^T with r = kappa_tn/(kappa_tn+1),
  // so T_x = T_t - (r/s) t t^T and |T_x| = |T_t| / s, where t = T_t diff
  // and s = 1 + r diff^T t.
  const Vec diff = cc.m_tn - x;
  const Vec t = cc.T_t * diff;
  const double s = 1.0 + cc.kappa_ratio * diff.dot(t);
  double ld = cc.log_const + 0.5 * cc.ln_det_Tt -
              0.5 * (cc.nu_n + 1.0) * std::log(s);
  if (cc.coupled) {
    const Vec u = cc.G * t;
    const Mat arg = cc.base_arg - (cc.kappa_ratio / s) * u * u.transpose();
    Eigen::SelfAdjointEigenSolver<Mat> es(arg);
    const EigenSpectrum sp(es.eigenvalues().data(),
                           es.eigenvalues().data() + es.eigenvalues().size());
    ld += checked_hyp2f1_ln(cc.a, 0.5 * (cc.nu_n + 1.0), cc.c, sp,
                            "obtl_log_density");
  }
  return ld;
}

int predict(const Classifier& clf, const Vec& x) {
  struct Visitor {
    const Vec& x;
    int operator()(const LinearClassifier& l) const {
      return l.a.dot(x) + l.b > 0.0 ? 1 : 0;
    }
    int operator()(const QuadraticClassifier& q) const {
      return x.dot(q.A * x) + q.b.dot(x) + q.c > 0.0 ? 1 : 0;
    }
    int operator()(const ObtlClassifier& o) const {
      return obtl_log_density(o, x, 1) > obtl_log_density(o, x, 0) ? 1 : 0;
    }
    int operator()(const ConstantClassifier& c) const { return c.label; }
  };
  return std::visit(Visitor{x}, clf);
}

double linear_true_error(const LinearClassifier& clf,
                         const DomainClassParams& theta, int y) {
  if (clf.a.norm() == 0.0)
    throw std::domain_error("linear_true_error: degenerate direction a = 0");
  const double g = clf.a.dot(theta.mu) + clf.b;
  const Vec u = checked_llt(theta.lambda, "linear_true_error").solve(clf.a);
  const double denom = std::sqrt(clf.a.dot(u));
  const double sign = (y == 0) ? 1.0 : -1.0;
  return std_normal_cdf(sign * g / denom);
}

McError mc_true_error(const Classifier& clf, const DomainClassParams& theta0,
                      const DomainClassParams& theta1, double c, int n_test,
                      Rng& rng) {
  if (n_test < 1)
    throw std::invalid_argument("mc_true_error: n_test must be >= 1");
  McError err;
  for (int y = 0; y < 2; ++y) {
    const DomainClassParams& theta = (y == 0) ? theta0 : theta1;
    const Mat data = generate_class_data(theta, n_test, rng);
    int wrong = 0;
    for (int i = 0; i < n_test; ++i)
      if (predict(clf, data.row(i).transpose()) != y) ++wrong;
    const double frac = static_cast<double>(wrong) / n_test;
    if (y == 0)
      err.eps0 = frac;
    else
      err.eps1 = frac;
  }
  err.eps = c * err.eps0 + (1.0 - c) * err.eps1;
  return err;
}

}  // namespace tlbee
