#include "tlbee/posterior.hpp"

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

Mat spd_inverse(const Mat& m, const char* what) {
  const int d = static_cast<int>(m.rows());
  return checked_llt(m, what).solve(Mat::Identity(d, d));
}

double ln_det_spd(const Mat& m, const char* what) {
  const Mat L = checked_llt(m, what).matrixL();
  return 2.0 * L.diagonal().array().log().sum();
}

/// Eigenvalues of S^{1/2} A S^{1/2} for SPD S, computed from the similar
/// symmetric product without forming matrix square roots explicitly:
/// L^T A L with S = L L^T has the same spectrum.
EigenSpectrum similar_spectrum(const Mat& S, const Mat& A, const char* what) {
  const Mat L = checked_llt(S, what).matrixL();
  const Mat B = L.transpose() * A * L;
  Eigen::SelfAdjointEigenSolver<Mat> es(0.5 * (B + B.transpose()));
  if (es.info() != Eigen::Success)
    throw std::runtime_error(std::string(what) + ": eigendecomposition failed");
  EigenSpectrum out(es.eigenvalues().data(),
                    es.eigenvalues().data() + es.eigenvalues().size());
  return out;
}

Mat shrinkage(double kappa, int n, const Vec& m, const Vec& xbar) {
  if (n == 0) return Mat::Zero(m.size(), m.size());
  const Vec diff = m - xbar;
  return (kappa * n / (kappa + n)) * diff * diff.transpose();
}

}  // namespace

ClassStats ClassStats::from_data(const Mat& data) {
  ClassStats st;
  st.n = static_cast<int>(data.rows());
  const int d = static_cast<int>(data.cols());
  if (st.n == 0) {
    st.S = Mat::Zero(d, d);
    return st;
  }
  st.xbar = data.colwise().mean();
  const Mat centered = data.rowwise() - st.xbar.transpose();
  st.S = centered.transpose() * centered;
  return st;
}

ClassStats ClassStats::empty(int d) {
  ClassStats st;
  st.S = Mat::Zero(d, d);
  return st;
}

std::array<ClassStats, 2> compute_stats(const LabeledDataset& ds) {
  ds.validate();
  const int d = static_cast<int>(ds.points.cols());
  std::array<ClassStats, 2> out;
  for (int y = 0; y < 2; ++y) {
    std::vector<int> idx;
    for (std::size_t i = 0; i < ds.labels.size(); ++i)
      if (ds.labels[i] == y) idx.push_back(static_cast<int>(i));
    Mat block(static_cast<int>(idx.size()), d);
    for (std::size_t i = 0; i < idx.size(); ++i)
      block.row(static_cast<int>(i)) = ds.points.row(idx[i]);
    out[static_cast<std::size_t>(y)] = ClassStats::from_data(block);
  }
  return out;
}

TargetPosterior theorem1_params(const JointHyper& hyper, int y,
                                const ClassStats& stats_t,
                                const ClassStats& stats_s) {
  const auto yy = static_cast<std::size_t>(y);
  TargetPosterior post;
  post.nu = hyper.nu;
  post.n_t = stats_t.n;
  post.n_s = stats_s.n;
  post.kappa_tn = hyper.kappa_t[yy] + stats_t.n;
  if (stats_t.n > 0)
    post.m_tn = (hyper.kappa_t[yy] * hyper.m_t[yy] + stats_t.n * stats_t.xbar) /
                post.kappa_tn;
  else
    post.m_tn = hyper.m_t[yy];

  const Mat Mt_inv = spd_inverse(hyper.M_t[yy], "theorem1 M_t");
  post.C = hyper.M_s[yy] - hyper.M_ts[yy].transpose() * Mt_inv * hyper.M_ts[yy];
  // Regression matrix of the source precision block on the target block:
  // given Lambda_t, the source block is noncentral Wishart with scale C and
  // noncentrality C^{-1} F Lambda_t F^T for this F.
  post.F = spd_inverse(post.C, "theorem1 C") * hyper.M_ts[yy].transpose() *
           Mt_inv;

  Mat Tt_inv = Mt_inv + post.F.transpose() * post.C * post.F + stats_t.S +
               shrinkage(hyper.kappa_t[yy], stats_t.n, hyper.m_t[yy],
                         stats_t.n > 0 ? stats_t.xbar : hyper.m_t[yy]);
  Mat Ts_inv = spd_inverse(post.C, "theorem1 C") + stats_s.S +
               shrinkage(hyper.kappa_s[yy], stats_s.n, hyper.m_s[yy],
                         stats_s.n > 0 ? stats_s.xbar : hyper.m_s[yy]);
  Tt_inv = 0.5 * (Tt_inv + Tt_inv.transpose()).eval();
  Ts_inv = 0.5 * (Ts_inv + Ts_inv.transpose()).eval();
  post.T_t = spd_inverse(Tt_inv, "theorem1 T_t");
  post.T_s = spd_inverse(Ts_inv, "theorem1 T_s");
  return post;
}

ImportanceDensity lemma1_params(const JointHyper& hyper, int y,
                                const ClassStats& stats_t) {
  const auto yy = static_cast<std::size_t>(y);
  ImportanceDensity phi;
  phi.kappa_tn = hyper.kappa_t[yy] + stats_t.n;
  phi.dof = hyper.nu + stats_t.n;
  if (stats_t.n > 0)
    phi.m_tn = (hyper.kappa_t[yy] * hyper.m_t[yy] + stats_t.n * stats_t.xbar) /
               phi.kappa_tn;
  else
    phi.m_tn = hyper.m_t[yy];
  Mat Mtn_inv = spd_inverse(hyper.M_t[yy], "lemma1 M_t") + stats_t.S +
                shrinkage(hyper.kappa_t[yy], stats_t.n, hyper.m_t[yy],
                          stats_t.n > 0 ? stats_t.xbar : hyper.m_t[yy]);
  Mtn_inv = 0.5 * (Mtn_inv + Mtn_inv.transpose()).eval();
  phi.M_tn = spd_inverse(Mtn_inv, "lemma1 M_tn");
  return phi;
}

std::vector<DomainClassParams> sample_phi(const ImportanceDensity& phi, int N,
                                          Rng& rng) {
  if (N < 1) throw std::invalid_argument("sample_phi: N must be >= 1");
  std::vector<DomainClassParams> out;
  out.reserve(static_cast<std::size_t>(N));
  for (int i = 0; i < N; ++i) {
    DomainClassParams theta;
    theta.lambda = sample_wishart(phi.M_tn, phi.dof, rng);
    theta.mu = sample_mean(phi.m_tn, phi.kappa_tn, theta.lambda, rng);
    out.push_back(std::move(theta));
  }
  return out;
}

double log_weight(const DomainClassParams& theta, const TargetPosterior& post,
                  const ImportanceDensity& phi) {
  if (post.F.norm() == 0.0) return 0.0;

  const Mat Tt_inv = spd_inverse(post.T_t, "log_weight T_t");
  const Mat Mtn_inv = spd_inverse(phi.M_tn, "log_weight M_tn");
  double lw = -0.5 * ((Tt_inv - Mtn_inv) * theta.lambda).trace();
  lw += 0.5 * (post.nu + post.n_t) *
        (ln_det_spd(phi.M_tn, "log_weight M_tn") -
         ln_det_spd(post.T_t, "log_weight T_t"));

  const double a = 0.5 * (post.nu + post.n_s);
  const double b = 0.5 * post.nu;
  const Mat arg1 = 0.5 * post.F * theta.lambda * post.F.transpose();
  lw += hyp1f1_laplace_ln(a, b, similar_spectrum(post.T_s, arg1, "log_weight 1F1"))
            .log_value;

  const Mat arg2 = post.F * post.T_t * post.F.transpose();
  const EigenSpectrum sp2 = similar_spectrum(post.T_s, arg2, "log_weight 2F1");
  for (double e : sp2)
    if (e >= 1.0)
      throw std::domain_error("log_weight: 2F1 argument has eigenvalue >= 1");
  lw -= hyp2f1_laplace_ln(a, 0.5 * (post.nu + post.n_t), b, sp2).log_value;
  return lw;
}

}  // namespace tlbee
