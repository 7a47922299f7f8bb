#include "tlbee/model.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace tlbee {

namespace {

Eigen::LLT<Mat> checked_llt(const Mat& m, const char* what) {
  Eigen::LLT<Mat> llt(m);
  if (llt.info() != Eigen::Success)
    throw std::domain_error(std::string(what) + ": matrix not positive definite");
  return llt;
}

}  // namespace

Mat JointHyper::joint_scale(int y) const {
  const auto yy = static_cast<std::size_t>(y);
  Mat M(2 * d, 2 * d);
  M.topLeftCorner(d, d) = M_t[yy];
  M.topRightCorner(d, d) = M_ts[yy];
  M.bottomLeftCorner(d, d) = M_ts[yy].transpose();
  M.bottomRightCorner(d, d) = M_s[yy];
  return M;
}

void JointHyper::validate() const {
  if (d < 1) throw std::invalid_argument("hyper: d must be positive");
  if (nu < 2.0 * d) throw std::invalid_argument("hyper: requires nu >= 2d");
  if (c < 0.0 || c > 1.0) throw std::invalid_argument("hyper: c outside [0,1]");
  for (int y = 0; y < 2; ++y) {
    const auto yy = static_cast<std::size_t>(y);
    if (kappa_t[yy] <= 0.0 || kappa_s[yy] <= 0.0)
      throw std::invalid_argument("hyper: kappa must be positive");
    if (m_t[yy].size() != d || m_s[yy].size() != d)
      throw std::invalid_argument("hyper: mean vector dimension mismatch");
    if (M_t[yy].rows() != d || M_s[yy].rows() != d || M_ts[yy].rows() != d)
      throw std::invalid_argument("hyper: scale block dimension mismatch");
    checked_llt(joint_scale(y), "hyper scale");
  }
}

void LabeledDataset::validate() const {
  if (static_cast<std::size_t>(points.rows()) != labels.size())
    throw std::invalid_argument("dataset: row/label count mismatch");
  if (!points.allFinite())
    throw std::invalid_argument("dataset: non-finite entries");
  for (int l : labels)
    if (l != 0 && l != 1)
      throw std::invalid_argument("dataset: labels must be 0 or 1");
}

void build_scale_matrix(double k_t, double k_s, double alpha, int d, Mat& M_t,
                        Mat& M_s, Mat& M_ts) {
  if (k_t <= 0.0 || k_s <= 0.0)
    throw std::domain_error("build_scale_matrix: k's must be positive");
  if (std::abs(alpha) >= 1.0)
    throw std::domain_error("build_scale_matrix: requires |alpha| < 1");
  if (d < 1) throw std::domain_error("build_scale_matrix: d must be positive");
  M_t = k_t * Mat::Identity(d, d);
  M_s = k_s * Mat::Identity(d, d);
  M_ts = alpha * std::sqrt(k_t * k_s) * Mat::Identity(d, d);
}

Mat sample_wishart(const Mat& scale, double nu, Rng& rng) {
  const int p = static_cast<int>(scale.rows());
  if (nu < p) throw std::domain_error("sample_wishart: requires nu >= dim");
  const Mat L = checked_llt(scale, "sample_wishart").matrixL();
  std::normal_distribution<double> normal(0.0, 1.0);
  Mat A = Mat::Zero(p, p);
  for (int i = 0; i < p; ++i) {
    std::chi_squared_distribution<double> chi2(nu - i);
    A(i, i) = std::sqrt(chi2(rng));
    for (int j = 0; j < i; ++j) A(i, j) = normal(rng);
  }
  const Mat LA = L * A;
  return LA * LA.transpose();
}

void sample_joint_precisions(const Mat& M, double nu, Rng& rng, Mat& lambda_t,
                             Mat& lambda_s) {
  const int p = static_cast<int>(M.rows());
  if (p % 2 != 0)
    throw std::invalid_argument("sample_joint_precisions: scale must be 2d x 2d");
  const int d = p / 2;
  if (nu < p)
    throw std::domain_error("sample_joint_precisions: requires nu >= 2d");
  const Mat lambda = sample_wishart(M, nu, rng);
  lambda_t = lambda.topLeftCorner(d, d);
  lambda_s = lambda.bottomRightCorner(d, d);
}

Vec sample_mean(const Vec& m, double kappa, const Mat& lambda, Rng& rng) {
  if (kappa <= 0.0) throw std::domain_error("sample_mean: kappa must be positive");
  // x = m + (kappa Lambda)^{-1/2} z with Lambda = L L^T, so solve L^T u = z.
  const Mat L = checked_llt(lambda, "sample_mean").matrixL();
  std::normal_distribution<double> normal(0.0, 1.0);
  Vec z(m.size());
  for (int i = 0; i < z.size(); ++i) z(i) = normal(rng);
  const Vec u = L.transpose().triangularView<Eigen::Upper>().solve(z);
  return m + u / std::sqrt(kappa);
}

Mat generate_class_data(const DomainClassParams& theta, int n, Rng& rng) {
  if (n < 1) throw std::invalid_argument("generate_class_data: n must be >= 1");
  const int d = static_cast<int>(theta.mu.size());
  const Mat L = checked_llt(theta.lambda, "generate_class_data").matrixL();
  std::normal_distribution<double> normal(0.0, 1.0);
  Mat out(n, d);
  Vec z(d);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < d; ++j) z(j) = normal(rng);
    out.row(i) =
        (theta.mu + L.transpose().triangularView<Eigen::Upper>().solve(z))
            .transpose();
  }
  return out;
}

GenerativeInstance sample_generative_instance(const JointHyper& hyper,
                                              Rng& rng) {
  hyper.validate();
  GenerativeInstance inst;
  for (int y = 0; y < 2; ++y) {
    const auto yy = static_cast<std::size_t>(y);
    Mat lambda_t, lambda_s;
    sample_joint_precisions(hyper.joint_scale(y), hyper.nu, rng, lambda_t,
                            lambda_s);
    inst.target[yy].lambda = lambda_t;
    inst.source[yy].lambda = lambda_s;
    inst.target[yy].mu =
        sample_mean(hyper.m_t[yy], hyper.kappa_t[yy], lambda_t, rng);
    inst.source[yy].mu =
        sample_mean(hyper.m_s[yy], hyper.kappa_s[yy], lambda_s, rng);
  }
  return inst;
}

LabeledDataset generate_dataset(const std::array<DomainClassParams, 2>& params,
                                const std::array<int, 2>& n_per_class,
                                Domain domain, Rng& rng) {
  const int d = static_cast<int>(params[0].mu.size());
  const int n = n_per_class[0] + n_per_class[1];
  LabeledDataset ds;
  ds.domain = domain;
  ds.points.resize(n, d);
  ds.labels.reserve(static_cast<std::size_t>(n));
  int row = 0;
  for (int y = 0; y < 2; ++y) {
    if (n_per_class[static_cast<std::size_t>(y)] == 0) continue;
    const Mat block = generate_class_data(params[static_cast<std::size_t>(y)],
                                          n_per_class[static_cast<std::size_t>(y)], rng);
    ds.points.middleRows(row, block.rows()) = block;
    for (int i = 0; i < block.rows(); ++i) ds.labels.push_back(y);
    row += static_cast<int>(block.rows());
  }
  ds.validate();
  return ds;
}

}  // namespace tlbee
