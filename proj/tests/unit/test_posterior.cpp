#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>

#include "tlbee/posterior.hpp"

using namespace tlbee;

TEST_SUITE_BEGIN("posterior");

namespace {

JointHyper make_hyper(int d, double alpha) {
  JointHyper h;
  h.d = d;
  h.nu = 2.0 * d + 2.0;
  h.kappa_t = {2.0, 2.0};
  h.kappa_s = {3.0, 3.0};
  for (int y = 0; y < 2; ++y) {
    h.m_t[y] = Vec::Constant(d, y == 0 ? 0.0 : 1.0);
    h.m_s[y] = Vec::Constant(d, y == 0 ? 0.2 : 1.2);
    build_scale_matrix(1.0, 2.0, alpha, d, h.M_t[y], h.M_s[y], h.M_ts[y]);
  }
  return h;
}

LabeledDataset tiny_data(int d, int n_per_class, Domain dom, Rng& rng) {
  JointHyper h = make_hyper(d, 0.0);
  GenerativeInstance g = sample_generative_instance(h, rng);
  const auto& params = dom == Domain::target ? g.target : g.source;
  return generate_dataset(params, {n_per_class, n_per_class}, dom, rng);
}

}  // namespace

TEST_CASE("class stats on hand instances") {
  Mat one(1, 2);
  one << 3.0, -1.0;
  ClassStats s1 = ClassStats::from_data(one);
  CHECK(s1.n == 1);
  CHECK(s1.xbar(0) == doctest::Approx(3.0));
  CHECK(s1.S.isZero(1e-14));

  Mat two(2, 2);
  two << 1.0, 2.0, -1.0, -2.0;
  ClassStats s2 = ClassStats::from_data(two);
  CHECK(s2.xbar.isZero(1e-14));
  Vec v(2);
  v << 1.0, 2.0;
  CHECK(s2.S.isApprox(2.0 * v * v.transpose()));
}

TEST_CASE("class stats match two-pass oracle on random block") {
  Rng rng = derive_rng(21, 0);
  std::normal_distribution<double> nd;
  Mat x(50, 3);
  for (int i = 0; i < 50; ++i)
    for (int j = 0; j < 3; ++j) x(i, j) = nd(rng);
  ClassStats s = ClassStats::from_data(x);
  Vec mean = Vec::Zero(3);
  for (int i = 0; i < 50; ++i) mean += x.row(i).transpose();
  mean /= 50.0;
  Mat scatter = Mat::Zero(3, 3);
  for (int i = 0; i < 50; ++i) {
    Vec c = x.row(i).transpose() - mean;
    scatter += c * c.transpose();
  }
  CHECK((s.xbar - mean).norm() < 1e-12);
  CHECK((s.S - scatter).cwiseAbs().maxCoeff() < 1e-10);
}

TEST_CASE("compute_stats splits by label") {
  LabeledDataset ds;
  ds.points.resize(3, 1);
  ds.points << 1.0, 5.0, 3.0;
  ds.labels = {0, 1, 0};
  auto st = compute_stats(ds);
  CHECK(st[0].n == 2);
  CHECK(st[0].xbar(0) == doctest::Approx(2.0));
  CHECK(st[1].n == 1);
  CHECK(st[1].xbar(0) == doctest::Approx(5.0));
}

TEST_CASE("decoupled theorem1 collapses to lemma1") {
  Rng rng = derive_rng(22, 0);
  JointHyper h = make_hyper(2, 0.0);
  LabeledDataset dt = tiny_data(2, 5, Domain::target, rng);
  LabeledDataset ds = tiny_data(2, 7, Domain::source, rng);
  auto st = compute_stats(dt);
  auto ss = compute_stats(ds);
  for (int y = 0; y < 2; ++y) {
    TargetPosterior post = theorem1_params(h, y, st[y], ss[y]);
    ImportanceDensity phi = lemma1_params(h, y, st[y]);
    CHECK(post.F.isZero(1e-14));
    CHECK(post.C.isApprox(h.M_s[y], 1e-12));
    CHECK(post.kappa_tn == doctest::Approx(phi.kappa_tn));
    CHECK((post.m_tn - phi.m_tn).norm() < 1e-12);
    CHECK(post.T_t.isApprox(phi.M_tn, 1e-10));
  }
}

TEST_CASE("no data and no coupling recovers the prior scale") {
  JointHyper h = make_hyper(2, 0.0);
  ClassStats empty_t = ClassStats::empty(2);
  ClassStats empty_s = ClassStats::empty(2);
  TargetPosterior post = theorem1_params(h, 0, empty_t, empty_s);
  CHECK(post.T_t.isApprox(h.M_t[0], 1e-12));
  CHECK(post.kappa_tn == doctest::Approx(h.kappa_t[0]));
  CHECK((post.m_tn - h.m_t[0]).norm() < 1e-14);
  ImportanceDensity phi = lemma1_params(h, 0, empty_t);
  CHECK(phi.M_tn.isApprox(h.M_t[0], 1e-12));
  CHECK(phi.dof == doctest::Approx(h.nu));
}

TEST_CASE("shrinkage vanishes when the sample mean equals the prior mean") {
  JointHyper h = make_hyper(1, 0.0);
  Mat x(2, 1);
  x << -1.0, 1.0;  // mean 0 = m_t0
  ClassStats st = ClassStats::from_data(x);
  ImportanceDensity phi = lemma1_params(h, 0, st);
  const Mat expect = (h.M_t[0].inverse() + st.S).inverse();
  CHECK(phi.M_tn.isApprox(expect, 1e-12));
}

TEST_CASE("sample_phi moments") {
  ImportanceDensity phi;
  phi.kappa_tn = 4.0;
  phi.m_tn = Vec::Constant(2, 1.5);
  phi.M_tn.resize(2, 2);
  phi.M_tn << 0.5, 0.1, 0.1, 0.3;
  phi.dof = 8.0;
  Rng rng = derive_rng(23, 0);
  auto draws = sample_phi(phi, 20000, rng);
  Mat lam = Mat::Zero(2, 2);
  Vec mu = Vec::Zero(2);
  for (const auto& th : draws) {
    lam += th.lambda;
    mu += th.mu;
  }
  lam /= draws.size();
  mu /= draws.size();
  CHECK((lam - phi.dof * phi.M_tn).cwiseAbs().maxCoeff() < 0.05);
  CHECK((mu - phi.m_tn).norm() < 0.02);
}

TEST_CASE("zero coupling gives exactly zero log weights") {
  Rng rng = derive_rng(24, 0);
  JointHyper h = make_hyper(2, 0.0);
  LabeledDataset dt = tiny_data(2, 4, Domain::target, rng);
  LabeledDataset ds = tiny_data(2, 4, Domain::source, rng);
  auto st = compute_stats(dt);
  auto ss = compute_stats(ds);
  TargetPosterior post = theorem1_params(h, 0, st[0], ss[0]);
  ImportanceDensity phi = lemma1_params(h, 0, st[0]);
  auto draws = sample_phi(phi, 200, rng);
  for (const auto& th : draws) CHECK(log_weight(th, post, phi) == 0.0);
}

TEST_CASE("log weights are translation equivariant") {
  Rng rng = derive_rng(25, 0);
  JointHyper h = make_hyper(2, 0.7);
  LabeledDataset dt = tiny_data(2, 4, Domain::target, rng);
  LabeledDataset ds = tiny_data(2, 5, Domain::source, rng);
  const Vec shift = Vec::Constant(2, 3.25);

  JointHyper h2 = h;
  LabeledDataset dt2 = dt, ds2 = ds;
  dt2.points.rowwise() += shift.transpose();
  ds2.points.rowwise() += shift.transpose();
  for (int y = 0; y < 2; ++y) {
    h2.m_t[y] += shift;
    h2.m_s[y] += shift;
  }

  auto st = compute_stats(dt), ss = compute_stats(ds);
  auto st2 = compute_stats(dt2), ss2 = compute_stats(ds2);
  for (int y = 0; y < 2; ++y) {
    TargetPosterior p1 = theorem1_params(h, y, st[y], ss[y]);
    TargetPosterior p2 = theorem1_params(h2, y, st2[y], ss2[y]);
    ImportanceDensity f1 = lemma1_params(h, y, st[y]);
    ImportanceDensity f2 = lemma1_params(h2, y, st2[y]);
    Rng draw_rng = derive_rng(26, y);
    auto draws = sample_phi(f1, 50, draw_rng);
    for (auto th : draws) {
      const double w1 = log_weight(th, p1, f1);
      th.mu += shift;
      const double w2 = log_weight(th, p2, f2);
      CHECK(w1 == doctest::Approx(w2).epsilon(1e-8));
    }
  }
}

TEST_SUITE_END();
