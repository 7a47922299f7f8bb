#include <benchmark/benchmark.h>

#include "tlbee/estimators.hpp"

using namespace tlbee;

namespace {

JointHyper bench_hyper(int d, double alpha) {
  JointHyper h;
  h.d = d;
  h.nu = 2.0 * d + 2.0;
  h.kappa_t = {2.0, 2.0};
  h.kappa_s = {2.0, 2.0};
  for (int y = 0; y < 2; ++y) {
    h.m_t[y] = Vec::Constant(d, y == 0 ? -1.0 : 1.0);
    h.m_s[y] = h.m_t[y];
    build_scale_matrix(1.0, 1.0, alpha, d, h.M_t[y], h.M_s[y], h.M_ts[y]);
  }
  return h;
}

void bm_hyp2f1_series(benchmark::State& state) {
  const EigenSpectrum x(5, 0.5);
  const TruncationPolicy tp{static_cast<int>(state.range(0)), 0.0};
  for (auto _ : state)
    benchmark::DoNotOptimize(hyp2f1_series(3, 4, 6, x, tp).value);
}
BENCHMARK(bm_hyp2f1_series)->Arg(20)->Arg(40)->Arg(80);

void bm_hyp2f1_laplace(benchmark::State& state) {
  const EigenSpectrum x(static_cast<std::size_t>(state.range(0)), 0.5);
  for (auto _ : state)
    benchmark::DoNotOptimize(hyp2f1_laplace_ln(3, 4, 6, x).log_value);
}
BENCHMARK(bm_hyp2f1_laplace)->Arg(2)->Arg(10)->Arg(50);

void bm_log_weight(benchmark::State& state) {
  const int d = static_cast<int>(state.range(0));
  JointHyper h = bench_hyper(d, 0.8);
  Rng rng = derive_rng(77, 0);
  GenerativeInstance g = sample_generative_instance(h, rng);
  LabeledDataset dt = generate_dataset(g.target, {8, 8}, Domain::target, rng);
  LabeledDataset ds = generate_dataset(g.source, {20, 20}, Domain::source, rng);
  auto st = compute_stats(dt);
  auto ss = compute_stats(ds);
  TargetPosterior post = theorem1_params(h, 0, st[0], ss[0]);
  ImportanceDensity phi = lemma1_params(h, 0, st[0]);
  auto draws = sample_phi(phi, 64, rng);
  std::size_t i = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(log_weight(draws[i % draws.size()], post, phi));
    ++i;
  }
}
BENCHMARK(bm_log_weight)->Arg(2)->Arg(5);

void bm_tl_bee(benchmark::State& state) {
  JointHyper h = bench_hyper(2, 0.8);
  Rng rng = derive_rng(78, 0);
  GenerativeInstance g = sample_generative_instance(h, rng);
  LabeledDataset dt = generate_dataset(g.target, {10, 10}, Domain::target, rng);
  LabeledDataset ds = generate_dataset(g.source, {50, 50}, Domain::source, rng);
  Classifier clf = qda_from_params(g.target[0], g.target[1]);
  BeeConfig cfg;
  cfg.N = static_cast<int>(state.range(0));
  cfg.n_test_per_theta = 250;
  std::uint64_t i = 0;
  for (auto _ : state) {
    Rng r = derive_rng(78, 1, i++);
    benchmark::DoNotOptimize(tl_bee(clf, dt, ds, h, cfg, r).estimate);
  }
}
BENCHMARK(bm_tl_bee)->Arg(100)->Arg(1000)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
