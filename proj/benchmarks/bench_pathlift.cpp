#include <benchmark/benchmark.h>

#include "pathlift/lift_builder.hpp"
#include "pathlift/path_norms.hpp"
#include "pathlift/processes.hpp"
#include "pathlift/quantile_transport.hpp"

using namespace pathlift;

namespace {

void BM_Holder(benchmark::State& state) {
  const auto path = BrownianPath(1, 0, static_cast<int>(state.range(0))).path();
  for (auto _ : state) benchmark::DoNotOptimize(holder_seminorm(path, 0.4));
}
BENCHMARK(BM_Holder)->DenseRange(6, 10, 2);

void BM_PVariation(benchmark::State& state) {
  const auto path = BrownianPath(2, 0, static_cast<int>(state.range(0))).path();
  for (auto _ : state) benchmark::DoNotOptimize(p_variation(path, 2.5));
}
BENCHMARK(BM_PVariation)->DenseRange(6, 10, 2);

void BM_FracSobolev(benchmark::State& state) {
  const auto path = BrownianPath(3, 0, static_cast<int>(state.range(0))).path();
  for (auto _ : state) benchmark::DoNotOptimize(frac_sobolev_seminorm(path, 0.3, 4.0));
}
BENCHMARK(BM_FracSobolev)->DenseRange(6, 10, 2);

void BM_Besov(benchmark::State& state) {
  const auto path = BrownianPath(4, 0, static_cast<int>(state.range(0))).path();
  for (auto _ : state) benchmark::DoNotOptimize(besov_energy(path, 0.3, 4.0));
}
BENCHMARK(BM_Besov)->DenseRange(8, 16, 4);

void BM_Wasserstein(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto a = heat_flow_marginal(0.25, n), b = heat_flow_marginal(1.0, n);
  for (auto _ : state) benchmark::DoNotOptimize(wasserstein_pp(a, b, 3.0));
}
BENCHMARK(BM_Wasserstein)->RangeMultiplier(8)->Range(64, 32768);

void BM_Scenario(benchmark::State& state) {
  std::uint64_t seed = 0;
  for (auto _ : state) benchmark::DoNotOptimize(stochastic_heat_scenario(seed++, 8, 1024));
}
BENCHMARK(BM_Scenario);

void BM_QuantileLift(benchmark::State& state) {
  const auto mp = stochastic_heat_scenario(5, 8, static_cast<std::size_t>(state.range(0))).measures;
  for (auto _ : state) benchmark::DoNotOptimize(build_dyadic_lift(mp, Coupler::quantile, 8));
}
BENCHMARK(BM_QuantileLift)->Arg(256)->Arg(1024);

void BM_LiftEnergy(benchmark::State& state) {
  const auto pi = build_dyadic_lift(stochastic_heat_scenario(5, 8, 1024).measures, Coupler::quantile, 8);
  const NormSpec spec{NormKind::besov, 0.3, 4.0, 0.5};
  for (auto _ : state) benchmark::DoNotOptimize(lift_energy(pi, spec));
}
BENCHMARK(BM_LiftEnergy);

void BM_RefineAndTrack(benchmark::State& state) {
  const auto mp = heat_flow_path(6, 256);
  const NormSpec spec{NormKind::besov, 0.6, 2.0, 0.5};
  for (auto _ : state)
    benchmark::DoNotOptimize(
        refine_and_track([&](int n) { return MeasurePathSample{mp.restricted(n)}; }, Coupler::quantile, spec, 6));
}
BENCHMARK(BM_RefineAndTrack);

}  // namespace

BENCHMARK_MAIN();
