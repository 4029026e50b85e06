#include <benchmark/benchmark.h>

#include "lmcf/flow.hpp"
#include "lmcf/verification.hpp"

namespace {

lmcf::GridSpec grid_for(const benchmark::State& state) {
  return lmcf::GridSpec::cube(static_cast<int>(state.range(0)), static_cast<int>(state.range(1)));
}

void BM_SecondDerivative(benchmark::State& state) {
  const auto u = lmcf::random_bandlimited(grid_for(state), 3, 1);
  for (auto _ : state) benchmark::DoNotOptimize(lmcf::derivative<2>(u));
}

void BM_Rhs(benchmark::State& state) {
  const auto u = 0.05 * lmcf::random_bandlimited(grid_for(state), 3, 1);
  for (auto _ : state) benchmark::DoNotOptimize(lmcf::rhs(u, -1.0));
}

void BM_StepRk4(benchmark::State& state) {
  lmcf::FlowConfig cfg;
  cfg.grid = grid_for(state);
  cfg.kappa = -1.0;
  auto s = lmcf::FlowState::at(0.0, 0.05 * lmcf::random_bandlimited(cfg.grid, 3, 1), cfg.scheme);
  const double dt = lmcf::time_step(cfg);
  for (auto _ : state) {
    s = lmcf::step_rk4(s, cfg, dt);
    benchmark::DoNotOptimize(s.u);
  }
}

}  // namespace

BENCHMARK(BM_SecondDerivative)->Args({1, 64})->Args({1, 256})->Args({2, 64})->Args({3, 32});
BENCHMARK(BM_Rhs)->Args({1, 64})->Args({2, 64})->Args({3, 32});
BENCHMARK(BM_StepRk4)->Args({1, 64})->Args({2, 64})->Args({3, 32});
BENCHMARK_MAIN();
