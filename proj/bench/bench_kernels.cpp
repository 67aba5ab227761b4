// Serial reference (1 worker) against the OpenMP kernels.
//
//   bench_kernels --benchmark_filter=LCOC
//
// The second argument of each benchmark is the worker count; 0 means all cores.

#include <benchmark/benchmark.h>

#include "clustervar/bias.hpp"
#include "clustervar/estimators.hpp"
#include "clustervar/montecarlo.hpp"

using namespace clustervar;

namespace {

SimulatedSample sample(Index units) {
  McConfig c;
  c.n_units = units;
  return simulate_dgp(c, 0);
}

void BM_Fit(benchmark::State& state) {
  const SimulatedSample s = sample(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(fit_ols(s.problem));
}

template <typename Fn>
void run_kernel(benchmark::State& state, Fn fn) {
  const SimulatedSample s = sample(state.range(0));
  const OlsFit fit = fit_ols(s.problem);
  const Exec exec{static_cast<int>(state.range(1))};
  for (auto _ : state) benchmark::DoNotOptimize(fn(fit, s, exec));
  state.counters["workers"] = exec.resolved();
}

void BM_LZ(benchmark::State& state) {
  run_kernel(state, [](const OlsFit& f, const SimulatedSample& s, Exec e) {
    return lz_cov(f, s.problem, {}, e);
  });
}

void BM_BM(benchmark::State& state) {
  run_kernel(state, [](const OlsFit& f, const SimulatedSample& s, Exec e) {
    return bm_cov(f, s.problem, BmAdjustment::CR2, e);
  });
}

void BM_LCOC(benchmark::State& state) {
  run_kernel(state, [](const OlsFit& f, const SimulatedSample& s, Exec e) {
    return lcoc_cov(f, s.problem, {}, e);
  });
}

void BM_BiasBounds(benchmark::State& state) {
  run_kernel(state, [](const OlsFit& f, const SimulatedSample& s, Exec e) {
    return bias_bounds(f, s.problem, s.omega, e);
  });
}

void BM_MonteCarlo(benchmark::State& state) {
  McConfig c;
  c.n_units = 20;
  c.n_periods = 10;
  c.dim_w = 4;
  c.reps = 32;
  const Exec exec{static_cast<int>(state.range(0))};
  for (auto _ : state) benchmark::DoNotOptimize(run_experiment(c, exec));
  state.counters["workers"] = exec.resolved();
}

}  // namespace

BENCHMARK(BM_Fit)->Arg(50)->Arg(100)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_LZ)->Args({50, 1})->Args({50, 0})->Unit(benchmark::kMillisecond);
BENCHMARK(BM_BM)->Args({50, 1})->Args({50, 0})->Unit(benchmark::kMillisecond);
BENCHMARK(BM_LCOC)->Args({50, 1})->Args({50, 0})->Args({100, 1})->Args({100, 0})
    ->Unit(benchmark::kMillisecond);
BENCHMARK(BM_BiasBounds)->Args({50, 1})->Args({50, 0})->Unit(benchmark::kMillisecond);
BENCHMARK(BM_MonteCarlo)->Arg(1)->Arg(0)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
