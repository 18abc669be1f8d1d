// Parallel sampler kernels against their serial references.

#include "annealfolio/model.hpp"
#include "annealfolio/sampler.hpp"

#include <benchmark/benchmark.h>

#include <random>

namespace {

using annealfolio::QuboModel;

QuboModel dense_qubo(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  QuboModel m(n);
  for (std::size_t i = 0; i < n; ++i) m.linear[i] = u(rng);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) m.quadratic[{i, j}] = u(rng);
  }
  return m;
}

void BM_anneal_parallel(benchmark::State& state) {
  const QuboModel m = dense_qubo(static_cast<std::size_t>(state.range(0)), 1);
  const auto sched = annealfolio::default_schedule(m);
  for (auto _ : state) benchmark::DoNotOptimize(annealfolio::simulated_anneal(m, sched, 42));
}

void BM_anneal_serial(benchmark::State& state) {
  const QuboModel m = dense_qubo(static_cast<std::size_t>(state.range(0)), 1);
  const auto sched = annealfolio::default_schedule(m);
  for (auto _ : state) benchmark::DoNotOptimize(annealfolio::reference::simulated_anneal_serial(m, sched, 42));
}

void BM_exhaustive_parallel(benchmark::State& state) {
  const QuboModel m = dense_qubo(static_cast<std::size_t>(state.range(0)), 2);
  for (auto _ : state) benchmark::DoNotOptimize(annealfolio::exhaustive_solve(m, 1));
}

void BM_exhaustive_serial(benchmark::State& state) {
  const QuboModel m = dense_qubo(static_cast<std::size_t>(state.range(0)), 2);
  for (auto _ : state) benchmark::DoNotOptimize(annealfolio::reference::exhaustive_solve_serial(m, 1));
}

}  // namespace

BENCHMARK(BM_anneal_parallel)->Arg(16)->Arg(32)->Arg(64)->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK(BM_anneal_serial)->Arg(16)->Arg(32)->Arg(64)->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK(BM_exhaustive_parallel)->Arg(16)->Arg(20)->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK(BM_exhaustive_serial)->Arg(16)->Arg(20)->Unit(benchmark::kMillisecond)->UseRealTime();

BENCHMARK_MAIN();
