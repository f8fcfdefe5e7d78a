// Serial reference vs OpenMP kernels, plus the two hot paths built on them.

#include <benchmark/benchmark.h>

#include <cmath>
#include <random>
#include <vector>

#include "dplab/dp_evolution.hpp"
#include "dplab/kernels.hpp"
#include "dplab/linearized_operator.hpp"
#include "dplab/soliton_profile.hpp"

namespace k = dplab::kernels;

namespace {

std::vector<double> random_vector(std::size_t n, unsigned seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  std::vector<double> v(n);
  for (auto& x : v) x = dist(rng);
  return v;
}

template <bool Parallel>
void BM_Dot(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto x = random_vector(n, 1), y = random_vector(n, 2);
  for (auto _ : state) {
    const double r = Parallel ? k::parallel::dot(x, y) : k::serial::dot(x, y);
    benchmark::DoNotOptimize(r);
  }
  state.SetBytesProcessed(static_cast<int64_t>(state.iterations() * 2 * n * sizeof(double)));
}

template <bool Parallel>
void BM_Axpy(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto x = random_vector(n, 1);
  auto y = random_vector(n, 2);
  for (auto _ : state) {
    if (Parallel)
      k::parallel::axpy(1e-3, x, y);
    else
      k::serial::axpy(1e-3, x, y);
    benchmark::ClobberMemory();
  }
}

template <bool Parallel>
void BM_WeightedSum(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto w = random_vector(n, 3), f = random_vector(n, 4);
  for (auto _ : state) {
    const double r = Parallel ? k::parallel::weighted_sum(w, f) : k::serial::weighted_sum(w, f);
    benchmark::DoNotOptimize(r);
  }
}

template <bool Parallel>
void BM_CirculantFill(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto col = random_vector(n, 5);
  std::vector<double> m(n * n);
  for (auto _ : state) {
    if (Parallel)
      k::parallel::circulant_fill(col, m);
    else
      k::serial::circulant_fill(col, m);
    benchmark::ClobberMemory();
  }
}

void BM_Rhs(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  auto grid = dplab::make_grid(n, 200.0);
  const auto prof = dplab::build_profile({3.0, 1.0});
  const auto u = dplab::sample_on_grid(prof, grid, 0.0);
  for (auto _ : state) benchmark::DoNotOptimize(dplab::dp_rhs(u, 1.0));
}

void BM_AssembleL(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  auto grid = dplab::make_grid(n, 100.0);
  const auto prof = dplab::build_profile({3.0, 1.0});
  for (auto _ : state) benchmark::DoNotOptimize(dplab::assemble_L(prof, grid));
}

}  // namespace

BENCHMARK(BM_Dot<false>)->Name("dot/serial")->Range(1 << 12, 1 << 20);
BENCHMARK(BM_Dot<true>)->Name("dot/parallel")->Range(1 << 12, 1 << 20);
BENCHMARK(BM_Axpy<false>)->Name("axpy/serial")->Range(1 << 12, 1 << 20);
BENCHMARK(BM_Axpy<true>)->Name("axpy/parallel")->Range(1 << 12, 1 << 20);
BENCHMARK(BM_WeightedSum<false>)->Name("weighted_sum/serial")->Range(1 << 12, 1 << 20);
BENCHMARK(BM_WeightedSum<true>)->Name("weighted_sum/parallel")->Range(1 << 12, 1 << 20);
BENCHMARK(BM_CirculantFill<false>)->Name("circulant_fill/serial")->Arg(512)->Arg(1024)->Arg(2048);
BENCHMARK(BM_CirculantFill<true>)->Name("circulant_fill/parallel")->Arg(512)->Arg(1024)->Arg(2048);
BENCHMARK(BM_Rhs)->Arg(1024)->Arg(4096)->Arg(16384);
BENCHMARK(BM_AssembleL)->Arg(512)->Arg(1024);

BENCHMARK_MAIN();
