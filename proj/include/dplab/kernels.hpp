#pragma once

// Data-parallel inner loops. Every kernel has a plain serial reference in
// `kernels::serial` and an OpenMP version in `kernels::parallel`; the library
// calls the parallel ones, tests and the benchmark compare the two.
//
// Reductions in `parallel` sum fixed-size blocks and then combine the block
// partials in order, so their rounding does not depend on the thread count.

#include <cstddef>
#include <span>
#include <vector>

namespace dplab::kernels {

/// Loops shorter than this run on the calling thread.
inline constexpr std::size_t kParallelThreshold = 4096;
/// Block length of the deterministic reductions.
inline constexpr std::size_t kReductionBlock = 512;

namespace serial {

void axpy(double a, std::span<const double> x, std::span<double> y);
double sum(std::span<const double> x);
double dot(std::span<const double> x, std::span<const double> y);
void square(std::span<const double> in, std::span<double> out);
/// out = a*x + b*y elementwise.
void combine(double a, std::span<const double> x, double b, std::span<const double> y,
             std::span<double> out);
/// Fills the dense n x n row-major matrix with entries column[(i - j) mod n].
void circulant_fill(std::span<const double> column, std::span<double> matrix);
/// Weighted quadrature sum of w[i] * f[i].
double weighted_sum(std::span<const double> w, std::span<const double> f);

template <typename F>
void tabulate(std::span<const double> x, std::span<double> out, F&& f) {
  for (std::size_t i = 0; i < x.size(); ++i) out[i] = f(x[i]);
}

}  // namespace serial

namespace parallel {

void axpy(double a, std::span<const double> x, std::span<double> y);
double sum(std::span<const double> x);
double dot(std::span<const double> x, std::span<const double> y);
void square(std::span<const double> in, std::span<double> out);
void combine(double a, std::span<const double> x, double b, std::span<const double> y,
             std::span<double> out);
void circulant_fill(std::span<const double> column, std::span<double> matrix);
double weighted_sum(std::span<const double> w, std::span<const double> f);

template <typename F>
void tabulate(std::span<const double> x, std::span<double> out, F&& f) {
  const auto n = static_cast<std::ptrdiff_t>(x.size());
#pragma omp parallel for schedule(static) if (x.size() >= kParallelThreshold)
  for (std::ptrdiff_t i = 0; i < n; ++i) out[static_cast<std::size_t>(i)] = f(x[static_cast<std::size_t>(i)]);
}

}  // namespace parallel

/// Number of threads the parallel kernels would use (1 without OpenMP).
int max_threads();

}  // namespace dplab::kernels
