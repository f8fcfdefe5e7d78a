#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <vector>

#include "dplab/kernels.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

namespace k = dplab::kernels;

namespace {

std::vector<double> random_vector(std::size_t n, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  std::vector<double> v(n);
  for (auto& x : v) x = dist(rng);
  return v;
}

std::size_t random_size(std::mt19937_64& rng) {
  // Mix of sizes below and above the parallel threshold and block size.
  std::uniform_int_distribution<std::size_t> d(1, 3 * k::kParallelThreshold);
  return d(rng);
}

}  // namespace

TEST(Kernels, SerialAndParallelAgree) {
  std::mt19937_64 rng(1234);
  for (int trial = 0; trial < 150; ++trial) {
    const std::size_t n = random_size(rng);
    const auto x = random_vector(n, rng);
    const auto y = random_vector(n, rng);
    const double scale = static_cast<double>(n);

    EXPECT_NEAR(k::serial::sum(x), k::parallel::sum(x), 1e-13 * scale);
    EXPECT_NEAR(k::serial::dot(x, y), k::parallel::dot(x, y), 1e-13 * scale);
    EXPECT_NEAR(k::serial::weighted_sum(x, y), k::parallel::weighted_sum(x, y), 1e-13 * scale);

    auto ys = y, yp = y;
    k::serial::axpy(0.37, x, ys);
    k::parallel::axpy(0.37, x, yp);
    EXPECT_EQ(ys, yp);

    std::vector<double> s1(n), s2(n);
    k::serial::square(x, s1);
    k::parallel::square(x, s2);
    EXPECT_EQ(s1, s2);

    k::serial::combine(2.0, x, -0.5, y, s1);
    k::parallel::combine(2.0, x, -0.5, y, s2);
    EXPECT_EQ(s1, s2);

    k::serial::tabulate(x, s1, [](double v) { return std::sin(v); });
    k::parallel::tabulate(x, s2, [](double v) { return std::sin(v); });
    EXPECT_EQ(s1, s2);
  }
}

TEST(Kernels, CirculantFill) {
  std::mt19937_64 rng(5);
  for (std::size_t n : {1u, 7u, 64u, 130u}) {
    const auto col = random_vector(n, rng);
    std::vector<double> a(n * n), b(n * n);
    k::serial::circulant_fill(col, a);
    k::parallel::circulant_fill(col, b);
    EXPECT_EQ(a, b);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) EXPECT_EQ(a[i * n + j], col[(i + n - j) % n]);
  }
}

TEST(Kernels, ReductionIndependentOfThreadCount) {
  std::mt19937_64 rng(77);
  const auto x = random_vector(100000, rng);
  const auto y = random_vector(100000, rng);
#ifdef _OPENMP
  const int saved = omp_get_max_threads();
  omp_set_num_threads(1);
  const double d1 = k::parallel::dot(x, y);
  const double s1 = k::parallel::sum(x);
  omp_set_num_threads(4);
  const double d4 = k::parallel::dot(x, y);
  const double s4 = k::parallel::sum(x);
  omp_set_num_threads(saved);
  EXPECT_EQ(d1, d4);
  EXPECT_EQ(s1, s4);
#else
  EXPECT_EQ(k::parallel::dot(x, y), k::parallel::dot(x, y));
#endif
}

TEST(Kernels, EmptyInputs) {
  std::vector<double> e;
  EXPECT_EQ(k::parallel::sum(e), 0.0);
  EXPECT_EQ(k::serial::sum(e), 0.0);
  EXPECT_EQ(k::parallel::dot(e, e), 0.0);
  EXPECT_GE(k::max_threads(), 1);
}
