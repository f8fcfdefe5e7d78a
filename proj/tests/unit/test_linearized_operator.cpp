#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "dplab/linearized_operator.hpp"

using namespace dplab;

namespace {

struct Setup {
  SolitonProfile profile;
  GridPtr grid;
  OperatorMatrix L;
};

Setup make_setup(SolitonParams p, int n, double period) {
  auto prof = build_profile(p);
  auto g = make_grid(n, period);
  // Small test boxes: accept a visible tail wrap.
  auto L = assemble_L(sample_on_grid(prof, g, 0.0, 1e-2), p);
  return {std::move(prof), g, std::move(L)};
}

}  // namespace

TEST(LinearizedOperator, SymmetricMatrix) {
  const auto s = make_setup({3.0, 1.0}, 256, 64.0);
  EXPECT_LT(s.L.symmetry_residual(), 1e-13);
  EXPECT_EQ(s.L.n, 256);
}

TEST(LinearizedOperator, ApplyMatchesSymbolForm) {
  // L y = -phi y - 2k (4 - d^2)^{-1} y + c (1 - d^2)(4 - d^2)^{-1} y
  const SolitonParams p{3.0, 1.0};
  const auto s = make_setup(p, 128, 64.0);
  const Field phi = sample_on_grid(s.profile, s.grid, 0.0, 1e-6);
  std::mt19937_64 rng(3);
  std::normal_distribution<double> nd;
  for (int trial = 0; trial < 5; ++trial) {
    Field y(s.grid);
    for (int k = 0; k < 128; ++k) y[k] = nd(rng);
    y = dealias(y);
    Field py(s.grid);
    for (int k = 0; k < 128; ++k) py[k] = phi[k] * y[k];
    const Field w = helmholtz_inverse(y, 4.0);
    const Field expected = -1.0 * py - 2.0 * p.kappa * w + p.c * (w - derivative(w, 2));
    EXPECT_LT(max_abs(s.L.apply(y) - expected), 1e-11 * (1.0 + max_abs(expected)));
  }
}

TEST(LinearizedOperator, TranslationModeInKernel) {
  const auto s = make_setup({5.0, 1.0}, 1024, 100.0);
  const Field dphi = derivative(sample_on_grid(s.profile, s.grid, 0.0), 1);
  EXPECT_LT(max_abs(s.L.apply(dphi)), 1e-9 * max_abs(dphi));
}

TEST(LinearizedOperator, QuadraticFormMatchesApply) {
  const auto s = make_setup({3.0, 1.0}, 128, 64.0);
  const Field y = Field::from_function(s.grid, [](double x) { return std::exp(-x * x / 9.0) * std::cos(x); });
  EXPECT_NEAR(s.L.quadratic_form(y), l2_inner(s.L.apply(y), y), 1e-12);
}

TEST(LinearizedOperator, EigensolveReconstructs) {
  const auto s = make_setup({3.0, 1.0}, 64, 40.0);
  const auto e = symmetric_eigensolve(s.L);
  ASSERT_EQ(e.values.size(), 64u);
  for (std::size_t i = 1; i < e.values.size(); ++i) EXPECT_LE(e.values[i - 1], e.values[i]);
  for (int j : {0, 1, 10, 63}) {
    const Field v(s.grid, e.vector(j));
    const Field Lv = s.L.apply(v);
    EXPECT_LT(max_abs(Lv - e.values[static_cast<std::size_t>(j)] * v), 1e-10 * (1.0 + std::abs(e.values[j])));
  }
  const auto low = lowest_eigenpairs(s.L.data, 64, 3);
  ASSERT_EQ(low.values.size(), 3u);
  for (int j = 0; j < 3; ++j) EXPECT_NEAR(low.values[j], e.values[j], 1e-11);
}

TEST(LinearizedOperator, ConstrainedEigenvalueOracle) {
  // Constraining against the lowest eigenvectors shifts the minimum to the
  // next eigenvalue.
  const auto s = make_setup({3.0, 1.0}, 64, 40.0);
  const auto e = symmetric_eigensolve(s.L);
  std::vector<Field> one{Field(s.grid, e.vector(0))};
  EXPECT_NEAR(constrained_min_eigenvalue(s.L, one), e.values[1], 1e-10);
  std::vector<Field> two{Field(s.grid, e.vector(0)), Field(s.grid, e.vector(1))};
  EXPECT_NEAR(constrained_min_eigenvalue(s.L, two), e.values[2], 1e-10);
  // Non-orthonormal spanning set of the same subspace gives the same answer.
  std::vector<Field> mixed{two[0] + two[1], 3.0 * two[0] - two[1]};
  EXPECT_NEAR(constrained_min_eigenvalue(s.L, mixed), e.values[2], 1e-10);
}

TEST(LinearizedOperator, CollinearConstraintsThrow) {
  const auto s = make_setup({3.0, 1.0}, 64, 40.0);
  const Field v = Field::from_function(s.grid, [](double x) { return std::exp(-x * x); });
  std::vector<Field> c{v, 2.0 * v};
  EXPECT_THROW(constrained_min_eigenvalue(s.L, c), std::runtime_error);
}

TEST(LinearizedOperator, TranslationModeAdmissibleWithZeroEnergy) {
  // phi_x is S-orthogonal to phi and annihilated by L, so the Rayleigh
  // quotient restricted to the phi-constraint vanishes on it.
  const auto s = make_setup({3.0, 1.0}, 512, 100.0);
  const Field phi = sample_on_grid(s.profile, s.grid, 0.0);
  const Field dphi = derivative(phi, 1);
  EXPECT_NEAR(s_inner(dphi, phi), 0.0, 1e-13);
  EXPECT_NEAR(s.L.quadratic_form(dphi) / l2_inner(dphi, dphi), 0.0, 1e-9);
}

TEST(LinearizedOperator, SpectralReportStructure) {
  const auto s = make_setup({3.0, 1.0}, 512, 100.0);
  const auto r = eigen_report(s.L, s.profile);
  EXPECT_EQ(r.neg_count, 1);
  EXPECT_LT(r.neg_eigenvalue, 0.0);
  EXPECT_LT(std::abs(r.kernel_eigenvalue), 1e-8 * r.operator_norm);
  EXPECT_GT(r.kernel_overlap, 0.9999);
  EXPECT_GT(r.theta, 0.0);
  EXPECT_GT(r.ess_gap_proxy, 0.0);
  // chi is normalized in the grid L2 norm
  double n2 = 0.0;
  for (double v : r.neg_eigenvector) n2 += v * v * s.grid->spacing();
  EXPECT_NEAR(n2, 1.0, 1e-10);
  EXPECT_NEAR(r.theta, constrained_theta(s.L, s.profile), 1e-12);
}

TEST(LinearizedOperator, CoercivityConstraints) {
  const auto s = make_setup({3.0, 1.0}, 512, 100.0);
  const auto c = coercivity_constraints(s.profile, s.grid);
  ASSERT_EQ(c.size(), 2u);
  const Field phi = sample_on_grid(s.profile, s.grid, 0.0, 1e-6);
  const Field y = Field::from_function(s.grid, [](double x) { return std::sin(x) * std::exp(-x * x / 20); });
  // (y, phi)_S equals the Euclidean pairing with the first constraint.
  EXPECT_NEAR(l2_inner(y, c[0]), s_inner(y, phi), 1e-12);
  EXPECT_NEAR(l2_inner(y, c[1]), s_inner(y, derivative(phi, 1)), 1e-12);
}
