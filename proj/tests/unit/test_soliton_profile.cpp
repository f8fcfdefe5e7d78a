#include <gtest/gtest.h>

#include <cmath>

#include "dplab/soliton_profile.hpp"

using namespace dplab;

namespace {

// Independent oracle: integrate phi'' = G(phi) from the crest with classical
// RK4 on a fine step, where G follows from differentiating the first
// integral. Shares no code with the quadrature construction.
double oracle_phi(const SolitonParams& p, double x_target) {
  const double c = p.c, k = p.kappa;
  const double b = c - 2.0 * k / 3.0;
  const double phi_max = b - std::sqrt(2.0 * k / 3.0 * (c + 2.0 * k / 3.0));
  auto G = [&](double f) {
    const double F = 0.5 * f * f - b * f + 0.5 * c * c - k * c;
    const double dF = f - b;
    return (2.0 * f * F + f * f * dF) / ((c - f) * (c - f)) + 2.0 * f * f * F / std::pow(c - f, 3);
  };
  const int steps = static_cast<int>(std::ceil(x_target / 1e-3));
  const double h = x_target / steps;
  double f = phi_max, v = 0.0;
  for (int i = 0; i < steps; ++i) {
    const double k1f = v, k1v = G(f);
    const double k2f = v + 0.5 * h * k1v, k2v = G(f + 0.5 * h * k1f);
    const double k3f = v + 0.5 * h * k2v, k3v = G(f + 0.5 * h * k2f);
    const double k4f = v + h * k3v, k4v = G(f + h * k3f);
    f += h / 6.0 * (k1f + 2 * k2f + 2 * k3f + k4f);
    v += h / 6.0 * (k1v + 2 * k2v + 2 * k3v + k4v);
  }
  return f;
}

double first_integral_residual(double phi, double dphi, const SolitonParams& p) {
  return 0.5 * (p.c - phi) * (p.c - phi) * dphi * dphi - phi * phi * amplitude_polynomial(phi, p);
}

const SolitonParams kPairs[] = {{3, 1}, {5, 1}, {2.5, 1}, {4, 0.5}};

}  // namespace

TEST(SolitonParams, Validation) {
  EXPECT_THROW((SolitonParams{2.0, 1.0}.validate()), std::invalid_argument);
  EXPECT_THROW((SolitonParams{1.0, 1.0}.validate()), std::invalid_argument);
  EXPECT_THROW((SolitonParams{3.0, 0.0}.validate()), std::invalid_argument);
  EXPECT_NO_THROW((SolitonParams{3.0, 1.0}.validate()));
  EXPECT_THROW(build_profile({2.0, 1.0}), std::invalid_argument);
}

TEST(SolitonProfile, PeakAmplitude) {
  const SolitonParams p{3.0, 1.0};
  // Smaller root of F: (c - 2k/3) - sqrt(2k/3 (c + 2k/3)).
  const double expected = (3.0 - 2.0 / 3.0) - std::sqrt(2.0 / 3.0 * (3.0 + 2.0 / 3.0));
  EXPECT_NEAR(peak_amplitude(p), expected, 1e-14);
  EXPECT_NEAR(peak_amplitude(p), 0.7698614134, 1e-9);
  EXPECT_NEAR(peak_amplitude(p), 0.76984, 1e-4);
  EXPECT_NEAR(amplitude_polynomial(peak_amplitude(p), p), 0.0, 1e-14);
  EXPECT_NEAR(amplitude_polynomial(upper_root(p), p), 0.0, 1e-13);
  EXPECT_LT(peak_amplitude(p), p.c);
}

TEST(SolitonProfile, AmplitudeNearThresholdIsStable) {
  // c -> 2 kappa: the amplitude vanishes; the product-of-roots form keeps
  // full relative accuracy.
  const SolitonParams p{2.0 + 1e-9, 1.0};
  const double a = peak_amplitude(p);
  EXPECT_GT(a, 0.0);
  EXPECT_NEAR(amplitude_polynomial(a, p) / (p.c * (p.c - 2.0)), 0.0, 1e-6);
}

TEST(SolitonProfile, DecayRate) {
  EXPECT_NEAR(decay_rate({3.0, 1.0}), std::sqrt(1.0 / 3.0), 1e-15);
  EXPECT_NEAR(decay_rate({4.0, 0.5}), std::sqrt(0.75), 1e-15);
}

TEST(SolitonProfile, SpeedFromAmplitudeInverts) {
  for (const auto& p : kPairs) EXPECT_NEAR(speed_from_amplitude(peak_amplitude(p), p.kappa), p.c, 1e-12 * p.c);
  for (double c = 2.05; c < 10.0; c += 0.37) EXPECT_NEAR(speed_from_amplitude(peak_amplitude({c, 1.0}), 1.0), c, 1e-11);
  EXPECT_THROW(speed_from_amplitude(0.0, 1.0), std::invalid_argument);
}

TEST(SolitonProfile, MatchesIndependentOdeOracle) {
  for (const auto& p : kPairs) {
    const auto prof = build_profile(p);
    for (double x : {0.5, 1.0, 2.0, 5.0, 10.0})
      EXPECT_NEAR(prof.evaluate(x), oracle_phi(p, x), 1e-9 * prof.amplitude()) << "c=" << p.c << " x=" << x;
  }
}

TEST(SolitonProfile, EvenStrictlyDecreasingPositive) {
  for (const auto& p : kPairs) {
    const auto prof = build_profile(p);
    EXPECT_DOUBLE_EQ(prof.evaluate(0.0), prof.amplitude());
    double prev = prof.amplitude();
    for (double x = 0.013; x < prof.tail_start() + 20.0; x += 0.013) {
      const double v = prof.evaluate(x);
      EXPECT_DOUBLE_EQ(v, prof.evaluate(-x));
      EXPECT_GT(v, 0.0);
      EXPECT_LT(v, prev);
      prev = v;
    }
  }
}

TEST(SolitonProfile, FirstIntegralAtTableNodes) {
  for (const auto& p : kPairs) {
    const auto prof = build_profile(p);
    const auto phi = prof.table_phi();
    const auto dphi = prof.table_dphi();
    double worst = 0.0;
    for (std::size_t i = 0; i < phi.size(); ++i)
      worst = std::max(worst, std::abs(first_integral_residual(phi[i], dphi[i], p)));
    EXPECT_LT(worst, 1e-12 * std::pow(p.c, 4));
  }
}

TEST(SolitonProfile, InterpolantBetweenNodesSatisfiesFirstIntegral) {
  const SolitonParams p{3.0, 1.0};
  const auto prof = build_profile(p);
  double worst = 0.0;
  for (double x = 0.005; x < prof.tail_start(); x += 0.0137) {
    const double v = prof.evaluate(x);
    worst = std::max(worst, std::abs(first_integral_residual(v, prof.evaluate_dx(x), p)));
  }
  EXPECT_LT(worst, 1e-8 * std::pow(p.c, 4));
}

TEST(SolitonProfile, SlopeFromValue) {
  const SolitonParams p{5.0, 1.0};
  const auto prof = build_profile(p);
  for (double x : {0.3, 1.7, 4.0, 9.0}) {
    const double v = prof.evaluate(x);
    const auto s = profile_slope(v, p);
    EXPECT_NEAR(s.dx, prof.evaluate_dx(x), 1e-8);
    EXPECT_LT(s.dx, 0.0);
    // phi_xx from a centred difference of phi_x
    const double h = 1e-4;
    EXPECT_NEAR(s.dxx, (prof.evaluate_dx(x + h) - prof.evaluate_dx(x - h)) / (2 * h), 1e-6);
  }
}

TEST(SolitonProfile, TailDecayAndContinuity) {
  for (const auto& p : kPairs) {
    const auto prof = build_profile(p);
    EXPECT_NEAR(prof.fitted_decay_rate(), decay_rate(p), 1e-2 * decay_rate(p));
    const double X = prof.tail_start();
    EXPECT_NEAR(prof.evaluate(X - 1e-12), prof.evaluate(X + 1e-12), 1e-14 * prof.amplitude());
    EXPECT_LT(prof.evaluate(X), 1e-9 * prof.amplitude());
    EXPECT_NEAR(prof.evaluate(X + 5.0) / prof.evaluate(X), std::exp(-5.0 * decay_rate(p)), 1e-12);
  }
}

TEST(SolitonProfile, ToleranceOption) {
  const SolitonParams p{3.0, 1.0};
  const auto coarse = build_profile(p, 1e-7);
  const auto fine = build_profile(p, 1e-12);
  EXPECT_LT(coarse.tail_start(), fine.tail_start());
  EXPECT_THROW(build_profile(p, 1e-3), std::invalid_argument);
  EXPECT_THROW(build_profile(p, 0.0), std::invalid_argument);
}

TEST(SolitonProfile, GridSamplingAndWrapGuard) {
  const SolitonParams p{3.0, 1.0};
  const auto prof = build_profile(p);
  auto g = make_grid(512, 100.0);
  const Field f = sample_on_grid(prof, g, 10.0);
  for (int k = 0; k < g->size(); k += 37) EXPECT_DOUBLE_EQ(f[k], prof.evaluate(g->wrap(g->node(k) - 10.0)));
  // Centre near the box edge: nearest periodic image is used.
  const Field w = sample_on_grid(prof, g, 49.0);
  EXPECT_NEAR(w[0], prof.evaluate(1.0), 1e-15);
  // Box too short for the tail.
  auto small = make_grid(128, 20.0);
  EXPECT_GT(tail_wrap_ratio(prof, *small), 1e-8);
  EXPECT_THROW(sample_on_grid(prof, small, 0.0), std::domain_error);
  EXPECT_NO_THROW(sample_on_grid(prof, small, 0.0, 1e-2));
}
