#include "dplab/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <iomanip>
#include <numbers>
#include <stdexcept>

#include "dplab/kernels.hpp"
#include "dplab/soliton_profile.hpp"

namespace dplab {

double sigma0_upper_bound(std::span<const double> speeds, double kappa) {
  if (speeds.empty()) throw std::invalid_argument("sigma0_upper_bound: no speeds");
  double m = std::min(std::sqrt(1.0 - 2.0 * kappa / speeds[0]), speeds[0] - 2.0 * kappa);
  for (std::size_t j = 1; j < speeds.size(); ++j) m = std::min(m, speeds[j] - speeds[j - 1]);
  return 0.5 * m;
}

WeightConfig WeightConfig::derive(std::span<const double> speeds, double kappa, double B,
                                  std::optional<double> sigma0) {
  WeightConfig w;
  w.B = B;
  w.sigma0 = sigma0 ? *sigma0 : 0.5 * sigma0_upper_bound(speeds, kappa);
  w.gamma0 = std::min(1.0 / (8.0 * B), w.sigma0 / 8.0);
  w.validate(speeds, kappa);
  return w;
}

void WeightConfig::validate(std::span<const double> speeds, double kappa) const {
  if (!(B > 2.0)) throw std::invalid_argument("weight: B must exceed 2");
  const double bound = sigma0_upper_bound(speeds, kappa);
  if (!(sigma0 > 0.0) || !(sigma0 < bound))
    throw std::invalid_argument("weight: sigma0 must lie in (0, " + std::to_string(bound) + ")");
}

double weight_psi(double x, double B) {
  if (!(B > 2.0)) throw std::invalid_argument("weight_psi: B must exceed 2");
  const double y = x / B;
  // For y > 0 use 1 - (2/pi) arctan(e^{-y}); exp never overflows this way.
  if (y > 0.0) return 1.0 - 2.0 / std::numbers::pi * std::atan(std::exp(-y));
  return 2.0 / std::numbers::pi * std::atan(std::exp(y));
}

PsiDerivatives weight_psi_derivatives(double x, double B) {
  PsiDerivatives p;
  p.value = weight_psi(x, B);
  const double y = x / B;
  const double e = std::exp(-std::abs(y));
  const double s = 2.0 * e / (1.0 + e * e);  // sech y
  const double t = std::tanh(y);
  const double k = 1.0 / (std::numbers::pi * B);
  p.d[0] = k * s;
  p.d[1] = -k / B * s * t;
  p.d[2] = k / (B * B) * (s * t * t - s * s * s);
  p.d[3] = k / (B * B * B) * (5.0 * s * s * s * t - s * t * t * t);
  return p;
}

double localized_momentum(const Field& u, double m, double B) {
  const Field w = helmholtz_inverse(u, 4.0);
  const Field wx = derivative(w, 1);
  const Field wxx = derivative(w, 2);
  const PeriodicGrid& g = u.grid();
  std::vector<double> weight(static_cast<std::size_t>(u.size()));
  std::vector<double> density(static_cast<std::size_t>(u.size()));
  for (int k = 0; k < u.size(); ++k) {
    const auto i = static_cast<std::size_t>(k);
    weight[i] = weight_psi(g.wrap(g.node(k) - m), B);
    density[i] = 4.0 * w[k] * w[k] + 5.0 * wx[k] * wx[k] + wxx[k] * wxx[k];
  }
  return 0.5 * g.spacing() * kernels::parallel::weighted_sum(weight, density);
}

PsiBoundsReport psi_derivative_bounds_check(double B, int samples) {
  if (!(B > 2.0)) throw std::invalid_argument("psi bounds: B must exceed 2");
  PsiBoundsReport r;
  r.B = B;
  r.max_d2_ratio = -std::numeric_limits<double>::infinity();
  const double lo = -40.0 * B;
  const double step = 80.0 * B / (samples - 1);
  for (int i = 0; i < samples; ++i) {
    const double x = lo + step * i;
    const auto p = weight_psi_derivatives(x, B);
    r.max_d2_ratio = std::max(r.max_d2_ratio, p.d[1] / p.d[0]);
    r.max_abs_d3_ratio = std::max(r.max_abs_d3_ratio, std::abs(p.d[2]) / p.d[0]);
    r.max_abs_d4_ratio = std::max(r.max_abs_d4_ratio, std::abs(p.d[3]) / p.d[0]);
    for (int k = 0; k < 4; ++k)
      r.decay_constant[k] = std::max(r.decay_constant[k], std::abs(p.d[k]) * std::exp(std::abs(x) / B));
  }
  const double slack = 1e-12;
  r.d2_ok = r.max_d2_ratio <= 1.0 / B * (1.0 + slack);
  r.d3_ok = r.max_abs_d3_ratio <= 1.0 / (B * B) * (1.0 + slack);
  r.d4_ok = r.max_abs_d4_ratio <= 3.0 / (B * B * B) * (1.0 + slack);
  return r;
}

MonotonicityReport monotonicity_check(std::span<const TrackedFrame> frames, std::span<const Field> states,
                                      double B, double threshold, double separation) {
  if (frames.size() != states.size())
    throw std::invalid_argument("monotonicity_check: frame and state counts differ (tracking gap)");
  MonotonicityReport r;
  r.threshold = threshold;
  if (frames.empty()) return r;
  const std::size_t N = frames.front().state.params.size();
  for (std::size_t j = 1; j < N; ++j) {
    MomentumSeries s;
    s.index = static_cast<int>(j + 1);
    for (std::size_t i = 0; i < frames.size(); ++i) {
      const auto& pos = frames[i].state.params.positions;
      const double m = 0.5 * (pos[j - 1] + pos[j]);
      s.t.push_back(frames[i].t);
      s.value.push_back(localized_momentum(states[i], m, B));
      s.increase.push_back(s.value.back() - s.value.front());
      s.max_increase = std::max(s.max_increase, s.increase.back());
    }
    r.max_increase = std::max(r.max_increase, s.max_increase);
    r.series.push_back(std::move(s));
  }
  r.fitted_constant = r.max_increase * std::exp(separation / (4.0 * B));
  r.pass = r.max_increase <= threshold;
  return r;
}

AprioriReport apriori_checks(const Field& u, const Field& u0, const Field& f, double kappa) {
  require_same_grid(u, f);
  AprioriReport r;
  const Field g = u - f;
  const double gl2 = l2_norm(g);
  const double G = std::cbrt(gl2 * gl2);
  r.linfty_lhs = max_abs(g);
  r.linfty_rhs = G * (1.0 + 4.0 * kappa / 3.0 + std::numbers::sqrt2 * G + 2.0 * max_abs(f) +
                      2.0 * max_abs(derivative(f, 1)));
  r.linfty_ok = r.linfty_lhs <= r.linfty_rhs;

  const Field ux = derivative(u, 1);
  r.slope_excess = -std::numeric_limits<double>::infinity();
  for (int k = 0; k < u.size(); ++k)
    r.slope_excess = std::max(r.slope_excess, std::abs(ux[k]) - std::abs(u[k] + 2.0 * kappa / 3.0));
  r.slope_tolerance = 1e-6 * (max_abs(u) + kappa);
  r.slope_ok = r.slope_excess <= r.slope_tolerance;

  r.sup_lhs = max_abs(u);
  r.sup_rhs = 2.0 * (1.0 + std::numbers::sqrt2) * l2_norm(u0) + 4.0 * kappa / 3.0;
  r.sup_ok = r.sup_lhs <= r.sup_rhs;
  return r;
}

void write_records_csv(std::ostream& os, std::span<const StabilityRecord> records, int count) {
  os << "t,train_error";
  for (int j = 1; j <= count; ++j) os << ",I_" << j;
  os << ",S_drift,H_drift,linfty_ok,slope_ok,sup_ok,linfty_lhs,linfty_rhs,slope_excess,sup_lhs,sup_rhs";
  for (int j = 1; j <= count; ++j) os << ",c_" << j << ",x_" << j;
  os << ",residual_norm\n";
  os << std::setprecision(17);
  for (const auto& r : records) {
    os << r.t << ',' << r.train_error;
    for (double v : r.momenta) os << ',' << v;
    os << ',' << r.s_drift << ',' << r.h_drift << ',' << int(r.apriori.linfty_ok) << ','
       << int(r.apriori.slope_ok) << ',' << int(r.apriori.sup_ok) << ',' << r.apriori.linfty_lhs << ','
       << r.apriori.linfty_rhs << ',' << r.apriori.slope_excess << ',' << r.apriori.sup_lhs << ','
       << r.apriori.sup_rhs;
    for (std::size_t j = 0; j < r.speeds.size(); ++j) os << ',' << r.speeds[j] << ',' << r.positions[j];
    os << ',' << r.residual_norm << '\n';
  }
}

}  // namespace dplab
