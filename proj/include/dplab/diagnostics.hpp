#pragma once

// Monitoring functionals along N-soliton trajectories: the monotone weight
// psi, localized momenta I_j, and the a priori sup-norm and slope bounds.

#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "dplab/modulation.hpp"
#include "dplab/spectral_grid.hpp"

namespace dplab {

/// Upper bound 1/2 min{ sqrt(1 - 2 kappa/c_1), c_1 - 2 kappa, c_{j+1} - c_j }
/// for the separation constant sigma0.
double sigma0_upper_bound(std::span<const double> speeds, double kappa);

struct WeightConfig {
  double B = 4.0;
  double sigma0 = 0.0;
  double gamma0 = 0.0;

  /// sigma0 defaults to half of sigma0_upper_bound; gamma0 = min(1/(8B), sigma0/8).
  static WeightConfig derive(std::span<const double> speeds, double kappa, double B,
                             std::optional<double> sigma0 = std::nullopt);
  void validate(std::span<const double> speeds, double kappa) const;
};

struct PsiDerivatives {
  double value = 0.0;
  double d[4] = {0.0, 0.0, 0.0, 0.0};  // psi', psi'', psi''', psi''''
};

/// psi(x) = (2/pi) arctan(exp(x/B)). Requires B > 2.
double weight_psi(double x, double B);
PsiDerivatives weight_psi_derivatives(double x, double B);

/// 1/2 int psi(x - m) (4 w^2 + 5 w_x^2 + w_xx^2) dx with w = (4 - d^2)^{-1} u;
/// x - m is taken as the periodic representative in [-P/2, P/2).
double localized_momentum(const Field& u, double m, double B);

struct PsiBoundsReport {
  double B = 0.0;
  double max_d2_ratio = 0.0;       // max psi''/psi', bound 1/B
  double max_abs_d3_ratio = 0.0;   // max |psi'''|/psi', bound 1/B^2
  double max_abs_d4_ratio = 0.0;   // max |psi''''|/psi', bound 3/B^3
  double decay_constant[4] = {0.0, 0.0, 0.0, 0.0};  // max |psi^(k)| e^{|x|/B}
  bool d2_ok = false;
  bool d3_ok = false;
  bool d4_ok = false;
  bool ok() const { return d2_ok && d3_ok && d4_ok; }
};

/// Samples [-40B, 40B] densely and checks the derivative bounds of psi.
PsiBoundsReport psi_derivative_bounds_check(double B, int samples = 160001);

struct MomentumSeries {
  int index = 0;  // j (1-based), j >= 2
  std::vector<double> t;
  std::vector<double> value;
  std::vector<double> increase;  // I_j(t) - I_j(0)
  double max_increase = 0.0;
};

struct MonotonicityReport {
  std::vector<MomentumSeries> series;
  double threshold = 0.0;
  double max_increase = 0.0;
  /// max_increase * exp(L / (4B)), the empirical analogue of K_3.
  double fitted_constant = 0.0;
  bool pass = true;
};

/// I_j(t) - I_j(0) with m_j = (x_{j-1} + x_j)/2 from the tracked frames.
/// Passes when every increase stays below `threshold`.
MonotonicityReport monotonicity_check(std::span<const TrackedFrame> frames, std::span<const Field> states,
                                      double B, double threshold, double separation);

struct AprioriReport {
  // |g|_inf <= |g|_2^{2/3} (1 + 4k/3 + sqrt2 |g|_2^{2/3} + 2|f|_inf + 2|f'|_inf), g = u - f
  double linfty_lhs = 0.0;
  double linfty_rhs = 0.0;
  bool linfty_ok = false;
  // max (|u_x| - |u + 2k/3|) <= 1e-6 (|u|_inf + kappa)
  double slope_excess = 0.0;
  double slope_tolerance = 0.0;
  bool slope_ok = false;
  // |u|_inf <= 2 (1 + sqrt2) |u0|_2 + 4k/3
  double sup_lhs = 0.0;
  double sup_rhs = 0.0;
  bool sup_ok = false;
  bool all_ok() const { return linfty_ok && slope_ok && sup_ok; }
};

AprioriReport apriori_checks(const Field& u, const Field& u0, const Field& f, double kappa);

struct StabilityRecord {
  double t = 0.0;
  double train_error = 0.0;
  /// I_1 is the total momentum S(u); I_j for j >= 2 uses the weight at m_j.
  std::vector<double> momenta;
  double s_drift = 0.0;  // relative
  double h_drift = 0.0;  // relative
  AprioriReport apriori;
  std::vector<double> speeds;
  std::vector<double> positions;
  double residual_norm = 0.0;
};

/// Header plus one row per record.
void write_records_csv(std::ostream& os, std::span<const StabilityRecord> records, int count);

}  // namespace dplab
