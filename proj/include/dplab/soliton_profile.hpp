#pragma once

// Smooth solitary waves of the DP equation, built from the first integral
//
//   1/2 (c - phi)^2 phi_x^2 = phi^2 F(phi),
//   F(phi) = 1/2 phi^2 - (c - 2 kappa/3) phi + 1/2 c^2 - kappa c.

#include <limits>
#include <span>
#include <vector>

#include "dplab/spectral_grid.hpp"

namespace dplab {

struct SolitonParams {
  double c = 0.0;
  double kappa = 0.0;

  /// Throws std::invalid_argument unless c > 2 kappa > 0.
  void validate() const;
};

/// F(phi) of the first integral.
double amplitude_polynomial(double phi, const SolitonParams& p);

/// Smaller positive root of F: the soliton height.
double peak_amplitude(const SolitonParams& p);

/// Larger root of F.
double upper_root(const SolitonParams& p);

/// sqrt(1 - 2 kappa / c).
double decay_rate(const SolitonParams& p);

/// Inverse of peak_amplitude in c at fixed kappa.
double speed_from_amplitude(double amplitude, double kappa);

/// Tabulated profile on [0, X_tail] with uniform spacing plus an exponential
/// tail A exp(-nu x) beyond. Values in between are reconstructed with quintic
/// Hermite interpolation from (phi, phi_x, phi_xx) at the nodes; the two
/// derivatives are exact functions of phi.
class SolitonProfile {
 public:
  SolitonProfile(SolitonParams params, double spacing, std::vector<double> phi,
                 std::vector<double> dphi, std::vector<double> ddphi, double fitted_decay);

  const SolitonParams& params() const { return params_; }
  double amplitude() const { return phi_.front(); }
  double decay_rate() const { return nu_; }
  /// Slope of log(phi) fitted over the last decade of the table.
  double fitted_decay_rate() const { return fitted_nu_; }
  double tail_coeff() const { return tail_coeff_; }
  double spacing() const { return h_; }
  double tail_start() const { return h_ * static_cast<double>(phi_.size() - 1); }
  int table_size() const { return static_cast<int>(phi_.size()); }
  double table_x(int i) const { return h_ * i; }
  std::span<const double> table_phi() const { return phi_; }
  std::span<const double> table_dphi() const { return dphi_; }

  double evaluate(double x) const;
  double evaluate_dx(double x) const;

 private:
  SolitonParams params_;
  double h_;
  std::vector<double> phi_;
  std::vector<double> dphi_;
  std::vector<double> ddphi_;
  double nu_;
  double fitted_nu_;
  double tail_coeff_;
};

struct ProfileOptions {
  /// Table ends once phi < tol * amplitude.
  double tol = 1e-10;
  /// Uniform table spacing in x.
  double spacing = 0.02;
};

/// Builds phi_c by adaptive quadrature of x(phi) with the peak
/// singularity removed by phi = phi_max - tau^2 (and phi = exp(-v) in the
/// tail), inverted on a uniform x table by Newton iteration.
SolitonProfile build_profile(const SolitonParams& params, const ProfileOptions& options = {});
SolitonProfile build_profile(const SolitonParams& params, double tol);

/// Exact (phi_x, phi_xx) for x > 0 as functions of the profile value.
struct ProfileSlope {
  double dx;
  double dxx;
};
ProfileSlope profile_slope(double phi, const SolitonParams& p);

/// Ratio phi(P/2) / amplitude, the size of the wrapped tail on the grid.
double tail_wrap_ratio(const SolitonProfile& profile, const PeriodicGrid& grid);

/// Samples phi(x_k - center) using the nearest periodic image. Throws
/// std::domain_error if the wrapped tail exceeds wrap_tolerance * amplitude.
Field sample_on_grid(const SolitonProfile& profile, const GridPtr& grid, double center,
                     double wrap_tolerance = 1e-8);
/// Same for phi_x.
Field sample_dx_on_grid(const SolitonProfile& profile, const GridPtr& grid, double center,
                        double wrap_tolerance = 1e-8);

}  // namespace dplab
