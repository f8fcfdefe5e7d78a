#pragma once

#include "dplab/soliton_profile.hpp"
#include "dplab/spectral_grid.hpp"

namespace dplab {

struct InvariantPair {
  double S = 0.0;
  double H = 0.0;
};

/// S(u) = 1/2 int (4 w^2 + 5 w_x^2 + w_xx^2) dx with w = (4 - d^2)^{-1} u.
double momentum_S(const Field& u);

/// S(u) through the symbol form 1/2 (u, u)_S.
double momentum_S_symbol(const Field& u);

/// Cubic part -1/6 int u^3 dx of the Hamiltonian.
double hamiltonian_cubic(const Field& u);
/// Quadratic part -kappa int ((4 - d^2)^{-1/2} u)^2 dx.
double hamiltonian_quadratic(const Field& u, double kappa);
/// H(u) = -1/6 int (u^3 + 6 kappa ((4 - d^2)^{-1/2} u)^2) dx.
double hamiltonian_H(const Field& u, double kappa);

InvariantPair evaluate_invariants(const Field& u, double kappa);

/// Closed forms for the soliton family phi_c:
///   dH/dc = -3 c^2 (c + kappa) sqrt(c^2 - 2 c kappa) / (2 (3c + 2 kappa)^2),
///   dS/dc = -dH/dc / c.
double dH_dc_closed(double c, double kappa);
double dS_dc_closed(double c, double kappa);

struct DerivativeCheck {
  SolitonParams params;
  double dS_closed = 0.0;
  double dS_fd = 0.0;
  double dH_closed = 0.0;
  double dH_fd = 0.0;
  double rel_err_S = 0.0;
  double rel_err_H = 0.0;
  /// |dH/dc + c dS/dc| / |dH/dc| from the finite differences.
  double identity_residual = 0.0;
};

/// Central differences of S(phi_c) and H(phi_c) in c (step relative to c),
/// each profile sampled on `grid` centred at 0.
DerivativeCheck derivative_check(const SolitonParams& params, const GridPtr& grid, double step = 1e-4,
                                 const ProfileOptions& options = {});

}  // namespace dplab
