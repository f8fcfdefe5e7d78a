#pragma once

// Pseudospectral time stepping of
//
//   u_t + d_x( 1/2 u^2 + (1 - d^2)^{-1} (3/2 u^2 + 2 kappa u) ) = 0
//
// with 2/3-rule dealiasing and classical RK4.

#include <functional>
#include <limits>
#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

#include "dplab/spectral_grid.hpp"

namespace dplab {

struct EvolutionConfig {
  double kappa = 1.0;
  /// Exactly one of dt / cfl is used; dt wins when both are set.
  std::optional<double> dt;
  std::optional<double> cfl;
  double t_end = 1.0;
  bool dealias = true;
  int observer_stride = 1;
  /// Exponential high-wavenumber filter exp(-36 (k/k_max)^36) after every
  /// step. Off unless requested; it biases conservation measurements.
  bool filter = false;

  void validate() const;
  /// Step size for initial data u0 (cfl rule: cfl * h / max(1, |u0|_inf)).
  double resolve_dt(const Field& u0) const;
};

struct Trajectory {
  GridPtr grid;
  EvolutionConfig config;
  std::vector<double> times;
  std::vector<Field> states;
};

/// Raised when the solution leaves the admissible sup-norm envelope.
class BlowUpError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

using Observer = std::function<void(double t, const Field& u)>;

/// Right-hand side of u_t.
Field dp_rhs(const Field& u, double kappa, bool dealias = true);

struct StepOptions {
  bool dealias = true;
  /// Sup-norm above which the step is rejected with BlowUpError.
  double sup_limit = std::numeric_limits<double>::infinity();
};

Field step_rk4(const Field& u, double dt, double kappa, const StepOptions& options = {});

/// 2 (1 + sqrt 2) |u0|_2 + 4 kappa / 3.
double sup_norm_bound(const Field& u0, double kappa);

/// Integrates to config.t_end. Frames are stored (and observers called) at
/// t = 0, every observer_stride steps, and at t_end. The blow-up guard is 10x
/// sup_norm_bound(u0).
Trajectory evolve(const Field& u0, const EvolutionConfig& config,
                  std::span<const Observer> observers = {});

struct PositivityReport {
  double min_value = 0.0;
  bool ok = false;
};

/// Minimum over the grid of w = u - u_xx + 2 kappa / 3.
PositivityReport check_w_positivity(const Field& u0, double kappa);

}  // namespace dplab
