#include "dplab/invariants.hpp"

#include <cmath>
#include <vector>

#include "dplab/kernels.hpp"
#include "dplab/soliton_profile.hpp"

namespace dplab {

double momentum_S(const Field& u) {
  const Field w = helmholtz_inverse(u, 4.0);
  const Field wx = derivative(w, 1);
  const Field wxx = derivative(w, 2);
  std::vector<double> density(static_cast<std::size_t>(u.size()));
  for (int k = 0; k < u.size(); ++k)
    density[static_cast<std::size_t>(k)] = 4.0 * w[k] * w[k] + 5.0 * wx[k] * wx[k] + wxx[k] * wxx[k];
  return 0.5 * u.grid().spacing() * kernels::parallel::sum(density);
}

double momentum_S_symbol(const Field& u) { return 0.5 * s_inner(u, u); }

double hamiltonian_cubic(const Field& u) {
  std::vector<double> cube(static_cast<std::size_t>(u.size()));
  for (int k = 0; k < u.size(); ++k) cube[static_cast<std::size_t>(k)] = u[k] * u[k] * u[k];
  return -u.grid().spacing() * kernels::parallel::sum(cube) / 6.0;
}

double hamiltonian_quadratic(const Field& u, double kappa) {
  const Field r = sqrt_helmholtz_inverse4(u);
  return -kappa * l2_inner(r, r);
}

double hamiltonian_H(const Field& u, double kappa) {
  return hamiltonian_cubic(u) + hamiltonian_quadratic(u, kappa);
}

InvariantPair evaluate_invariants(const Field& u, double kappa) {
  return {momentum_S(u), hamiltonian_H(u, kappa)};
}

double dH_dc_closed(double c, double kappa) {
  SolitonParams{c, kappa}.validate();
  const double d = 3.0 * c + 2.0 * kappa;
  return -3.0 * c * c * (c + kappa) * std::sqrt(c * c - 2.0 * c * kappa) / (2.0 * d * d);
}

double dS_dc_closed(double c, double kappa) { return -dH_dc_closed(c, kappa) / c; }

DerivativeCheck derivative_check(const SolitonParams& params, const GridPtr& grid, double step,
                                 const ProfileOptions& options) {
  params.validate();
  const double dc = step * params.c;
  auto at = [&](double c) {
    const SolitonParams p{c, params.kappa};
    return evaluate_invariants(sample_on_grid(build_profile(p, options), grid, 0.0), params.kappa);
  };
  const auto plus = at(params.c + dc);
  const auto minus = at(params.c - dc);
  DerivativeCheck d;
  d.params = params;
  d.dS_fd = (plus.S - minus.S) / (2.0 * dc);
  d.dH_fd = (plus.H - minus.H) / (2.0 * dc);
  d.dS_closed = dS_dc_closed(params.c, params.kappa);
  d.dH_closed = dH_dc_closed(params.c, params.kappa);
  d.rel_err_S = std::abs(d.dS_fd - d.dS_closed) / std::abs(d.dS_closed);
  d.rel_err_H = std::abs(d.dH_fd - d.dH_closed) / std::abs(d.dH_closed);
  d.identity_residual = std::abs(d.dH_fd + params.c * d.dS_fd) / std::abs(d.dH_fd);
  return d;
}

}  // namespace dplab
