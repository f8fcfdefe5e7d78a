#include "dplab/dp_evolution.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "dplab/kernels.hpp"

namespace dplab {

void EvolutionConfig::validate() const {
  if (!(kappa > 0.0)) throw std::invalid_argument("evolution: kappa must be positive");
  if (!(t_end > 0.0) || !std::isfinite(t_end)) throw std::invalid_argument("evolution: t_end must be positive");
  if (dt) {
    if (!(*dt > 0.0)) throw std::invalid_argument("evolution: dt must be positive");
  } else if (cfl) {
    if (!(*cfl > 0.0) || *cfl > 1.0) throw std::invalid_argument("evolution: cfl must lie in (0, 1]");
  } else {
    throw std::invalid_argument("evolution: one of dt or cfl is required");
  }
  if (observer_stride < 1) throw std::invalid_argument("evolution: observer_stride must be >= 1");
}

double EvolutionConfig::resolve_dt(const Field& u0) const {
  validate();
  if (dt) return *dt;
  return *cfl * u0.grid().spacing() / std::max(1.0, max_abs(u0));
}

Field dp_rhs(const Field& u, double kappa, bool dealias) {
  if (!u.all_finite()) throw std::domain_error("dp_rhs: non-finite samples");
  const PeriodicGrid& g = u.grid();
  const int n = g.size();
  const int nspec = g.spectrum_size();
  const int cutoff = dealias ? n / 3 : n / 2;
  const auto xi = g.half_wavenumbers();

  auto uhat = to_spectrum(u);
  std::vector<double> sq(static_cast<std::size_t>(n));
  if (dealias) {
    std::vector<Complex> trunc(uhat);
    for (int k = cutoff + 1; k < nspec; ++k) trunc[static_cast<std::size_t>(k)] = 0.0;
    g.inverse(trunc, sq);
    kernels::parallel::square(sq, sq);
  } else {
    kernels::parallel::square(u.samples(), sq);
  }
  std::vector<Complex> qhat(static_cast<std::size_t>(nspec));
  g.forward(sq, qhat);

  std::vector<Complex> out(static_cast<std::size_t>(nspec));
  for (int k = 0; k < nspec; ++k) {
    const auto i = static_cast<std::size_t>(k);
    const double x = xi[i];
    const Complex q = (k <= cutoff) ? qhat[i] : Complex(0.0);
    const Complex flux = 0.5 * q + (1.5 * q + 2.0 * kappa * uhat[i]) / (1.0 + x * x);
    out[i] = Complex(0.0, -x) * flux;
  }
  out[static_cast<std::size_t>(nspec - 1)] = 0.0;
  out[0] = 0.0;
  return from_spectrum(u.grid_ptr(), out);
}

namespace {

void apply_filter(Field& u) {
  auto spec = to_spectrum(u);
  const double kmax = static_cast<double>(spec.size() - 1);
  for (std::size_t k = 0; k < spec.size(); ++k)
    spec[k] *= std::exp(-36.0 * std::pow(static_cast<double>(k) / kmax, 36.0));
  u = from_spectrum(u.grid_ptr(), spec);
}

}  // namespace

Field step_rk4(const Field& u, double dt, double kappa, const StepOptions& options) {
  if (!(dt > 0.0)) throw std::invalid_argument("step_rk4: dt must be positive");
  const auto rhs = [&](const Field& v) { return dp_rhs(v, kappa, options.dealias); };
  auto stage = [&](const Field& k, double a) {
    Field s(u.grid_ptr());
    kernels::parallel::combine(1.0, u.samples(), a, k.samples(), s.samples());
    return s;
  };
  const Field k1 = rhs(u);
  const Field k2 = rhs(stage(k1, 0.5 * dt));
  const Field k3 = rhs(stage(k2, 0.5 * dt));
  const Field k4 = rhs(stage(k3, dt));
  Field next(u);
  const double w = dt / 6.0;
  kernels::parallel::axpy(w, k1.samples(), next.samples());
  kernels::parallel::axpy(2.0 * w, k2.samples(), next.samples());
  kernels::parallel::axpy(2.0 * w, k3.samples(), next.samples());
  kernels::parallel::axpy(w, k4.samples(), next.samples());
  if (!next.all_finite()) throw BlowUpError("step_rk4: non-finite state");
  const double sup = max_abs(next);
  if (sup > options.sup_limit) {
    std::ostringstream os;
    os << "step_rk4: |u|_inf = " << sup << " exceeds guard " << options.sup_limit;
    throw BlowUpError(os.str());
  }
  return next;
}

double sup_norm_bound(const Field& u0, double kappa) {
  return 2.0 * (1.0 + std::numbers::sqrt2) * l2_norm(u0) + 4.0 * kappa / 3.0;
}

Trajectory evolve(const Field& u0, const EvolutionConfig& config, std::span<const Observer> observers) {
  config.validate();
  if (!u0.all_finite()) throw std::domain_error("evolve: non-finite initial data");
  const double dt_req = config.resolve_dt(u0);
  const auto steps = static_cast<long>(std::ceil(config.t_end / dt_req - 1e-9));
  const double dt = config.t_end / static_cast<double>(steps);

  StepOptions opts;
  opts.dealias = config.dealias;
  opts.sup_limit = 10.0 * sup_norm_bound(u0, config.kappa);

  Trajectory traj;
  traj.grid = u0.grid_ptr();
  traj.config = config;
  auto record = [&](double t, const Field& u) {
    traj.times.push_back(t);
    traj.states.push_back(u);
    for (const auto& obs : observers) obs(t, u);
  };

  Field u = u0;
  record(0.0, u);
  for (long s = 1; s <= steps; ++s) {
    u = step_rk4(u, dt, config.kappa, opts);
    if (config.filter) apply_filter(u);
    if (s % config.observer_stride == 0 || s == steps) record(dt * static_cast<double>(s), u);
  }
  return traj;
}

PositivityReport check_w_positivity(const Field& u0, double kappa) {
  const Field uxx = derivative(u0, 2);
  double m = std::numeric_limits<double>::infinity();
  for (int k = 0; k < u0.size(); ++k) m = std::min(m, u0[k] - uxx[k] + 2.0 * kappa / 3.0);
  return {m, m >= 0.0};
}

}  // namespace dplab
