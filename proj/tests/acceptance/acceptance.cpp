// Acceptance checks. One PASS/FAIL line per criterion; exit status 1 when any
// criterion fails. Detail lines are indented.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <random>
#include <string>
#include <vector>

#include "dplab/diagnostics.hpp"
#include "dplab/dp_evolution.hpp"
#include "dplab/experiment_harness.hpp"
#include "dplab/invariants.hpp"
#include "dplab/kernels.hpp"
#include "dplab/linearized_operator.hpp"
#include "dplab/modulation.hpp"
#include "dplab/soliton_profile.hpp"
#include "dplab/spectral_grid.hpp"

using namespace dplab;

namespace {

const SolitonParams kPairs[] = {{3.0, 1.0}, {5.0, 1.0}, {2.5, 1.0}, {4.0, 0.5}};

int failures = 0;

void report(int id, const char* title, bool pass, double seconds) {
  std::printf("%s criterion %d: %s (%.1f s)\n", pass ? "PASS" : "FAIL", id, title, seconds);
  std::fflush(stdout);
  if (!pass) ++failures;
}

double since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

// 1. First-integral residual with phi_x from a sixth-order central difference
// of the interpolated profile, independent of the stored slopes.
bool profile_correctness() {
  bool ok = true;
  for (const auto& p : kPairs) {
    const auto prof = build_profile(p);
    const double h = 1e-3;
    double worst = 0.0;
    for (int i = 0; i < prof.table_size(); ++i) {
      const double x = prof.table_x(i);
      auto f = [&](double s) { return prof.evaluate(x + s); };
      const double dphi =
          (-f(-3 * h) + 9 * f(-2 * h) - 45 * f(-h) + 45 * f(h) - 9 * f(2 * h) + f(3 * h)) / (60 * h);
      const double phi = prof.evaluate(x);
      const double r = 0.5 * (p.c - phi) * (p.c - phi) * dphi * dphi - phi * phi * amplitude_polynomial(phi, p);
      worst = std::max(worst, std::abs(r));
    }
    const double bound = 1e-8 * std::pow(p.c, 4);
    const double nu = decay_rate(p);
    const double decay_err = std::abs(prof.fitted_decay_rate() - nu) / nu;
    const bool pass = worst <= bound && decay_err <= 0.01;
    std::printf("    c=%-4g kappa=%-4g residual %.3e (bound %.3e)  decay %.10f vs %.10f (rel %.2e)\n", p.c, p.kappa,
                worst, bound, prof.fitted_decay_rate(), nu, decay_err);
    ok = ok && pass;
  }
  return ok;
}

// 2. Finite-difference derivatives of S and H along the family.
bool derivative_identity() {
  const auto g = make_grid(2048, 200.0);
  bool closed_ok = true, identity_ok = true;
  for (const auto& p : kPairs) {
    const auto d = derivative_check(p, g);
    std::printf("    c=%-4g kappa=%-4g dS/dc fd %.8f closed %.8f (ratio %.6f)  dH/dc fd %.8f closed %.8f (ratio %.6f)"
                "  identity %.2e\n",
                p.c, p.kappa, d.dS_fd, d.dS_closed, d.dS_fd / d.dS_closed, d.dH_fd, d.dH_closed,
                d.dH_fd / d.dH_closed, d.identity_residual);
    closed_ok = closed_ok && d.rel_err_S <= 1e-4 && d.rel_err_H <= 1e-4;
    identity_ok = identity_ok && d.identity_residual <= 1e-6;
  }
  std::printf("    closed forms within 1e-4: %s; dH/dc + c dS/dc = 0 within 1e-6: %s\n", closed_ok ? "yes" : "no",
              identity_ok ? "yes" : "no");
  return closed_ok && identity_ok;
}

// Shift s minimizing |u - phi(. - s)|_2, by Newton on (u, phi_x(. - s)) = 0.
double optimal_shift(const Field& u, const Field& phi, double s0) {
  const Field dphi = derivative(phi, 1);
  const Field d2phi = derivative(phi, 2);
  double s = s0;
  for (int it = 0; it < 30; ++it) {
    const double g = l2_inner(u, translate(dphi, s));
    const double gp = -l2_inner(u, translate(d2phi, s));
    const double step = g / gp;
    s -= step;
    if (std::abs(step) < 1e-14) break;
  }
  return s;
}

// 3. Single soliton over T = 10.
bool solver_fidelity() {
  const SolitonParams p{3.0, 1.0};
  const double T = 10.0;
  const auto prof = build_profile(p);
  const auto g = make_grid(1024, 200.0);
  const Field phi = sample_on_grid(prof, g, 0.0);

  EvolutionConfig cfg;
  cfg.kappa = p.kappa;
  cfg.dt = 0.01;
  cfg.t_end = T;
  cfg.observer_stride = 100000;
  const auto traj = evolve(phi, cfg);
  const Field& uT = traj.states.back();
  const double s = optimal_shift(uT, phi, p.c * T);
  const double shift = p.c * T + g->wrap(s - p.c * T);
  const double dist = l2_norm(uT - translate(phi, s)) / l2_norm(phi);
  const double shift_err = std::abs(shift - p.c * T) / (p.c * T);
  const auto i0 = evaluate_invariants(phi, p.kappa);
  const auto i1 = evaluate_invariants(uT, p.kappa);
  const double ds = std::abs(i1.S - i0.S) / i0.S;
  const double dh = std::abs(i1.H - i0.H) / std::abs(i0.H);

  // Temporal order against a fine-step reference.
  auto run = [&](double dt) {
    EvolutionConfig c = cfg;
    c.dt = dt;
    return evolve(phi, c).states.back();
  };
  const Field ref = run(0.003125);
  const double dts[3] = {0.1, 0.05, 0.025};
  double errs[3];
  for (int i = 0; i < 3; ++i) errs[i] = l2_norm(run(dts[i]) - ref);
  // least-squares slope of log err vs log dt
  double mx = 0, my = 0;
  for (int i = 0; i < 3; ++i) mx += std::log(dts[i]) / 3, my += std::log(errs[i]) / 3;
  double sxy = 0, sxx = 0;
  for (int i = 0; i < 3; ++i) {
    sxy += (std::log(dts[i]) - mx) * (std::log(errs[i]) - my);
    sxx += (std::log(dts[i]) - mx) * (std::log(dts[i]) - mx);
  }
  const double order = sxy / sxx;

  std::printf("    rel L2 distance %.3e (bound 1e-6)  shift %.10f vs cT = %g (rel %.2e)\n", dist, shift, p.c * T,
              shift_err);
  std::printf("    S drift %.2e  H drift %.2e (bound 1e-8)\n", ds, dh);
  std::printf("    errors at dt 0.1/0.05/0.025: %.3e %.3e %.3e  order %.3f\n", errs[0], errs[1], errs[2], order);
  return dist <= 1e-6 && shift_err <= 1e-4 && ds <= 1e-8 && dh <= 1e-8 && order >= 3.7 && order <= 4.3;
}

struct SpectralRun {
  SpectralReport r1024, r2048;
  double unconstrained = 0.0;
};

std::vector<SpectralRun> spectral_runs() {
  std::vector<SpectralRun> out;
  for (const auto& p : kPairs) {
    const auto prof = build_profile(p);
    SpectralRun s;
    const auto m1 = assemble_L(prof, make_grid(1024, 100.0));
    s.r1024 = eigen_report(m1, prof);
    s.unconstrained = constrained_min_eigenvalue(m1, {});
    s.r2048 = eigen_report(assemble_L(prof, make_grid(2048, 100.0)), prof);
    out.push_back(std::move(s));
  }
  return out;
}

// 4. Negative direction, kernel, and the first positive eigenvalue.
bool spectral_claims(const std::vector<SpectralRun>& runs) {
  bool ok = true;
  for (std::size_t i = 0; i < runs.size(); ++i) {
    const auto& a = runs[i].r1024;
    const auto& b = runs[i].r2048;
    const double kern = std::abs(a.kernel_eigenvalue) / a.operator_norm;
    const double drift = std::abs(b.ess_gap_proxy - a.ess_gap_proxy) / a.ess_gap_proxy;
    const bool pass = a.neg_count == 1 && kern <= 1e-6 && a.kernel_overlap >= 0.9999 && drift <= 0.10;
    std::printf("    c=%-4g kappa=%-4g neg %d (%.8f)  |kernel|/|L| %.2e  overlap %.12f  first positive %.6f -> %.6f "
                "(%.2e)\n",
                kPairs[i].c, kPairs[i].kappa, a.neg_count, a.neg_eigenvalue, kern, a.kernel_overlap, a.ess_gap_proxy,
                b.ess_gap_proxy, drift);
    ok = ok && pass;
  }
  return ok;
}

// 5. Constrained coercivity.
bool constrained_coercivity(const std::vector<SpectralRun>& runs) {
  bool ok = true;
  for (std::size_t i = 0; i < runs.size(); ++i) {
    const auto& a = runs[i].r1024;
    const auto& b = runs[i].r2048;
    const double drift = std::abs(b.theta - a.theta) / a.theta;
    const double unc = std::abs(runs[i].unconstrained - a.neg_eigenvalue) / std::abs(a.neg_eigenvalue);
    const bool pass = a.theta > 0 && b.theta > 0 && drift <= 0.05 && unc <= 1e-10;
    std::printf("    c=%-4g kappa=%-4g theta %.6f -> %.6f (%.2e)  unconstrained min %.10f vs %.10f\n", kPairs[i].c,
                kPairs[i].kappa, a.theta, b.theta, drift, runs[i].unconstrained, a.neg_eigenvalue);
    ok = ok && pass;
  }
  return ok;
}

Scenario reference_scenario() {
  Scenario s;
  s.name = "acceptance";
  s.kappa = 1.0;
  s.speeds = {3.0, 5.0};
  s.separation = 60.0;
  s.perturbation = {"bump", 1e-3, 7};
  return s;
}

// 6. Decomposition of exact and perturbed 2-trains.
bool modulation_exactness() {
  const auto g = make_grid(2048, 256.0);
  ProfileCache cache(1.0);
  const TrainParameters exact{{3.0, 5.0}, {-30.0, 30.0}};
  const Field u = soliton_train(g, exact, cache);
  const auto guess = initial_guess(u, 2, 1.0);
  const auto st = decompose(u, guess, cache);
  double perr = 0.0;
  for (int j = 0; j < 2; ++j) {
    perr = std::max(perr, std::abs(st.params.speeds[j] - exact.speeds[j]));
    perr = std::max(perr, std::abs(st.params.positions[j] - exact.positions[j]));
  }
  const double eps_rel = l2_norm(st.residual) / l2_norm(u);
  std::printf("    exact: parameter error %.2e (bound 1e-8)  |eps|/|u| %.2e (bound 1e-10)  iterations %d\n", perr,
              eps_rel, st.iterations);
  const bool exact_ok = perr <= 1e-8 && eps_rel <= 1e-10;

  auto s = reference_scenario();
  const double alpha = s.perturbation.alpha;
  const auto init = build_initial_state(s, g, cache);
  const auto pt = decompose(init.u0, exact, cache);
  double shift = 0.0;
  for (int j = 0; j < 2; ++j) {
    shift = std::max(shift, std::abs(pt.params.speeds[j] - exact.speeds[j]));
    shift = std::max(shift, std::abs(pt.params.positions[j] - exact.positions[j]));
  }
  const double eps = l2_norm(pt.residual);
  std::printf("    alpha %.1e: |eps| %.3e (%.2f alpha)  max parameter shift %.3e (%.2f alpha)\n", alpha, eps,
              eps / alpha, shift, shift / alpha);
  auto within5 = [&](double v) { return v <= 5 * alpha && v >= alpha / 5; };
  return exact_ok && within5(eps) && within5(shift);
}

// 7 and 8 share one run.
bool monotonicity_ok(const StabilityResult& r) {
  std::printf("    run: n %d  period %g  dt %g  B %g  frames %zu  status %s\n", r.n, r.period, r.dt, r.weight.B,
              r.records.size(), r.status.c_str());
  std::printf("    max I_2 increase %.3e (bound %.3e = 1e-4 S(u0))\n", r.monotonicity.max_increase,
              r.monotonicity.threshold);
  return r.ok() && r.monotonicity.pass && !r.monotonicity.series.empty();
}

bool apriori_ok(const StabilityResult& r) {
  double lin = 0, slope = -1e300, sup = 0;
  for (const auto& rec : r.records) {
    lin = std::max(lin, rec.apriori.linfty_lhs / rec.apriori.linfty_rhs);
    slope = std::max(slope, rec.apriori.slope_excess - rec.apriori.slope_tolerance);
    sup = std::max(sup, rec.apriori.sup_lhs / rec.apriori.sup_rhs);
  }
  std::printf("    w0 min %.4f  max |g|_inf ratio %.3e  max slope excess over tolerance %.3e  max sup ratio %.3f\n",
              r.w0.min_value, lin, slope, sup);
  return r.ok() && r.w0.ok && r.apriori_ok;
}

// 9. Sweeps.
bool stability_scaling() {
  const auto base = reference_scenario();
  const int threads = kernels::max_threads();
  const auto a = run_sweep(base, {1e-4, 3e-4, 1e-3, 3e-3, 1e-2}, {60.0}, threads, false);
  bool ok = true;
  for (const auto& row : a.rows) {
    std::printf("    alpha %.0e L %g: sup error %.4e  %s  no secular growth %s\n", row.alpha, row.separation,
                row.sup_error, row.status.c_str(), row.no_secular_growth ? "yes" : "no");
    ok = ok && row.status == "ok" && row.no_secular_growth;
  }
  const double slope = a.alpha_slopes.empty() ? 0.0 : a.alpha_slopes.front().second;
  std::printf("    log-log slope in alpha %.4f (range [0.8, 1.2])\n", slope);
  ok = ok && slope >= 0.8 && slope <= 1.2;

  const auto b = run_sweep(base, {1e-4}, {30.0, 45.0, 60.0}, threads, false);
  for (const auto& row : b.rows) {
    std::printf("    alpha %.0e L %g: sup error %.4e  %s\n", row.alpha, row.separation, row.sup_error,
                row.status.c_str());
    ok = ok && row.status == "ok";
  }
  const bool mono = !b.monotone_in_L.empty() && b.monotone_in_L.front().second;
  std::printf("    non-increasing in L: %s\n", mono ? "yes" : "no");
  return ok && mono;
}

// 10. Property checks on random fields.
bool infrastructure_invariants() {
  const auto g = make_grid(256, 60.0);
  std::mt19937_64 rng(424242);
  std::uniform_real_distribution<double> pos(-18.0, 18.0), width(0.8, 3.0), amp(-1.0, 1.0);
  int fields = 0, bad = 0;
  double worst_round = 0, worst_lo = 1e300, worst_hi = 0;
  for (int trial = 0; trial < 128; ++trial) {
    Field f(g);
    for (int b = 0; b < 4; ++b) {
      const double x0 = pos(rng), w = width(rng), a = amp(rng);
      for (int k = 0; k < g->size(); ++k) {
        const double d = g->wrap(g->node(k) - x0) / w;
        f[k] += a * std::exp(-d * d);
      }
    }
    const double scale = 1.0 + max_abs(f);
    const Field w = helmholtz_inverse(f, 4.0);
    const double e1 = max_abs(4.0 * w - derivative(w, 2) - f) / scale;
    const double e2 = max_abs(sqrt_helmholtz_inverse4(sqrt_helmholtz_inverse4(f)) - w) / scale;
    const double e3 = max_abs(from_spectrum(g, to_spectrum(f)) - f) / scale;
    const double e4 = max_abs(translate(translate(f, 2.9), -2.9) - f) / scale;
    const double round = std::max({e1, e2, e3, e4});
    const double l2 = l2_inner(f, f);
    const double ss = s_inner(f, f);
    worst_round = std::max(worst_round, round);
    worst_lo = std::min(worst_lo, ss / l2);
    worst_hi = std::max(worst_hi, ss / l2);
    if (round > 1e-12 || ss < 0.25 * l2 * (1 - 1e-12) || ss > l2 * (1 + 1e-12)) ++bad;
    ++fields;
  }
  std::printf("    %d fields: worst round trip %.2e  s_inner/|u|^2 in [%.4f, %.4f]\n", fields, worst_round, worst_lo,
              worst_hi);

  int points = 0, psi_bad = 0;
  for (double B : {4.0, 8.0, 16.0}) {
    const auto rep = psi_derivative_bounds_check(B);
    std::printf("    B=%-2g psi''/psi' %.6f (<= %.6f)  |psi'''|/psi' %.6f (<= %.6f)  |psi''''|/psi' %.6f (<= %.6f)\n", B,
                rep.max_d2_ratio, 1 / B, rep.max_abs_d3_ratio, 1 / (B * B), rep.max_abs_d4_ratio, 3 / (B * B * B));
    if (!rep.ok()) ++psi_bad;
    std::uniform_real_distribution<double> xs(-30 * B, 30 * B);
    for (int i = 0; i < 128; ++i) {
      const auto d = weight_psi_derivatives(xs(rng), B);
      const double slack = 1e-12 * d.d[0];
      if (d.d[0] <= 0 || d.d[1] > d.d[0] / B + slack || std::abs(d.d[2]) > d.d[0] / (B * B) + slack ||
          std::abs(d.d[3]) > 3 * d.d[0] / (B * B * B) + slack)
        ++psi_bad;
      ++points;
    }
  }
  std::printf("    psi inequalities at %d random points: %d violations\n", points, psi_bad);
  return bad == 0 && psi_bad == 0;
}

}  // namespace

int main() {
  auto t0 = std::chrono::steady_clock::now();
  {
    const bool ok = profile_correctness();
    report(1, "profile first integral and tail decay", ok, since(t0));
  }

  t0 = std::chrono::steady_clock::now();
  {
    const bool ok = derivative_identity();
    report(2, "dS/dc, dH/dc closed forms and identity", ok, since(t0));
  }

  t0 = std::chrono::steady_clock::now();
  {
    const bool ok = solver_fidelity();
    report(3, "solver fidelity, conservation, RK4 order", ok, since(t0));
  }

  t0 = std::chrono::steady_clock::now();
  const auto runs = spectral_runs();
  const double eig_time = since(t0);
  report(4, "one negative eigenvalue, kernel along phi_x, first positive eigenvalue stable", spectral_claims(runs),
         eig_time);
  report(5, "constrained coercivity theta > 0 and grid-stable", constrained_coercivity(runs), 0.0);

  t0 = std::chrono::steady_clock::now();
  {
    const bool ok = modulation_exactness();
    report(6, "modulation exactness and O(alpha) response", ok, since(t0));
  }

  t0 = std::chrono::steady_clock::now();
  RunOptions opt;
  opt.persist = false;
  const auto run = run_stability(reference_scenario(), opt);
  const double run_time = since(t0);
  report(7, "localized momentum I_2 almost non-increasing", monotonicity_ok(run), run_time);
  report(8, "a priori bounds along the run, w0 >= 0", apriori_ok(run), 0.0);
  {
    auto s4 = reference_scenario();
    s4.weight_b = 4.0;
    const auto r4 = run_stability(s4, opt);
    std::printf("    (info) B=4: max I_2 increase %.3e vs bound %.3e, fitted constant %.3e\n",
                r4.monotonicity.max_increase, r4.monotonicity.threshold, r4.monotonicity.fitted_constant);
  }

  t0 = std::chrono::steady_clock::now();
  {
    const bool ok = stability_scaling();
    report(9, "orbital stability scaling in alpha and L", ok, since(t0));
  }

  t0 = std::chrono::steady_clock::now();
  {
    const bool ok = infrastructure_invariants();
    report(10, "symbol round trips, s_inner bounds, psi inequalities", ok, since(t0));
  }

  std::printf("%d of 10 criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}
