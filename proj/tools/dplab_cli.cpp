// dplab command line: profiles, evolution, spectra, decomposition and the
// stability experiments. Exit codes: 0 success, 1 check failure, 2 usage.

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "dplab/diagnostics.hpp"
#include "dplab/dp_evolution.hpp"
#include "dplab/experiment_harness.hpp"
#include "dplab/invariants.hpp"
#include "dplab/io.hpp"
#include "dplab/linearized_operator.hpp"
#include "dplab/modulation.hpp"
#include "dplab/soliton_profile.hpp"
#include "json.hpp"

using namespace dplab;
using nlohmann::json;

namespace {

constexpr int kOk = 0;
constexpr int kCheckFailed = 1;
constexpr int kUsage = 2;

void emit(const json& j, const std::string& out) {
  const std::string text = j.dump(1) + "\n";
  if (out.empty())
    std::cout << text;
  else
    write_text(out, text);
}

int cmd_soliton(double c, double kappa, double tol, double spacing, const std::string& out) {
  const SolitonParams p{c, kappa};
  const auto prof = build_profile(p, ProfileOptions{tol, spacing});
  if (!out.empty()) write_profile(out, prof);
  std::cout << std::setprecision(10) << "amplitude " << prof.amplitude() << "\ndecay_rate " << prof.decay_rate()
            << "\nfitted_decay_rate " << prof.fitted_decay_rate() << "\ntable_size " << prof.table_size()
            << "\ntail_start " << prof.tail_start() << "\n";
  return kOk;
}

Scenario scenario_from_flags(const std::string& config, const std::vector<double>& speeds, double kappa,
                             double separation, int n, double period, double t_end, double dt, int stride) {
  Scenario s = config.empty() ? Scenario{} : load_scenario(config);
  if (config.empty()) {
    s.speeds = speeds.empty() ? std::vector<double>{3.0} : speeds;
    s.kappa = kappa;
    s.evolution.kappa = kappa;
    s.separation = separation;
  }
  if (n > 0) s.grid.n = n;
  if (period > 0.0) s.grid.period = period;
  if (t_end > 0.0) s.evolution.t_end = t_end;
  if (dt > 0.0) s.evolution.dt = dt;
  if (stride > 0) s.evolution.observer_stride = stride;
  s.validate();
  return s;
}

int cmd_evolve(const Scenario& s, const std::string& out) {
  const auto init = build_initial_state(s);
  if (!init.w0.ok) {
    std::cerr << "evolve: w0 >= 0 fails (min " << init.w0.min_value << ")\n";
    return kCheckFailed;
  }
  EvolutionConfig cfg = s.evolution;
  cfg.kappa = s.kappa;
  const std::filesystem::path dir = out.empty() ? s.output_dir() : std::filesystem::path(out);
  try {
    const auto traj = evolve(init.u0, cfg);
    const auto frames = to_frame_set(traj);
    write_trajectory_csv(dir / "trajectory.csv", frames);
    write_frames_binary(dir / "frames.bin", frames);
    const auto a = evaluate_invariants(traj.states.front(), s.kappa);
    const auto b = evaluate_invariants(traj.states.back(), s.kappa);
    json j{{"frames", traj.states.size()},
           {"n", traj.grid->size()},
           {"period", traj.grid->period()},
           {"dt", cfg.resolve_dt(init.u0)},
           {"S_drift", std::abs(b.S - a.S) / std::abs(a.S)},
           {"H_drift", std::abs(b.H - a.H) / std::abs(a.H)},
           {"output", dir.string()}};
    emit(j, "");
  } catch (const BlowUpError& e) {
    std::cerr << "evolve: " << e.what() << "\n";
    return kCheckFailed;
  }
  return kOk;
}

int cmd_spectrum(double c, double kappa, int n, double period, int eigs, const std::string& eig_csv,
                 const std::string& out) {
  const SolitonParams p{c, kappa};
  const auto prof = build_profile(p);
  const auto grid = make_grid(n, period);
  const auto m = assemble_L(prof, grid);
  const auto r = eigen_report(m, prof);
  const double unconstrained = constrained_min_eigenvalue(m, {});
  json j{{"c", c},
         {"kappa", kappa},
         {"n", n},
         {"period", period},
         {"neg_eigenvalue", r.neg_eigenvalue},
         {"neg_count", r.neg_count},
         {"kernel_eigenvalue", r.kernel_eigenvalue},
         {"kernel_overlap", r.kernel_overlap},
         {"ess_gap_proxy", r.ess_gap_proxy},
         {"theta", r.theta},
         {"unconstrained_min", unconstrained},
         {"operator_norm", r.operator_norm},
         {"lowest_eigenvalues", r.lowest_eigenvalues}};
  emit(j, out);
  if (eigs > 0 && !eig_csv.empty()) {
    const auto e = lowest_eigenpairs(m.data, m.n, eigs);
    std::ostringstream os;
    os << std::setprecision(17) << "x";
    for (std::size_t k = 0; k < e.values.size(); ++k) os << ",v" << k;
    os << "\n#lambda";
    for (double v : e.values) os << ',' << v;
    os << '\n';
    const auto cols = e.vectors.size() / static_cast<std::size_t>(m.n);
    for (int i = 0; i < m.n; ++i) {
      os << grid->node(i);
      for (std::size_t k = 0; k < e.values.size(); ++k)
        os << ',' << e.vectors[static_cast<std::size_t>(i) * cols + k];
      os << '\n';
    }
    write_text(eig_csv, os.str());
  }
  const bool ok = r.neg_count == 1 && r.kernel_overlap >= 0.9999 && r.theta > 0.0;
  return ok ? kOk : kCheckFailed;
}

int cmd_decompose(const std::string& state, int frame, int count, double kappa, const std::string& out) {
  const auto frames = read_frames(state);
  const int nf = static_cast<int>(frames.states.size());
  const int idx = frame < 0 ? nf - 1 : frame;
  if (idx < 0 || idx >= nf) throw CLI::ValidationError("--frame", "out of range (" + std::to_string(nf) + " frames)");
  const Field& u = frames.states[static_cast<std::size_t>(idx)];
  ProfileCache cache(kappa);
  try {
    const auto guess = initial_guess(u, count, kappa);
    const auto st = decompose(u, guess, cache);
    json j{{"t", frames.times[static_cast<std::size_t>(idx)]},
           {"speeds", st.params.speeds},
           {"positions", st.params.positions},
           {"residual_norm", st.residual_norm},
           {"ortho_residual", st.ortho_residual},
           {"iterations", st.iterations}};
    emit(j, out);
  } catch (const ModulationError& e) {
    std::cerr << "decompose: " << e.what() << "\n";
    return kCheckFailed;
  }
  return kOk;
}

std::vector<SolitonParams> parse_pairs(const std::string& text) {
  std::vector<SolitonParams> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    const auto colon = item.find(':');
    if (colon == std::string::npos) throw CLI::ValidationError("--pairs", "expected c:kappa items, got '" + item + "'");
    try {
      out.push_back({std::stod(item.substr(0, colon)), std::stod(item.substr(colon + 1))});
    } catch (const std::exception&) {
      throw CLI::ValidationError("--pairs", "bad number in '" + item + "'");
    }
  }
  return out;
}

int cmd_check_invariants(const std::string& pairs, int n, double period, double step) {
  const auto grid = make_grid(n, period);
  bool ok = true;
  std::printf("%6s %6s %14s %14s %10s %14s %14s %10s %10s\n", "c", "kappa", "dS/dc closed", "dS/dc FD",
              "rel.err", "dH/dc closed", "dH/dc FD", "rel.err", "identity");
  for (const auto& p : parse_pairs(pairs)) {
    const auto d = derivative_check(p, grid, step);
    std::printf("%6.3g %6.3g %14.8f %14.8f %10.2e %14.8f %14.8f %10.2e %10.2e\n", p.c, p.kappa, d.dS_closed,
                d.dS_fd, d.rel_err_S, d.dH_closed, d.dH_fd, d.rel_err_H, d.identity_residual);
    ok = ok && d.rel_err_S <= 1e-4 && d.rel_err_H <= 1e-4 && d.identity_residual <= 1e-6;
  }
  return ok ? kOk : kCheckFailed;
}

int cmd_stability(const Scenario& s, const std::string& out) {
  RunOptions opt;
  if (!out.empty()) opt.output_dir = std::filesystem::path(out);
  const auto r = run_stability(s, opt);
  std::cout << summary_to_json(r);
  return r.checks_pass() ? kOk : kCheckFailed;
}

int cmd_sweep(Scenario s, const std::vector<double>& alphas, const std::vector<double>& Ls, int parallel,
              const std::string& out) {
  if (!out.empty()) s.outputs = out;
  const auto r = run_sweep(s, alphas, Ls, parallel);
  std::cout << sweep_to_json(r);
  bool ok = true;
  for (const auto& row : r.rows) ok = ok && row.status == "ok";
  return ok ? kOk : kCheckFailed;
}

int cmd_check_psi(double B) {
  const auto r = psi_derivative_bounds_check(B);
  std::printf("B = %g\n", B);
  std::printf("max psi''/psi'     %.6e  bound 1/B     %.6e  %s\n", r.max_d2_ratio, 1.0 / B, r.d2_ok ? "ok" : "FAIL");
  std::printf("max |psi'''|/psi'  %.6e  bound 1/B^2   %.6e  %s\n", r.max_abs_d3_ratio, 1.0 / (B * B),
              r.d3_ok ? "ok" : "FAIL");
  std::printf("max |psi''''|/psi' %.6e  bound 3/B^3   %.6e  %s\n", r.max_abs_d4_ratio, 3.0 / (B * B * B),
              r.d4_ok ? "ok" : "FAIL");
  for (int k = 0; k < 4; ++k)
    std::printf("decay constant C_%d  %.6e  (|psi^(%d)| <= C e^{-|x|/B})\n", k + 1, r.decay_constant[k], k + 1);
  return r.ok() ? kOk : kCheckFailed;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Degasperis-Procesi soliton laboratory"};
  app.require_subcommand(1);

  double c = 3.0, kappa = 1.0, tol = 1e-10, spacing = 0.02, period = 0.0, t_end = 0.0, dt = 0.0, separation = 60.0;
  double B = 4.0, step = 1e-4;
  int n = 0, eigs = 0, stride = 0, frame = -1, count = 1, parallel = 1;
  std::string out, config, eig_csv, state, pairs = "3:1,5:1,2.5:1,4:0.5";
  std::vector<double> speeds, alphas, Ls;

  auto* soliton = app.add_subcommand("soliton", "build a profile and export it as JSON");
  soliton->add_option("--c", c, "speed")->required();
  soliton->add_option("--kappa", kappa, "kappa")->required();
  soliton->add_option("--tol", tol, "table cutoff relative to the amplitude");
  soliton->add_option("--spacing", spacing, "table spacing");
  soliton->add_option("--out", out, "profile JSON path");

  auto* evolve_cmd = app.add_subcommand("evolve", "evolve a scenario's initial state");
  evolve_cmd->add_option("--config", config, "scenario JSON");
  evolve_cmd->add_option("--speeds", speeds, "soliton speeds (without --config)")->delimiter(',');
  evolve_cmd->add_option("--kappa", kappa, "kappa");
  evolve_cmd->add_option("--separation", separation, "initial gap");
  evolve_cmd->add_option("--n", n, "grid size");
  evolve_cmd->add_option("--period", period, "box length");
  evolve_cmd->add_option("--t-end", t_end, "final time");
  evolve_cmd->add_option("--dt", dt, "time step");
  evolve_cmd->add_option("--stride", stride, "steps between stored frames");
  evolve_cmd->add_option("--out", out, "output directory");

  auto* spectrum = app.add_subcommand("spectrum", "eigenstructure of the linearized operator");
  spectrum->add_option("--c", c, "speed")->required();
  spectrum->add_option("--kappa", kappa, "kappa")->required();
  spectrum->add_option("--n", n, "grid size")->default_val(1024);
  spectrum->add_option("--period", period, "box length")->default_val(100.0);
  spectrum->add_option("--eigs", eigs, "number of lowest eigenpairs to export");
  spectrum->add_option("--eig-csv", eig_csv, "CSV path for the eigenpairs");
  spectrum->add_option("--out", out, "report JSON path (default stdout)");

  auto* decompose_cmd = app.add_subcommand("decompose", "modulation decomposition of a stored state");
  decompose_cmd->add_option("--state", state, "frames.bin (with sidecar) or trajectory CSV")->required();
  decompose_cmd->add_option("--frame", frame, "frame index (default last)");
  decompose_cmd->add_option("--count", count, "number of solitons")->required();
  decompose_cmd->add_option("--kappa", kappa, "kappa")->required();
  decompose_cmd->add_option("--out", out, "JSON path (default stdout)");

  auto* invariants = app.add_subcommand("check-invariants", "closed-form vs finite-difference dS/dc, dH/dc");
  invariants->add_option("--pairs", pairs, "comma-separated c:kappa list");
  invariants->add_option("--n", n, "grid size")->default_val(2048);
  invariants->add_option("--period", period, "box length")->default_val(200.0);
  invariants->add_option("--step", step, "relative finite-difference step");

  auto* stability = app.add_subcommand("stability", "tracked N-soliton stability run");
  stability->add_option("--config", config, "scenario JSON")->required();
  stability->add_option("--out", out, "output directory");

  auto* sweep = app.add_subcommand("sweep", "(alpha, L) sweep of stability runs");
  sweep->add_option("--config", config, "base scenario JSON")->required();
  sweep->add_option("--alphas", alphas, "perturbation sizes")->delimiter(',')->required();
  sweep->add_option("--ls", Ls, "initial gaps")->delimiter(',')->required();
  sweep->add_option("--parallel", parallel, "concurrent runs");
  sweep->add_option("--out", out, "output root");

  auto* psi = app.add_subcommand("check-psi", "derivative bounds of the weight psi");
  psi->add_option("--B", B, "weight scale (> 2)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kUsage;
  }

  try {
    if (*soliton) return cmd_soliton(c, kappa, tol, spacing, out);
    if (*evolve_cmd)
      return cmd_evolve(scenario_from_flags(config, speeds, kappa, separation, n, period, t_end, dt, stride), out);
    if (*spectrum) return cmd_spectrum(c, kappa, n, period, eigs, eig_csv, out);
    if (*decompose_cmd) return cmd_decompose(state, frame, count, kappa, out);
    if (*invariants) return cmd_check_invariants(pairs, n, period, step);
    if (*stability) return cmd_stability(load_scenario(config), out);
    if (*sweep) return cmd_sweep(load_scenario(config), alphas, Ls, parallel, out);
    if (*psi) return cmd_check_psi(B);
  } catch (const CLI::ParseError& e) {
    std::cerr << e.what() << "\n";
    return kUsage;
  } catch (const std::invalid_argument& e) {
    std::cerr << e.what() << "\n";
    return kUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kCheckFailed;
  }
  return kUsage;
}
