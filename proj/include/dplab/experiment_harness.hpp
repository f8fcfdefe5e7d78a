#pragma once

// End-to-end N-soliton stability experiments: scenario configuration,
// perturbed initial data, tracked evolution with diagnostics, and (alpha, L)
// sweeps. Results are written one directory per run.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "dplab/diagnostics.hpp"
#include "dplab/dp_evolution.hpp"
#include "dplab/modulation.hpp"
#include "dplab/spectral_grid.hpp"

namespace dplab {

/// Invalid scenario (bad JSON, unknown or mistyped field, violated
/// hypothesis). The CLI maps it to exit code 2.
class ScenarioError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

struct PerturbationSpec {
  std::string kind = "none";  // none | bump | mode
  double alpha = 0.0;
  std::uint64_t seed = 0;
};

struct GridSpec {
  int n = 0;                      // 0: smallest power of two with h <= max_spacing
  std::optional<double> period;   // unset: auto rule
  double max_spacing = 0.15;
};

struct Scenario {
  std::string name = "run";
  double kappa = 1.0;
  std::vector<double> speeds;
  double separation = 60.0;
  /// Explicit initial centers; default is a train centred on 0 with gaps L.
  std::vector<double> positions;
  PerturbationSpec perturbation;
  GridSpec grid;
  /// Defaults: dt = 0.01, t_end = 20, a record every 20 steps.
  EvolutionConfig evolution{1.0, 0.01, std::nullopt, 20.0, true, 20, false};
  double weight_b = 3.0;
  std::optional<double> sigma0;
  /// Pass threshold for max_t I_j(t) - I_j(0), relative to S(u0).
  double monotonicity_threshold = 1e-4;
  double profile_tol = 1e-10;
  std::string outputs;  // empty: $DPLAB_OUTPUT_ROOT (or ./dplab_runs) / name
  bool write_frames = false;

  /// Throws ScenarioError unless the speeds increase, c_1 > 2 kappa,
  /// alpha >= 0 and the gaps are at least L.
  void validate() const;
  std::vector<double> initial_positions() const;
  WeightConfig weight() const;
  std::filesystem::path output_dir() const;
};

/// Parses a scenario; errors name the offending field or JSON line.
Scenario scenario_from_json(const std::string& text);
std::string scenario_to_json(const Scenario& s);
Scenario load_scenario(const std::filesystem::path& path);

/// Period 2 * span + 40 / nu_min (rounded up to a multiple of 8), where span
/// is the initial extent of the train plus (c_N - c_1) t_end.
double auto_period(const Scenario& s);
/// Grid from the scenario's grid block (auto rules when unset).
GridPtr scenario_grid(const Scenario& s);

struct InitialState {
  Field u0;
  Field train;
  double alpha_requested = 0.0;
  double alpha_used = 0.0;
  int halvings = 0;
  PositivityReport w0;
};

/// Unit-L2 perturbation of the requested kind, deterministic in the seed.
Field make_perturbation(const Scenario& s, const GridPtr& grid);

InitialState build_initial_state(const Scenario& s, const GridPtr& grid, ProfileCache& cache);
InitialState build_initial_state(const Scenario& s);

struct RunOptions {
  /// Overrides scenario_grid(s); used by sweeps to share one grid.
  GridPtr grid;
  bool persist = true;
  std::optional<std::filesystem::path> output_dir;
};

struct StabilityResult {
  std::string status = "ok";  // ok | failed
  std::string error;
  std::vector<StabilityRecord> records;
  double sup_error = 0.0;
  double first_half_max = 0.0;
  double second_half_max = 0.0;
  bool no_secular_growth = false;
  MonotonicityReport monotonicity;
  bool apriori_ok = false;
  PositivityReport w0;
  double alpha_requested = 0.0;
  double alpha_used = 0.0;
  int halvings = 0;
  double S0 = 0.0;
  double H0 = 0.0;
  double max_s_drift = 0.0;
  double max_h_drift = 0.0;
  WeightConfig weight;
  int n = 0;
  double period = 0.0;
  double dt = 0.0;
  std::filesystem::path output_dir;

  bool ok() const { return status == "ok"; }
  /// Run completed and every diagnostic passed.
  bool checks_pass() const {
    return ok() && w0.ok && apriori_ok && monotonicity.pass && no_secular_growth;
  }
};

/// Evolves the scenario with tracking and diagnostics at every recorded
/// frame. Blow-up and tracking failures do not throw: the result carries
/// status "failed", the partial records, and an error.json manifest.
StabilityResult run_stability(const Scenario& s, const RunOptions& options = {});

std::string summary_to_json(const StabilityResult& r);

struct SweepRow {
  double alpha = 0.0;
  double separation = 0.0;
  std::string status;
  std::string error;
  double sup_error = 0.0;
  bool w0_ok = false;
  bool no_secular_growth = false;
  double model = 0.0;     // alpha + exp(-gamma0 L / 2)
  double residual = 0.0;  // sup_error - A * model
};

struct SweepResult {
  std::vector<SweepRow> rows;  // ordered by (alpha, L)
  double gamma0 = 0.0;
  bool fit_available = false;
  std::string fit_note;
  double fitted_A = 0.0;
  /// Log-log slope of sup_error in alpha, per L with at least two alphas.
  std::vector<std::pair<double, double>> alpha_slopes;
  /// Whether sup_error is non-increasing in L, per alpha with at least two Ls.
  std::vector<std::pair<double, bool>> monotone_in_L;
  bool no_secular_growth = false;
};

/// Runs every (alpha, L) pair on a common grid sized for the largest L.
/// Failed runs are kept as rows; the fit needs at least four survivors.
SweepResult run_sweep(const Scenario& base, const std::vector<double>& alphas, const std::vector<double>& Ls,
                      int parallelism = 1, bool persist = true);

std::string sweep_to_json(const SweepResult& r);
std::string sweep_to_csv(const SweepResult& r);

}  // namespace dplab
