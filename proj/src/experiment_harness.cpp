#include "dplab/experiment_harness.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <numbers>
#include <random>
#include <set>
#include <sstream>

#include "dplab/invariants.hpp"
#include "dplab/io.hpp"
#include "dplab/soliton_profile.hpp"
#include "json.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

namespace dplab {

using nlohmann::json;

namespace {

// ---- scenario JSON -------------------------------------------------------

void reject_unknown(const json& j, const std::string& where, std::initializer_list<const char*> known) {
  if (!j.is_object()) throw ScenarioError("scenario field '" + where + "': expected an object");
  for (const auto& [key, value] : j.items()) {
    bool found = false;
    for (const char* k : known) found = found || key == k;
    if (!found) throw ScenarioError("scenario field '" + (where.empty() ? key : where + "." + key) + "': unknown key");
  }
}

template <typename T>
void read_field(const json& j, const char* key, const std::string& where, T& out) {
  if (!j.contains(key)) return;
  const std::string path = where.empty() ? key : where + "." + key;
  try {
    out = j.at(key).get<T>();
  } catch (const json::exception&) {
    throw ScenarioError("scenario field '" + path + "': wrong type (" + j.at(key).dump() + ")");
  }
}

std::string line_of(const std::string& text, std::size_t byte) {
  std::size_t line = 1, col = 1;
  for (std::size_t i = 0; i + 1 < byte && i < text.size(); ++i) {
    if (text[i] == '\n') {
      ++line;
      col = 1;
    } else {
      ++col;
    }
  }
  return "line " + std::to_string(line) + ", column " + std::to_string(col);
}

double uniform01(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

std::string number_label(double v) {
  std::ostringstream os;
  os << std::setprecision(6) << v;
  return os.str();
}

}  // namespace

void Scenario::validate() const {
  if (!(kappa > 0.0)) throw ScenarioError("scenario: kappa must be positive");
  if (speeds.empty()) throw ScenarioError("scenario: speeds must be non-empty");
  if (!(speeds.front() > 2.0 * kappa))
    throw ScenarioError("scenario: c_1 must exceed 2 kappa (c_1 = " + number_label(speeds.front()) + ")");
  for (std::size_t j = 1; j < speeds.size(); ++j)
    if (!(speeds[j] > speeds[j - 1])) throw ScenarioError("scenario: speeds must be strictly increasing");
  if (!(separation > 0.0)) throw ScenarioError("scenario: separation must be positive");
  if (!positions.empty()) {
    if (positions.size() != speeds.size())
      throw ScenarioError("scenario: positions and speeds differ in length");
    for (std::size_t j = 1; j < positions.size(); ++j)
      if (!(positions[j] - positions[j - 1] >= separation))
        throw ScenarioError("scenario: initial gaps must be at least the separation L");
  }
  if (!(perturbation.alpha >= 0.0)) throw ScenarioError("scenario: perturbation.alpha must be >= 0");
  if (perturbation.kind != "none" && perturbation.kind != "bump" && perturbation.kind != "mode")
    throw ScenarioError("scenario: perturbation.kind must be none, bump or mode");
  if (grid.n != 0 && (grid.n < 8 || (grid.n & (grid.n - 1)) != 0))
    throw ScenarioError("scenario: grid.n must be a power of two >= 8");
  if (grid.period && !(*grid.period > 0.0)) throw ScenarioError("scenario: grid.period must be positive");
  if (!(grid.max_spacing > 0.0)) throw ScenarioError("scenario: grid.max_spacing must be positive");
  if (!(monotonicity_threshold > 0.0)) throw ScenarioError("scenario: monotonicity_threshold must be positive");
  try {
    evolution.validate();
    (void)weight();
  } catch (const std::invalid_argument& e) {
    throw ScenarioError(std::string("scenario: ") + e.what());
  }
}

std::vector<double> Scenario::initial_positions() const {
  if (!positions.empty()) return positions;
  std::vector<double> x(speeds.size());
  const double mid = 0.5 * static_cast<double>(speeds.size() - 1);
  for (std::size_t j = 0; j < x.size(); ++j) x[j] = (static_cast<double>(j) - mid) * separation;
  return x;
}

WeightConfig Scenario::weight() const { return WeightConfig::derive(speeds, kappa, weight_b, sigma0); }

std::filesystem::path Scenario::output_dir() const {
  if (!outputs.empty()) return outputs;
  const char* root = std::getenv("DPLAB_OUTPUT_ROOT");
  return std::filesystem::path(root && *root ? root : "dplab_runs") / name;
}

Scenario scenario_from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ScenarioError("scenario: malformed JSON at " + line_of(text, e.byte) + ": " + e.what());
  }
  reject_unknown(j, "",
                 {"name", "kappa", "speeds", "separation", "positions", "perturbation", "grid", "evolution",
                  "weight", "monotonicity_threshold", "profile_tol", "outputs", "write_frames"});
  Scenario s;
  read_field(j, "name", "", s.name);
  read_field(j, "kappa", "", s.kappa);
  read_field(j, "speeds", "", s.speeds);
  read_field(j, "separation", "", s.separation);
  read_field(j, "positions", "", s.positions);
  read_field(j, "monotonicity_threshold", "", s.monotonicity_threshold);
  read_field(j, "profile_tol", "", s.profile_tol);
  read_field(j, "outputs", "", s.outputs);
  read_field(j, "write_frames", "", s.write_frames);
  s.evolution.kappa = s.kappa;

  if (j.contains("perturbation")) {
    const auto& p = j.at("perturbation");
    reject_unknown(p, "perturbation", {"kind", "alpha", "seed"});
    read_field(p, "kind", "perturbation", s.perturbation.kind);
    read_field(p, "alpha", "perturbation", s.perturbation.alpha);
    read_field(p, "seed", "perturbation", s.perturbation.seed);
  }
  if (j.contains("grid")) {
    const auto& g = j.at("grid");
    reject_unknown(g, "grid", {"n", "period", "max_spacing"});
    read_field(g, "n", "grid", s.grid.n);
    read_field(g, "max_spacing", "grid", s.grid.max_spacing);
    if (g.contains("period")) {
      const auto& p = g.at("period");
      if (p.is_number()) {
        s.grid.period = p.get<double>();
      } else if (!(p.is_string() && p.get<std::string>() == "auto")) {
        throw ScenarioError("scenario field 'grid.period': expected a number or \"auto\"");
      }
    }
  }
  if (j.contains("evolution")) {
    const auto& e = j.at("evolution");
    reject_unknown(e, "evolution", {"dt", "cfl", "t_end", "dealias", "observer_stride", "filter"});
    if (e.contains("dt") && !e.at("dt").is_null()) {
      double dt = 0.0;
      read_field(e, "dt", "evolution", dt);
      s.evolution.dt = dt;
    }
    if (e.contains("cfl") && !e.at("cfl").is_null()) {
      double cfl = 0.0;
      read_field(e, "cfl", "evolution", cfl);
      s.evolution.cfl = cfl;
      if (!e.contains("dt") || e.at("dt").is_null()) s.evolution.dt.reset();
    }
    read_field(e, "t_end", "evolution", s.evolution.t_end);
    read_field(e, "dealias", "evolution", s.evolution.dealias);
    read_field(e, "observer_stride", "evolution", s.evolution.observer_stride);
    read_field(e, "filter", "evolution", s.evolution.filter);
  }
  if (j.contains("weight")) {
    const auto& w = j.at("weight");
    reject_unknown(w, "weight", {"b", "sigma0"});
    read_field(w, "b", "weight", s.weight_b);
    if (w.contains("sigma0") && !w.at("sigma0").is_null()) {
      double v = 0.0;
      read_field(w, "sigma0", "weight", v);
      s.sigma0 = v;
    }
  }
  s.validate();
  return s;
}

std::string scenario_to_json(const Scenario& s) {
  json j;
  j["name"] = s.name;
  j["kappa"] = s.kappa;
  j["speeds"] = s.speeds;
  j["separation"] = s.separation;
  j["positions"] = s.initial_positions();
  j["perturbation"] = {{"kind", s.perturbation.kind}, {"alpha", s.perturbation.alpha}, {"seed", s.perturbation.seed}};
  json g;
  g["n"] = s.grid.n;
  g["period"] = s.grid.period ? json(*s.grid.period) : json("auto");
  g["max_spacing"] = s.grid.max_spacing;
  j["grid"] = g;
  json e;
  e["dt"] = s.evolution.dt ? json(*s.evolution.dt) : json(nullptr);
  e["cfl"] = s.evolution.cfl ? json(*s.evolution.cfl) : json(nullptr);
  e["t_end"] = s.evolution.t_end;
  e["dealias"] = s.evolution.dealias;
  e["observer_stride"] = s.evolution.observer_stride;
  e["filter"] = s.evolution.filter;
  j["evolution"] = e;
  j["weight"] = {{"b", s.weight_b}, {"sigma0", s.sigma0 ? json(*s.sigma0) : json(nullptr)}};
  j["monotonicity_threshold"] = s.monotonicity_threshold;
  j["profile_tol"] = s.profile_tol;
  j["outputs"] = s.outputs;
  j["write_frames"] = s.write_frames;
  return j.dump(1) + "\n";
}

Scenario load_scenario(const std::filesystem::path& path) {
  std::string text;
  try {
    text = read_text(path);
  } catch (const std::runtime_error& e) {
    throw ScenarioError(e.what());
  }
  return scenario_from_json(text);
}

double auto_period(const Scenario& s) {
  const auto x = s.initial_positions();
  const double span = (x.back() - x.front()) + (s.speeds.back() - s.speeds.front()) * s.evolution.t_end;
  const double nu = decay_rate({s.speeds.front(), s.kappa});
  const double p = 2.0 * span + 40.0 / nu;
  return 8.0 * std::ceil(p / 8.0);
}

GridPtr scenario_grid(const Scenario& s) {
  const double period = s.grid.period ? *s.grid.period : auto_period(s);
  int n = s.grid.n;
  if (n == 0) {
    n = 8;
    while (period / n > s.grid.max_spacing) n *= 2;
  }
  return make_grid(n, period);
}

Field make_perturbation(const Scenario& s, const GridPtr& grid) {
  Field p(grid);
  if (s.perturbation.kind == "none") return p;
  std::mt19937_64 rng(s.perturbation.seed);
  if (s.perturbation.kind == "bump") {
    for (double xj : s.initial_positions()) {
      const double offset = -2.0 + 4.0 * uniform01(rng);
      const double width = 1.0 + uniform01(rng);
      const double sign = uniform01(rng) < 0.5 ? -1.0 : 1.0;
      const double amp = sign * (0.5 + 0.5 * uniform01(rng));
      for (int k = 0; k < grid->size(); ++k) {
        const double d = grid->wrap(grid->node(k) - xj - offset) / width;
        p[k] += amp * std::exp(-0.5 * d * d);
      }
    }
  } else {
    const int mode = 1 + static_cast<int>(uniform01(rng) * 4.0);
    const double phase = 2.0 * std::numbers::pi * uniform01(rng);
    const double k0 = 2.0 * std::numbers::pi * mode / grid->period();
    for (int k = 0; k < grid->size(); ++k) p[k] = std::cos(k0 * grid->node(k) + phase);
  }
  return p * (1.0 / l2_norm(p));
}

InitialState build_initial_state(const Scenario& s, const GridPtr& grid, ProfileCache& cache) {
  s.validate();
  InitialState st{Field(grid), soliton_train(grid, {s.speeds, s.initial_positions()}, cache), 0.0, 0.0, 0, {}};
  st.alpha_requested = s.perturbation.alpha;
  const Field p = make_perturbation(s, grid);
  double alpha = s.perturbation.kind == "none" ? 0.0 : s.perturbation.alpha;
  while (true) {
    st.u0 = st.train + alpha * p;
    st.w0 = check_w_positivity(st.u0, s.kappa);
    if (st.w0.ok) break;
    if (alpha <= 1e-12) throw ScenarioError("initial state: w0 >= 0 fails for every alpha above 1e-12");
    alpha *= 0.5;
    ++st.halvings;
  }
  st.alpha_used = alpha;
  return st;
}

InitialState build_initial_state(const Scenario& s) {
  ProfileCache cache(s.kappa, ProfileOptions{s.profile_tol});
  return build_initial_state(s, scenario_grid(s), cache);
}

std::string summary_to_json(const StabilityResult& r) {
  json j;
  j["status"] = r.status;
  if (!r.error.empty()) j["error"] = r.error;
  j["checks_pass"] = r.checks_pass();
  j["sup_error"] = r.sup_error;
  j["first_half_max"] = r.first_half_max;
  j["second_half_max"] = r.second_half_max;
  j["no_secular_growth"] = r.no_secular_growth;
  j["monotonicity"] = {{"max_increase", r.monotonicity.max_increase},
                       {"threshold", r.monotonicity.threshold},
                       {"fitted_constant", r.monotonicity.fitted_constant},
                       {"pass", r.monotonicity.pass}};
  j["apriori_ok"] = r.apriori_ok;
  j["w0"] = {{"min", r.w0.min_value}, {"ok", r.w0.ok}};
  j["alpha_requested"] = r.alpha_requested;
  j["alpha_used"] = r.alpha_used;
  j["alpha_halvings"] = r.halvings;
  j["S0"] = r.S0;
  j["H0"] = r.H0;
  j["max_S_drift"] = r.max_s_drift;
  j["max_H_drift"] = r.max_h_drift;
  j["weight"] = {{"b", r.weight.B}, {"sigma0", r.weight.sigma0}, {"gamma0", r.weight.gamma0}};
  j["grid"] = {{"n", r.n}, {"period", r.period}};
  j["dt"] = r.dt;
  j["frames"] = r.records.size();
  if (!r.records.empty()) {
    j["final_speeds"] = r.records.back().speeds;
    j["final_positions"] = r.records.back().positions;
  }
  return j.dump(1) + "\n";
}

StabilityResult run_stability(const Scenario& s, const RunOptions& options) {
  s.validate();
  StabilityResult r;
  const GridPtr grid = options.grid ? options.grid : scenario_grid(s);
  r.n = grid->size();
  r.period = grid->period();
  r.weight = s.weight();
  r.output_dir = options.output_dir ? *options.output_dir : s.output_dir();
  const auto count = static_cast<int>(s.speeds.size());

  ProfileCache cache(s.kappa, ProfileOptions{s.profile_tol});
  const InitialState init = build_initial_state(s, grid, cache);
  r.w0 = init.w0;
  r.alpha_requested = init.alpha_requested;
  r.alpha_used = init.alpha_used;
  r.halvings = init.halvings;
  const auto inv0 = evaluate_invariants(init.u0, s.kappa);
  r.S0 = inv0.S;
  r.H0 = inv0.H;

  EvolutionConfig config = s.evolution;
  config.kappa = s.kappa;
  r.dt = config.resolve_dt(init.u0);

  GuessOptions guess;
  guess.min_separation = std::min(4.0, 0.5 * s.separation);
  ModulationTracker tracker(count, cache, DecomposeOptions{}, guess);
  tracker.seed({s.speeds, s.initial_positions()});
  std::vector<Field> states;
  r.apriori_ok = true;

  Observer observe = [&](double t, const Field& u) {
    const ModulationState& m = tracker.update(t, u);
    states.push_back(u);
    StabilityRecord rec;
    rec.t = t;
    const Field frozen = soliton_train(grid, {s.speeds, m.params.positions}, cache);
    rec.train_error = l2_norm(u - frozen);
    const auto inv = evaluate_invariants(u, s.kappa);
    rec.momenta.push_back(inv.S);
    for (int j = 1; j < count; ++j) {
      const auto& x = m.params.positions;
      rec.momenta.push_back(localized_momentum(u, 0.5 * (x[j - 1] + x[j]), r.weight.B));
    }
    rec.s_drift = std::abs(inv.S - r.S0) / std::abs(r.S0);
    rec.h_drift = std::abs(inv.H - r.H0) / std::abs(r.H0);
    rec.apriori = apriori_checks(u, init.u0, u - m.residual, s.kappa);
    rec.speeds = m.params.speeds;
    rec.positions = m.params.positions;
    rec.residual_norm = m.residual_norm;
    r.apriori_ok = r.apriori_ok && rec.apriori.all_ok();
    r.max_s_drift = std::max(r.max_s_drift, rec.s_drift);
    r.max_h_drift = std::max(r.max_h_drift, rec.h_drift);
    r.records.push_back(std::move(rec));
  };

  try {
    const Observer observers[] = {observe};
    evolve(init.u0, config, observers);
  } catch (const std::exception& e) {
    r.status = "failed";
    r.error = e.what();
  }

  const double t_end = r.records.empty() ? 0.0 : r.records.back().t;
  for (const auto& rec : r.records) {
    r.sup_error = std::max(r.sup_error, rec.train_error);
    if (rec.t <= 0.5 * t_end)
      r.first_half_max = std::max(r.first_half_max, rec.train_error);
    else
      r.second_half_max = std::max(r.second_half_max, rec.train_error);
  }
  r.no_secular_growth = r.ok() && r.second_half_max <= 2.0 * r.first_half_max;

  if (r.ok()) {
    const auto frames = tracker.frames();
    r.monotonicity =
        monotonicity_check(frames, states, r.weight.B, s.monotonicity_threshold * r.S0, s.separation);
  } else {
    r.monotonicity.pass = false;
    r.monotonicity.threshold = s.monotonicity_threshold * r.S0;
  }

  if (options.persist) {
    const auto dir = r.output_dir;
    write_text(dir / "scenario.json", scenario_to_json(s));
    std::ostringstream csv;
    write_records_csv(csv, r.records, count);
    write_text(dir / "records.csv", csv.str());
    write_text(dir / "summary.json", summary_to_json(r));
    if (s.write_frames && !states.empty()) {
      FrameSet fs{grid, {}, states};
      for (const auto& rec : r.records) fs.times.push_back(rec.t);
      write_frames_binary(dir / "frames.bin", fs);
    }
    if (!r.ok()) {
      json err{{"status", r.status}, {"error", r.error}, {"t_last", t_end}, {"frames", r.records.size()}};
      write_text(dir / "error.json", err.dump(1) + "\n");
    }
  }
  return r;
}

SweepResult run_sweep(const Scenario& base, const std::vector<double>& alphas, const std::vector<double>& Ls,
                      int parallelism, bool persist) {
  if (alphas.empty()) throw ScenarioError("sweep: alpha list is empty");
  if (Ls.empty()) throw ScenarioError("sweep: L list is empty");
  std::vector<double> a(alphas), l(Ls);
  std::sort(a.begin(), a.end());
  std::sort(l.begin(), l.end());
  a.erase(std::unique(a.begin(), a.end()), a.end());
  l.erase(std::unique(l.begin(), l.end()), l.end());

  std::vector<Scenario> runs;
  for (double alpha : a)
    for (double L : l) {
      Scenario s = base;
      s.perturbation.alpha = alpha;
      if (s.perturbation.kind == "none" && alpha > 0.0) s.perturbation.kind = "bump";
      s.separation = L;
      s.positions.clear();
      s.name = base.name + "/alpha_" + number_label(alpha) + "_L_" + number_label(L);
      s.validate();
      runs.push_back(std::move(s));
    }

  // One grid for every run, sized for the widest train.
  Scenario widest = base;
  widest.separation = l.back();
  widest.positions.clear();
  const GridPtr grid = scenario_grid(widest);
  const std::filesystem::path root = base.output_dir();

  SweepResult out;
  out.gamma0 = base.weight().gamma0;
  out.rows.resize(runs.size());
  const auto nruns = static_cast<long>(runs.size());
  (void)parallelism;
#pragma omp parallel for schedule(dynamic, 1) num_threads(std::max(1, parallelism))
  for (long i = 0; i < nruns; ++i) {
    const Scenario& s = runs[static_cast<std::size_t>(i)];
    SweepRow row;
    row.alpha = s.perturbation.alpha;
    row.separation = s.separation;
    try {
      RunOptions opt;
      opt.grid = grid;
      opt.persist = persist;
      opt.output_dir = root / std::filesystem::path(s.name).filename();
      const auto res = run_stability(s, opt);
      row.status = res.status;
      row.error = res.error;
      row.sup_error = res.sup_error;
      row.w0_ok = res.w0.ok;
      row.no_secular_growth = res.no_secular_growth;
    } catch (const std::exception& e) {
      row.status = "failed";
      row.error = e.what();
    }
    row.model = row.alpha + std::exp(-out.gamma0 * row.separation / 2.0);
    out.rows[static_cast<std::size_t>(i)] = std::move(row);
  }

  std::vector<const SweepRow*> ok;
  for (const auto& row : out.rows)
    if (row.status == "ok") ok.push_back(&row);
  out.no_secular_growth = !ok.empty() && ok.size() == out.rows.size();
  for (const auto* row : ok) out.no_secular_growth = out.no_secular_growth && row->no_secular_growth;

  if (ok.size() >= 4) {
    double zy = 0.0, zz = 0.0;
    for (const auto* row : ok) {
      zy += row->model * row->sup_error;
      zz += row->model * row->model;
    }
    out.fitted_A = zy / zz;
    out.fit_available = true;
    for (auto& row : out.rows)
      if (row.status == "ok") row.residual = row.sup_error - out.fitted_A * row.model;
  } else {
    out.fit_note = "fit needs at least 4 surviving runs (have " + std::to_string(ok.size()) + ")";
  }

  for (double L : l) {
    std::vector<std::pair<double, double>> pts;
    for (const auto* row : ok)
      if (row->separation == L && row->alpha > 0.0 && row->sup_error > 0.0)
        pts.emplace_back(std::log(row->alpha), std::log(row->sup_error));
    if (pts.size() < 2) continue;
    double mx = 0.0, my = 0.0;
    for (auto [x, y] : pts) {
      mx += x;
      my += y;
    }
    mx /= static_cast<double>(pts.size());
    my /= static_cast<double>(pts.size());
    double sxy = 0.0, sxx = 0.0;
    for (auto [x, y] : pts) {
      sxy += (x - mx) * (y - my);
      sxx += (x - mx) * (x - mx);
    }
    out.alpha_slopes.emplace_back(L, sxy / sxx);
  }
  for (double alpha : a) {
    std::vector<double> errs;
    for (const auto* row : ok)
      if (row->alpha == alpha) errs.push_back(row->sup_error);
    if (errs.size() < 2) continue;
    bool mono = true;
    for (std::size_t k = 1; k < errs.size(); ++k) mono = mono && errs[k] <= errs[k - 1];
    out.monotone_in_L.emplace_back(alpha, mono);
  }

  if (persist) {
    write_text(root / "sweep.json", sweep_to_json(out));
    write_text(root / "sweep.csv", sweep_to_csv(out));
  }
  return out;
}

std::string sweep_to_json(const SweepResult& r) {
  json j;
  j["gamma0"] = r.gamma0;
  j["fit_available"] = r.fit_available;
  if (!r.fit_note.empty()) j["fit_note"] = r.fit_note;
  j["fitted_A"] = r.fitted_A;
  j["no_secular_growth"] = r.no_secular_growth;
  json slopes = json::array();
  for (auto [L, s] : r.alpha_slopes) slopes.push_back({{"L", L}, {"slope", s}});
  j["alpha_slopes"] = slopes;
  json mono = json::array();
  for (auto [alpha, m] : r.monotone_in_L) mono.push_back({{"alpha", alpha}, {"non_increasing", m}});
  j["monotone_in_L"] = mono;
  json rows = json::array();
  for (const auto& row : r.rows) {
    json o{{"alpha", row.alpha},         {"L", row.separation},
           {"status", row.status},       {"sup_error", row.sup_error},
           {"w0_ok", row.w0_ok},         {"no_secular_growth", row.no_secular_growth},
           {"model", row.model},         {"residual", row.residual}};
    if (!row.error.empty()) o["error"] = row.error;
    rows.push_back(o);
  }
  j["rows"] = rows;
  return j.dump(1) + "\n";
}

std::string sweep_to_csv(const SweepResult& r) {
  std::ostringstream os;
  os << std::setprecision(17) << "alpha,L,status,sup_error,w0_ok,no_secular_growth,model,residual\n";
  for (const auto& row : r.rows)
    os << row.alpha << ',' << row.separation << ',' << row.status << ',' << row.sup_error << ','
       << int(row.w0_ok) << ',' << int(row.no_secular_growth) << ',' << row.model << ',' << row.residual << '\n';
  return os.str();
}

}  // namespace dplab
