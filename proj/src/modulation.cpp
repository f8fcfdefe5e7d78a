#include "dplab/modulation.hpp"

#include <lapacke.h>

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

#include "dplab/kernels.hpp"

namespace dplab {

ProfileCache::ProfileCache(double kappa, ProfileOptions options) : kappa_(kappa), options_(options) {
  if (!(kappa > 0.0)) throw std::invalid_argument("ProfileCache: kappa must be positive");
}

std::shared_ptr<const SolitonProfile> ProfileCache::get(double c) {
  const auto key = std::bit_cast<std::int64_t>(c);
  {
    std::lock_guard lock(mutex_);
    if (auto it = profiles_.find(key); it != profiles_.end()) return it->second;
  }
  auto built = std::make_shared<const SolitonProfile>(build_profile(SolitonParams{c, kappa_}, options_));
  std::lock_guard lock(mutex_);
  if (profiles_.size() >= kCapacity) profiles_.clear();
  return profiles_.emplace(key, std::move(built)).first->second;
}

std::size_t ProfileCache::size() const {
  std::lock_guard lock(mutex_);
  return profiles_.size();
}

Field soliton_train(const GridPtr& grid, const TrainParameters& p, ProfileCache& cache) {
  Field sum(grid);
  for (std::size_t j = 0; j < p.size(); ++j) sum += sample_on_grid(*cache.get(p.speeds[j]), grid, p.positions[j]);
  return sum;
}

namespace {

double smallest_gap(const TrainParameters& p) {
  double g = 1.0;
  if (p.size() < 2) return g;
  g = std::numeric_limits<double>::infinity();
  for (std::size_t j = 1; j < p.size(); ++j) g = std::min(g, p.positions[j] - p.positions[j - 1]);
  return g;
}

struct Evaluation {
  Field eps;
  std::vector<double> residual;
};

Evaluation evaluate(const Field& u, const TrainParameters& p, ProfileCache& cache) {
  const GridPtr& grid = u.grid_ptr();
  Evaluation e{u, {}};
  std::vector<Field> pieces;
  pieces.reserve(p.size());
  for (std::size_t j = 0; j < p.size(); ++j) {
    pieces.push_back(sample_on_grid(*cache.get(p.speeds[j]), grid, p.positions[j]));
    e.eps -= pieces.back();
  }
  // (eps, v)_S = (s_operator(eps), v) by self-adjointness.
  const Field seps = s_operator(e.eps);
  for (const Field& r : pieces) {
    e.residual.push_back(l2_inner(seps, r));
    e.residual.push_back(l2_inner(seps, derivative(r, 1)));
  }
  return e;
}

double inf_norm(std::span<const double> v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::abs(x));
  return m;
}

void check_admissible(const TrainParameters& p, double kappa) {
  for (double c : p.speeds)
    if (!(c > 2.0 * kappa)) {
      std::ostringstream os;
      os << "modulation left the admissible family: c = " << c << " <= 2 kappa";
      throw ModulationError(os.str());
    }
}

}  // namespace

std::vector<double> orthogonality_residual(const Field& u, const TrainParameters& p, ProfileCache& cache) {
  return evaluate(u, p, cache).residual;
}

double min_periodic_gap(const TrainParameters& p, double period) {
  const std::size_t n = p.size();
  if (n < 2) return period;
  double g = std::numeric_limits<double>::infinity();
  for (std::size_t j = 0; j < n; ++j) {
    const double next = (j + 1 < n) ? p.positions[j + 1] : p.positions[0] + period;
    double d = std::fmod(next - p.positions[j], period);
    if (d < 0.0) d += period;
    g = std::min(g, std::min(d, period - d));
  }
  return g;
}

TrainParameters initial_guess(const Field& u, int count, double kappa, const GuessOptions& options) {
  if (count < 1) throw std::invalid_argument("initial_guess: soliton count must be >= 1");
  const PeriodicGrid& g = u.grid();
  const int n = g.size();
  const double floor = options.noise_floor * max_abs(u);
  std::vector<int> peaks;
  for (int k = 0; k < n; ++k) {
    const double left = u[(k + n - 1) % n];
    const double right = u[(k + 1) % n];
    if (u[k] > left && u[k] >= right && u[k] > floor) peaks.push_back(k);
  }
  std::sort(peaks.begin(), peaks.end(), [&](int a, int b) { return u[a] > u[b]; });
  auto periodic_distance = [&](double a, double b) {
    const double d = std::abs(g.wrap(a - b));
    return d;
  };
  std::vector<int> chosen;
  for (int k : peaks) {
    bool ok = true;
    for (int c : chosen)
      if (periodic_distance(g.node(k), g.node(c)) < options.min_separation) ok = false;
    if (ok) chosen.push_back(k);
    if (static_cast<int>(chosen.size()) == count) break;
  }
  if (static_cast<int>(chosen.size()) < count) {
    std::ostringstream os;
    os << "initial_guess: found " << chosen.size() << " admissible peaks, need " << count;
    throw ModulationError(os.str());
  }

  const auto spec = to_spectrum(u);
  struct Peak {
    double x, a;
  };
  std::vector<Peak> refined;
  for (int k : chosen) {
    // Parabolic start, then Newton on the interpolant's derivative.
    const double ym = u[(k + n - 1) % n], y0 = u[k], yp = u[(k + 1) % n];
    const double denom = ym - 2.0 * y0 + yp;
    double x = g.node(k) + (denom != 0.0 ? 0.5 * (ym - yp) / denom * g.spacing() : 0.0);
    for (int it = 0; it < 8; ++it) {
      const auto v = evaluate_interpolant(spec, g, x);
      if (!(v.d2 < 0.0)) break;
      const double step = v.d1 / v.d2;
      x -= std::clamp(step, -g.spacing(), g.spacing());
      if (std::abs(step) < 1e-14 * g.period()) break;
    }
    refined.push_back({g.wrap(x), evaluate_interpolant(spec, g, x).value});
  }
  std::sort(refined.begin(), refined.end(), [](const Peak& a, const Peak& b) { return a.x < b.x; });

  // Unwrap so the train is contiguous: cut the circle at its largest gap.
  const std::size_t m = refined.size();
  std::size_t start = 0;
  double widest = -1.0;
  for (std::size_t j = 0; j < m; ++j) {
    const double next = (j + 1 < m) ? refined[j + 1].x : refined[0].x + g.period();
    if (next - refined[j].x > widest) {
      widest = next - refined[j].x;
      start = (j + 1) % m;
    }
  }
  TrainParameters out;
  double offset = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    const std::size_t j = (start + i) % m;
    if (i > 0 && j == 0) offset = g.period();
    out.positions.push_back(refined[j].x + offset);
    if (!(refined[j].a > 0.0)) throw ModulationError("initial_guess: non-positive peak height");
    out.speeds.push_back(speed_from_amplitude(refined[j].a, kappa));
  }
  return out;
}

std::vector<double> modulation_jacobian(const Field& u, const TrainParameters& p, ProfileCache& cache,
                                        const DecomposeOptions& options) {
  const std::size_t m = 2 * p.size();
  const auto base = evaluate(u, p, cache).residual;
  const double gap = smallest_gap(p);
  std::vector<double> jac(m * m);
  for (std::size_t col = 0; col < m; ++col) {
    TrainParameters q = p;
    const std::size_t j = col / 2;
    double step;
    if (col % 2 == 0) {
      step = options.speed_step * p.speeds[j];
      q.speeds[j] += step;
      step = q.speeds[j] - p.speeds[j];
    } else {
      step = options.position_step * gap;
      q.positions[j] += step;
      step = q.positions[j] - p.positions[j];
    }
    const auto r = evaluate(u, q, cache).residual;
    for (std::size_t row = 0; row < m; ++row) jac[row * m + col] = (r[row] - base[row]) / step;
  }
  return jac;
}

ModulationState decompose(const Field& u, const TrainParameters& guess, ProfileCache& cache,
                          const DecomposeOptions& options) {
  if (guess.speeds.size() != guess.positions.size() || guess.speeds.empty())
    throw std::invalid_argument("decompose: speeds and positions must be non-empty and of equal length");
  check_admissible(guess, cache.kappa());
  const double unorm = l2_norm(u);
  const double target = options.tol * std::max(unorm, 1e-300);
  const auto m = static_cast<lapack_int>(2 * guess.size());

  TrainParameters p = guess;
  bool reordered = false;
  auto eval = evaluate(u, p, cache);
  double rnorm = inf_norm(eval.residual);
  auto make_state = [&](int iterations) {
    ModulationState s{p, eval.eps, l2_norm(eval.eps), eval.residual, iterations, reordered};
    return s;
  };

  for (int it = 0; it <= options.max_iterations; ++it) {
    if (rnorm <= target) return make_state(it);
    if (it == options.max_iterations) break;

    auto jac = modulation_jacobian(u, p, cache, options);
    std::vector<double> rhs(eval.residual);
    std::vector<lapack_int> piv(static_cast<std::size_t>(m));
    const lapack_int info = LAPACKE_dgesv(LAPACK_ROW_MAJOR, m, 1, jac.data(), m, piv.data(), rhs.data(), 1);
    if (info != 0) throw ModulationError("decompose: singular modulation Jacobian", make_state(it));

    // Damped Newton: halve the step until the residual decreases.
    double lambda = 1.0;
    bool accepted = false;
    for (int ls = 0; ls < 12; ++ls) {
      TrainParameters q = p;
      for (std::size_t j = 0; j < p.size(); ++j) {
        q.speeds[j] -= lambda * rhs[2 * j];
        q.positions[j] -= lambda * rhs[2 * j + 1];
      }
      bool admissible = true;
      for (double c : q.speeds) admissible = admissible && c > 2.0 * cache.kappa();
      if (admissible) {
        auto trial = evaluate(u, q, cache);
        const double tn = inf_norm(trial.residual);
        if (tn < rnorm || tn <= target) {
          p = std::move(q);
          eval = std::move(trial);
          rnorm = tn;
          accepted = true;
          break;
        }
      }
      lambda *= 0.5;
    }
    if (!accepted) {
      check_admissible(p, cache.kappa());
      throw ModulationError("decompose: Newton iteration stalled", make_state(it + 1));
    }
    if (!std::is_sorted(p.positions.begin(), p.positions.end())) {
      std::vector<std::size_t> idx(p.size());
      std::iota(idx.begin(), idx.end(), 0);
      std::sort(idx.begin(), idx.end(), [&](auto a, auto b) { return p.positions[a] < p.positions[b]; });
      TrainParameters s;
      for (auto i : idx) {
        s.speeds.push_back(p.speeds[i]);
        s.positions.push_back(p.positions[i]);
      }
      p = std::move(s);
      reordered = true;
      eval = evaluate(u, p, cache);
      rnorm = inf_norm(eval.residual);
    }
  }
  throw ModulationError("decompose: Newton iteration did not converge", make_state(options.max_iterations));
}

// ---------------------------------------------------------------------------

ModulationTracker::ModulationTracker(int count, ProfileCache& cache, DecomposeOptions options,
                                     GuessOptions guess)
    : count_(count), cache_(&cache), options_(options), guess_(guess) {
  if (count < 1) throw std::invalid_argument("ModulationTracker: count must be >= 1");
}

const ModulationState& ModulationTracker::update(double t, const Field& u) {
  TrainParameters start;
  if (states_.empty() && seed_) {
    start = *seed_;
  } else if (states_.empty()) {
    start = initial_guess(u, count_, cache_->kappa(), guess_);
  } else {
    start = states_.back().params;
    const double dt = t - times_.back();
    for (std::size_t j = 0; j < start.size(); ++j) start.positions[j] += start.speeds[j] * dt;
  }
  auto state = decompose(u, start, *cache_, options_);
  if (state.reordered) throw ModulationError("tracking: soliton labels changed order");
  const double merge = 0.5 * guess_.min_separation;
  if (count_ > 1 && min_periodic_gap(state.params, u.grid().period()) < merge)
    throw ModulationError("tracking: solitons merged", state);
  times_.push_back(t);
  states_.push_back(std::move(state));
  return states_.back();
}

std::vector<TrackedFrame> ModulationTracker::frames() const {
  std::vector<TrackedFrame> out;
  const std::size_t m = states_.size();
  for (std::size_t i = 0; i < m; ++i) {
    TrackedFrame f{times_[i], states_[i], {}, {}};
    const std::size_t a = (i == 0) ? 0 : i - 1;
    const std::size_t b = (i + 1 < m) ? i + 1 : i;
    const std::size_t N = states_[i].params.size();
    f.speed_rate.assign(N, 0.0);
    f.drift.assign(N, 0.0);
    if (b > a) {
      const double dt = times_[b] - times_[a];
      for (std::size_t j = 0; j < N; ++j) {
        f.speed_rate[j] = (states_[b].params.speeds[j] - states_[a].params.speeds[j]) / dt;
        const double xdot = (states_[b].params.positions[j] - states_[a].params.positions[j]) / dt;
        f.drift[j] = xdot - states_[i].params.speeds[j];
      }
    }
    out.push_back(std::move(f));
  }
  return out;
}

std::vector<TrackedFrame> track(const Trajectory& trajectory, int count, ProfileCache& cache,
                                const DecomposeOptions& options, const GuessOptions& guess) {
  ModulationTracker tracker(count, cache, options, guess);
  for (std::size_t i = 0; i < trajectory.states.size(); ++i) {
    try {
      tracker.update(trajectory.times[i], trajectory.states[i]);
    } catch (const ModulationError& e) {
      std::ostringstream os;
      os << "track: frame " << i << " (t=" << trajectory.times[i] << ") failed after " << tracker.size()
         << " frames: " << e.what();
      throw TrackingError(os.str(), tracker.frames());
    }
  }
  return tracker.frames();
}

}  // namespace dplab
