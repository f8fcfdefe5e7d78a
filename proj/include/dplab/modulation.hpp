#pragma once

// Decomposition u = sum_j phi_{c_j}(x - x_j) + eps with eps S-orthogonal to
// every R_j and R_{j,x}, solved by Newton iteration on the 2N orthogonality
// conditions, and warm-started tracking along trajectories.

#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

#include "dplab/dp_evolution.hpp"
#include "dplab/soliton_profile.hpp"
#include "dplab/spectral_grid.hpp"

namespace dplab {

/// Thread-safe cache of built profiles at fixed kappa, keyed by the exact
/// speed. Cleared wholesale once it holds kCapacity entries.
class ProfileCache {
 public:
  explicit ProfileCache(double kappa, ProfileOptions options = {});

  std::shared_ptr<const SolitonProfile> get(double c);
  double kappa() const { return kappa_; }
  std::size_t size() const;
  static constexpr std::size_t kCapacity = 256;

 private:
  double kappa_;
  ProfileOptions options_;
  mutable std::mutex mutex_;
  std::map<std::int64_t, std::shared_ptr<const SolitonProfile>> profiles_;
};

struct TrainParameters {
  std::vector<double> speeds;
  std::vector<double> positions;  // increasing, not reduced modulo the period
  std::size_t size() const { return speeds.size(); }
};

struct ModulationState {
  TrainParameters params;
  Field residual;
  double residual_norm = 0.0;
  std::vector<double> ortho_residual;
  int iterations = 0;
  /// Set when the positions had to be re-sorted during the iteration.
  bool reordered = false;
};

class ModulationError : public std::runtime_error {
 public:
  ModulationError(const std::string& what, std::optional<ModulationState> last = std::nullopt)
      : std::runtime_error(what), last_iterate(std::move(last)) {}
  std::optional<ModulationState> last_iterate;
};

/// sum_j phi_{c_j}(x - x_j) sampled on the grid.
Field soliton_train(const GridPtr& grid, const TrainParameters& p, ProfileCache& cache);

/// (eps, R_j)_S and (eps, R_{j,x})_S for j = 1..N, interleaved.
std::vector<double> orthogonality_residual(const Field& u, const TrainParameters& p, ProfileCache& cache);

struct GuessOptions {
  /// Minimum periodic distance between two selected peaks.
  double min_separation = 4.0;
  /// Peaks below this fraction of max|u| are ignored.
  double noise_floor = 1e-2;
};

/// Locates the N largest separated maxima (refined on the trigonometric
/// interpolant) and converts their heights to speeds.
TrainParameters initial_guess(const Field& u, int count, double kappa, const GuessOptions& options = {});

struct DecomposeOptions {
  double tol = 1e-12;
  int max_iterations = 40;
  double speed_step = 1e-6;     // relative to c_j
  double position_step = 1e-6;  // relative to the smallest gap (1 for N = 1)
};

/// Finite-difference Jacobian of orthogonality_residual (2N x 2N, row-major,
/// columns ordered c_1, x_1, c_2, x_2, ...).
std::vector<double> modulation_jacobian(const Field& u, const TrainParameters& p, ProfileCache& cache,
                                        const DecomposeOptions& options = {});

ModulationState decompose(const Field& u, const TrainParameters& guess, ProfileCache& cache,
                          const DecomposeOptions& options = {});

struct TrackedFrame {
  double t = 0.0;
  ModulationState state;
  std::vector<double> speed_rate;  // dc_j/dt
  std::vector<double> drift;       // dx_j/dt - c_j
};

/// Incremental warm-started tracker; used both by track() and as an
/// evolution observer.
class ModulationTracker {
 public:
  ModulationTracker(int count, ProfileCache& cache, DecomposeOptions options = {},
                    GuessOptions guess = {});

  /// Uses `guess` instead of peak detection for the first frame.
  void seed(TrainParameters guess) { seed_ = std::move(guess); }
  const ModulationState& update(double t, const Field& u);
  /// Frames with finite-difference rates (central inside, one-sided at ends).
  std::vector<TrackedFrame> frames() const;
  std::size_t size() const { return states_.size(); }

 private:
  int count_;
  ProfileCache* cache_;
  DecomposeOptions options_;
  GuessOptions guess_;
  std::optional<TrainParameters> seed_;
  std::vector<double> times_;
  std::vector<ModulationState> states_;
};

/// Raised by track(); carries every frame decomposed before the failure.
class TrackingError : public ModulationError {
 public:
  TrackingError(const std::string& what, std::vector<TrackedFrame> partial_frames)
      : ModulationError(what), partial(std::move(partial_frames)) {}
  std::vector<TrackedFrame> partial;
};

std::vector<TrackedFrame> track(const Trajectory& trajectory, int count, ProfileCache& cache,
                                const DecomposeOptions& options = {}, const GuessOptions& guess = {});

/// Smallest periodic distance between consecutive positions.
double min_periodic_gap(const TrainParameters& p, double period);

}  // namespace dplab
