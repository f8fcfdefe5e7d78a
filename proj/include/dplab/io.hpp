#pragma once

// File formats: profile JSON, trajectory CSV (t, x, u), and raw frames as
// row-major little-endian doubles with a JSON sidecar {n, period, times}.

#include <filesystem>
#include <string>
#include <vector>

#include "dplab/dp_evolution.hpp"
#include "dplab/soliton_profile.hpp"
#include "dplab/spectral_grid.hpp"

namespace dplab {

std::string profile_to_json(const SolitonProfile& profile);
/// Rebuilds a profile from its JSON export; slopes are recomputed from phi.
SolitonProfile profile_from_json(const std::string& text);

void write_profile(const std::filesystem::path& path, const SolitonProfile& profile);
SolitonProfile read_profile(const std::filesystem::path& path);

struct FrameSet {
  GridPtr grid;
  std::vector<double> times;
  std::vector<Field> states;
};

void write_trajectory_csv(const std::filesystem::path& path, const FrameSet& frames);
FrameSet read_trajectory_csv(const std::filesystem::path& path);

/// frames.bin plus frames.json next to it.
std::filesystem::path sidecar_path(const std::filesystem::path& bin);
void write_frames_binary(const std::filesystem::path& bin, const FrameSet& frames);
FrameSet read_frames_binary(const std::filesystem::path& bin);

/// Dispatches on the extension (.csv, otherwise binary with sidecar).
FrameSet read_frames(const std::filesystem::path& path);

FrameSet to_frame_set(const Trajectory& trajectory);

/// Writes text atomically enough for our purposes (truncate + write); throws
/// std::runtime_error with the path on failure.
void write_text(const std::filesystem::path& path, const std::string& text);
std::string read_text(const std::filesystem::path& path);

}  // namespace dplab
