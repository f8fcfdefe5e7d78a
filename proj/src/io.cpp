#include "dplab/io.hpp"

#include <cmath>
#include <cstring>
#include <fstream>
#include <iomanip>
#include <map>
#include <sstream>
#include <stdexcept>

#include "json.hpp"

namespace dplab {

using nlohmann::json;

void write_text(const std::filesystem::path& path, const std::string& text) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw std::runtime_error("cannot write " + path.string());
  os << text;
  if (!os) throw std::runtime_error("write failed: " + path.string());
}

std::string read_text(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("cannot read " + path.string());
  std::ostringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

std::string profile_to_json(const SolitonProfile& profile) {
  json j;
  j["c"] = profile.params().c;
  j["kappa"] = profile.params().kappa;
  j["amplitude"] = profile.amplitude();
  j["decay_rate"] = profile.decay_rate();
  j["fitted_decay_rate"] = profile.fitted_decay_rate();
  j["tail_coeff"] = profile.tail_coeff();
  j["spacing"] = profile.spacing();
  json table = json::array();
  const auto phi = profile.table_phi();
  for (int i = 0; i < profile.table_size(); ++i)
    table.push_back({profile.table_x(i), phi[static_cast<std::size_t>(i)]});
  j["table"] = std::move(table);
  return j.dump(1) + "\n";
}

SolitonProfile profile_from_json(const std::string& text) {
  const json j = json::parse(text);
  SolitonParams p{j.at("c").get<double>(), j.at("kappa").get<double>()};
  p.validate();
  const auto& table = j.at("table");
  if (table.size() < 2) throw std::invalid_argument("profile table needs at least two nodes");
  std::vector<double> phi;
  std::vector<double> dphi;
  std::vector<double> ddphi;
  for (const auto& row : table) {
    const double v = row.at(1).get<double>();
    const auto s = profile_slope(v, p);
    phi.push_back(v);
    dphi.push_back(s.dx);
    ddphi.push_back(s.dxx);
  }
  dphi.front() = 0.0;
  const double h = table.at(1).at(0).get<double>() - table.at(0).at(0).get<double>();
  return SolitonProfile(p, h, std::move(phi), std::move(dphi), std::move(ddphi),
                        j.value("fitted_decay_rate", decay_rate(p)));
}

void write_profile(const std::filesystem::path& path, const SolitonProfile& profile) {
  write_text(path, profile_to_json(profile));
}

SolitonProfile read_profile(const std::filesystem::path& path) { return profile_from_json(read_text(path)); }

void write_trajectory_csv(const std::filesystem::path& path, const FrameSet& frames) {
  std::ostringstream os;
  os << std::setprecision(17) << "t,x,u\n";
  for (std::size_t f = 0; f < frames.states.size(); ++f)
    for (int k = 0; k < frames.grid->size(); ++k)
      os << frames.times[f] << ',' << frames.grid->node(k) << ',' << frames.states[f][k] << '\n';
  write_text(path, os.str());
}

FrameSet read_trajectory_csv(const std::filesystem::path& path) {
  std::istringstream is(read_text(path));
  std::string line;
  if (!std::getline(is, line)) throw std::runtime_error(path.string() + ": empty file");
  std::vector<double> times;
  std::map<double, std::vector<std::pair<double, double>>> rows;
  int lineno = 1;
  while (std::getline(is, line)) {
    ++lineno;
    if (line.empty()) continue;
    double t = 0.0, x = 0.0, u = 0.0;
    char c1 = 0, c2 = 0;
    std::istringstream ls(line);
    if (!(ls >> t >> c1 >> x >> c2 >> u) || c1 != ',' || c2 != ',')
      throw std::runtime_error(path.string() + ":" + std::to_string(lineno) + ": expected t,x,u");
    if (rows.find(t) == rows.end()) times.push_back(t);
    rows[t].emplace_back(x, u);
  }
  if (times.empty()) throw std::runtime_error(path.string() + ": no data rows");
  const auto& first = rows[times.front()];
  const int n = static_cast<int>(first.size());
  if (n < 2) throw std::runtime_error(path.string() + ": frame too small");
  const double h = first[1].first - first[0].first;
  FrameSet out;
  out.grid = make_grid(n, h * n);
  for (double t : times) {
    const auto& r = rows[t];
    if (static_cast<int>(r.size()) != n) throw std::runtime_error(path.string() + ": ragged frames");
    std::vector<double> u(static_cast<std::size_t>(n));
    for (int k = 0; k < n; ++k) u[static_cast<std::size_t>(k)] = r[static_cast<std::size_t>(k)].second;
    out.times.push_back(t);
    out.states.emplace_back(out.grid, std::move(u));
  }
  return out;
}

std::filesystem::path sidecar_path(const std::filesystem::path& bin) {
  auto p = bin;
  p.replace_extension(".json");
  return p;
}

void write_frames_binary(const std::filesystem::path& bin, const FrameSet& frames) {
  if (bin.has_parent_path()) std::filesystem::create_directories(bin.parent_path());
  std::ofstream os(bin, std::ios::binary | std::ios::trunc);
  if (!os) throw std::runtime_error("cannot write " + bin.string());
  for (const auto& f : frames.states)
    os.write(reinterpret_cast<const char*>(f.values().data()),
             static_cast<std::streamsize>(f.values().size() * sizeof(double)));
  if (!os) throw std::runtime_error("write failed: " + bin.string());
  json side;
  side["n"] = frames.grid->size();
  side["period"] = frames.grid->period();
  side["times"] = frames.times;
  write_text(sidecar_path(bin), side.dump(1) + "\n");
}

FrameSet read_frames_binary(const std::filesystem::path& bin) {
  const json side = json::parse(read_text(sidecar_path(bin)));
  FrameSet out;
  out.grid = make_grid(side.at("n").get<int>(), side.at("period").get<double>());
  out.times = side.at("times").get<std::vector<double>>();
  const std::string raw = read_text(bin);
  const auto n = static_cast<std::size_t>(out.grid->size());
  if (raw.size() != out.times.size() * n * sizeof(double))
    throw std::runtime_error(bin.string() + ": size does not match sidecar");
  for (std::size_t f = 0; f < out.times.size(); ++f) {
    std::vector<double> u(n);
    std::memcpy(u.data(), raw.data() + f * n * sizeof(double), n * sizeof(double));
    out.states.emplace_back(out.grid, std::move(u));
  }
  return out;
}

FrameSet read_frames(const std::filesystem::path& path) {
  if (path.extension() == ".csv") return read_trajectory_csv(path);
  return read_frames_binary(path);
}

FrameSet to_frame_set(const Trajectory& trajectory) {
  return FrameSet{trajectory.grid, trajectory.times, trajectory.states};
}

}  // namespace dplab
