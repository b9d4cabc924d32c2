// Copyright 2026 The echoprop Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// CSV and JSON persistence for signals, trajectories, echo runs and
// gradient estimates.
//
// Numbers are written with 17 significant digits so a read-back reproduces
// every double bit-for-bit.

#pragma once

#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"

#include "echoprop/core.hpp"
#include "echoprop/rhel.hpp"

namespace echoprop {

using Json = nlohmann::ordered_json;

class IoError : public Error {
 public:
  using Error::Error;
};

namespace detail {

inline std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline std::ofstream open_out(const std::filesystem::path& path) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  return out;
}

inline std::vector<std::string> split(const std::string& line, char sep = ',') {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, sep)) out.push_back(cell);
  if (!line.empty() && line.back() == sep) out.emplace_back();
  return out;
}

inline double parse_double(const std::string& s, const std::string& where) {
  try {
    std::size_t used = 0;
    const double v = std::stod(s, &used);
    if (used != s.size()) throw IoError("");
    return v;
  } catch (const std::exception&) {
    throw IoError("bad number '" + s + "' in " + where);
  }
}

inline Json vec_json(const Vec& v) {
  Json a = Json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v(i));
  return a;
}

}  // namespace detail

inline Json to_json(const Vec& v) { return detail::vec_json(v); }

inline Vec vec_from_json(const Json& j) {
  if (!j.is_array()) throw IoError("expected a numeric array");
  Vec v(static_cast<Eigen::Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) {
    if (!j[i].is_number()) throw IoError("expected a numeric array");
    v(static_cast<Eigen::Index>(i)) = j[i].get<double>();
  }
  return v;
}

inline Json to_json(const TimeGrid& g) {
  return Json{{"t_start", g.t_start()}, {"dt", g.dt()}, {"n_steps", g.n_steps()}};
}

inline Json to_json(const GradientEstimate& g) {
  return Json{{"method", std::string(to_string(g.method))},
              {"beta", g.beta},
              {"nudging", std::string(to_string(g.nudging))},
              {"value", detail::vec_json(g.value)},
              {"seconds", g.seconds}};
}

inline GradientEstimate gradient_from_json(const Json& j) {
  GradientEstimate g(vec_from_json(j.at("value")), parse_method(j.at("method").get<std::string>()),
                     j.at("beta").get<double>(), parse_nudging(j.at("nudging").get<std::string>()));
  g.seconds = j.value("seconds", 0.0);
  return g;
}

// ---------------------------------------------------------------------------
// Signals: header t,x_0..x_{dx-1}
// ---------------------------------------------------------------------------

inline void write_signal_csv(std::ostream& out, const Signal& s, const std::string& prefix = "x") {
  out << "t";
  for (int i = 0; i < s.dim(); ++i) out << ',' << prefix << '_' << i;
  out << '\n';
  for (int k = 0; k <= s.grid().n_steps(); ++k) {
    out << detail::fmt(s.grid().time(k));
    for (int i = 0; i < s.dim(); ++i) out << ',' << detail::fmt(s.at(k)(i));
    out << '\n';
  }
}

inline void write_signal_csv(const std::filesystem::path& path, const Signal& s, const std::string& prefix = "x") {
  auto out = detail::open_out(path);
  write_signal_csv(out, s, prefix);
}

/// Reads a signal written by write_signal_csv; the grid is rebuilt from the
/// first two time stamps and the row count.
inline Signal read_signal_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw IoError("signal CSV: missing header");
  const auto header = detail::split(line);
  if (header.empty() || header[0] != "t") throw IoError("signal CSV: first column must be 't'");
  const int dim = static_cast<int>(header.size()) - 1;
  std::vector<double> times;
  std::vector<Vec> values;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto cells = detail::split(line);
    if (static_cast<int>(cells.size()) != dim + 1) throw IoError("signal CSV: ragged row " + std::to_string(values.size() + 1));
    times.push_back(detail::parse_double(cells[0], "signal CSV"));
    Vec v(dim);
    for (int i = 0; i < dim; ++i) v(i) = detail::parse_double(cells[static_cast<std::size_t>(i) + 1], "signal CSV");
    values.push_back(std::move(v));
  }
  if (values.size() < 2) throw IoError("signal CSV: need at least two rows");
  const int n = static_cast<int>(values.size()) - 1;
  const double dt = (times.back() - times.front()) / n;
  return Signal(TimeGrid(times.front(), dt, n), std::move(values));
}

inline Signal read_signal_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  return read_signal_csv(in);
}

// ---------------------------------------------------------------------------
// Trajectories: header [phase,]t,s_0..,p_0.. (v_ for Lagrangian views)
// ---------------------------------------------------------------------------

inline void write_trajectory_csv(std::ostream& out, const Trajectory& tr, const std::string& phase = "") {
  const int d = tr.dim();
  const char rate = tr.kind() == TrajectoryKind::hamiltonian ? 'p' : 'v';
  if (!phase.empty()) out << "phase,";
  out << 't';
  for (int i = 0; i < d; ++i) out << ",s_" << i;
  for (int i = 0; i < d; ++i) out << ',' << rate << '_' << i;
  out << '\n';
  for (int k = 0; k < static_cast<int>(tr.size()); ++k) {
    if (!phase.empty()) out << phase << ',';
    out << detail::fmt(tr.grid().time(k));
    for (int i = 0; i < d; ++i) out << ',' << detail::fmt(tr.position(k)(i));
    for (int i = 0; i < d; ++i) out << ',' << detail::fmt(tr.rate(k)(i));
    out << '\n';
  }
}

inline void write_trajectory_csv(const std::filesystem::path& path, const Trajectory& tr, const std::string& phase = "") {
  auto out = detail::open_out(path);
  write_trajectory_csv(out, tr, phase);
}

inline Trajectory read_trajectory_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw IoError("trajectory CSV: missing header");
  auto header = detail::split(line);
  const bool has_phase = !header.empty() && header[0] == "phase";
  const std::size_t off = has_phase ? 1 : 0;
  if (header.size() < off + 3 || header[off] != "t" || (header.size() - off - 1) % 2 != 0) {
    throw IoError("trajectory CSV: bad header");
  }
  const int d = static_cast<int>(header.size() - off - 1) / 2;
  const char rate = header[off + 1 + static_cast<std::size_t>(d)][0];
  if (rate != 'p' && rate != 'v') throw IoError("trajectory CSV: rate columns must be p_ or v_");
  std::vector<double> times;
  std::vector<Vec> pos, rates;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto cells = detail::split(line);
    if (cells.size() != header.size()) throw IoError("trajectory CSV: ragged row");
    times.push_back(detail::parse_double(cells[off], "trajectory CSV"));
    Vec s(d), r(d);
    for (int i = 0; i < d; ++i) {
      s(i) = detail::parse_double(cells[off + 1 + static_cast<std::size_t>(i)], "trajectory CSV");
      r(i) = detail::parse_double(cells[off + 1 + static_cast<std::size_t>(d + i)], "trajectory CSV");
    }
    pos.push_back(std::move(s));
    rates.push_back(std::move(r));
  }
  if (pos.size() < 2) throw IoError("trajectory CSV: need at least two rows");
  const int n = static_cast<int>(pos.size()) - 1;
  return Trajectory(TimeGrid(times.front(), (times.back() - times.front()) / n, n),
                    rate == 'p' ? TrajectoryKind::hamiltonian : TrajectoryKind::lagrangian, std::move(pos),
                    std::move(rates));
}

inline Trajectory read_trajectory_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  return read_trajectory_csv(in);
}

/// forward.csv and echo.csv (both on grid time [0, T], with a phase column)
/// plus echo_manifest.json.
inline void write_echo_run(const std::filesystem::path& dir, const EchoRun& run, const std::string& model_id) {
  write_trajectory_csv(dir / "forward.csv", run.forward, "forward");
  write_trajectory_csv(dir / "echo.csv", run.echo, "echo");
  Json m{{"beta", run.beta},
         {"grid", to_json(run.forward.grid())},
         {"model", model_id},
         {"forward_logical_start", -run.forward.grid().horizon()},
         {"files", {"forward.csv", "echo.csv"}}};
  auto out = detail::open_out(dir / "echo_manifest.json");
  out << m.dump(2) << '\n';
}

/// 64-bit FNV-1a, used to fingerprint manifest payloads.
inline std::uint64_t fnv1a(const std::string& bytes) {
  std::uint64_t h = 14695981039346656037ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

inline std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

inline void write_json(const std::filesystem::path& path, const Json& j) {
  auto out = detail::open_out(path);
  out << j.dump(2) << '\n';
}

inline Json read_json(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  try {
    return Json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw IoError(path.string() + ": " + e.what());
  }
}

}  // namespace echoprop
