/*
Copyright 2026 The noisy_gossip Authors

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
*/

#pragma once

#include <algorithm>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "../bounds.hpp"
#include "../errors.hpp"
#include "../random.hpp"
#include "config.hpp"
#include "experiment.hpp"

#ifndef NOISY_GOSSIP_VERSION
#define NOISY_GOSSIP_VERSION "0.1.0"
#endif

namespace noisy_gossip {

inline constexpr const char* kTraceCsvHeader = "step,tss,phi_bar,phi,running_avg,drift,parallel_time";
inline constexpr const char* kDecompositionCsvHeader = "t0,t1,s_prime,s_star,s_minus,bound_holds";

inline std::string build_id() { return std::string("noisy_gossip ") + NOISY_GOSSIP_VERSION + " (" + __VERSION__ + ")"; }

/// 17 significant digits: parses back to the identical double.
inline std::string format_real(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline std::string trace_csv(const std::vector<PotentialSnapshot>& snapshots) {
  std::string out = kTraceCsvHeader;
  out += '\n';
  for (const PotentialSnapshot& s : snapshots) {
    out += std::to_string(s.step);
    for (double v : {s.tss, s.phi_bar, s.phi, s.running_avg, s.drift, s.parallel_time}) {
      out += ',';
      out += format_real(v);
    }
    out += '\n';
  }
  return out;
}

inline std::string decomposition_csv(const std::vector<DecompositionRecord>& records) {
  std::string out = kDecompositionCsvHeader;
  out += '\n';
  for (const DecompositionRecord& r : records) {
    out += std::to_string(r.acc.t0) + ',' + std::to_string(r.acc.t1) + ',' + format_real(r.acc.s_prime) + ',' +
           format_real(r.acc.s_star) + ',' + format_real(r.acc.s_minus) + ',' + (r.bound_holds ? "1" : "0") + '\n';
  }
  return out;
}

namespace detail {

inline std::vector<std::vector<std::string>> split_csv(const std::string& text, const char* header,
                                                       std::size_t columns) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line) || line != header) throw ParameterError("csv: unexpected header");
  std::vector<std::vector<std::string>> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<std::string> cells;
    std::size_t start = 0;
    while (true) {
      const auto comma = line.find(',', start);
      cells.push_back(line.substr(start, comma == std::string::npos ? std::string::npos : comma - start));
      if (comma == std::string::npos) break;
      start = comma + 1;
    }
    if (cells.size() != columns) throw ParameterError("csv: wrong number of columns in '" + line + "'");
    rows.push_back(std::move(cells));
  }
  return rows;
}

inline double parse_real(const std::string& s) {
  char* end = nullptr;
  const double v = std::strtod(s.c_str(), &end);
  if (end == s.c_str() || *end != '\0') throw ParameterError("csv: bad number '" + s + "'");
  return v;
}

inline std::int64_t parse_int(const std::string& s) {
  char* end = nullptr;
  const long long v = std::strtoll(s.c_str(), &end, 10);
  if (end == s.c_str() || *end != '\0') throw ParameterError("csv: bad integer '" + s + "'");
  return v;
}

}  // namespace detail

inline std::vector<PotentialSnapshot> parse_trace_csv(const std::string& text) {
  std::vector<PotentialSnapshot> out;
  for (const auto& c : detail::split_csv(text, kTraceCsvHeader, 7)) {
    PotentialSnapshot s;
    s.step = static_cast<std::uint64_t>(detail::parse_int(c[0]));
    s.tss = detail::parse_real(c[1]);
    s.phi_bar = detail::parse_real(c[2]);
    s.phi = detail::parse_real(c[3]);
    s.running_avg = detail::parse_real(c[4]);
    s.drift = detail::parse_real(c[5]);
    s.parallel_time = detail::parse_real(c[6]);
    out.push_back(s);
  }
  return out;
}

inline std::vector<DecompositionRecord> parse_decomposition_csv(const std::string& text) {
  std::vector<DecompositionRecord> out;
  for (const auto& c : detail::split_csv(text, kDecompositionCsvHeader, 6)) {
    DecompositionRecord r;
    r.acc.t0 = detail::parse_int(c[0]);
    r.acc.t1 = detail::parse_int(c[1]);
    r.acc.s_prime = detail::parse_real(c[2]);
    r.acc.s_star = detail::parse_real(c[3]);
    r.acc.s_minus = detail::parse_real(c[4]);
    r.bound_holds = c[5] == "1";
    r.interval = {r.acc.t0, r.acc.t1};
    out.push_back(r);
  }
  return out;
}

/// Writes `text` to `path`, creating missing parent directories.
inline void write_text(const std::filesystem::path& path, const std::string& text) {
  if (path.has_parent_path()) {
    std::error_code ec;
    std::filesystem::create_directories(path.parent_path(), ec);
    if (ec) throw IoError("cannot create directory '" + path.parent_path().string() + "': " + ec.message());
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
  out << text;
  out.flush();
  if (!out) throw IoError("failed writing '" + path.string() + "'");
}

inline std::string read_text(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path.string() + "' for reading");
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

inline void emit_csv(const TraceRecord& trace, const std::filesystem::path& path) {
  write_text(path, trace_csv(trace.snapshots));
}

inline void emit_decomposition_csv(const TraceRecord& trace, const std::filesystem::path& path) {
  write_text(path, decomposition_csv(trace.decompositions));
}

inline json to_json(const PotentialSnapshot& s) {
  return {{"step", s.step},          {"tss", s.tss},     {"phi_bar", s.phi_bar},
          {"phi", s.phi},            {"running_avg", s.running_avg}, {"drift", s.drift},
          {"parallel_time", s.parallel_time}};
}

inline json to_json(const Histogram& h) {
  return {{"bin_edges", h.bin_edges}, {"counts", h.counts}, {"total", h.total}};
}

inline json to_json(const BoundsReport& r) {
  json j = {{"n", r.n},
            {"t", r.t},
            {"delta", r.delta},
            {"phi0", r.phi0},
            {"gamma", r.gamma},
            {"c", r.c},
            {"variance", r.moments.variance},
            {"e_nprime", r.moments.e_nprime},
            {"e_nstar_sq", r.moments.e_nstar_sq},
            {"var_nprime", r.moments.var_nprime},
            {"m_prime", r.m_prime},
            {"m_star", r.m_star},
            {"m_combined", r.m_combined},
            {"smooth", r.smooth},
            {"b_prime", r.b_prime},
            {"z", r.z},
            {"b_star", r.b_star},
            {"s_minus_tail", r.s_minus_tail},
            {"drift_bound_general", r.drift_general},
            {"standing_assumption", r.standing_assumption}};
  j["convergence_time"] = r.convergence_time ? json(*r.convergence_time) : json(nullptr);
  if (r.drift_gaussian) {
    j["drift_bound_gaussian_upper"] = r.drift_gaussian->upper;
    j["drift_bound_gaussian_lower_prob"] = r.drift_gaussian->lower_prob;
  } else {
    j["drift_bound_gaussian_upper"] = nullptr;
    j["drift_bound_gaussian_lower_prob"] = nullptr;
  }
  return j;
}

/// Bounds for a config: t defaults to the run length and phi0 to phi_bar of
/// run 0's initial population.
inline BoundsReport bounds_for(const ExperimentConfig& c) {
  const std::int64_t t = c.bounds.t ? *c.bounds.t : static_cast<std::int64_t>(c.steps);
  double phi0 = 0.0;
  if (c.bounds.phi0) {
    phi0 = *c.bounds.phi0;
  } else {
    RandomStream rng(run_seed(c.master_seed, 0));
    phi0 = phi_bar(std::span<const double>(initial_values(c, rng)));
  }
  return evaluate_bounds(c.noise, c.n, t, c.bounds.delta, phi0, c.bounds.gamma, c.bounds.c);
}

struct EnsembleStats {
  double mean_final_phi_bar = 0.0;
  double mean_final_drift = 0.0;
  double var_final_drift = 0.0;
  std::size_t decomposition_checks = 0;
  std::size_t decomposition_violations = 0;
};

inline EnsembleStats ensemble_stats(const std::vector<TraceRecord>& traces) {
  EnsembleStats s;
  if (traces.empty()) return s;
  const double m = static_cast<double>(traces.size());
  for (const TraceRecord& t : traces) {
    s.mean_final_phi_bar += t.snapshots.back().phi_bar / m;
    s.mean_final_drift += t.snapshots.back().drift / m;
    for (const auto& d : t.decompositions) {
      ++s.decomposition_checks;
      if (!d.bound_holds) ++s.decomposition_violations;
    }
  }
  if (traces.size() > 1) {
    for (const TraceRecord& t : traces) {
      const double e = t.snapshots.back().drift - s.mean_final_drift;
      s.var_final_drift += e * e / (m - 1.0);
    }
  }
  return s;
}

inline json summary_json(const ExperimentConfig& c, const std::vector<TraceRecord>& traces,
                         const std::optional<BoundsReport>& bounds) {
  json runs = json::array();
  for (const TraceRecord& t : traces) {
    runs.push_back({{"run_index", t.run_index},
                    {"seed", t.seed},
                    {"final", to_json(t.snapshots.back())},
                    {"final_values", {{"min", t.final_summary.min},
                                      {"max", t.final_summary.max},
                                      {"mean", t.final_summary.mean},
                                      {"histogram", to_json(t.final_summary.histogram)}}},
                    {"decomposition_violations",
                     std::count_if(t.decompositions.begin(), t.decompositions.end(),
                                   [](const DecompositionRecord& d) { return !d.bound_holds; })}});
  }
  const EnsembleStats e = ensemble_stats(traces);
  return {{"metadata",
           {{"master_seed", c.master_seed}, {"generator", RandomStream::generator_name}, {"build_id", build_id()}}},
          {"config", to_json(c)},
          {"runs", runs},
          {"ensemble",
           {{"runs", traces.size()},
            {"mean_final_phi_bar", e.mean_final_phi_bar},
            {"mean_final_drift", e.mean_final_drift},
            {"var_final_drift", e.var_final_drift},
            {"decomposition_checks", e.decomposition_checks},
            {"decomposition_violations", e.decomposition_violations}}},
          {"bounds", bounds ? to_json(*bounds) : json(nullptr)}};
}

inline void emit_json(const ExperimentConfig& c, const std::vector<TraceRecord>& traces,
                      const std::optional<BoundsReport>& bounds, const std::filesystem::path& path) {
  write_text(path, summary_json(c, traces, bounds).dump(2) + "\n");
}

/// Writes trace_run<r>.csv, decomposition_run<r>.csv (when intervals are
/// configured) and summary.json into `dir`.
inline void emit_run_outputs(const ExperimentConfig& c, const std::vector<TraceRecord>& traces,
                             const std::optional<BoundsReport>& bounds, const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw IoError("cannot create directory '" + dir.string() + "': " + ec.message());
  for (const TraceRecord& t : traces) {
    emit_csv(t, dir / ("trace_run" + std::to_string(t.run_index) + ".csv"));
    if (!c.decomposition_intervals.empty())
      emit_decomposition_csv(t, dir / ("decomposition_run" + std::to_string(t.run_index) + ".csv"));
  }
  emit_json(c, traces, bounds, dir / "summary.json");
}

}  // namespace noisy_gossip
