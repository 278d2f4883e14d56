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
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <optional>
#include <string>
#include <string_view>
#include <type_traits>
#include <variant>
#include <vector>

#include <json.hpp>

#include "../dynamics.hpp"
#include "../errors.hpp"
#include "../noise.hpp"
#include "../random.hpp"

namespace noisy_gossip {

using json = nlohmann::json;

/// Values drawn uniformly from [lo, hi]; integers from [ceil(lo), floor(hi)]
/// when `integer` is set.
struct UniformInit {
  double lo = 0.0;
  double hi = 1.0;
  bool integer = false;
};

struct ConstantInit {
  double value = 0.0;
};

struct ExplicitInit {
  std::vector<double> values;
};

using InitSpec = std::variant<UniformInit, ConstantInit, ExplicitInit>;

enum class Scheduler { sequential, synchronous };

/// Decomposition interval (t0, t1].
struct Interval {
  std::int64_t t0 = 0;
  std::int64_t t1 = 0;

  friend bool operator==(const Interval&, const Interval&) = default;
};

/// Parameters for the closed-form bounds reported alongside a run. Unset
/// `t` means the run length; unset `phi0` means phi_bar of run 0's initial
/// population.
struct BoundsParams {
  double delta = 0.1;
  double gamma = 0.5;
  double c = 30.0;
  std::optional<std::int64_t> t;
  std::optional<double> phi0;
};

struct ExperimentConfig {
  std::size_t n = 1000;
  InitSpec init = UniformInit{0.0, 1000.0, false};
  Scheduler scheduler = Scheduler::sequential;
  NoiseModel noise = GaussianNoise{1.0};
  UpdateRule rule = RealRule{};
  std::uint64_t steps = 10000;
  std::uint64_t master_seed = 1;
  std::uint64_t record_every = 1000;
  std::vector<Interval> decomposition_intervals;
  std::size_t runs = 1;
  BoundsParams bounds;
};

inline void validate(const ExperimentConfig& c) {
  auto fail = [](const std::string& field, const std::string& why) {
    throw ParameterError("config." + field + ": " + why);
  };
  if (c.n < 2) fail("n", "must be >= 2");
  if (c.steps < 1) fail("steps", "must be >= 1");
  if (c.record_every < 1) fail("record_every", "must be >= 1");
  if (c.record_every > c.steps) fail("record_every", "must not exceed steps");
  if (c.runs < 1) fail("runs", "must be >= 1");
  if (const auto* e = std::get_if<ExplicitInit>(&c.init); e && e->values.size() != c.n)
    fail("init.values", "length must equal n");
  if (const auto* u = std::get_if<UniformInit>(&c.init)) {
    if (!(u->lo <= u->hi)) fail("init", "requires lo <= hi");
    if (u->integer && std::ceil(u->lo) > std::floor(u->hi)) fail("init", "integer range is empty");
  }
  for (const Interval& iv : c.decomposition_intervals) {
    if (iv.t0 < 0 || iv.t1 <= iv.t0 || static_cast<std::uint64_t>(iv.t1) > c.steps)
      fail("decomposition_intervals", "each interval needs 0 <= t0 < t1 <= steps");
  }
  if (!c.decomposition_intervals.empty() && c.scheduler != Scheduler::sequential)
    fail("decomposition_intervals", "decomposition is defined for the sequential scheduler only");
  try {
    validate(c.noise);
  } catch (const ParameterError& e) {
    fail("noise", e.what());
  }
  try {
    validate(c.rule);
  } catch (const ParameterError& e) {
    fail("rule", e.what());
  }
  if (!(c.bounds.delta > 0.0 && c.bounds.delta < 1.0)) fail("bounds.delta", "must lie in (0, 1)");
  if (!(c.bounds.gamma > 0.0 && c.bounds.gamma < 1.0)) fail("bounds.gamma", "must lie in (0, 1)");
}

inline std::vector<double> initial_values(const ExperimentConfig& c, RandomStream& rng) {
  return std::visit(
      [&](const auto& init) -> std::vector<double> {
        using T = std::decay_t<decltype(init)>;
        std::vector<double> v(c.n);
        if constexpr (std::is_same_v<T, UniformInit>) {
          for (double& x : v)
            x = init.integer ? static_cast<double>(rng.integer(static_cast<std::int64_t>(std::ceil(init.lo)),
                                                               static_cast<std::int64_t>(std::floor(init.hi))))
                             : rng.uniform(init.lo, init.hi);
        } else if constexpr (std::is_same_v<T, ConstantInit>) {
          std::fill(v.begin(), v.end(), init.value);
        } else {
          v = init.values;
        }
        return v;
      },
      c.init);
}

// JSON mapping. Parsing is strict: unknown keys are errors, so a typo in a
// config file or an override never goes unnoticed.

namespace detail {

inline void expect_object(const json& j, const std::string& path) {
  if (!j.is_object()) throw ParameterError("config." + path + ": expected an object");
}

inline void expect_keys(const json& j, const std::string& path, std::initializer_list<std::string_view> allowed) {
  expect_object(j, path);
  for (const auto& item : j.items()) {
    bool ok = false;
    for (std::string_view a : allowed) ok = ok || item.key() == a;
    if (!ok) throw ParameterError("config." + (path.empty() ? "" : path + ".") + item.key() + ": unknown field");
  }
}

template <typename T>
T get_field(const json& j, const std::string& path, const char* key, T fallback) {
  if (!j.contains(key)) return fallback;
  try {
    return j.at(key).get<T>();
  } catch (const json::exception&) {
    throw ParameterError("config." + (path.empty() ? "" : path + ".") + key + ": wrong type");
  }
}

inline std::string kind_of(const json& j, const std::string& path) {
  expect_object(j, path);
  if (!j.contains("kind") || !j.at("kind").is_string()) throw ParameterError("config." + path + ".kind: missing");
  return j.at("kind").get<std::string>();
}

}  // namespace detail

inline json to_json(const NoiseModel& m) {
  return std::visit(
      [](const auto& v) -> json {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, GaussianNoise>)
          return {{"kind", "gaussian"}, {"sigma2", v.sigma2}};
        else if constexpr (std::is_same_v<T, DiscreteGeometricNoise>)
          return {{"kind", "discrete_geometric"}, {"p", v.p}};
        else
          return {{"kind", "zero"}};
      },
      m);
}

inline NoiseModel noise_from_json(const json& j, const std::string& path = "noise") {
  const std::string kind = detail::kind_of(j, path);
  if (kind == "gaussian") {
    detail::expect_keys(j, path, {"kind", "sigma2"});
    return GaussianNoise{detail::get_field(j, path, "sigma2", 1.0)};
  }
  if (kind == "discrete_geometric") {
    detail::expect_keys(j, path, {"kind", "p"});
    return DiscreteGeometricNoise{detail::get_field(j, path, "p", 0.8)};
  }
  if (kind == "zero") {
    detail::expect_keys(j, path, {"kind"});
    return ZeroNoise{};
  }
  throw ParameterError("config." + path + ".kind: unknown noise model '" + kind + "'");
}

inline json to_json(const UpdateRule& r) {
  return std::visit(
      [](const auto& v) -> json {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, RealRule>)
          return {{"kind", "real"}};
        else if constexpr (std::is_same_v<T, DiscreteRoundingRule>)
          return {{"kind", "discrete_rounding"}};
        else
          return {{"kind", "cutoff"}, {"vmin", v.vmin}, {"vmax", v.vmax}, {"rounding", v.rounding}};
      },
      r);
}

inline UpdateRule rule_from_json(const json& j, const std::string& path = "rule") {
  const std::string kind = detail::kind_of(j, path);
  if (kind == "real") {
    detail::expect_keys(j, path, {"kind"});
    return RealRule{};
  }
  if (kind == "discrete_rounding") {
    detail::expect_keys(j, path, {"kind"});
    return DiscreteRoundingRule{};
  }
  if (kind == "cutoff") {
    detail::expect_keys(j, path, {"kind", "vmin", "vmax", "rounding"});
    return CutoffRule{detail::get_field(j, path, "vmin", 1.0), detail::get_field(j, path, "vmax", 10.0),
                      detail::get_field(j, path, "rounding", true)};
  }
  throw ParameterError("config." + path + ".kind: unknown update rule '" + kind + "'");
}

inline json to_json(const InitSpec& s) {
  return std::visit(
      [](const auto& v) -> json {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, UniformInit>)
          return {{"kind", "uniform"}, {"lo", v.lo}, {"hi", v.hi}, {"integer", v.integer}};
        else if constexpr (std::is_same_v<T, ConstantInit>)
          return {{"kind", "constant"}, {"value", v.value}};
        else
          return {{"kind", "explicit"}, {"values", v.values}};
      },
      s);
}

inline InitSpec init_from_json(const json& j, const std::string& path = "init") {
  const std::string kind = detail::kind_of(j, path);
  if (kind == "uniform") {
    detail::expect_keys(j, path, {"kind", "lo", "hi", "integer"});
    return UniformInit{detail::get_field(j, path, "lo", 0.0), detail::get_field(j, path, "hi", 1.0),
                       detail::get_field(j, path, "integer", false)};
  }
  if (kind == "constant") {
    detail::expect_keys(j, path, {"kind", "value"});
    return ConstantInit{detail::get_field(j, path, "value", 0.0)};
  }
  if (kind == "explicit") {
    detail::expect_keys(j, path, {"kind", "values"});
    return ExplicitInit{detail::get_field(j, path, "values", std::vector<double>{})};
  }
  throw ParameterError("config." + path + ".kind: unknown init '" + kind + "'");
}

inline json to_json(const ExperimentConfig& c) {
  json intervals = json::array();
  for (const Interval& iv : c.decomposition_intervals) intervals.push_back({iv.t0, iv.t1});
  json bounds = {{"delta", c.bounds.delta}, {"gamma", c.bounds.gamma}, {"c", c.bounds.c}};
  if (c.bounds.t) bounds["t"] = *c.bounds.t;
  if (c.bounds.phi0) bounds["phi0"] = *c.bounds.phi0;
  return {{"n", c.n},
          {"init", to_json(c.init)},
          {"scheduler", c.scheduler == Scheduler::sequential ? "sequential" : "synchronous"},
          {"noise", to_json(c.noise)},
          {"rule", to_json(c.rule)},
          {"steps", c.steps},
          {"master_seed", c.master_seed},
          {"record_every", c.record_every},
          {"decomposition_intervals", intervals},
          {"runs", c.runs},
          {"bounds", bounds}};
}

/// Missing fields keep their defaults; unknown fields are rejected. The
/// result is validated.
inline ExperimentConfig config_from_json(const json& j) {
  using detail::get_field;
  detail::expect_keys(j, "",
                      {"n", "init", "scheduler", "noise", "rule", "steps", "master_seed", "record_every",
                       "decomposition_intervals", "runs", "bounds"});
  ExperimentConfig c;
  c.n = get_field(j, "", "n", c.n);
  if (j.contains("init")) c.init = init_from_json(j.at("init"));
  if (j.contains("scheduler")) {
    const auto s = get_field(j, "", "scheduler", std::string{});
    if (s == "sequential")
      c.scheduler = Scheduler::sequential;
    else if (s == "synchronous")
      c.scheduler = Scheduler::synchronous;
    else
      throw ParameterError("config.scheduler: expected 'sequential' or 'synchronous'");
  }
  if (j.contains("noise")) c.noise = noise_from_json(j.at("noise"));
  if (j.contains("rule")) c.rule = rule_from_json(j.at("rule"));
  c.steps = get_field(j, "", "steps", c.steps);
  c.master_seed = get_field(j, "", "master_seed", c.master_seed);
  c.record_every = get_field(j, "", "record_every", c.record_every);
  c.runs = get_field(j, "", "runs", c.runs);
  if (j.contains("decomposition_intervals")) {
    const json& arr = j.at("decomposition_intervals");
    if (!arr.is_array()) throw ParameterError("config.decomposition_intervals: expected an array");
    for (const json& iv : arr) {
      if (!iv.is_array() || iv.size() != 2)
        throw ParameterError("config.decomposition_intervals: each entry must be [t0, t1]");
      c.decomposition_intervals.push_back({iv[0].get<std::int64_t>(), iv[1].get<std::int64_t>()});
    }
  }
  if (j.contains("bounds")) {
    const json& b = j.at("bounds");
    detail::expect_keys(b, "bounds", {"delta", "gamma", "c", "t", "phi0"});
    c.bounds.delta = get_field(b, "bounds", "delta", c.bounds.delta);
    c.bounds.gamma = get_field(b, "bounds", "gamma", c.bounds.gamma);
    c.bounds.c = get_field(b, "bounds", "c", c.bounds.c);
    if (b.contains("t")) c.bounds.t = get_field(b, "bounds", "t", std::int64_t{0});
    if (b.contains("phi0")) c.bounds.phi0 = get_field(b, "bounds", "phi0", 0.0);
  }
  validate(c);
  return c;
}

/// Applies a dotted-path `key=value` override to a config document. The
/// value is read as JSON when it parses, otherwise as a string.
inline void apply_override(json& doc, const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos || eq == 0) throw ParameterError("override '" + assignment + "': expected key=value");
  const std::string path = assignment.substr(0, eq);
  const std::string text = assignment.substr(eq + 1);
  json value = json::parse(text, nullptr, false);
  if (value.is_discarded()) value = text;

  json* node = &doc;
  std::size_t start = 0;
  while (true) {
    const auto dot = path.find('.', start);
    const std::string key = path.substr(start, dot == std::string::npos ? std::string::npos : dot - start);
    if (key.empty()) throw ParameterError("override '" + assignment + "': empty path segment");
    if (!node->is_object()) throw ParameterError("override '" + assignment + "': '" + key + "' is not inside an object");
    if (dot == std::string::npos) {
      // Switching a tagged object to another kind drops the old kind's fields.
      if (key == "kind" && node->contains(key) && (*node)[key] != value) *node = json::object();
      (*node)[key] = std::move(value);
      return;
    }
    if (!node->contains(key)) throw ParameterError("override '" + assignment + "': unknown field '" + key + "'");
    node = &(*node)[key];
    start = dot + 1;
  }
}

}  // namespace noisy_gossip
