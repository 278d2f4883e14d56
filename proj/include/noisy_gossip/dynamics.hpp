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
#include <numeric>
#include <span>
#include <type_traits>
#include <utility>
#include <variant>
#include <vector>

#include "errors.hpp"
#include "noise.hpp"
#include "random.hpp"

namespace noisy_gossip {

/// v' = (v + w) / 2.
struct RealRule {};

/// v' = ceil((v + w) / 2) or floor((v + w) / 2), each with probability 1/2.
struct DiscreteRoundingRule {};

/// Values live in [vmin, vmax]. The received value is clamped before
/// averaging and the (optionally rounded) result is clamped again.
struct CutoffRule {
  double vmin = 1.0;
  double vmax = 10.0;
  bool rounding = true;
};

using UpdateRule = std::variant<RealRule, DiscreteRoundingRule, CutoffRule>;

inline void validate(const UpdateRule& rule) {
  if (const auto* c = std::get_if<CutoffRule>(&rule); c != nullptr && !(c->vmin < c->vmax))
    throw ParameterError("cutoff rule requires vmin < vmax");
}

inline bool rounds(const UpdateRule& rule) {
  if (std::holds_alternative<DiscreteRoundingRule>(rule)) return true;
  const auto* c = std::get_if<CutoffRule>(&rule);
  return c != nullptr && c->rounding;
}

/// Agent values plus the average frozen at construction.
class Population {
 public:
  explicit Population(std::vector<double> values) : values_(std::move(values)) {
    if (values_.size() < 2) throw ParameterError("population needs at least 2 agents");
    initial_average_ = std::accumulate(values_.begin(), values_.end(), 0.0) / static_cast<double>(values_.size());
  }

  std::size_t size() const noexcept { return values_.size(); }
  std::span<const double> values() const noexcept { return values_; }
  double operator[](std::size_t i) const { return values_[i]; }
  double initial_average() const noexcept { return initial_average_; }
  std::uint64_t step_count() const noexcept { return step_count_; }

  void set(std::size_t i, double v) { values_[i] = v; }
  void advance() noexcept { ++step_count_; }

  friend bool operator==(const Population&, const Population&) = default;

 private:
  std::vector<double> values_;
  double initial_average_ = 0.0;
  std::uint64_t step_count_ = 0;
};

inline Population init_population(std::vector<double> values) { return Population(std::move(values)); }

/// One realized exchange. `round_*` is +1 for ceil, -1 for floor and 0 when no
/// rounding happened. In a self-pair (i == j) the agent receives only its own
/// message, so `noise_i` is recorded as 0.
struct Interaction {
  std::size_t i = 0;
  std::size_t j = 0;
  double noise_i = 0.0;
  double noise_j = 0.0;
  int round_i = 0;
  int round_j = 0;

  friend bool operator==(const Interaction&, const Interaction&) = default;
};

struct StepEvent {
  std::vector<Interaction> interactions;

  friend bool operator==(const StepEvent&, const StepEvent&) = default;
};

namespace detail {

struct Rounded {
  double value;
  int direction;
};

inline Rounded round_randomly(double v, RandomStream& rng) {
  const double lo = std::floor(v);
  if (lo == v) return {v, 0};
  return rng.coin() ? Rounded{lo + 1.0, +1} : Rounded{lo, -1};
}

inline double round_with(double v, int direction) {
  if (direction > 0) return std::ceil(v);
  if (direction < 0) return std::floor(v);
  return v;
}

/// New value of an agent holding `own` that receives `received`. `direction`
/// replays a recorded rounding; when absent a fresh coin is drawn.
inline Rounded receive(double own, double received, const UpdateRule& rule, RandomStream* rng, int direction) {
  return std::visit(
      [&](const auto& r) -> Rounded {
        using T = std::decay_t<decltype(r)>;
        if constexpr (std::is_same_v<T, RealRule>) {
          return {0.5 * (own + received), 0};
        } else if constexpr (std::is_same_v<T, DiscreteRoundingRule>) {
          const double v = 0.5 * (own + received);
          return rng ? round_randomly(v, *rng) : Rounded{round_with(v, direction), direction};
        } else {
          double v = 0.5 * (own + std::clamp(received, r.vmin, r.vmax));
          int dir = 0;
          if (r.rounding) {
            const Rounded rr = rng ? round_randomly(v, *rng) : Rounded{round_with(v, direction), direction};
            v = rr.value;
            dir = rr.direction;
          }
          return {std::clamp(v, r.vmin, r.vmax), dir};
        }
      },
      rule);
}

}  // namespace detail

/// Post-averaging rounding and clamping of a single value.
inline double apply_rule(double value, const UpdateRule& rule, RandomStream& rng) {
  return std::visit(
      [&](const auto& r) -> double {
        using T = std::decay_t<decltype(r)>;
        if constexpr (std::is_same_v<T, RealRule>) {
          return value;
        } else if constexpr (std::is_same_v<T, DiscreteRoundingRule>) {
          return detail::round_randomly(value, rng).value;
        } else {
          const double v = r.rounding ? detail::round_randomly(value, rng).value : value;
          return std::clamp(v, r.vmin, r.vmax);
        }
      },
      rule);
}

/// Exchange between agents i and j with the given channel noise: agent i
/// receives x_j + noise_j and agent j receives x_i + noise_i. Does not advance
/// the step counter.
inline Interaction interact(Population& pop, std::size_t i, std::size_t j, double noise_i, double noise_j,
                            const UpdateRule& rule, RandomStream& rng) {
  const double xi = pop[i];
  const double xj = pop[j];
  if (i == j) {
    const auto r = detail::receive(xi, xj + noise_j, rule, &rng, 0);
    pop.set(i, r.value);
    return {i, j, 0.0, noise_j, r.direction, 0};
  }
  const auto ri = detail::receive(xi, xj + noise_j, rule, &rng, 0);
  const auto rj = detail::receive(xj, xi + noise_i, rule, &rng, 0);
  pop.set(i, ri.value);
  pop.set(j, rj.value);
  return {i, j, noise_i, noise_j, ri.direction, rj.direction};
}

struct PairDraw {
  std::size_t i = 0;
  std::size_t j = 0;
  double noise_i = 0.0;
  double noise_j = 0.0;
};

/// Uniform pair drawn with replacement, plus its channel noise. A self-pair
/// carries a single message.
inline PairDraw draw_pair(std::size_t n, const NoiseModel& model, RandomStream& rng) {
  PairDraw d;
  d.i = rng.index(n);
  d.j = rng.index(n);
  d.noise_i = d.i == d.j ? 0.0 : sample(model, rng);
  d.noise_j = sample(model, rng);
  return d;
}

/// Draws one pair and its noise, and applies it. Does not advance the step
/// counter; `sequential_step` does.
inline Interaction sequential_interaction(Population& pop, const NoiseModel& model, const UpdateRule& rule,
                                          RandomStream& rng) {
  const PairDraw d = draw_pair(pop.size(), model, rng);
  return interact(pop, d.i, d.j, d.noise_i, d.noise_j, rule, rng);
}

inline StepEvent sequential_step(Population& pop, const NoiseModel& model, const UpdateRule& rule,
                                 RandomStream& rng) {
  StepEvent event;
  event.interactions.push_back(sequential_interaction(pop, model, rule, rng));
  pop.advance();
  return event;
}

/// One synchronous round over a uniform random matching: consecutive entries
/// of a uniform permutation are paired, and for odd n the leftover agent is
/// paired with itself. Pairs are disjoint, so every update reads pre-round
/// values.
inline StepEvent synchronous_step(Population& pop, const NoiseModel& model, const UpdateRule& rule,
                                  RandomStream& rng) {
  const std::size_t n = pop.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::shuffle(order.begin(), order.end(), rng.engine());

  StepEvent event;
  event.interactions.reserve((n + 1) / 2);
  for (std::size_t k = 0; k + 1 < n; k += 2) {
    const double noise_i = sample(model, rng);
    const double noise_j = sample(model, rng);
    event.interactions.push_back(interact(pop, order[k], order[k + 1], noise_i, noise_j, rule, rng));
  }
  if (n % 2 == 1) {
    const double noise = sample(model, rng);
    event.interactions.push_back(interact(pop, order[n - 1], order[n - 1], 0.0, noise, rule, rng));
  }
  pop.advance();
  return event;
}

/// Re-applies a recorded step, using the recorded noise and rounding
/// directions instead of fresh randomness.
inline void replay(Population& pop, const StepEvent& event, const UpdateRule& rule) {
  for (const Interaction& a : event.interactions) {
    const double xi = pop[a.i];
    const double xj = pop[a.j];
    pop.set(a.i, detail::receive(xi, xj + a.noise_j, rule, nullptr, a.round_i).value);
    if (a.i != a.j) pop.set(a.j, detail::receive(xj, xi + a.noise_i, rule, nullptr, a.round_j).value);
  }
  pop.advance();
}

inline double parallel_time(std::uint64_t t_sequential, std::size_t n) {
  if (n < 1) throw ParameterError("parallel_time: n must be >= 1");
  return static_cast<double>(t_sequential) / static_cast<double>(n);
}

}  // namespace noisy_gossip
