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
#include <span>
#include <sstream>

#include "dynamics.hpp"
#include "errors.hpp"

namespace noisy_gossip {

inline double mean(std::span<const double> values) {
  double s = 0.0;
  for (double v : values) s += v;
  return s / static_cast<double>(values.size());
}

/// Sum of squared distances to `center`.
inline double sum_squares_about(std::span<const double> values, double center) {
  double s = 0.0;
  for (double v : values) s += (v - center) * (v - center);
  return s;
}

/// Squared distance to the initial average.
inline double tss(const Population& pop) { return sum_squares_about(pop.values(), pop.initial_average()); }

/// Squared distance to the running average.
inline double phi_bar(std::span<const double> values) { return sum_squares_about(values, mean(values)); }
inline double phi_bar(const Population& pop) { return phi_bar(pop.values()); }

/// Pairwise potential sum_{i,j} (x_i - x_j)^2, evaluated as 2 n phi_bar.
inline double phi(std::span<const double> values) { return 2.0 * static_cast<double>(values.size()) * phi_bar(values); }
inline double phi(const Population& pop) { return phi(pop.values()); }

/// Exact change of phi_bar when the distinct agents i, j (values x_i, x_j)
/// interact under the real-valued rule with channel noise n_i, n_j, given the
/// pre-step running average.
inline double one_step_delta(double x_i, double x_j, double n_i, double n_j, double running_avg, std::size_t n) {
  const double d = x_i - x_j;
  const double s = n_i + n_j;
  return -0.5 * d * d + 0.25 * (n_i * n_i + n_j * n_j) - s * s / (4.0 * static_cast<double>(n)) +
         s * (0.5 * (x_i + x_j) - running_avg);
}

/// Contraction fraction (x_i - x_j)^2 / (2 phi_bar); 1/n when phi_bar is 0.
inline double delta_fraction(double x_i, double x_j, double phi_bar_value, std::size_t n) {
  if (!(phi_bar_value > 0.0)) return 1.0 / static_cast<double>(n);
  return std::min(1.0, (x_i - x_j) * (x_i - x_j) / (2.0 * phi_bar_value));
}

inline double delta_fraction(const Population& pop, std::size_t i, std::size_t j) {
  return delta_fraction(pop[i], pop[j], phi_bar(pop), pop.size());
}

struct PotentialSnapshot {
  std::uint64_t step = 0;
  double tss = 0.0;
  double phi_bar = 0.0;
  double phi = 0.0;
  double running_avg = 0.0;
  double drift = 0.0;
  double parallel_time = 0.0;

  friend bool operator==(const PotentialSnapshot&, const PotentialSnapshot&) = default;
};

/// Recomputes every potential from scratch.
inline PotentialSnapshot snapshot(const Population& pop, double parallel_time_value) {
  PotentialSnapshot s;
  s.step = pop.step_count();
  s.running_avg = mean(pop.values());
  s.phi_bar = sum_squares_about(pop.values(), s.running_avg);
  s.phi = 2.0 * static_cast<double>(pop.size()) * s.phi_bar;
  s.tss = tss(pop);
  s.drift = s.running_avg - pop.initial_average();
  s.parallel_time = parallel_time_value;
  return s;
}

/// Running S'(I), S*(I) and S^-(I) over the interval I = (t0, t1].
struct DecompositionAccumulator {
  std::int64_t t0 = 0;
  std::int64_t t1 = 0;
  double s_prime = 0.0;
  double s_star = 0.0;
  double s_minus = 0.0;

  friend bool operator==(const DecompositionAccumulator&, const DecompositionAccumulator&) = default;
};

inline DecompositionAccumulator start_decomposition(std::int64_t t0) { return {t0, t0, 0.0, 0.0, 0.0}; }

/// Adds one sequential interaction given the pre-step values of the pair and
/// the pre-step running average and phi_bar.
inline void accumulate(DecompositionAccumulator& acc, const Interaction& a, double pre_x_i, double pre_x_j,
                       double pre_running_avg, double pre_phi_bar, std::size_t n) {
  acc.s_prime += 0.25 * (a.noise_i * a.noise_i + a.noise_j * a.noise_j);
  acc.s_star += (a.noise_i + a.noise_j) * (0.5 * (pre_x_i + pre_x_j) - pre_running_avg);
  acc.s_minus += delta_fraction(pre_x_i, pre_x_j, pre_phi_bar, n);
  ++acc.t1;
}

inline DecompositionAccumulator accumulate_decomposition(DecompositionAccumulator acc, const StepEvent& event,
                                                         const Population& pre_step_pop) {
  if (event.interactions.size() != 1)
    throw ModelMismatchError("decomposition is defined for sequential steps with exactly one interaction");
  const Interaction& a = event.interactions.front();
  const double avg = mean(pre_step_pop.values());
  const double pb = sum_squares_about(pre_step_pop.values(), avg);
  accumulate(acc, a, pre_step_pop[a.i], pre_step_pop[a.j], avg, pb, pre_step_pop.size());
  return acc;
}

/// phi_bar(t1) <= (1 - S^-/t)^t phi_bar(t0) + S' + S* up to a floating-point
/// slack of 1e-6 (1 + phi_bar(t0)).
inline bool check_decomposition_bound(const DecompositionAccumulator& acc, double phi_bar_t0, double phi_bar_t1) {
  const std::int64_t t = acc.t1 - acc.t0;
  if (t <= 0) throw ParameterError("check_decomposition_bound: interval must be non-empty");
  const double td = static_cast<double>(t);
  const double base = std::max(0.0, 1.0 - acc.s_minus / td);
  const double bound = std::pow(base, td) * phi_bar_t0 + acc.s_prime + acc.s_star;
  return phi_bar_t1 <= bound + 1e-6 * (1.0 + phi_bar_t0);
}

/// Running average and phi_bar maintained in O(1) per interaction.
///
/// Exact in real arithmetic for any update rule: with m the old mean,
/// phi_bar' = phi_bar + sum_k [(x_k' - m)^2 - (x_k - m)^2] - n (m' - m)^2.
class PotentialTracker {
 public:
  static constexpr double kRelativeTolerance = 1e-6;

  PotentialTracker() = default;
  explicit PotentialTracker(std::span<const double> values) { reset(values); }

  void reset(std::span<const double> values) {
    n_ = values.size();
    mean_ = noisy_gossip::mean(values);
    phi_bar_ = sum_squares_about(values, mean_);
  }

  double running_avg() const noexcept { return mean_; }
  double phi_bar() const noexcept { return phi_bar_; }

  /// Agent values changed from old_i -> new_i and old_j -> new_j; for a
  /// self-pair pass i == j and only the first change is used.
  void update(bool self_pair, double old_i, double new_i, double old_j, double new_j) {
    const double m = mean_;
    const double nd = static_cast<double>(n_);
    double shift = new_i - old_i;
    double change = (new_i - m) * (new_i - m) - (old_i - m) * (old_i - m);
    if (!self_pair) {
      shift += new_j - old_j;
      change += (new_j - m) * (new_j - m) - (old_j - m) * (old_j - m);
    }
    const double dm = shift / nd;
    mean_ = m + dm;
    phi_bar_ = std::max(0.0, phi_bar_ + change - nd * dm * dm);
  }

  /// Compares against a full recomputation, then adopts the recomputed values.
  void verify_and_refresh(std::span<const double> values, std::uint64_t step) {
    const double exact_mean = noisy_gossip::mean(values);
    const double exact_phi = sum_squares_about(values, exact_mean);
    const double phi_tol = kRelativeTolerance * std::max(exact_phi, 1.0);
    const double mean_tol = kRelativeTolerance * std::max(std::abs(exact_mean), 1.0);
    if (std::abs(phi_bar_ - exact_phi) > phi_tol || std::abs(mean_ - exact_mean) > mean_tol) {
      std::ostringstream msg;
      msg.precision(17);
      msg << "potential drift at step " << step << ": tracked phi_bar " << phi_bar_ << " vs " << exact_phi
          << ", tracked mean " << mean_ << " vs " << exact_mean;
      throw NumericalDriftError(msg.str());
    }
    mean_ = exact_mean;
    phi_bar_ = exact_phi;
  }

 private:
  std::size_t n_ = 0;
  double mean_ = 0.0;
  double phi_bar_ = 0.0;
};

}  // namespace noisy_gossip
