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
#include <cstdint>
#include <string>
#include <type_traits>
#include <variant>

#include "errors.hpp"
#include "random.hpp"

namespace noisy_gossip {

/// N ~ Normal(0, sigma2).
struct GaussianNoise {
  double sigma2 = 1.0;
};

/// Two-sided geometric law: Pr{N = 0} = p, Pr{N = i} = p (1-p)^|i| / 2 for i != 0.
struct DiscreteGeometricNoise {
  double p = 0.8;
};

struct ZeroNoise {};

using NoiseModel = std::variant<GaussianNoise, DiscreteGeometricNoise, ZeroNoise>;

/// Moments of the channel noise N and of the per-step derived variables
/// N' = N1^2 + N2^2 and N* = N1 + N2.
struct NoiseMoments {
  double mean = 0.0;
  double variance = 0.0;
  double e_nprime = 0.0;
  double e_nstar_sq = 0.0;
  double var_nprime = 0.0;
};

enum class QuantileKind { prime, star, combined };

/// Mass below which the tails of the discrete model are dropped.
inline constexpr double kDiscreteTailMass = 1e-12;

inline void validate(const NoiseModel& model) {
  std::visit(
      [](const auto& m) {
        using T = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<T, GaussianNoise>) {
          if (!(m.sigma2 > 0.0) || !std::isfinite(m.sigma2))
            throw ParameterError("gaussian noise requires sigma2 > 0");
        } else if constexpr (std::is_same_v<T, DiscreteGeometricNoise>) {
          if (!(m.p > 0.0 && m.p <= 1.0)) throw ParameterError("discrete geometric noise requires p in (0, 1]");
        }
      },
      model);
}

inline std::string describe(const NoiseModel& model) {
  return std::visit(
      [](const auto& m) -> std::string {
        using T = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<T, GaussianNoise>)
          return "gaussian(sigma2=" + std::to_string(m.sigma2) + ")";
        else if constexpr (std::is_same_v<T, DiscreteGeometricNoise>)
          return "discrete_geometric(p=" + std::to_string(m.p) + ")";
        else
          return "zero";
      },
      model);
}

inline bool is_integer_valued(const NoiseModel& model) { return !std::holds_alternative<GaussianNoise>(model); }

inline double sample(const NoiseModel& model, RandomStream& rng) {
  return std::visit(
      [&rng](const auto& m) -> double {
        using T = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<T, GaussianNoise>) {
          return rng.normal(std::sqrt(m.sigma2));
        } else if constexpr (std::is_same_v<T, DiscreteGeometricNoise>) {
          if (m.p >= 1.0 || rng.uniform01() < m.p) return 0.0;
          // |N| given N != 0 is geometric on {1, 2, ...} with success probability p.
          const double u = 1.0 - rng.uniform01();
          const double magnitude = 1.0 + std::floor(std::log(u) / std::log1p(-m.p));
          return rng.coin() ? magnitude : -magnitude;
        } else {
          return 0.0;
        }
      },
      model);
}

namespace detail {

/// Largest |i| kept when the two-sided geometric pmf is truncated at total
/// tail mass kDiscreteTailMass: Pr{|N| > K} = (1-p)^(K+1).
inline std::int64_t discrete_support_limit(double p) {
  if (p >= 1.0) return 0;
  const double k = std::ceil(std::log(kDiscreteTailMass) / std::log1p(-p)) - 1.0;
  return static_cast<std::int64_t>(std::max(0.0, k));
}

inline double discrete_pmf(double p, std::int64_t i) {
  if (i == 0) return p;
  return 0.5 * p * std::pow(1.0 - p, static_cast<double>(i < 0 ? -i : i));
}

/// Pr{|N| > m} for real m >= 0.
inline double discrete_abs_survival(double p, double m) {
  if (m < 0.0) return 1.0;
  return std::pow(1.0 - p, std::floor(m) + 1.0);
}

/// Pr{N > x}.
inline double discrete_survival(double p, double x) {
  const double m = std::floor(x);
  if (m >= 0.0) return 0.5 * std::pow(1.0 - p, m + 1.0);
  return 1.0 - 0.5 * std::pow(1.0 - p, -m);
}

/// Pr{N1^2 + N2^2 > l}, summed over the exact value of N1.
inline double discrete_nprime_survival(double p, double l) {
  if (l < 0.0) return 1.0;
  const auto a_max = static_cast<std::int64_t>(std::floor(std::sqrt(l)));
  double s = discrete_abs_survival(p, static_cast<double>(a_max));  // |N1| > a_max forces N' > l
  for (std::int64_t a = -a_max; a <= a_max; ++a) {
    const double rest = l - static_cast<double>(a * a);
    s += discrete_pmf(p, a) * discrete_abs_survival(p, std::sqrt(rest));
  }
  return std::min(1.0, s);
}

/// Pr{N1 + N2 > l}, convolving over N1 truncated at tail mass kDiscreteTailMass.
inline double discrete_nstar_survival(double p, double l) {
  const std::int64_t k = discrete_support_limit(p);
  double s = 0.0;
  for (std::int64_t a = -k; a <= k; ++a) s += discrete_pmf(p, a) * discrete_survival(p, l - static_cast<double>(a));
  return std::min(1.0, s);
}

inline double survival(const NoiseModel& model, QuantileKind kind, double l) {
  return std::visit(
      [&](const auto& m) -> double {
        using T = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<T, GaussianNoise>) {
          if (kind == QuantileKind::prime) return l < 0.0 ? 1.0 : std::exp(-l / (2.0 * m.sigma2));
          return 0.5 * std::erfc(l / (2.0 * std::sqrt(m.sigma2)));  // N* ~ Normal(0, 2 sigma2)
        } else if constexpr (std::is_same_v<T, DiscreteGeometricNoise>) {
          return kind == QuantileKind::prime ? discrete_nprime_survival(m.p, l) : discrete_nstar_survival(m.p, l);
        } else {
          return l < 0.0 ? 1.0 : 0.0;
        }
      },
      model);
}

}  // namespace detail

inline NoiseMoments moments(const NoiseModel& model) {
  validate(model);
  NoiseMoments out;
  std::visit(
      [&out](const auto& m) {
        using T = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<T, GaussianNoise>) {
          out.variance = m.sigma2;
          // Var(X^2) = 2 sigma^4 for each of the two independent squares.
          out.var_nprime = 4.0 * m.sigma2 * m.sigma2;
        } else if constexpr (std::is_same_v<T, DiscreteGeometricNoise>) {
          // E[N^2] = sum_k p (1-p)^k k^2 = (1-p)(2-p) / p^2.
          out.variance = (1.0 - m.p) * (2.0 - m.p) / (m.p * m.p);
          // E[N^4] from the pmf of N^2. The sum runs past tail mass kDiscreteTailMass
          // until the k^4-weighted terms no longer change it.
          double fourth = 0.0;
          double tail = 1.0 - m.p;
          for (std::int64_t k = 1; tail > 0.0; ++k) {
            const double mass = m.p * std::pow(1.0 - m.p, static_cast<double>(k));
            const double k2 = static_cast<double>(k) * static_cast<double>(k);
            const double term = mass * k2 * k2;
            fourth += term;
            tail -= mass;
            if (tail < kDiscreteTailMass && term <= 1e-17 * fourth) break;
          }
          out.var_nprime = 2.0 * (fourth - out.variance * out.variance);
        }
      },
      model);
  out.e_nprime = 2.0 * out.variance;
  out.e_nstar_sq = 2.0 * out.variance;
  return out;
}

/// Smallest level l such that the maximum of t+1 i.i.d. copies of N'
/// (prime), N* (star), or both (combined: the larger of the two) stays at or
/// below l with probability at least 1 - delta.
///
/// Found by bisection on the closed-form (or convolved) survival function to
/// absolute tolerance 1e-9. The result is clamped at 0 from below and does
/// not depend on where the window of t+1 steps starts.
inline double m_quantile(const NoiseModel& model, std::int64_t t, double delta, QuantileKind kind) {
  validate(model);
  if (!(delta > 0.0 && delta < 1.0)) throw ParameterError("m_quantile: delta must lie in (0, 1)");
  if (t < 1) throw ParameterError("m_quantile: t must be >= 1");
  if (kind == QuantileKind::combined)
    return std::max(m_quantile(model, t, delta, QuantileKind::prime), m_quantile(model, t, delta, QuantileKind::star));
  if (std::holds_alternative<ZeroNoise>(model)) return 0.0;

  const double copies = static_cast<double>(t) + 1.0;
  const double target = std::log1p(-delta);
  auto holds = [&](double l) {
    const double s = detail::survival(model, kind, l);
    if (s >= 1.0) return false;
    return copies * std::log1p(-s) >= target;
  };

  if (holds(0.0)) return 0.0;
  const double variance = moments(model).variance;
  double lo = 0.0;
  double hi = std::max(2.0 * variance, 1.0);
  while (!holds(hi)) {
    lo = hi;
    hi *= 2.0;
  }
  while (hi - lo > 1e-9) {
    const double mid = 0.5 * (lo + hi);
    (holds(mid) ? hi : lo) = mid;
  }
  // Integer support: the answer is the atom at or just below hi.
  if (std::holds_alternative<DiscreteGeometricNoise>(model)) return std::floor(hi + 1e-9);
  return hi;
}

/// Probability that the maximum of t+1 copies stays at or below l. For
/// `combined` this is the weaker of the two per-kind probabilities.
inline double max_cdf(const NoiseModel& model, std::int64_t t, double l, QuantileKind kind) {
  if (kind == QuantileKind::combined)
    return std::min(max_cdf(model, t, l, QuantileKind::prime), max_cdf(model, t, l, QuantileKind::star));
  const double s = detail::survival(model, kind, l);
  return std::exp((static_cast<double>(t) + 1.0) * std::log1p(-s));
}

/// m_{t,delta} <= (t/delta)^(1/20).
inline bool is_smooth_at(const NoiseModel& model, std::int64_t t, double delta) {
  const double m = m_quantile(model, t, delta, QuantileKind::combined);
  return m <= std::pow(static_cast<double>(t) / delta, 1.0 / 20.0);
}

}  // namespace noisy_gossip
