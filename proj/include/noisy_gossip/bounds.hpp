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

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numbers>
#include <limits>
#include <optional>
#include <string>
#include <variant>

#include "errors.hpp"
#include "noise.hpp"

namespace noisy_gossip {

/// Inputs shared by the interval bounds b', z and b*. The quantiles are the
/// noise module's m-quantiles over a window of t steps at the confidence
/// level each bound needs.
struct BoundInputs {
  std::size_t n = 0;
  std::int64_t t = 0;
  double delta = 0.1;
  double phi0 = 0.0;
  NoiseMoments moments;
  double m_prime = 0.0;          ///< m'_{t, delta/2}
  double m_prime_quarter = 0.0;  ///< m'_{t, delta/4}
  double m_star = 0.0;           ///< m*_{t, delta/4}
  double m_combined = 0.0;       ///< m_{t, delta/4}
};

inline void check_delta(double delta, const char* what) {
  if (!(delta > 0.0 && delta < 1.0)) throw ParameterError(std::string(what) + ": delta must lie in (0, 1)");
}

inline BoundInputs make_bound_inputs(const NoiseModel& model, std::size_t n, std::int64_t t, double delta,
                                     double phi0) {
  check_delta(delta, "make_bound_inputs");
  if (n < 1 || t < 1) throw ParameterError("make_bound_inputs: n and t must be positive");
  if (phi0 < 0.0) throw ParameterError("make_bound_inputs: phi0 must be nonnegative");
  BoundInputs in;
  in.n = n;
  in.t = t;
  in.delta = delta;
  in.phi0 = phi0;
  in.moments = moments(model);
  in.m_prime = m_quantile(model, t, delta / 2.0, QuantileKind::prime);
  in.m_prime_quarter = m_quantile(model, t, delta / 4.0, QuantileKind::prime);
  in.m_star = m_quantile(model, t, delta / 4.0, QuantileKind::star);
  in.m_combined = m_quantile(model, t, delta / 4.0, QuantileKind::combined);
  return in;
}

/// b' at confidence `level`: t E[N']/4 + 2 ln(1/level) m / 3 + sqrt(ln(1/level) Var[N'] t / 8),
/// where m is m'_{t, level}.
inline double b_prime_at(const NoiseMoments& mom, std::int64_t t, double level, double m_prime_level) {
  const double td = static_cast<double>(t);
  const double log_term = std::log(1.0 / level);
  return td / 4.0 * mom.e_nprime + 2.0 * log_term * m_prime_level / 3.0 +
         std::sqrt(log_term * mom.var_nprime * td / 8.0);
}

/// Upper bound on S'(I) holding with probability at least 1 - delta.
inline double b_prime(const BoundInputs& in) {
  check_delta(in.delta, "b_prime");
  return b_prime_at(in.moments, in.t, in.delta / 2.0, in.m_prime);
}

inline double z_value(const BoundInputs& in) {
  check_delta(in.delta, "z_value");
  const double td = static_cast<double>(in.t);
  const double log_term = std::log(2.0 * td / in.delta);
  const double quad = 2.0 / 3.0 * log_term * in.m_combined;
  return in.phi0 + 2.0 * log_term * td * in.moments.e_nstar_sq / static_cast<double>(in.n) + quad * quad +
         b_prime_at(in.moments, in.t, in.delta / 4.0, in.m_prime_quarter) + 1.0;
}

/// Upper bound on S*(I) holding with probability at least 1 - delta.
inline double b_star(const BoundInputs& in) {
  check_delta(in.delta, "b_star");
  const double td = static_cast<double>(in.t);
  const double log_term = std::log(2.0 * td / in.delta);
  const double left = 2.0 * log_term * in.m_star / 3.0 +
                      std::sqrt(2.0 * log_term * td * in.moments.e_nstar_sq / static_cast<double>(in.n));
  return left * std::sqrt(z_value(in));
}

/// Probability bound exp(-3 gamma^2 t / (8 n)) on S^-(I) < (1 - gamma) t / n.
inline double s_minus_tail(double gamma, std::int64_t t, std::size_t n) {
  if (!(gamma > 0.0 && gamma < 1.0)) throw ParameterError("s_minus_tail: gamma must lie in (0, 1)");
  if (t < 1 || n < 1) throw ParameterError("s_minus_tail: t and n must be positive");
  return std::exp(-3.0 * gamma * gamma * static_cast<double>(t) / (8.0 * static_cast<double>(n)));
}

inline constexpr double kDefaultConvergenceConstant = 30.0;

/// Predicted number of extra steps c n ln(phi0 / (E[N'] n delta)) until phi_bar
/// is of order n; 0 when phi0 is already at or below E[N'] n delta.
inline double convergence_time(double phi0, std::size_t n, double delta, const NoiseMoments& mom,
                               double c = kDefaultConvergenceConstant) {
  check_delta(delta, "convergence_time");
  if (!(mom.e_nprime > 0.0)) throw ParameterError("convergence_time: undefined for noiseless channels (E[N'] = 0)");
  if (!(phi0 > 0.0)) return 0.0;
  const double nd = static_cast<double>(n);
  // log-space: phi0 may be far beyond the range where the ratio is representable.
  const double log_ratio = std::log(phi0) - std::log(mom.e_nprime) - std::log(nd) - std::log(delta);
  return log_ratio <= 0.0 ? 0.0 : c * nd * log_ratio;
}

struct DriftBound {
  double upper = 0.0;       ///< |drift| <= upper with probability >= 1 - delta
  double lower_prob = 0.0;  ///< Pr{|drift| >= upper} is at least this
};

/// Gaussian channel: the drift after t steps is Normal(0, t sigma^2 / (2 n^2)).
/// `lower_prob` is meaningful when ln(1/delta) >= 1.
inline DriftBound drift_bound_gaussian(std::int64_t t, double delta, double sigma, std::size_t n) {
  check_delta(delta, "drift_bound_gaussian");
  if (t < 0 || n < 1) throw ParameterError("drift_bound_gaussian: t must be >= 0 and n >= 1");
  const double log_term = std::log(1.0 / delta);
  DriftBound out;
  out.upper = sigma * std::sqrt(static_cast<double>(t) * log_term) / static_cast<double>(n);
  out.lower_prob = delta / (2.0 * std::sqrt(2.0 * log_term));
  return out;
}

/// m sigma sqrt(2 t), with m the combined m-quantile at delta / (2 t).
inline double drift_bound_general(std::int64_t t, double sigma, double m) {
  if (t < 0) throw ParameterError("drift_bound_general: t must be >= 0");
  return m * sigma * std::sqrt(2.0 * static_cast<double>(t));
}

inline double drift_bound_general(const NoiseModel& model, std::int64_t t, double delta) {
  check_delta(delta, "drift_bound_general");
  if (t < 1) throw ParameterError("drift_bound_general: t must be >= 1");
  const double m = m_quantile(model, t, delta / (2.0 * static_cast<double>(t)), QuantileKind::combined);
  return drift_bound_general(t, std::sqrt(moments(model).variance), m);
}

struct TailSandwich {
  double lower = 0.0;
  double upper = 0.0;
};

/// Bounds on the standard normal upper tail Pr{Z > x} for x >= 0.
inline TailSandwich gaussian_tail(double x) {
  if (!(x >= 0.0)) throw ParameterError("gaussian_tail: x must be nonnegative");
  const double density = std::exp(-0.5 * x * x) / std::sqrt(2.0 * std::numbers::pi);
  TailSandwich out;
  out.lower = density * x / (x * x + 1.0);
  out.upper = x > 0.0 ? density / x : std::numeric_limits<double>::infinity();
  return out;
}

/// TSS = phi_bar + n drift^2.
inline double tss_identity(double phi_bar_value, std::size_t n, double drift) {
  return phi_bar_value + static_cast<double>(n) * drift * drift;
}

/// The analysis assumes n E[N^2] >= 1; callers report a violation as a warning.
inline bool standing_assumption_holds(std::size_t n, const NoiseMoments& mom) {
  return static_cast<double>(n) * mom.variance >= 1.0;
}

/// Every closed-form bound for one parameter set.
struct BoundsReport {
  std::size_t n = 0;
  std::int64_t t = 0;
  double delta = 0.0;
  double phi0 = 0.0;
  double gamma = 0.0;
  double c = 0.0;
  NoiseMoments moments;
  double m_prime = 0.0;
  double m_star = 0.0;
  double m_combined = 0.0;
  bool smooth = false;
  double b_prime = 0.0;
  double z = 0.0;
  double b_star = 0.0;
  double s_minus_tail = 0.0;
  std::optional<double> convergence_time;
  std::optional<DriftBound> drift_gaussian;
  double drift_general = 0.0;
  bool standing_assumption = false;
};

inline BoundsReport evaluate_bounds(const NoiseModel& model, std::size_t n, std::int64_t t, double delta, double phi0,
                                    double gamma = 0.5, double c = kDefaultConvergenceConstant) {
  const BoundInputs in = make_bound_inputs(model, n, t, delta, phi0);
  BoundsReport r;
  r.n = n;
  r.t = t;
  r.delta = delta;
  r.phi0 = phi0;
  r.gamma = gamma;
  r.c = c;
  r.moments = in.moments;
  r.m_prime = in.m_prime;
  r.m_star = in.m_star;
  r.m_combined = in.m_combined;
  r.smooth = is_smooth_at(model, t, delta);
  r.b_prime = b_prime(in);
  r.z = z_value(in);
  r.b_star = b_star(in);
  r.s_minus_tail = s_minus_tail(gamma, t, n);
  if (in.moments.e_nprime > 0.0) r.convergence_time = convergence_time(phi0, n, delta, in.moments, c);
  if (const auto* g = std::get_if<GaussianNoise>(&model))
    r.drift_gaussian = drift_bound_gaussian(t, delta, std::sqrt(g->sigma2), n);
  r.drift_general = drift_bound_general(model, t, delta);
  r.standing_assumption = standing_assumption_holds(n, in.moments);
  return r;
}

}  // namespace noisy_gossip
