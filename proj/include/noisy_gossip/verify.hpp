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
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "bounds.hpp"
#include "dynamics.hpp"
#include "harness/config.hpp"
#include "harness/ensemble.hpp"
#include "harness/experiment.hpp"
#include "noise.hpp"
#include "potentials.hpp"
#include "random.hpp"

namespace noisy_gossip {

struct CheckResult {
  std::string name;
  bool passed = false;
  std::string detail;
};

namespace detail {

inline double binomial_se(double p, std::size_t trials) {
  return std::sqrt(std::max(p * (1.0 - p), 1e-12) / static_cast<double>(trials));
}

inline bool rel_close(double a, double b, double rel) {
  return std::abs(a - b) <= rel * std::max({std::abs(a), std::abs(b), 1e-300});
}

inline std::vector<double> random_values(RandomStream& rng, std::size_t n, double lo, double hi) {
  std::vector<double> v(n);
  for (double& x : v) x = rng.uniform(lo, hi);
  return v;
}

inline CheckResult check_identities(std::uint64_t seed) {
  RandomStream rng(seed);
  std::size_t bad = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    const std::size_t n = 2 + rng.index(63);
    Population pop(random_values(rng, n, -1e3, 1e3));
    // Move away from the initial average so that drift is non-zero.
    for (std::size_t i = 0; i < n; ++i) pop.set(i, pop[i] + rng.uniform(-50.0, 50.0));
    const PotentialSnapshot s = snapshot(pop, 0.0);
    if (!rel_close(s.phi, 2.0 * static_cast<double>(n) * s.phi_bar, 1e-9)) ++bad;
    if (!rel_close(s.tss, tss_identity(s.phi_bar, n, s.drift), 1e-9)) ++bad;
  }
  return {"potential identities", bad == 0, std::to_string(bad) + " mismatches in 1000 populations"};
}

inline CheckResult check_one_step(std::uint64_t seed) {
  RandomStream rng(seed);
  const NoiseModel noise = GaussianNoise{4.0};
  std::size_t bad = 0;
  for (int trial = 0; trial < 20000; ++trial) {
    const std::size_t n = 2 + rng.index(30);
    Population pop(random_values(rng, n, -100.0, 100.0));
    const double before = phi_bar(pop);
    const double avg = mean(pop.values());
    const PairDraw d = draw_pair(n, noise, rng);
    if (d.i == d.j) continue;
    const double predicted = one_step_delta(pop[d.i], pop[d.j], d.noise_i, d.noise_j, avg, n);
    interact(pop, d.i, d.j, d.noise_i, d.noise_j, RealRule{}, rng);
    const double actual = phi_bar(pop) - before;
    if (std::abs(predicted - actual) > 1e-9 * std::max(before, 1.0)) ++bad;
  }
  return {"one-step exact change", bad == 0, std::to_string(bad) + " mismatches"};
}

inline CheckResult check_delta_mean(std::uint64_t seed) {
  RandomStream rng(seed);
  const std::size_t n = 100;
  Population pop(random_values(rng, n, 0.0, 100.0));
  const double pb = phi_bar(pop);
  const std::size_t samples = 1000000;
  double s = 0.0;
  double s2 = 0.0;
  for (std::size_t k = 0; k < samples; ++k) {
    const double d = delta_fraction(pop[rng.index(n)], pop[rng.index(n)], pb, n);
    s += d;
    s2 += d * d;
  }
  const double m = s / static_cast<double>(samples);
  const double se = std::sqrt((s2 / static_cast<double>(samples) - m * m) / static_cast<double>(samples));
  std::ostringstream msg;
  msg << "mean " << m << " vs 0.01, se " << se;
  return {"E[Delta] = 1/n", std::abs(m - 0.01) <= 5.0 * se, msg.str()};
}

/// Unrolls each length-n interval exactly: with D the product of (1 - Delta)
/// over the interval and E the noise terms damped by the later contraction
/// factors, phi_bar(t1) = D phi_bar(t0) + E. The check requires that identity
/// and the library accumulator to agree with a direct recomputation; how
/// often the undamped inequality of check_decomposition_bound fails is
/// reported only.
inline CheckResult check_decomposition(std::uint64_t seed) {
  RandomStream rng(seed);
  const std::size_t n = 100;
  const NoiseModel noise = GaussianNoise{1.0};
  std::size_t identity_bad = 0;
  std::size_t accumulator_bad = 0;
  std::size_t inequality_fails = 0;
  std::size_t intervals = 0;
  for (int run = 0; run < 100; ++run) {
    Population pop(random_values(rng, n, 0.0, 1000.0));
    for (int k = 0; k < 10; ++k, ++intervals) {
      const double phi0 = phi_bar(pop);
      DecompositionAccumulator acc = start_decomposition(0);
      double product = 1.0;
      double damped = 0.0;
      double s_prime = 0.0;
      double s_star = 0.0;
      double s_minus = 0.0;
      for (std::size_t step = 0; step < n; ++step) {
        const double avg = mean(pop.values());
        const double pb = phi_bar(pop);
        const PairDraw d = draw_pair(n, noise, rng);
        const double xi = pop[d.i];
        const double xj = pop[d.j];
        const Interaction a = interact(pop, d.i, d.j, d.noise_i, d.noise_j, RealRule{}, rng);
        accumulate(acc, a, xi, xj, avg, pb, n);
        const double delta = pb > 0.0 ? (xi - xj) * (xi - xj) / (2.0 * pb) : 1.0 / static_cast<double>(n);
        const double nstar = a.noise_i + a.noise_j;
        const double nprime = a.noise_i * a.noise_i + a.noise_j * a.noise_j;
        const double term = nprime / 4.0 - nstar * nstar / (4.0 * static_cast<double>(n)) +
                            nstar * (0.5 * (xi + xj) - avg);
        product *= 1.0 - delta;
        damped = (1.0 - delta) * damped + term;
        s_prime += nprime / 4.0;
        s_star += nstar * (0.5 * (xi + xj) - avg);
        s_minus += delta;
      }
      const double phi1 = phi_bar(pop);
      const double tol = 1e-6 * (1.0 + phi0);
      identity_bad += std::abs(product * phi0 + damped - phi1) > tol ? 1 : 0;
      accumulator_bad += (std::abs(acc.s_prime - s_prime) > tol || std::abs(acc.s_star - s_star) > tol ||
                          std::abs(acc.s_minus - s_minus) > 1e-9)
                             ? 1
                             : 0;
      inequality_fails += check_decomposition_bound(acc, phi0, phi1) ? 0 : 1;
    }
  }
  std::ostringstream msg;
  msg << intervals << " intervals: " << identity_bad << " identity mismatches, " << accumulator_bad
      << " accumulator mismatches; undamped inequality failed on " << inequality_fails;
  return {"decomposition identity", identity_bad == 0 && accumulator_bad == 0, msg.str()};
}

inline CheckResult check_drift(std::uint64_t seed, unsigned jobs) {
  ExperimentConfig c;
  c.n = 100;
  c.init = UniformInit{0.0, 100.0, false};
  c.noise = GaussianNoise{1.0};
  c.steps = 10000;
  c.record_every = c.steps;
  c.master_seed = seed;
  const DriftReport r = monte_carlo_drift(c, 1000, 0.1, jobs);
  const bool var_ok = std::abs(r.empirical_variance - r.theory_variance) <= 0.15 * r.theory_variance;
  const bool up_ok = r.exceed_fraction_upper <= 0.1 + 3.0 * binomial_se(0.1, r.runs);
  const bool lo_ok = r.exceed_fraction_lower >= r.lower_prob - 3.0 * binomial_se(r.lower_prob, r.runs);
  std::ostringstream msg;
  msg << "var " << r.empirical_variance << " vs " << r.theory_variance << ", exceed " << r.exceed_fraction_upper
      << " (lower target " << r.lower_prob << ")";
  return {"drift law (Gaussian)", var_ok && up_ok && lo_ok, msg.str()};
}

inline CheckResult check_s_prime(std::uint64_t seed) {
  const std::size_t n = 100;
  const std::int64_t t = 100;
  const double delta = 0.1;
  const NoiseModel noise = GaussianNoise{1.0};
  const double bound = b_prime(make_bound_inputs(noise, n, t, delta, 0.0));
  RandomStream rng(seed);
  const std::size_t runs = 1000;
  std::size_t exceed = 0;
  for (std::size_t r = 0; r < runs; ++r) {
    double s = 0.0;
    for (std::int64_t k = 0; k < t; ++k) {
      const PairDraw d = draw_pair(n, noise, rng);
      s += 0.25 * (d.noise_i * d.noise_i + d.noise_j * d.noise_j);
    }
    exceed += s > bound ? 1 : 0;
  }
  const double frac = static_cast<double>(exceed) / static_cast<double>(runs);
  std::ostringstream msg;
  msg << "P(S' > " << bound << ") = " << frac;
  return {"S' bound", frac <= delta + 3.0 * binomial_se(delta, runs), msg.str()};
}

inline CheckResult check_s_minus(std::uint64_t seed, unsigned jobs) {
  ExperimentConfig c;
  c.n = 100;
  c.init = UniformInit{0.0, 1000.0, false};
  c.noise = GaussianNoise{1.0};
  c.steps = 100 * c.n;
  c.record_every = c.steps;
  c.runs = 1000;
  c.master_seed = seed;
  c.decomposition_intervals = {{0, static_cast<std::int64_t>(c.steps)}};
  const double gamma = 0.5;
  const auto t = static_cast<std::int64_t>(c.steps);
  const double threshold = (1.0 - gamma) * static_cast<double>(t) / static_cast<double>(c.n);
  std::size_t low = 0;
  for (const TraceRecord& r : run_experiment(c, jobs)) low += r.decompositions.front().acc.s_minus <= threshold ? 1 : 0;
  const double frac = static_cast<double>(low) / static_cast<double>(c.runs);
  const double tail = s_minus_tail(gamma, t, c.n);
  std::ostringstream msg;
  msg << "P(S- <= " << threshold << ") = " << frac << " vs tail " << tail;
  return {"S- tail", frac <= tail + 3.0 * binomial_se(tail, c.runs), msg.str()};
}

inline CheckResult check_gaussian_tail() {
  bool ok = true;
  std::ostringstream msg;
  for (double x : {0.5, 1.0, 2.0, 3.0}) {
    const TailSandwich s = gaussian_tail(x);
    const double exact = 0.5 * std::erfc(x / std::sqrt(2.0));
    ok = ok && s.lower <= exact && exact <= s.upper;
    msg << "x=" << x << ": " << s.lower << " <= " << exact << " <= " << s.upper << "; ";
  }
  return {"Gaussian tail sandwich", ok, msg.str()};
}

inline CheckResult check_noise_means(std::uint64_t seed) {
  RandomStream rng(seed);
  bool ok = true;
  std::ostringstream msg;
  for (const NoiseModel& m : {NoiseModel{GaussianNoise{1.0}}, NoiseModel{DiscreteGeometricNoise{0.8}}}) {
    const std::size_t draws = 1000000;
    double s = 0.0;
    for (std::size_t k = 0; k < draws; ++k) s += sample(m, rng);
    const double se = std::sqrt(moments(m).variance / static_cast<double>(draws));
    const double avg = s / static_cast<double>(draws);
    ok = ok && std::abs(avg) <= 5.0 * se;
    msg << describe(m) << " mean " << avg << "; ";
  }
  return {"zero-mean noise", ok, msg.str()};
}

inline CheckResult check_determinism(std::uint64_t seed) {
  ExperimentConfig c;
  c.n = 50;
  c.steps = 2000;
  c.record_every = 100;
  c.master_seed = seed;
  c.decomposition_intervals = {{0, 500}};
  const TraceRecord a = run_single(c, 0);
  const TraceRecord b = run_single(c, 0);
  bool same = a.snapshots == b.snapshots && a.final_values == b.final_values;

  RandomStream rng(seed);
  Population pop(random_values(rng, 31, 0.0, 20.0));
  std::size_t replay_bad = 0;
  const UpdateRule rules[] = {RealRule{}, DiscreteRoundingRule{}, CutoffRule{2.0, 18.0, true}};
  for (const UpdateRule& rule : rules) {
    for (int k = 0; k < 200; ++k) {
      Population copy = pop;
      const StepEvent e = (k % 2 == 0) ? sequential_step(pop, DiscreteGeometricNoise{0.5}, rule, rng)
                                       : synchronous_step(pop, DiscreteGeometricNoise{0.5}, rule, rng);
      replay(copy, e, rule);
      replay_bad += copy == pop ? 0 : 1;
    }
  }
  same = same && replay_bad == 0;
  return {"determinism and replay", same, std::to_string(replay_bad) + " replay mismatches"};
}

}  // namespace detail

/// Invariant and Monte Carlo checks; every check is seeded.
inline std::vector<CheckResult> run_verification(std::uint64_t seed = 20260101, unsigned jobs = 0) {
  std::vector<CheckResult> out;
  out.push_back(detail::check_identities(seed));
  out.push_back(detail::check_one_step(seed + 1));
  out.push_back(detail::check_delta_mean(seed + 2));
  out.push_back(detail::check_decomposition(seed + 3));
  out.push_back(detail::check_drift(seed + 4, jobs));
  out.push_back(detail::check_s_prime(seed + 5));
  out.push_back(detail::check_s_minus(seed + 8, jobs));
  out.push_back(detail::check_gaussian_tail());
  out.push_back(detail::check_noise_means(seed + 6));
  out.push_back(detail::check_determinism(seed + 7));
  return out;
}

}  // namespace noisy_gossip
