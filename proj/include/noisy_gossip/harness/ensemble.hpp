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
#include <variant>
#include <vector>

#include "../bounds.hpp"
#include "../errors.hpp"
#include "config.hpp"
#include "experiment.hpp"
#include "histogram.hpp"

namespace noisy_gossip {

struct DriftReport {
  std::size_t runs = 0;
  std::uint64_t t = 0;
  double delta = 0.0;
  double empirical_variance = 0.0;
  double theory_variance = 0.0;  ///< t sigma^2 / (2 n^2)
  double upper_bound = 0.0;      ///< drift_bound_gaussian(...).upper
  double lower_prob = 0.0;       ///< drift_bound_gaussian(...).lower_prob
  double exceed_fraction_upper = 0.0;  ///< fraction with |drift| >  upper_bound
  double exceed_fraction_lower = 0.0;  ///< fraction with |drift| >= upper_bound
};

/// Ensemble of `runs` runs of `c.steps` steps each, measuring the drift of the
/// running average from the initial average. Gaussian channels only.
inline DriftReport monte_carlo_drift(ExperimentConfig c, std::size_t runs, double delta, unsigned jobs = 0) {
  const auto* g = std::get_if<GaussianNoise>(&c.noise);
  if (g == nullptr) throw ModelMismatchError("monte_carlo_drift: requires Gaussian noise; use drift_bound_general");
  DriftReport r;
  r.runs = runs;
  r.t = c.steps;
  r.delta = delta;
  const double sigma = std::sqrt(g->sigma2);
  const double nd = static_cast<double>(c.n);
  r.theory_variance = static_cast<double>(c.steps) * g->sigma2 / (2.0 * nd * nd);
  const DriftBound b = drift_bound_gaussian(static_cast<std::int64_t>(c.steps), delta, sigma, c.n);
  r.upper_bound = b.upper;
  r.lower_prob = b.lower_prob;
  if (c.steps == 0 || runs == 0) return r;

  c.runs = runs;
  c.record_every = c.steps;
  c.decomposition_intervals.clear();
  std::vector<double> drift(runs);
  parallel_for(runs, jobs, [&](std::size_t k) { drift[k] = run_single(c, k).snapshots.back().drift; });

  double m = 0.0;
  for (double d : drift) m += d / static_cast<double>(runs);
  std::size_t above = 0;
  std::size_t at_or_above = 0;
  for (double d : drift) {
    if (runs > 1) r.empirical_variance += (d - m) * (d - m) / static_cast<double>(runs - 1);
    above += std::abs(d) > r.upper_bound ? 1 : 0;
    at_or_above += std::abs(d) >= r.upper_bound ? 1 : 0;
  }
  r.exceed_fraction_upper = static_cast<double>(above) / static_cast<double>(runs);
  r.exceed_fraction_lower = static_cast<double>(at_or_above) / static_cast<double>(runs);
  return r;
}

/// Bounded-range experiment: n = 1000 agents all at 10, two-sided geometric
/// noise with p = 0.8, values clamped to [1, 10] with randomized rounding,
/// 10^4 n steps.
inline ExperimentConfig fig_b_config(std::uint64_t seed = 1) {
  ExperimentConfig c;
  c.n = 1000;
  c.init = ConstantInit{10.0};
  c.noise = DiscreteGeometricNoise{0.8};
  c.rule = CutoffRule{1.0, 10.0, true};
  c.steps = 10000ULL * c.n;
  c.record_every = 100ULL * c.n;
  c.master_seed = seed;
  c.runs = 1;
  return c;
}

/// The same setting without the cutoff.
inline ExperimentConfig fig_b_control_config(std::uint64_t seed = 1) {
  ExperimentConfig c = fig_b_config(seed);
  c.rule = RealRule{};
  return c;
}

inline TraceRecord replicate_fig_b(std::uint64_t seed = 1) { return run_single(fig_b_config(seed), 0); }

/// Distance-distribution experiment: values uniform on [1, n^2], unit
/// Gaussian noise, 10 n steps. Defaults to n = 10^4.
inline ExperimentConfig fig_a_config(std::size_t n = 10000, std::uint64_t seed = 1) {
  ExperimentConfig c;
  c.n = n;
  const double nd = static_cast<double>(n);
  c.init = UniformInit{1.0, nd * nd, false};
  c.noise = GaussianNoise{1.0};
  c.rule = RealRule{};
  c.steps = 10ULL * n;
  c.record_every = n;
  c.master_seed = seed;
  c.runs = 1;
  return c;
}

struct FigAResult {
  TraceRecord trace;
  Histogram abs_distances;
  SurvivalFit fit;
};

/// Runs the distance experiment and fits the survival function of
/// |x_i - running average|.
inline FigAResult replicate_fig_a(std::size_t n = 10000, std::uint64_t seed = 1) {
  FigAResult r;
  r.trace = run_single(fig_a_config(n, seed), 0);
  Population final_pop(r.trace.final_values);
  r.abs_distances = distance_histogram(final_pop, 0, /*absolute=*/true);
  r.fit = survival_fit(r.abs_distances);
  return r;
}

}  // namespace noisy_gossip
