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
#include <atomic>
#include <cstddef>
#include <cstdint>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

#include "../dynamics.hpp"
#include "../potentials.hpp"
#include "../random.hpp"
#include "config.hpp"
#include "histogram.hpp"

namespace noisy_gossip {

struct DecompositionRecord {
  Interval interval;
  DecompositionAccumulator acc;
  double phi_bar_t0 = 0.0;
  double phi_bar_t1 = 0.0;
  bool bound_holds = false;
};

struct ValuesSummary {
  double min = 0.0;
  double max = 0.0;
  double mean = 0.0;
  Histogram histogram;
};

struct TraceRecord {
  std::size_t run_index = 0;
  std::uint64_t seed = 0;
  std::vector<PotentialSnapshot> snapshots;
  std::vector<DecompositionRecord> decompositions;
  ValuesSummary final_summary;
  std::vector<double> final_values;
};

/// Sequential steps are scaled by 1/n; one synchronous round is one unit.
inline double parallel_time_for(Scheduler scheduler, std::uint64_t step, std::size_t n) {
  return scheduler == Scheduler::sequential ? parallel_time(step, n) : static_cast<double>(step);
}

/// Steps at which a snapshot is taken: 0, every multiple of record_every, the
/// final step and every decomposition endpoint.
inline std::vector<std::uint64_t> snapshot_steps(const ExperimentConfig& c) {
  std::vector<std::uint64_t> s;
  for (std::uint64_t k = 0; k <= c.steps; k += c.record_every) s.push_back(k);
  s.push_back(c.steps);
  for (const Interval& iv : c.decomposition_intervals) {
    s.push_back(static_cast<std::uint64_t>(iv.t0));
    s.push_back(static_cast<std::uint64_t>(iv.t1));
  }
  std::sort(s.begin(), s.end());
  s.erase(std::unique(s.begin(), s.end()), s.end());
  return s;
}

/// One run of the configured dynamic. Potentials between snapshots are
/// tracked incrementally and checked against a full recomputation every n
/// steps and at every snapshot; a mismatch throws NumericalDriftError.
inline TraceRecord run_single(const ExperimentConfig& c, std::size_t run_index, std::uint64_t seed) {
  validate(c);
  RandomStream rng(seed);
  Population pop(initial_values(c, rng));
  const std::size_t n = pop.size();
  const bool sequential = c.scheduler == Scheduler::sequential;

  TraceRecord trace;
  trace.run_index = run_index;
  trace.seed = seed;

  const auto steps = snapshot_steps(c);
  std::size_t next_snapshot = 0;

  struct Open {
    std::size_t index;
    DecompositionAccumulator acc;
    double phi_bar_t0;
  };
  std::vector<Open> open;
  std::vector<DecompositionRecord> closed(c.decomposition_intervals.size());

  PotentialTracker tracker(pop.values());

  auto take_snapshot = [&](std::uint64_t step) {
    if (sequential) tracker.verify_and_refresh(pop.values(), step);
    const PotentialSnapshot snap = snapshot(pop, parallel_time_for(c.scheduler, step, n));
    trace.snapshots.push_back(snap);
    for (auto it = open.begin(); it != open.end();) {
      if (static_cast<std::uint64_t>(c.decomposition_intervals[it->index].t1) == step) {
        DecompositionRecord& r = closed[it->index];
        r.interval = c.decomposition_intervals[it->index];
        r.acc = it->acc;
        r.phi_bar_t0 = it->phi_bar_t0;
        r.phi_bar_t1 = snap.phi_bar;
        r.bound_holds = check_decomposition_bound(r.acc, r.phi_bar_t0, r.phi_bar_t1);
        it = open.erase(it);
      } else {
        ++it;
      }
    }
    for (std::size_t k = 0; k < c.decomposition_intervals.size(); ++k) {
      const Interval& iv = c.decomposition_intervals[k];
      if (static_cast<std::uint64_t>(iv.t0) == step) open.push_back({k, start_decomposition(iv.t0), snap.phi_bar});
    }
  };

  take_snapshot(0);
  ++next_snapshot;

  for (std::uint64_t s = 1; s <= c.steps; ++s) {
    if (sequential) {
      const PairDraw d = draw_pair(n, c.noise, rng);
      const double xi = pop[d.i];
      const double xj = pop[d.j];
      const double avg = tracker.running_avg();
      const double pb = tracker.phi_bar();
      const Interaction a = interact(pop, d.i, d.j, d.noise_i, d.noise_j, c.rule, rng);
      for (Open& o : open) accumulate(o.acc, a, xi, xj, avg, pb, n);
      tracker.update(d.i == d.j, xi, pop[d.i], xj, pop[d.j]);
      pop.advance();
      if (s % n == 0) tracker.verify_and_refresh(pop.values(), s);
    } else {
      synchronous_step(pop, c.noise, c.rule, rng);
    }
    if (next_snapshot < steps.size() && s == steps[next_snapshot]) {
      take_snapshot(s);
      ++next_snapshot;
    }
  }

  trace.decompositions = std::move(closed);
  const auto [lo, hi] = std::minmax_element(pop.values().begin(), pop.values().end());
  trace.final_summary.min = *lo;
  trace.final_summary.max = *hi;
  trace.final_summary.mean = mean(pop.values());
  trace.final_summary.histogram = distance_histogram(pop);
  trace.final_values.assign(pop.values().begin(), pop.values().end());
  return trace;
}

inline TraceRecord run_single(const ExperimentConfig& c, std::size_t run_index) {
  return run_single(c, run_index, run_seed(c.master_seed, run_index));
}

inline unsigned resolve_jobs(unsigned jobs) {
  if (jobs > 0) return jobs;
  const unsigned hw = std::thread::hardware_concurrency();
  return hw > 0 ? hw : 1;
}

/// Calls body(k) for k in [0, count) on up to `jobs` threads (0: all cores).
/// The first exception thrown by any call is rethrown after all workers stop.
template <typename Body>
void parallel_for(std::size_t count, unsigned jobs, Body&& body) {
  const unsigned workers = static_cast<unsigned>(std::min<std::size_t>(resolve_jobs(jobs), std::max<std::size_t>(count, 1)));
  if (workers <= 1) {
    for (std::size_t k = 0; k < count; ++k) body(k);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (unsigned w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (std::size_t k = next++; k < count; k = next++) {
        try {
          body(k);
        } catch (...) {
          std::lock_guard<std::mutex> lock(error_mutex);
          if (!error) error = std::current_exception();
          next = count;
        }
      }
    });
  }
  for (std::thread& t : pool) t.join();
  if (error) std::rethrow_exception(error);
}

/// `c.runs` independent runs; run r is seeded with run_seed(master_seed, r).
/// Output order and content do not depend on `jobs`.
inline std::vector<TraceRecord> run_experiment(const ExperimentConfig& c, unsigned jobs = 0) {
  validate(c);
  std::vector<TraceRecord> traces(c.runs);
  parallel_for(c.runs, jobs, [&](std::size_t r) { traces[r] = run_single(c, r); });
  return traces;
}

}  // namespace noisy_gossip
