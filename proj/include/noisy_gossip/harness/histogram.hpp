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
#include <vector>

#include "../dynamics.hpp"
#include "../errors.hpp"
#include "../potentials.hpp"

namespace noisy_gossip {

/// Equal-width histogram. `bin_edges` has one more entry than `counts`; the
/// last bin is closed on the right.
struct Histogram {
  std::vector<double> bin_edges;
  std::vector<std::uint64_t> counts;
  std::uint64_t total = 0;

  friend bool operator==(const Histogram&, const Histogram&) = default;
};

/// Bin count from the Freedman-Diaconis width 2 IQR n^(-1/3), clamped to
/// [2, 10000]. Falls back to sqrt(n) bins when the IQR is zero.
inline std::size_t freedman_diaconis_bins(std::span<const double> samples) {
  if (samples.size() < 2) return 2;
  std::vector<double> s(samples.begin(), samples.end());
  std::sort(s.begin(), s.end());
  const double range = s.back() - s.front();
  auto quantile = [&s](double q) {
    const double pos = q * static_cast<double>(s.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const auto hi = std::min(lo + 1, s.size() - 1);
    return s[lo] + (pos - static_cast<double>(lo)) * (s[hi] - s[lo]);
  };
  const double iqr = quantile(0.75) - quantile(0.25);
  double bins = std::sqrt(static_cast<double>(s.size()));
  if (iqr > 0.0 && range > 0.0) bins = range / (2.0 * iqr * std::cbrt(1.0 / static_cast<double>(s.size())));
  return static_cast<std::size_t>(std::clamp(std::ceil(bins), 2.0, 10000.0));
}

/// Histogram over [min, max] with `bins` equal-width bins. An all-equal sample
/// yields a single unit-width bin centred on the common value.
inline Histogram make_histogram(std::span<const double> samples, std::size_t bins) {
  if (bins < 2) throw ParameterError("histogram: bins must be >= 2");
  if (samples.empty()) throw ParameterError("histogram: no samples");
  const auto [lo_it, hi_it] = std::minmax_element(samples.begin(), samples.end());
  const double lo = *lo_it;
  const double hi = *hi_it;
  Histogram h;
  h.total = samples.size();
  if (!(hi > lo)) {
    h.bin_edges = {lo - 0.5, lo + 0.5};
    h.counts = {samples.size()};
    return h;
  }
  const double width = (hi - lo) / static_cast<double>(bins);
  h.bin_edges.resize(bins + 1);
  for (std::size_t k = 0; k <= bins; ++k) h.bin_edges[k] = lo + width * static_cast<double>(k);
  h.bin_edges.back() = hi;
  h.counts.assign(bins, 0);
  for (double v : samples) {
    auto k = static_cast<std::size_t>((v - lo) / width);
    h.counts[std::min(k, bins - 1)] += 1;
  }
  return h;
}

/// x_i - running average for every agent (absolute values when `absolute`).
inline std::vector<double> distances(const Population& pop, bool absolute = false) {
  const double avg = mean(pop.values());
  std::vector<double> d;
  d.reserve(pop.size());
  for (double v : pop.values()) d.push_back(absolute ? std::abs(v - avg) : v - avg);
  return d;
}

/// `bins` == 0 picks the bin count by the Freedman-Diaconis rule.
inline Histogram distance_histogram(const Population& pop, std::size_t bins = 0, bool absolute = false) {
  const auto d = distances(pop, absolute);
  return make_histogram(d, bins == 0 ? freedman_diaconis_bins(d) : bins);
}

struct SurvivalFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r_squared = 0.0;
  std::size_t bins_used = 0;
};

/// Least-squares line through (lower bin edge, ln of the fraction of samples
/// at or beyond that edge) over bins holding at least `min_count` samples.
/// An exponential tail shows up as a straight line with negative slope.
inline SurvivalFit survival_fit(const Histogram& h, std::uint64_t min_count = 30, std::size_t min_bins = 5) {
  std::vector<double> xs;
  std::vector<double> ys;
  std::uint64_t beyond = h.total;
  for (std::size_t k = 0; k < h.counts.size(); ++k) {
    if (h.counts[k] >= min_count && beyond > 0) {
      xs.push_back(h.bin_edges[k]);
      ys.push_back(std::log(static_cast<double>(beyond) / static_cast<double>(h.total)));
    }
    beyond -= h.counts[k];
  }
  if (xs.size() < min_bins) throw InsufficientDataError("survival_fit: too few bins with enough samples");

  const double m = static_cast<double>(xs.size());
  double mx = 0.0;
  double my = 0.0;
  for (std::size_t k = 0; k < xs.size(); ++k) {
    mx += xs[k];
    my += ys[k];
  }
  mx /= m;
  my /= m;
  double sxx = 0.0;
  double sxy = 0.0;
  double syy = 0.0;
  for (std::size_t k = 0; k < xs.size(); ++k) {
    sxx += (xs[k] - mx) * (xs[k] - mx);
    sxy += (xs[k] - mx) * (ys[k] - my);
    syy += (ys[k] - my) * (ys[k] - my);
  }
  SurvivalFit fit;
  fit.bins_used = xs.size();
  fit.slope = sxx > 0.0 ? sxy / sxx : 0.0;
  fit.intercept = my - fit.slope * mx;
  fit.r_squared = (sxx > 0.0 && syy > 0.0) ? (sxy * sxy) / (sxx * syy) : 0.0;
  return fit;
}

}  // namespace noisy_gossip
