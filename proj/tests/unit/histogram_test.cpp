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

#include <gtest/gtest.h>

#include <cmath>
#include <numeric>
#include <vector>

#include "noisy_gossip/harness/histogram.hpp"
#include "test_util.hpp"

namespace ng = noisy_gossip;

TEST(Histogram, AllEqualPopulationIsOneBin) {
  const auto h = ng::distance_histogram(ng::Population(std::vector<double>(25, 4.0)), 10);
  ASSERT_EQ(h.counts.size(), 1u);
  EXPECT_EQ(h.counts[0], 25u);
  EXPECT_EQ(h.total, 25u);
}

TEST(Histogram, TwoPoints) {
  const auto h = ng::distance_histogram(ng::Population({-1.0, 1.0}), 2);
  ASSERT_EQ(h.counts.size(), 2u);
  EXPECT_EQ(h.counts[0], 1u);
  EXPECT_EQ(h.counts[1], 1u);
}

TEST(Histogram, Invariants) {
  ng::RandomStream rng(1);
  for (int trial = 0; trial < 50; ++trial) {
    const auto v = ng_test::uniform_values(rng, 10 + rng.index(1000), -5.0, 5.0);
    const auto h = ng::make_histogram(v, 2 + rng.index(30));
    EXPECT_EQ(std::accumulate(h.counts.begin(), h.counts.end(), std::uint64_t{0}), h.total);
    EXPECT_EQ(h.total, v.size());
    EXPECT_EQ(h.bin_edges.size(), h.counts.size() + 1);
    for (std::size_t k = 1; k < h.bin_edges.size(); ++k) EXPECT_LT(h.bin_edges[k - 1], h.bin_edges[k]);
  }
  EXPECT_THROW(ng::make_histogram(std::vector<double>{1.0, 2.0}, 1), ng::ParameterError);
}

TEST(Histogram, FreedmanDiaconisDefault) {
  ng::RandomStream rng(2);
  std::vector<double> v(10000);
  for (double& x : v) x = rng.normal(1.0);
  const std::size_t bins = ng::freedman_diaconis_bins(v);
  // Width 2 IQR n^(-1/3) with IQR ~ 1.349 for a standard normal.
  std::vector<double> s = v;
  std::sort(s.begin(), s.end());
  const double width = 2.0 * 1.349 / std::cbrt(10000.0);
  const double expected = (s.back() - s.front()) / width;
  EXPECT_NEAR(static_cast<double>(bins), expected, 0.1 * expected);
}

TEST(SurvivalFit, ExactExponential) {
  // Counts proportional to the mass of an Exp(1) law in unit bins.
  ng::Histogram h;
  const std::size_t bins = 40;
  for (std::size_t k = 0; k <= bins; ++k) h.bin_edges.push_back(static_cast<double>(k));
  const double total = 1e7;
  for (std::size_t k = 0; k < bins; ++k)
    h.counts.push_back(static_cast<std::uint64_t>(std::llround(total * (std::exp(-double(k)) - std::exp(-double(k + 1))))));
  h.total = std::accumulate(h.counts.begin(), h.counts.end(), std::uint64_t{0});
  const auto fit = ng::survival_fit(h);
  EXPECT_GT(fit.r_squared, 0.999);
  EXPECT_NEAR(fit.slope, -1.0, 0.02);
}

TEST(SurvivalFit, UniformControlIsReported) {
  ng::RandomStream rng(3);
  const auto v = ng_test::uniform_values(rng, 100000, 0.0, 1.0);
  const auto fit = ng::survival_fit(ng::make_histogram(v, 50));
  // Synthetic control: log survival of a uniform law is concave, not linear.
  EXPECT_LT(fit.slope, 0.0);
  RecordProperty("uniform_r_squared", std::to_string(fit.r_squared));
}

TEST(SurvivalFit, InsufficientData) {
  const auto h = ng::make_histogram(std::vector<double>{1.0, 2.0, 3.0, 4.0}, 4);
  EXPECT_THROW(ng::survival_fit(h), ng::InsufficientDataError);
}
