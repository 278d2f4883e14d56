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

#include <cstddef>
#include <cstdint>
#include <random>

namespace noisy_gossip {

/// SplitMix64 finalizer. Full 64-bit avalanche: every input bit flips each
/// output bit with probability close to 1/2.
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// Seed of run `run_index` in an ensemble rooted at `master_seed`.
///
/// The master seed is mixed first so that neighbouring master seeds do not
/// produce overlapping run-seed sequences.
constexpr std::uint64_t run_seed(std::uint64_t master_seed, std::uint64_t run_index) noexcept {
  return mix64(mix64(master_seed) ^ mix64(run_index + 0x632be59bd9b4e019ULL));
}

/// Deterministic random stream owned by exactly one run.
class RandomStream {
 public:
  using engine_type = std::mt19937_64;
  static constexpr const char* generator_name = "mt19937_64";

  explicit RandomStream(std::uint64_t seed) : engine_(seed) {}

  /// Uniform on [0, 1).
  double uniform01() { return std::generate_canonical<double, 64>(engine_); }

  double uniform(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(engine_); }

  std::size_t index(std::size_t n) { return std::uniform_int_distribution<std::size_t>(0, n - 1)(engine_); }

  std::int64_t integer(std::int64_t lo, std::int64_t hi) {
    return std::uniform_int_distribution<std::int64_t>(lo, hi)(engine_);
  }

  double normal(double stddev) { return std::normal_distribution<double>(0.0, stddev)(engine_); }

  bool coin() { return (engine_() >> 63) != 0; }

  engine_type& engine() noexcept { return engine_; }

 private:
  engine_type engine_;
};

}  // namespace noisy_gossip
