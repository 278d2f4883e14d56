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
#include <filesystem>
#include <json.hpp>
#include <limits>
#include <string>

#include "noisy_gossip/harness/experiment.hpp"
#include "noisy_gossip/harness/io.hpp"

namespace ng = noisy_gossip;
namespace fs = std::filesystem;

namespace {

fs::path scratch_dir(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("noisy_gossip_io_" + name);
  fs::remove_all(p);
  return p;
}

ng::ExperimentConfig small_config() {
  ng::ExperimentConfig c;
  c.n = 20;
  c.steps = 400;
  c.record_every = 50;
  c.runs = 2;
  c.decomposition_intervals = {{0, 100}, {100, 400}};
  return c;
}

}  // namespace

TEST(Io, EmptyTraceIsHeaderOnly) {
  EXPECT_EQ(ng::trace_csv({}), std::string(ng::kTraceCsvHeader) + "\n");
  EXPECT_TRUE(ng::parse_trace_csv(ng::trace_csv({})).empty());
}

TEST(Io, TraceRoundTripIsExact) {
  const auto trace = ng::run_single(small_config(), 0);
  EXPECT_EQ(ng::parse_trace_csv(ng::trace_csv(trace.snapshots)), trace.snapshots);
}

TEST(Io, AwkwardRealsRoundTrip) {
  ng::PotentialSnapshot s;
  s.step = 7;
  s.tss = 0.1 + 0.2;
  s.phi_bar = std::numeric_limits<double>::denorm_min();
  s.phi = 1e308;
  s.running_avg = -1.0 / 3.0;
  s.drift = std::nextafter(1.0, 2.0);
  s.parallel_time = 0.07;
  EXPECT_EQ(ng::parse_trace_csv(ng::trace_csv({s})).front(), s);
}

TEST(Io, DecompositionRoundTrip) {
  const auto trace = ng::run_single(small_config(), 1);
  const auto back = ng::parse_decomposition_csv(ng::decomposition_csv(trace.decompositions));
  ASSERT_EQ(back.size(), trace.decompositions.size());
  for (std::size_t k = 0; k < back.size(); ++k) {
    EXPECT_EQ(back[k].interval, trace.decompositions[k].interval);
    EXPECT_EQ(back[k].acc.s_prime, trace.decompositions[k].acc.s_prime);
    EXPECT_EQ(back[k].acc.s_star, trace.decompositions[k].acc.s_star);
    EXPECT_EQ(back[k].acc.s_minus, trace.decompositions[k].acc.s_minus);
    EXPECT_EQ(back[k].bound_holds, trace.decompositions[k].bound_holds);
  }
}

TEST(Io, RejectsWrongHeader) {
  EXPECT_THROW(ng::parse_trace_csv("a,b\n1,2\n"), ng::ParameterError);
  EXPECT_THROW(ng::parse_trace_csv(std::string(ng::kTraceCsvHeader) + "\n1,2\n"), ng::ParameterError);
}

TEST(Io, EmitRunOutputs) {
  const auto c = small_config();
  const auto traces = ng::run_experiment(c, 2);
  const fs::path dir = scratch_dir("emit");
  ng::emit_run_outputs(c, traces, ng::bounds_for(c), dir);
  for (const char* f : {"trace_run0.csv", "trace_run1.csv", "decomposition_run0.csv", "summary.json"})
    EXPECT_TRUE(fs::exists(dir / f)) << f;
  const auto summary = nlohmann::json::parse(ng::read_text(dir / "summary.json"));
  EXPECT_EQ(summary["metadata"]["master_seed"], c.master_seed);
  EXPECT_EQ(summary["metadata"]["generator"], "mt19937_64");
  EXPECT_EQ(summary["runs"].size(), 2u);
  EXPECT_TRUE(summary["bounds"].contains("b_prime"));
  std::size_t flagged = 0;
  for (const auto& t : traces)
    for (const auto& d : t.decompositions) flagged += !d.bound_holds;
  EXPECT_EQ(summary["ensemble"]["decomposition_violations"], flagged);
  EXPECT_EQ(summary["ensemble"]["decomposition_checks"], 4);
  EXPECT_EQ(ng::parse_trace_csv(ng::read_text(dir / "trace_run1.csv")), traces[1].snapshots);
  fs::remove_all(dir);
}

TEST(Io, ErrorsNameThePath) {
  try {
    ng::read_text("/nonexistent/dir/file.csv");
    FAIL();
  } catch (const ng::IoError& e) {
    EXPECT_NE(std::string(e.what()).find("/nonexistent/dir/file.csv"), std::string::npos);
  }
  // A regular file as a parent directory fails even with root privileges.
  const auto blocker = fs::temp_directory_path() / "ng_io_blocker";
  ng::write_text(blocker, "x");
  EXPECT_THROW(ng::write_text(blocker / "out.csv", "x"), ng::IoError);
  fs::remove(blocker);
}
