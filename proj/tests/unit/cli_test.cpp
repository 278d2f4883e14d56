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

#include <array>
#include <cstdio>
#include <filesystem>
#include <json.hpp>
#include <string>
#include <sys/wait.h>

#include "noisy_gossip/harness/io.hpp"

namespace fs = std::filesystem;

namespace {

struct Result {
  int status = -1;
  std::string out;
};

Result run_cli(const std::string& args) {
  const std::string cmd = std::string(NOISY_GOSSIP_CLI) + " " + args + " 2>&1";
  Result r;
  FILE* pipe = popen(cmd.c_str(), "r");
  if (pipe == nullptr) return r;
  std::array<char, 4096> buf{};
  while (fgets(buf.data(), buf.size(), pipe) != nullptr) r.out += buf.data();
  const int raw = pclose(pipe);
  r.status = WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
  return r;
}

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("noisy_gossip_cli_" + name);
  fs::remove_all(p);
  return p;
}

}  // namespace

TEST(Cli, NoCommandIsUsageError) {
  const auto r = run_cli("");
  EXPECT_EQ(r.status, 2);
  EXPECT_NE(r.out.find("run"), std::string::npos);
}

TEST(Cli, UnknownFlagIsUsageError) {
  EXPECT_EQ(run_cli("run --bogus 3").status, 2);
  EXPECT_EQ(run_cli("frobnicate").status, 2);
}

TEST(Cli, BadOverrideIsUsageError) {
  EXPECT_EQ(run_cli("bounds --set nope=1").status, 2);
  EXPECT_EQ(run_cli("bounds --set n=1").status, 2);
}

TEST(Cli, BoundsZeroNoise) {
  const auto r = run_cli(R"(bounds --set noise.kind=zero --set steps=5000 --set record_every=5000)");
  ASSERT_EQ(r.status, 0) << r.out;
  const auto j = nlohmann::json::parse(r.out.substr(r.out.find('{')));
  EXPECT_EQ(j["b_prime"], 0.0);
  EXPECT_EQ(j["t"], 5000);
  for (const auto& [k, v] : j.items()) EXPECT_FALSE(v.is_object()) << k;
}

TEST(Cli, RunIsByteIdentical) {
  const fs::path a = scratch("run_a"), b = scratch("run_b");
  const std::string args = " --seed 11 --set n=50 --set steps=5000 --set record_every=500 --set runs=3";
  ASSERT_EQ(run_cli("run --out " + a.string() + args).status, 0);
  ASSERT_EQ(run_cli("run --out " + b.string() + args + " --jobs 1").status, 0);
  for (const char* f : {"trace_run0.csv", "trace_run2.csv"})
    EXPECT_EQ(noisy_gossip::read_text(a / f), noisy_gossip::read_text(b / f)) << f;
  fs::remove_all(a);
  fs::remove_all(b);
}

TEST(Cli, RunWithConfigFile) {
  const fs::path out = scratch("config_run");
  const std::string cfg = std::string(NOISY_GOSSIP_SOURCE_DIR) + "/configs/small_decomposition.json";
  const auto r = run_cli("run --config " + cfg + " --out " + out.string());
  ASSERT_EQ(r.status, 0) << r.out;
  const auto s = nlohmann::json::parse(noisy_gossip::read_text(out / "summary.json"));
  EXPECT_EQ(s["ensemble"]["decomposition_checks"], 16);
  EXPECT_TRUE(fs::exists(out / "decomposition_run0.csv"));
  fs::remove_all(out);
}

TEST(Cli, MissingSeedIsPrinted) {
  const fs::path out = scratch("noseed");
  const auto r = run_cli("run --out " + out.string() + " --set n=10 --set steps=100 --set record_every=100");
  ASSERT_EQ(r.status, 0) << r.out;
  EXPECT_NE(r.out.find("master_seed"), std::string::npos);
  const auto s = nlohmann::json::parse(noisy_gossip::read_text(out / "summary.json"));
  EXPECT_TRUE(s["metadata"]["master_seed"].is_number_unsigned());
  fs::remove_all(out);
}

TEST(Cli, MissingConfigFileIsUsageError) {
  EXPECT_EQ(run_cli("run --config /nonexistent/config.json").status, 2);
}

TEST(Cli, Histogram) {
  const fs::path out = scratch("hist");
  const auto r = run_cli("histogram --seed 3 --bins 12 --out " + out.string() +
                         " --set n=200 --set steps=2000 --set record_every=2000");
  ASSERT_EQ(r.status, 0) << r.out;
  const auto h = nlohmann::json::parse(noisy_gossip::read_text(out / "histogram.json"));
  EXPECT_EQ(h["histogram"]["counts"].size(), 12u);
  EXPECT_EQ(h["histogram"]["total"], 200);
  fs::remove_all(out);
}

TEST(Cli, ReplicateDistanceExperiment) {
  const fs::path out = scratch("fig_a");
  const auto r = run_cli("replicate-fig-a --out " + out.string() + " --set n=2000 --set steps=20000 --set record_every=2000");
  ASSERT_EQ(r.status, 0) << r.out;
  EXPECT_TRUE(fs::exists(out / "distance_histogram.json"));
  fs::remove_all(out);
}

TEST(Cli, ReplicateCutoffExperimentShort) {
  const fs::path out = scratch("fig_b");
  const auto r = run_cli("replicate-fig-b --out " + out.string() + " --set steps=100000 --set record_every=10000");
  ASSERT_EQ(r.status, 0) << r.out;
  const auto s = nlohmann::json::parse(noisy_gossip::read_text(out / "summary.json"));
  EXPECT_LT(s["runs"][0]["final"]["running_avg"].get<double>(), 10.0);
  EXPECT_TRUE(s["bounds"].is_object());
  fs::remove_all(out);
}

TEST(Cli, VerifyPasses) {
  const auto r = run_cli("verify");
  EXPECT_EQ(r.status, 0) << r.out;
  EXPECT_EQ(r.out.find("FAIL"), std::string::npos) << r.out;
}
