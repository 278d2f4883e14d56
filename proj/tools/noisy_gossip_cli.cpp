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

// Command-line front end: run, replicate-fig-a, replicate-fig-b, histogram,
// bounds, verify.

#include <cstdint>
#include <exception>
#include <filesystem>
#include <iostream>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "noisy_gossip/noisy_gossip.hpp"

namespace ng = noisy_gossip;
using nlohmann::json;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitFailure = 1;
constexpr int kExitUsage = 2;

struct CommonOptions {
  std::string config_path;
  std::string out_dir;
  std::optional<std::uint64_t> seed;
  unsigned jobs = 0;
  std::vector<std::string> overrides;
};

void add_common(CLI::App* cmd, CommonOptions& o, const std::string& default_out) {
  o.out_dir = default_out;
  cmd->add_option("--config", o.config_path, "JSON experiment config")->check(CLI::ExistingFile);
  cmd->add_option("--out", o.out_dir, "output directory")->capture_default_str();
  cmd->add_option("--seed", o.seed, "master seed (64-bit)");
  cmd->add_option("--jobs", o.jobs, "worker threads (0 = all cores)");
  cmd->add_option("--set", o.overrides, "dotted-path override key=value (repeatable)")->take_all();
}

/// Builds the experiment config: base, then the config file, then --set
/// overrides, then --seed. A seed that appears nowhere is drawn from the
/// system entropy source and printed.
ng::ExperimentConfig resolve_config(const CommonOptions& o, const ng::ExperimentConfig& base, bool base_has_seed) {
  json doc = ng::to_json(base);
  bool seed_given = base_has_seed;
  if (!o.config_path.empty()) {
    const json file = json::parse(ng::read_text(o.config_path));
    ng::config_from_json(file);  // strict check of the file on its own
    doc.merge_patch(file);
    seed_given = seed_given || file.contains("master_seed");
  }
  for (const std::string& s : o.overrides) {
    ng::apply_override(doc, s);
    if (s.rfind("master_seed=", 0) == 0) seed_given = true;
  }
  if (o.seed) {
    doc["master_seed"] = *o.seed;
  } else if (!seed_given) {
    std::random_device rd;
    const std::uint64_t seed = (static_cast<std::uint64_t>(rd()) << 32) ^ rd();
    doc["master_seed"] = seed;
    std::cerr << "no seed given; using master_seed " << seed << "\n";
  }
  return ng::config_from_json(doc);
}

void warn_standing_assumption(const ng::ExperimentConfig& c) {
  if (!ng::standing_assumption_holds(c.n, ng::moments(c.noise)))
    std::cerr << "warning: n * E[N^2] < 1 for " << ng::describe(c.noise) << " at n = " << c.n << "\n";
}

int cmd_run(const CommonOptions& o) {
  const ng::ExperimentConfig c = resolve_config(o, ng::ExperimentConfig{}, false);
  warn_standing_assumption(c);
  const auto traces = ng::run_experiment(c, o.jobs);
  ng::emit_run_outputs(c, traces, ng::bounds_for(c), o.out_dir);
  std::cout << "wrote " << traces.size() << " run(s) to " << o.out_dir << "\n";
  return kExitOk;
}

int cmd_fig_a(const CommonOptions& o) {
  const ng::ExperimentConfig c = resolve_config(o, ng::fig_a_config(), true);
  const auto trace = ng::run_single(c, 0);
  const ng::Histogram h = ng::distance_histogram(ng::Population(trace.final_values), 0, /*absolute=*/true);
  ng::emit_run_outputs(c, {trace}, ng::bounds_for(c), o.out_dir);
  json out = {{"histogram", ng::to_json(h)}};
  try {
    const ng::SurvivalFit fit = ng::survival_fit(h);
    out["survival_fit"] = {{"slope", fit.slope},
                           {"intercept", fit.intercept},
                           {"r_squared", fit.r_squared},
                           {"bins_used", fit.bins_used}};
    std::cout << "survival fit: slope " << fit.slope << ", r^2 " << fit.r_squared << " over " << fit.bins_used
              << " bins\n";
  } catch (const ng::InsufficientDataError& e) {
    out["survival_fit"] = nullptr;
    std::cout << "survival fit unavailable: " << e.what() << "\n";
  }
  ng::write_text(std::filesystem::path(o.out_dir) / "distance_histogram.json", out.dump(2) + "\n");
  return kExitOk;
}

int cmd_fig_b(const CommonOptions& o) {
  const ng::ExperimentConfig c = resolve_config(o, ng::fig_b_config(), true);
  const auto traces = ng::run_experiment(c, o.jobs);
  ng::emit_run_outputs(c, traces, ng::bounds_for(c), o.out_dir);
  for (const auto& t : traces)
    std::cout << "run " << t.run_index << ": final running average " << t.snapshots.back().running_avg << "\n";
  return kExitOk;
}

int cmd_histogram(const CommonOptions& o, std::size_t bins, bool absolute) {
  const ng::ExperimentConfig c = resolve_config(o, ng::ExperimentConfig{}, false);
  const auto trace = ng::run_single(c, 0);
  const ng::Population pop(trace.final_values);
  const ng::Histogram h = ng::distance_histogram(pop, bins, absolute);
  const json out = {{"absolute", absolute}, {"histogram", ng::to_json(h)}};
  ng::write_text(std::filesystem::path(o.out_dir) / "histogram.json", out.dump(2) + "\n");
  std::cout << "wrote " << h.counts.size() << "-bin histogram to " << o.out_dir << "\n";
  return kExitOk;
}

int cmd_bounds(const CommonOptions& o) {
  ng::ExperimentConfig base;
  base.master_seed = 1;  // only used when phi0 is derived from the init
  const ng::ExperimentConfig c = resolve_config(o, base, true);
  warn_standing_assumption(c);
  std::cout << ng::to_json(ng::bounds_for(c)).dump(2) << "\n";
  return kExitOk;
}

int cmd_verify(const CommonOptions& o) {
  const auto results = ng::run_verification(o.seed.value_or(20260101), o.jobs);
  bool ok = true;
  for (const auto& r : results) {
    std::cout << (r.passed ? "PASS " : "FAIL ") << r.name << ": " << r.detail << "\n";
    ok = ok && r.passed;
  }
  return ok ? kExitOk : kExitFailure;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Noisy gossip averaging simulator"};
  app.set_version_flag("--version", std::string(NOISY_GOSSIP_VERSION));
  app.require_subcommand(1);

  CommonOptions run_o, fa_o, fb_o, hist_o, bounds_o, verify_o;
  auto* run = app.add_subcommand("run", "run an experiment and write CSV + JSON outputs");
  add_common(run, run_o, "out");
  auto* fa = app.add_subcommand("replicate-fig-a", "distance distribution experiment with survival fit");
  add_common(fa, fa_o, "out/fig_a");
  auto* fb = app.add_subcommand("replicate-fig-b", "bounded-value drift experiment");
  add_common(fb, fb_o, "out/fig_b");
  auto* hist = app.add_subcommand("histogram", "histogram of final distances to the running average");
  add_common(hist, hist_o, "out");
  std::size_t bins = 0;
  bool absolute = false;
  hist->add_option("--bins", bins, "bin count (0 = Freedman-Diaconis)");
  hist->add_flag("--absolute", absolute, "use |x_i - running average|");
  auto* bounds = app.add_subcommand("bounds", "print closed-form bounds as flat JSON");
  add_common(bounds, bounds_o, ".");
  auto* verify = app.add_subcommand("verify", "run invariant and Monte Carlo checks");
  verify->add_option("--seed", verify_o.seed, "seed for the checks");
  verify->add_option("--jobs", verify_o.jobs, "worker threads (0 = all cores)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    std::cerr << app.help();
    return kExitUsage;
  }

  try {
    if (run->parsed()) return cmd_run(run_o);
    if (fa->parsed()) return cmd_fig_a(fa_o);
    if (fb->parsed()) return cmd_fig_b(fb_o);
    if (hist->parsed()) return cmd_histogram(hist_o, bins, absolute);
    if (bounds->parsed()) return cmd_bounds(bounds_o);
    if (verify->parsed()) return cmd_verify(verify_o);
  } catch (const ng::ParameterError& e) {
    std::cerr << "error: " << e.what() << "\n" << app.help();
    return kExitUsage;
  } catch (const json::exception& e) {
    std::cerr << "error: invalid JSON: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitFailure;
  }
  return kExitUsage;
}
