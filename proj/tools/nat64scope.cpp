// Copyright 2026 The nat64scope Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// nat64scope: NAT64/DNS64 detection, classification and path analysis.

#include <csignal>
#include <iostream>

#include "CLI11.hpp"

#include "nat64scope/cli/commands.hpp"

namespace {

std::atomic<bool> g_stop{false};

extern "C" void on_sigint(int) { g_stop.store(true); }

}  // namespace

int main(int argc, char** argv) {
  using namespace nat64scope::cli;

  CLI::App app{"NAT64/DNS64 detection, classification and path analysis"};
  app.require_subcommand(1);
  app.fallthrough();  // global flags may follow the command
  app.set_version_flag("--version", "nat64scope 0.1.0");

  GlobalOptions g;
  std::string config, from_dataset, out;
  int concurrency = 0;
  app.add_option("--config", config, "Run configuration (JSON)");
  app.add_option("--from-dataset", from_dataset, "Analyse this dataset instead of measuring");
  app.add_option("--out", out, "Output directory");
  app.add_option("--concurrency", concurrency, "Concurrent live tests")->check(CLI::PositiveNumber);
  app.add_flag("--exclude-ttl-anomaly", g.exclude_ttl_anomaly,
               "Drop pairs reaching the target within the anomaly hop budget");

  auto* detect = app.add_subcommand("detect", "Run or replay the detection tests");
  auto* classify = app.add_subcommand("classify", "Categorise the detected probes");
  auto* paths = app.add_subcommand("paths", "Compare IPv4 and NAT64 traceroutes");

  SimulateOptions sim;
  std::string scenario;
  auto* simulate = app.add_subcommand("simulate", "Generate a synthetic dataset with ground truth");
  simulate->add_option("--scenario", scenario, "Scenario file")->check(CLI::ExistingFile);
  simulate->add_option("--seed", sim.seed, "Seed for the default scenario");
  simulate->add_option("--min-probes", sim.min_probes, "Probe floor for the default scenario")
      ->check(CLI::Range(1, 5000));

  AtlasFetchOptions fetch;
  auto* atlas_fetch = app.add_subcommand("atlas-fetch", "Download RIPE Atlas results");
  atlas_fetch->add_option("measurement", fetch.measurement_id, "Measurement id")->required();
  atlas_fetch->add_option("--start", fetch.start, "First timestamp (UTC seconds)");
  atlas_fetch->add_option("--stop", fetch.stop, "Last timestamp (UTC seconds)");
  atlas_fetch->add_option("--window", fetch.window, "Seconds per page")->capture_default_str();
  atlas_fetch->add_option("--base-url", fetch.base_url, "Atlas API base URL")->capture_default_str();

  AtlasSpecOptions spec;
  auto* atlas_spec = app.add_subcommand("atlas-spec", "Print a measurement request body");
  atlas_spec->add_option("kind", spec.kind, "dns, ping or traceroute")->required();
  atlas_spec->add_option("target", spec.target, "Target address or query name")->required();
  atlas_spec->add_option("--probes", spec.probes, "Probe ids")->required()->delimiter(',');
  atlas_spec->add_option("--description", spec.description, "Measurement description");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    // --help and --version exit 0; usage errors count as bad configuration.
    return app.exit(e) == 0 ? kExitOk : kExitConfig;
  }

  if (!config.empty()) g.config = config;
  if (!from_dataset.empty()) g.from_dataset = from_dataset;
  if (!out.empty()) g.out = out;
  if (concurrency > 0) g.concurrency = concurrency;
  if (!scenario.empty()) sim.scenario = scenario;

  std::signal(SIGINT, on_sigint);
  try {
    if (detect->parsed()) return cmd_detect(g, std::cout, &g_stop);
    if (classify->parsed()) return cmd_classify(g, std::cout);
    if (paths->parsed()) return cmd_paths(g, std::cout);
    if (simulate->parsed()) return cmd_simulate(g, sim, std::cout);
    if (atlas_fetch->parsed()) return cmd_atlas_fetch(g, fetch, std::cout);
    if (atlas_spec->parsed()) return cmd_atlas_spec(spec, std::cout);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitRuntime;
  }
  return kExitRuntime;
}
