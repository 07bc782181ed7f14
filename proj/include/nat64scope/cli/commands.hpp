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

// Commands behind the nat64scope tool. Each returns the process exit status
// and throws ConfigError (status 2) for bad configuration; other errors are
// runtime failures (status 1).

#pragma once

#include <atomic>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "nat64scope/cli/config.hpp"

namespace nat64scope::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitRuntime = 1;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitInterrupted = 130;

struct GlobalOptions {
  std::optional<std::filesystem::path> config;
  std::optional<std::filesystem::path> from_dataset;
  std::optional<std::filesystem::path> out;
  std::optional<int> concurrency;
  bool exclude_ttl_anomaly = false;
};

/// Config file (or defaults) with the command-line overrides applied.
RunConfig effective_config(const GlobalOptions& g);

/// Output file names, relative to the output directory.
struct OutputFiles {
  static constexpr const char* dataset = "dataset.ndjson";
  static constexpr const char* detection_json = "detection.json";
  static constexpr const char* detection_probes = "detection_probes.csv";
  static constexpr const char* detection_table = "detection_table.csv";
  static constexpr const char* group_counts = "group_counts.csv";
  static constexpr const char* classification_json = "classification.json";
  static constexpr const char* classification_probes = "classification_probes.csv";
  static constexpr const char* isp_evidence = "isp_evidence.csv";
  static constexpr const char* as_category_table = "as_category_table.csv";
  static constexpr const char* probe_categories = "probe_categories.csv";
  static constexpr const char* paths_json = "paths.json";
  static constexpr const char* pairs = "pairs.csv";
  static constexpr const char* exclusions = "exclusions.csv";
  static constexpr const char* stats = "stats.csv";
  static constexpr const char* missing_histogram = "missing_histogram.csv";
};

/// Classifies every probe in the dataset, or runs the tests live from this
/// host when no dataset is configured. `stop` interrupts live runs; the
/// finished tests are still written out.
int cmd_detect(const GlobalOptions& g, std::ostream& log,
               const std::atomic<bool>* stop = nullptr);

/// Needs detection.json in the output directory and the dataset.
int cmd_classify(const GlobalOptions& g, std::ostream& log);

/// Pairs, filters and summarises the dataset's traceroutes.
int cmd_paths(const GlobalOptions& g, std::ostream& log);

struct SimulateOptions {
  std::optional<std::filesystem::path> scenario;  // default scenario when unset
  std::uint64_t seed = 42;
  int min_probes = 30;
};

/// Writes the dataset, truth, input tables, scenario.txt and a config.json
/// that points the other commands at them.
int cmd_simulate(const GlobalOptions& g, const SimulateOptions& s, std::ostream& log);

struct AtlasFetchOptions {
  std::int64_t measurement_id = 0;
  std::optional<std::int64_t> start;
  std::optional<std::int64_t> stop;
  std::int64_t window = 86400;
  std::string base_url = "https://atlas.ripe.net";
};

int cmd_atlas_fetch(const GlobalOptions& g, const AtlasFetchOptions& a, std::ostream& log);

struct AtlasSpecOptions {
  std::string kind;  // dns, ping or traceroute
  std::string target;
  std::vector<std::int64_t> probes;
  std::string description;
};

/// Prints the measurement request body to `out`.
int cmd_atlas_spec(const AtlasSpecOptions& a, std::ostream& out);

}  // namespace nat64scope::cli
