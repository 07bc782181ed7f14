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

// Report emission. Every report is written twice: CSV for people, JSON for
// programs. Rows are stably ordered and carry no wall-clock timestamps, so
// identical inputs produce identical bytes.

#pragma once

#include <filesystem>
#include <string>

#include "json.hpp"

#include "nat64scope/classifier.hpp"
#include "nat64scope/detector.hpp"
#include "nat64scope/pathlab.hpp"

namespace nat64scope {

/// Shortest round-trip decimal; empty for NaN.
std::string format_number(double v);

nlohmann::json detection_json(const DetectionReport& report);
/// Inverse of detection_json. Throws Error on malformed input.
DetectionReport detection_from_json(const nlohmann::json& j);
/// probe_id,group,dns1,dns2,dns1_prefix,working_prefixes,flags,diagnostics
std::string detection_probes_csv(const DetectionReport& report);
/// test,failed,passed,inconclusive,total; all four tests always listed.
std::string detection_table_csv(const DetectionReport& report);
std::string group_counts_csv(const DetectionReport& report);

nlohmann::json classification_json(const ClassificationReport& report);
std::string classification_probes_csv(const ClassificationReport& report);
std::string isp_evidence_csv(const ClassificationReport& report);
std::string as_category_csv(const ClassificationReport& report);
std::string probe_category_csv(const ClassificationReport& report);

nlohmann::json paths_json(const PathsReport& report);
/// One row per kept pair, with its metrics when both members succeeded.
std::string pairs_csv(const PathsReport& report);
std::string exclusions_csv(const PathsReport& report);
/// key,value over flatten(stats).
std::string stats_csv(const AggregateStats& stats);
std::string missing_histogram_csv(const AggregateStats& stats);

/// Writes `text` to `path`, creating parent directories.
void write_text_file(const std::filesystem::path& path, const std::string& text);
void write_json_file(const std::filesystem::path& path, const nlohmann::json& j);

}  // namespace nat64scope
