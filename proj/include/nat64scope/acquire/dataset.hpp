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

// Canonical dataset file: line-delimited JSON, one record per line.
//
// The first line is a header:
//
//     {"type":"header","schema":"nat64scope/1","window_start":0,"window_end":0,"source":"sim"}
//
// followed by any mix of records, each tagged by "type":
//
//     probe       probe_id, asn_v4?, asn_v6?, resolvers[], tags[],
//                 network_prefix_v6?, annotations[]
//     test_run    probe_id, kind (dns1|dns2|std_ping|custom_ping), timestamp,
//                 outcome (pass|fail), observed_prefix?, resolver?,
//                 ping_prefix?, ping_target?, diagnostic?
//     traceroute  probe_id, family (ipv4|nat64), prefix?, target, round,
//                 timestamp, hops[{ttl, from?, rtt[]}]
//
// Prefixes are objects {"net":"64:ff9b::/96","kind":"standard"}. Optional
// fields are omitted when absent. Keys are written in sorted order so equal
// datasets serialize to equal bytes. Unknown keys are ignored on read.

#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "json.hpp"

#include "nat64scope/model.hpp"

namespace nat64scope {

inline constexpr std::string_view kDatasetSchema = "nat64scope/1";

/// Malformed dataset content. `line` is 1-based, 0 when not line-specific.
class DatasetError : public Error {
public:
  DatasetError(int line, const std::string& what)
      : Error(line > 0 ? "dataset line " + std::to_string(line) + ": " + what : what),
        line_(line) {}
  int line() const { return line_; }

private:
  int line_;
};

struct DatasetHeader {
  std::string schema{kDatasetSchema};
  Timestamp window_start = 0;
  Timestamp window_end = 0;
  std::string source;

  bool operator==(const DatasetHeader&) const = default;
};

struct DatasetFile {
  DatasetHeader header;
  std::vector<ProbeRecord> probes;
  std::vector<TestRun> runs;
  std::vector<TraceroutePath> paths;

  bool operator==(const DatasetFile&) const = default;
};

nlohmann::json to_json(const Nat64Prefix& prefix);
nlohmann::json to_json(const ProbeRecord& probe);
nlohmann::json to_json(const TestRun& run);
nlohmann::json to_json(const TraceroutePath& path);

// Each throws DatasetError (line 0) on missing or mistyped fields.
Nat64Prefix prefix_from_json(const nlohmann::json& j);
ProbeRecord probe_from_json(const nlohmann::json& j);
TestRun run_from_json(const nlohmann::json& j);
TraceroutePath path_from_json(const nlohmann::json& j);

/// Every run and path references a known probe; probe ids are unique.
ValidationReport check_integrity(const DatasetFile& dataset);

void write_dataset(std::ostream& out, const DatasetFile& dataset);
void save_dataset(const std::filesystem::path& path, const DatasetFile& dataset);

/// Reads and checks referential integrity. An empty stream is an error; a
/// header with no records is a valid empty dataset.
DatasetFile read_dataset(std::istream& in);
DatasetFile load_dataset(const std::filesystem::path& path);

}  // namespace nat64scope
