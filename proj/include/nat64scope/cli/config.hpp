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

// Run configuration (JSON). Relative paths resolve against the directory
// holding the config file.
//
//     {
//       "targets": ["91.201.7.243", "..."],
//       "ping_target": "91.201.7.243",
//       "dns2_name": "time-c-b.nist.gov",
//       "dns2_a_records": ["..."],
//       "dataset": "dataset.ndjson",
//       "public_nat64_list": "public_nat64.txt",
//       "public_resolver_list": "public_resolvers.txt",
//       "ip2as": "ip2as.txt",
//       "as_categories": "as_categories.csv",
//       "repeat": 2,
//       "concurrency": 64,
//       "out_dir": "out",
//       "drop_final_round": true,
//       "exclude_ttl_anomaly": false,
//       "local_nat_threshold_ms": 2.0,
//       "resolvers": ["2001:db8::53", "[::1]:5353"],
//       "dns_timeout_ms": 5000,
//       "probe_id": "local",
//       "traceroute": {"max_ttl": 32, "timeout_ms": 4000, "packets_per_hop": 3}
//     }
//
// Every key is optional.

#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "nat64scope/acquire/dns.hpp"
#include "nat64scope/acquire/ip2as.hpp"
#include "nat64scope/classifier.hpp"

namespace nat64scope::cli {

/// Bad or inconsistent configuration; commands exit with status 2.
class ConfigError : public Error {
public:
  using Error::Error;
};

struct TracerouteSettings {
  int max_ttl = 32;
  int timeout_ms = 4000;
  int packets_per_hop = 3;

  bool operator==(const TracerouteSettings&) const = default;
};

struct RunConfig {
  std::vector<Ipv4Address> targets;
  Ipv4Address ping_target{{91, 201, 7, 243}};
  std::string dns2_name = "time-c-b.nist.gov";
  /// Empty: resolved with an A query before the tests run.
  std::vector<Ipv4Address> dns2_a_records;
  std::optional<std::filesystem::path> dataset;
  std::optional<std::filesystem::path> public_nat64_list;
  std::optional<std::filesystem::path> public_resolver_list;
  std::optional<std::filesystem::path> ip2as;
  std::optional<std::filesystem::path> as_categories;
  int repeat = 2;
  int concurrency = 64;
  std::filesystem::path out_dir = "out";
  bool drop_final_round = true;
  bool exclude_ttl_anomaly = false;
  double local_nat_threshold_ms = 2.0;
  std::vector<DnsEndpoint> resolvers;
  int dns_timeout_ms = 5000;
  std::string probe_id = "local";
  TracerouteSettings traceroute;
};

/// "2001:db8::53", "192.0.2.53", "[::1]:5353" or "192.0.2.53:5353".
DnsEndpoint parse_endpoint(std::string_view text);
std::string format_endpoint(const DnsEndpoint& e);

/// Throws ConfigError for unknown keys, wrong types and bad values.
RunConfig parse_run_config(const nlohmann::json& j, const std::filesystem::path& base_dir);
/// Also checks that every referenced input file exists.
RunConfig load_run_config(const std::filesystem::path& path);
/// Paths are written relative to `base_dir` when they lie below it.
nlohmann::json to_json(const RunConfig& c, const std::filesystem::path& base_dir);

/// Throws ConfigError naming the first referenced file that is missing.
void check_files(const RunConfig& c);

/// Lists and tables named by the config; absent ones are empty.
struct Inputs {
  PrefixSet public_nat64;
  PrefixSet public_resolvers;
  std::optional<Ip2AsTable> ip2as;
  AsCategoryMap as_categories;
};

/// Parse errors in the input files surface as ConfigError.
Inputs load_inputs(const RunConfig& c);

}  // namespace nat64scope::cli
