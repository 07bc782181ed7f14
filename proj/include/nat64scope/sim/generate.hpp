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

// Scenario -> dataset plus the ground truth planted in it.

#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"

#include "nat64scope/acquire/dataset.hpp"
#include "nat64scope/classifier.hpp"
#include "nat64scope/detector.hpp"
#include "nat64scope/sim/scenario.hpp"

namespace nat64scope::sim {

/// One NAT64 prefix a probe can ping through.
struct PrefixTruth {
  Nat64Prefix prefix;
  Asn nat_as = 0;
  bool opaque = false;  // no ICMP Time Exceeded through the NAT
  NatLocationKind location = NatLocationKind::Remote;
  bool local = false;
  bool local_nat = false;  // NAT hop within 2 ms

  bool operator==(const PrefixTruth&) const = default;
};

struct ProbeTruth {
  ProbeId probe_id;
  std::string cohort;
  DetectionGroup group = DetectionGroup::NoNat64;
  Setup setup = Setup::Standalone;
  bool public_resolver = false;
  /// Prefixes whose ping verdict is Passed; traceroutes run through these.
  std::vector<PrefixTruth> prefixes;
  /// Expected classification; empty for probes outside the NAT64 groups.
  std::set<ProbeCategory> categories;

  bool operator==(const ProbeTruth&) const = default;
};

struct AsTruth {
  Asn asn = 0;
  bool is_isp_dns64 = false;
  std::optional<IpAddress> resolver;  // set when is_isp_dns64
  bool multiple_similar_prefixes = false;

  bool operator==(const AsTruth&) const = default;
};

struct PlantedCounts {
  int no_nat_hop_pairs = 0;
  std::optional<int> trailing_round;
  std::vector<Ipv4Address> dead_targets;
  std::vector<std::pair<ProbeId, int>> incomplete;  // (probe, round)
  int ttl_anomaly_probes = 0;

  bool operator==(const PlantedCounts&) const = default;
};

struct GroundTruth {
  std::uint64_t seed = 0;
  std::map<ProbeId, ProbeTruth> probes;
  std::map<Asn, AsTruth> ases;  // every AS with at least one probe
  PlantedCounts planted;

  bool operator==(const GroundTruth&) const = default;
};

nlohmann::json to_json(const GroundTruth& truth);
GroundTruth truth_from_json(const nlohmann::json& j);

struct Generated {
  DatasetFile dataset;
  GroundTruth truth;
  std::vector<std::pair<IpPrefix, Asn>> ip2as;
  std::vector<std::string> public_nat64;
  std::vector<std::string> public_resolvers;
  std::vector<std::pair<Asn, AsCategory>> as_categories;
  std::vector<Ipv4Address> targets;
  Ipv4Address ping_target;
  std::string dns2_name;
  std::vector<Ipv4Address> dns2_a_records;
};

/// Pure function of the scenario. Throws ScenarioError for invalid ones.
Generated generate(const Scenario& scenario);

/// Files written by write_generated, relative to its directory.
struct GeneratedFiles {
  static constexpr const char* dataset = "dataset.ndjson";
  static constexpr const char* truth = "truth.json";
  static constexpr const char* ip2as = "ip2as.txt";
  static constexpr const char* public_nat64 = "public_nat64.txt";
  static constexpr const char* public_resolvers = "public_resolvers.txt";
  static constexpr const char* as_categories = "as_categories.csv";
};

void write_generated(const Generated& g, const std::filesystem::path& dir);

}  // namespace nat64scope::sim
