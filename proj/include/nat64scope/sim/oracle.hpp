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

// Brute-force recomputation of the path statistics. Deliberately shares no
// code with pathlab: its own pairing, filters, bit-level address embedding,
// linear-scan longest-prefix match and textbook summary formulas. Output
// uses the same flat key names as pathlab's flatten().

#pragma once

#include <map>
#include <string>
#include <utility>
#include <vector>

#include "nat64scope/acquire/dataset.hpp"
#include "nat64scope/sim/generate.hpp"

namespace nat64scope::sim {

using FlatStats = std::map<std::string, double>;

struct OracleContext {
  std::map<ProbeId, std::string> group;  // group name
  /// (probe, prefix text) -> true for local.
  std::map<std::pair<ProbeId, std::string>, bool> local;
  std::vector<std::pair<IpPrefix, Asn>> ip2as;  // empty: reach unknown
  bool drop_final_round = false;
  bool exclude_ttl_anomaly = false;
};

/// Context built from the planted truth: groups, locations of prefixes
/// that traceroutes can see through, and the generated ip2as table.
OracleContext oracle_context(const Generated& g, bool drop_final_round, bool exclude_ttl_anomaly);

FlatStats oracle_stats(const DatasetFile& dataset, const OracleContext& ctx);

/// Keys present in only one map, or whose values differ by more than
/// `rel_tol` relative to the larger magnitude. NaN equals NaN.
std::vector<std::string> compare_stats(const FlatStats& a, const FlatStats& b,
                                       double rel_tol = 1e-9);

}  // namespace nat64scope::sim
