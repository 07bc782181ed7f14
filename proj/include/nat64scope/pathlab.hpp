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

// Paired IPv4 / NAT64 traceroute analysis.
//
// A pair joins the native IPv4 traceroute and the NAT64 traceroute that one
// probe ran to one target in one measurement round. A path is successful
// when any hop is the target (for NAT64 paths, the target synthesized under
// the path's prefix); its length is the TTL of the first such hop and its
// RTT the mean of that hop's packet RTTs.

#pragma once

#include <array>
#include <functional>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "nat64scope/acquire/ip2as.hpp"
#include "nat64scope/detector.hpp"
#include "nat64scope/model.hpp"
#include "nat64scope/stats.hpp"

namespace nat64scope {

class UnsuccessfulPath : public Error {
public:
  using Error::Error;
};
class NoRuns : public Error {
public:
  using Error::Error;
};
class NoNatHop : public Error {
public:
  using Error::Error;
};

// ---- pairing and filtering ------------------------------------------------

struct UnpairedPath {
  TraceroutePath path;
  std::string reason;
};

struct PairingResult {
  std::vector<PathPair> pairs;  // sorted by probe, target, round, prefix
  std::vector<UnpairedPath> unpaired;
};

/// One pair per (probe, target, prefix, round) where both families exist. A
/// probe using several prefixes yields several pairs sharing one IPv4 path.
PairingResult pair_paths(std::span<const TraceroutePath> paths);

enum class ExclusionReason { TrailingRound, IncompleteRound, DeadTarget, NoNatHop, TtlAnomaly, Custom };
std::string_view to_string(ExclusionReason r);

/// An extra exclusion predicate; `name` is reported as the detail.
struct FilterRule {
  std::string name;
  std::function<bool(const PathPair&)> excludes;
};

struct FilterConfig {
  /// Drop the highest round index present.
  bool drop_final_round = false;
  /// Targets every probe must cover in a round; defaults to every target
  /// seen in the input.
  std::optional<std::vector<Ipv4Address>> expected_targets;
  bool exclude_ttl_anomaly = false;
  int ttl_anomaly_max_hops = 3;
  std::vector<FilterRule> extra_rules;
};

struct ExcludedPair {
  PathPair pair;
  ExclusionReason reason = ExclusionReason::Custom;
  std::string detail;
};

struct FilterResult {
  std::vector<PathPair> kept;
  std::vector<ExcludedPair> excluded;

  std::map<ExclusionReason, int> counts() const;
};

/// Applies, in order and first match wins: TrailingRound, IncompleteRound,
/// DeadTarget, NoNatHop, TtlAnomaly (when enabled), then extra rules.
FilterResult filter_pairs(std::vector<PathPair> pairs, const FilterConfig& config = {});

// ---- per-path measures ----------------------------------------------------

/// The address a hop must carry to count as the target.
IpAddress target_address(const TraceroutePath& path);

/// TTL of the first hop matching the target, if any.
std::optional<int> target_hop(const TraceroutePath& path, const Ipv4Address& target_v4,
                              const std::optional<Nat64Prefix>& prefix);

bool success(const TraceroutePath& path, const Ipv4Address& target_v4,
             const std::optional<Nat64Prefix>& prefix);
inline bool success(const TraceroutePath& path) {
  return success(path, path.target_v4, path.prefix);
}

/// Maps a hop address to an AS; NAT64-translated hops map by their
/// embedded IPv4 address.
std::optional<Asn> hop_asn(const IpAddress& addr, const std::optional<Nat64Prefix>& prefix,
                           const Ip2AsTable& ip2as);

bool reached_target_as(const TraceroutePath& path, Asn target_asn, const Ip2AsTable& ip2as);

/// Share of non-responding hops among hops 1..K, K being the target hop.
/// Throws UnsuccessfulPath when the target never answered.
double missing_hop_pct(const TraceroutePath& path, const Ipv4Address& target_v4,
                       const std::optional<Nat64Prefix>& prefix);
inline double missing_hop_pct(const TraceroutePath& path) {
  return missing_hop_pct(path, path.target_v4, path.prefix);
}

/// Fraction of tr1's bounded missing-hop runs (responding A, n missing
/// hops, responding B) that tr2 repeats exactly. Only runs whose A and B
/// both appear in tr2 are considered. Throws NoRuns when none qualify.
double match_missing_runs(const TraceroutePath& tr1, const TraceroutePath& tr2);

/// AS hosting the NAT64 behind `prefix`: the prefix origin when a custom
/// prefix is announced, otherwise the AS of the last responding hop before
/// the first prefix hop (the highest such TTL across paths wins), otherwise
/// the probe's IPv6 AS.
std::optional<Asn> attribute_nat64_as(std::span<const TraceroutePath> paths,
                                      const Nat64Prefix& prefix, const Ip2AsTable& ip2as,
                                      const ProbeRecord& probe);

/// Where the NAT64 sits relative to the probe's ASes. AllEqual and
/// NatInV6AS count as local.
enum class NatLocationKind { AllEqual, NatInV6AS, Remote };
std::string_view to_string(NatLocationKind k);
std::optional<NatLocationKind> parse_nat_location(std::string_view s);

struct NatLocation {
  NatLocationKind value = NatLocationKind::Remote;
  bool local = false;
  bool operator==(const NatLocation&) const = default;
};

/// Throws Error when the probe lacks either AS number.
NatLocation locate_nat64(Asn nat_as, const ProbeRecord& probe);

struct PathMetrics {
  int v4_len = 0;
  int nat_len = 0;
  double v4_rtt_ms = 0.0;
  double nat_rtt_ms = 0.0;
  double v4_missing_pct = 0.0;
  double nat_missing_pct = 0.0;
  int len_diff = 0;
  double rtt_diff_ms = 0.0;
  double len_pct = 0.0;  // NaN when v4_len is 0
  double rtt_pct = 0.0;  // NaN when v4_rtt_ms is 0
  /// Either path reached its target within the anomaly hop budget.
  bool ttl_anomaly = false;
};

/// Throws UnsuccessfulPath unless both members reached the target.
PathMetrics path_metrics(const PathPair& pair, int ttl_anomaly_max_hops = 3);

// ---- aggregation ----------------------------------------------------------

/// Per-pair outcomes that feed the aggregate.
struct PairAnalysis {
  bool v4_success = false;
  bool nat_success = false;
  std::optional<bool> v4_reached_target_as;  // unset without ip2as data
  std::optional<bool> nat_reached_target_as;
  std::optional<PathMetrics> metrics;  // both members successful
};

std::vector<PairAnalysis> analyze_pairs(std::span<const PathPair> pairs,
                                        const Ip2AsTable* ip2as = nullptr);

/// Context for the group breakdowns.
struct Groupings {
  std::map<ProbeId, DetectionGroup> group;
  /// Keyed by probe and prefix text ("64:ff9b::/96").
  std::map<std::pair<ProbeId, std::string>, NatLocation> location;
  std::map<ProbeId, Asn> probe_asn_v6;
};

struct GroupStats {
  std::size_t pairs = 0;
  std::size_t successful_pairs = 0;
  double v4_success_pct = 0.0;
  double nat_success_pct = 0.0;
  Summary len_diff;
  Summary rtt_diff;
};

struct TargetStats {
  std::size_t pairs = 0;
  double v4_success_pct = 0.0;
  double nat_success_pct = 0.0;
  /// Reached the target or the target's AS; NaN without ip2as data.
  double v4_reached_as_pct = 0.0;
  double nat_reached_as_pct = 0.0;
};

/// Missing-hop percentages of successful pairs in ten 10% bins; 100% falls
/// into the last bin.
using Histogram = std::array<std::size_t, 10>;

struct AggregateStats {
  std::size_t pairs = 0;
  std::size_t successful_pairs = 0;
  double v4_success_pct = 0.0;
  double nat_success_pct = 0.0;
  double both_success_pct = 0.0;
  /// Among unsuccessful paths, share that reached the target AS.
  double v4_failed_reached_as_pct = 0.0;
  double nat_failed_reached_as_pct = 0.0;

  Summary v4_len, nat_len, len_diff, len_pct;
  Summary v4_rtt, nat_rtt, rtt_diff, rtt_pct;
  Summary v4_missing, nat_missing;
  /// 100 * (mean NAT64 - mean IPv4) / mean IPv4, next to the mean of
  /// per-pair percentages held in len_pct / rtt_pct.
  double len_pct_of_means = 0.0;
  double rtt_pct_of_means = 0.0;
  std::optional<double> pearson_len_rtt;
  std::size_t ttl_anomaly_pairs = 0;

  std::map<std::string, GroupStats> by_group;     // detection group name
  std::map<std::string, GroupStats> by_location;  // "local" / "remote"
  std::map<std::string, GroupStats> by_prefix;    // "prefix AS<n>"
  std::map<std::string, TargetStats> by_target;   // target address
  Histogram v4_missing_hist{};
  Histogram nat_missing_hist{};
};

/// `analyses[i]` must describe `pairs[i]`. Pairs whose probe or location is
/// missing from `groupings` are left out of that breakdown only.
AggregateStats aggregate_report(std::span<const PathPair> pairs,
                                std::span<const PairAnalysis> analyses,
                                const Groupings& groupings);

/// Flat key -> value view of every statistic, for comparison and export.
std::map<std::string, double> flatten(const AggregateStats& stats);

/// The whole pipeline: pair, filter, analyse, aggregate.
struct PathsReport {
  PairingResult pairing;
  FilterResult filtered;
  std::vector<PairAnalysis> analyses;  // one per filtered.kept
  AggregateStats stats;
};

PathsReport analyze_paths(std::span<const TraceroutePath> paths, const FilterConfig& config,
                          const Ip2AsTable* ip2as, const Groupings& groupings);

}  // namespace nat64scope
