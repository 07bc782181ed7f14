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

// NAT64/DNS64 detection: the two DNS tests, the two ping tests, verdicts
// over repeated runs, and the per-probe result group.

#pragma once

#include <map>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "nat64scope/addrsynth.hpp"
#include "nat64scope/model.hpp"

namespace nat64scope {

enum class DetectionGroup { Nat64PlusDns64, Nat64Only, Dns64MisconfiguredOnly, NoNat64, Inconclusive };

std::string_view to_string(DetectionGroup g);
std::optional<DetectionGroup> parse_detection_group(std::string_view s);

/// Evaluates an AAAA response for ipv4only.arpa. Passes when any answer
/// embeds one of `known` under a supported layout.
TestRun eval_dns_test1(const ProbeId& probe, Timestamp ts, const DnsResponse& response,
                       std::span<const Ipv4Address> known = ipv4only_arpa_addresses());

/// Same as test 1 for a configured IPv4-only name whose A records are
/// supplied out of band.
TestRun eval_dns_test2(const ProbeId& probe, Timestamp ts, const DnsResponse& response,
                       std::span<const Ipv4Address> a_records);

/// Passes iff at least one echo reply arrived.
TestRun eval_ping_test(const ProbeId& probe, Timestamp ts, TestKind kind,
                       const Nat64Prefix& prefix, const Ipv4Address& target,
                       std::span<const EchoOutcome> replies);

/// Passed if all runs passed, Failed if all failed, Inconclusive otherwise.
/// Throws Error on empty input or runs for different probes or kinds.
Verdict aggregate(std::span<const TestRun> runs);

struct CustomPingCandidate {
  ProbeId probe_id;
  Nat64Prefix prefix;
  auto operator<=>(const CustomPingCandidate&) const = default;
};

/// Every probe sharing an IPv6 AS with a probe whose DNS test 1 observed a
/// non-standard prefix, paired with that prefix. The observing probe is
/// included.
std::set<CustomPingCandidate> select_custom_ping_candidates(std::span<const ProbeRecord> probes,
                                                            std::span<const TestRun> dns1_runs);

struct PingVerdict {
  TestKind kind = TestKind::StdPrefixPing;
  Nat64Prefix prefix;
  Verdict verdict;
};

struct GroupInputs {
  std::optional<Verdict> dns1;
  std::optional<Verdict> dns2;
  /// Prefix observed by DNS test 1; selects the "appropriate" ping.
  std::optional<Nat64Prefix> dns1_prefix;
  std::vector<PingVerdict> pings;
  std::vector<IpAddress> resolvers_used;
};

struct GroupPolicy {
  PrefixSet public_nat64;
  PrefixSet public_resolvers;
};

struct GroupFlags {
  bool uses_public_resolver = false;
  /// NAT64-only, no public resolver, and no DNS test passed.
  bool likely_accidental = false;
  /// DNS test 1 passed, DNS test 2 failed, yet the prefix from test 1 pings:
  /// the resolver only answers ipv4only.arpa and hosts synthesize locally.
  bool rfc8880_style = false;
  /// Some ping passed, but only through public NAT64 prefixes.
  bool public_nat64_only = false;
  /// DNS test 1 handed out a prefix from the public NAT64 list.
  bool dns1_public_prefix = false;

  bool operator==(const GroupFlags&) const = default;
};

struct GroupAssignment {
  DetectionGroup group = DetectionGroup::Inconclusive;
  GroupFlags flags;
  std::vector<std::string> diagnostics;
};

bool is_public_prefix(const Nat64Prefix& prefix, const PrefixSet& public_nat64);

/// Maps the per-test verdicts of one probe onto exactly one group.
GroupAssignment assign_group(const GroupInputs& inputs, const GroupPolicy& policy);

/// Everything the detector concludes about one probe.
struct ProbeDetection {
  ProbeId probe_id;
  GroupInputs inputs;
  GroupAssignment assignment;
  /// Prefixes whose ping verdict is Passed.
  std::vector<Nat64Prefix> working_prefixes;
};

/// Verdict counts for one test, shaped like a pass/fail/inconclusive table.
struct VerdictCounts {
  int failed = 0;
  int passed = 0;
  int inconclusive = 0;
  int total() const { return failed + passed + inconclusive; }
  void add(VerdictValue v);
};

struct DetectionReport {
  std::vector<ProbeDetection> probes;  // sorted by probe_id
  std::map<TestKind, VerdictCounts> table;
  std::map<DetectionGroup, int> group_counts;
};

/// Builds verdict inputs for one probe from all of its runs.
GroupInputs collect_inputs(std::span<const TestRun> runs);

/// Runs collect_inputs and assign_group for every probe that has runs.
DetectionReport detect_all(std::span<const TestRun> runs, const GroupPolicy& policy);

}  // namespace nat64scope
