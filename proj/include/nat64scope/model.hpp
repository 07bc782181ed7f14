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

// Shared domain types. Everything here is a plain value; other modules
// attach behavior through free functions.

#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "nat64scope/ip.hpp"

namespace nat64scope {

using ProbeId = std::string;
using Timestamp = std::int64_t;  // UTC seconds

enum class PrefixKind { Standard, Custom, PublicService };

/// IPv6 prefix under which IPv4 addresses are embedded.
struct Nat64Prefix {
  Ipv6Address base;
  int length = 96;
  PrefixKind kind = PrefixKind::Custom;

  /// 64:ff9b::/96
  static Nat64Prefix standard();

  /// "64:ff9b::/96"
  std::string to_string() const;
  IpPrefix to_ip_prefix() const { return IpPrefix{base, length}; }

  /// Same network, ignoring the provenance tag.
  bool same_network(const Nat64Prefix& other) const {
    return length == other.length && base == other.base;
  }

  auto operator<=>(const Nat64Prefix&) const = default;
};

struct ProbeRecord {
  ProbeId probe_id;
  std::optional<Asn> asn_v4;
  std::optional<Asn> asn_v6;
  std::vector<IpAddress> resolvers;
  std::vector<std::string> tags;
  std::optional<IpPrefix> network_prefix_v6;
  /// Operator-supplied facts that cannot be measured, e.g. "home_setup".
  std::vector<std::string> annotations;

  bool has_annotation(std::string_view name) const;
  bool operator==(const ProbeRecord&) const = default;
};

enum class TestKind { DnsTest1, DnsTest2, StdPrefixPing, CustomPrefixPing };
enum class RawOutcome { Pass, Fail };

inline bool is_dns_test(TestKind k) { return k == TestKind::DnsTest1 || k == TestKind::DnsTest2; }

struct TestRun {
  ProbeId probe_id;
  TestKind kind = TestKind::DnsTest1;
  Timestamp timestamp = 0;
  RawOutcome outcome = RawOutcome::Fail;
  /// Prefix implied by a synthesized DNS answer.
  std::optional<Nat64Prefix> observed_prefix;
  std::optional<IpAddress> resolver_used;
  /// Prefix and IPv4 target a ping test was sent through.
  std::optional<Nat64Prefix> ping_prefix;
  std::optional<Ipv4Address> ping_target;
  std::string diagnostic;

  bool operator==(const TestRun&) const = default;
};

enum class VerdictValue { Passed, Failed, Inconclusive };

struct Verdict {
  VerdictValue value = VerdictValue::Failed;
  int supporting_runs = 0;

  bool operator==(const Verdict&) const = default;
};

enum class Family { IPv4, NAT64 };

struct Hop {
  int index = 1;  // TTL, 1-based
  std::optional<IpAddress> address;
  std::vector<double> rtts_ms;

  bool responded() const { return address.has_value(); }
  bool operator==(const Hop&) const = default;
};

struct TraceroutePath {
  ProbeId probe_id;
  Family family = Family::IPv4;
  std::optional<Nat64Prefix> prefix;
  Ipv4Address target_v4;
  int round = 0;
  Timestamp timestamp = 0;
  std::vector<Hop> hops;

  bool operator==(const TraceroutePath&) const = default;
};

struct PathPair {
  TraceroutePath v4_path;
  TraceroutePath nat64_path;

  const Nat64Prefix& prefix() const { return *nat64_path.prefix; }
  bool operator==(const PathPair&) const = default;
};

/// How a DNS exchange ended. Timeout, Refused and Malformed stay distinct
/// so a verdict can explain itself.
enum class DnsStatus { NoError, NxDomain, ServFail, Refused, Timeout, Malformed };

struct DnsResponse {
  DnsStatus status = DnsStatus::NoError;
  std::string qname;
  std::optional<IpAddress> resolver;
  std::vector<Ipv6Address> aaaa;
  std::vector<Ipv4Address> a;
  std::string diagnostic;

  bool operator==(const DnsResponse&) const = default;
};

struct EchoOutcome {
  bool replied = false;
  double rtt_ms = 0.0;

  bool operator==(const EchoOutcome&) const = default;
};

// Enum names as they appear in files and reports.
std::string_view to_string(DnsStatus s);
std::string_view to_string(PrefixKind k);
std::string_view to_string(TestKind k);
std::string_view to_string(RawOutcome o);
std::string_view to_string(VerdictValue v);
std::string_view to_string(Family f);
std::optional<PrefixKind> parse_prefix_kind(std::string_view s);
std::optional<TestKind> parse_test_kind(std::string_view s);
std::optional<RawOutcome> parse_raw_outcome(std::string_view s);
std::optional<VerdictValue> parse_verdict_value(std::string_view s);
std::optional<Family> parse_family(std::string_view s);

/// Parses "64:ff9b::/96"; kind is Standard for the well-known prefix and
/// `fallback` otherwise.
std::optional<Nat64Prefix> parse_nat64_prefix(std::string_view text,
                                              PrefixKind fallback = PrefixKind::Custom);

using ValidationReport = std::vector<std::string>;

// Each returns the violated invariants; empty means valid.
ValidationReport validate(const Nat64Prefix& prefix, const PrefixSet* public_nat64 = nullptr);
ValidationReport validate(const ProbeRecord& probe);
ValidationReport validate(const TestRun& run);
ValidationReport validate(const Verdict& verdict);
ValidationReport validate(const Verdict& verdict, std::span<const TestRun> runs);
ValidationReport validate(const Hop& hop);
ValidationReport validate(const TraceroutePath& path);
ValidationReport validate(const PathPair& pair);
/// Checks probe_id uniqueness across a dataset's probe list.
ValidationReport validate(std::span<const ProbeRecord> probes);

}  // namespace nat64scope
