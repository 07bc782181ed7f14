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

#include "nat64scope/model.hpp"

#include <algorithm>
#include <array>
#include <set>
#include <utility>

namespace nat64scope {

namespace {

template <typename E, std::size_t N>
std::optional<E> lookup(const std::array<std::pair<E, std::string_view>, N>& table,
                        std::string_view s) {
  for (const auto& [value, name] : table) {
    if (name == s) return value;
  }
  return std::nullopt;
}

template <typename E, std::size_t N>
std::string_view name_of(const std::array<std::pair<E, std::string_view>, N>& table, E v) {
  for (const auto& [value, name] : table) {
    if (value == v) return name;
  }
  return "?";
}

constexpr std::array<std::pair<PrefixKind, std::string_view>, 3> kPrefixKinds{{
    {PrefixKind::Standard, "standard"},
    {PrefixKind::Custom, "custom"},
    {PrefixKind::PublicService, "public"},
}};

constexpr std::array<std::pair<TestKind, std::string_view>, 4> kTestKinds{{
    {TestKind::DnsTest1, "dns1"},
    {TestKind::DnsTest2, "dns2"},
    {TestKind::StdPrefixPing, "std_ping"},
    {TestKind::CustomPrefixPing, "custom_ping"},
}};

constexpr std::array<std::pair<RawOutcome, std::string_view>, 2> kOutcomes{{
    {RawOutcome::Pass, "pass"},
    {RawOutcome::Fail, "fail"},
}};

constexpr std::array<std::pair<VerdictValue, std::string_view>, 3> kVerdicts{{
    {VerdictValue::Passed, "passed"},
    {VerdictValue::Failed, "failed"},
    {VerdictValue::Inconclusive, "inconclusive"},
}};

constexpr std::array<std::pair<Family, std::string_view>, 2> kFamilies{{
    {Family::IPv4, "ipv4"},
    {Family::NAT64, "nat64"},
}};

constexpr std::array<std::pair<DnsStatus, std::string_view>, 6> kDnsStatuses{{
    {DnsStatus::NoError, "noerror"},
    {DnsStatus::NxDomain, "nxdomain"},
    {DnsStatus::ServFail, "servfail"},
    {DnsStatus::Refused, "refused"},
    {DnsStatus::Timeout, "timeout"},
    {DnsStatus::Malformed, "malformed"},
}};

constexpr std::array<int, 6> kLengths{32, 40, 48, 56, 64, 96};

}  // namespace

Nat64Prefix Nat64Prefix::standard() {
  return Nat64Prefix{Ipv6Address::must_parse("64:ff9b::"), 96, PrefixKind::Standard};
}

std::string Nat64Prefix::to_string() const {
  return base.to_string() + "/" + std::to_string(length);
}

bool ProbeRecord::has_annotation(std::string_view name) const {
  return std::find(annotations.begin(), annotations.end(), name) != annotations.end();
}

std::string_view to_string(DnsStatus s) { return name_of(kDnsStatuses, s); }
std::string_view to_string(PrefixKind k) { return name_of(kPrefixKinds, k); }
std::string_view to_string(TestKind k) { return name_of(kTestKinds, k); }
std::string_view to_string(RawOutcome o) { return name_of(kOutcomes, o); }
std::string_view to_string(VerdictValue v) { return name_of(kVerdicts, v); }
std::string_view to_string(Family f) { return name_of(kFamilies, f); }
std::optional<PrefixKind> parse_prefix_kind(std::string_view s) { return lookup(kPrefixKinds, s); }
std::optional<TestKind> parse_test_kind(std::string_view s) { return lookup(kTestKinds, s); }
std::optional<RawOutcome> parse_raw_outcome(std::string_view s) { return lookup(kOutcomes, s); }
std::optional<VerdictValue> parse_verdict_value(std::string_view s) { return lookup(kVerdicts, s); }
std::optional<Family> parse_family(std::string_view s) { return lookup(kFamilies, s); }

std::optional<Nat64Prefix> parse_nat64_prefix(std::string_view text, PrefixKind fallback) {
  auto p = IpPrefix::parse(text);
  if (!p || is_v4(p->base)) return std::nullopt;
  Nat64Prefix out{std::get<Ipv6Address>(p->base), p->length, fallback};
  if (out.same_network(Nat64Prefix::standard())) out.kind = PrefixKind::Standard;
  return out;
}

ValidationReport validate(const Nat64Prefix& prefix, const PrefixSet* public_nat64) {
  ValidationReport r;
  if (std::find(kLengths.begin(), kLengths.end(), prefix.length) == kLengths.end()) {
    r.push_back("unsupported prefix length " + std::to_string(prefix.length));
  } else if (prefix.base.masked(prefix.length) != prefix.base) {
    r.push_back("bits beyond length nonzero");
  }
  if (prefix.kind == PrefixKind::Standard && !prefix.same_network(Nat64Prefix::standard())) {
    r.push_back("standard kind requires 64:ff9b::/96");
  }
  if (prefix.kind == PrefixKind::PublicService &&
      (public_nat64 == nullptr || !public_nat64->covers(prefix.to_ip_prefix()))) {
    r.push_back("public-service prefix not in public NAT64 list");
  }
  return r;
}

ValidationReport validate(const ProbeRecord& probe) {
  ValidationReport r;
  if (probe.probe_id.empty()) r.push_back("empty probe_id");
  if (!probe.asn_v4 && !probe.asn_v6) r.push_back("no AS number");
  if (probe.network_prefix_v6 && is_v4(probe.network_prefix_v6->base)) {
    r.push_back("network_prefix_v6 is not IPv6");
  }
  return r;
}

ValidationReport validate(std::span<const ProbeRecord> probes) {
  ValidationReport r;
  std::set<ProbeId> seen;
  for (const auto& p : probes) {
    if (!seen.insert(p.probe_id).second) r.push_back("duplicate probe_id " + p.probe_id);
  }
  return r;
}

ValidationReport validate(const TestRun& run) {
  ValidationReport r;
  const bool dns = is_dns_test(run.kind);
  if (run.observed_prefix && !(dns && run.outcome == RawOutcome::Pass)) {
    r.push_back("observed_prefix on a run that is not a DNS pass");
  }
  if (dns && !run.resolver_used) r.push_back("DNS run without resolver_used");
  if (!dns && !run.ping_prefix) r.push_back("ping run without prefix");
  if (run.observed_prefix) {
    for (auto& v : validate(*run.observed_prefix)) r.push_back("observed_prefix: " + v);
  }
  return r;
}

ValidationReport validate(const Verdict& verdict) {
  ValidationReport r;
  if (verdict.supporting_runs < 1) r.push_back("verdict without supporting runs");
  return r;
}

ValidationReport validate(const Verdict& verdict, std::span<const TestRun> runs) {
  ValidationReport r = validate(verdict);
  if (static_cast<std::size_t>(verdict.supporting_runs) != runs.size()) {
    r.push_back("supporting_runs does not match run count");
  }
  const bool any_pass = std::any_of(runs.begin(), runs.end(),
                                    [](const TestRun& t) { return t.outcome == RawOutcome::Pass; });
  const bool any_fail = std::any_of(runs.begin(), runs.end(),
                                    [](const TestRun& t) { return t.outcome == RawOutcome::Fail; });
  if ((verdict.value == VerdictValue::Inconclusive) != (any_pass && any_fail)) {
    r.push_back("inconclusive iff mixed outcomes");
  }
  return r;
}

ValidationReport validate(const Hop& hop) {
  ValidationReport r;
  if (hop.index < 1) r.push_back("hop index below 1");
  if (!hop.address && !hop.rtts_ms.empty()) r.push_back("rtts on missing hop");
  for (double rtt : hop.rtts_ms) {
    if (!(rtt >= 0.0)) {
      r.push_back("negative rtt");
      break;
    }
  }
  return r;
}

ValidationReport validate(const TraceroutePath& path) {
  ValidationReport r;
  if (path.family == Family::NAT64 && !path.prefix) r.push_back("NAT64 path without prefix");
  for (std::size_t i = 0; i < path.hops.size(); ++i) {
    if (path.hops[i].index != static_cast<int>(i) + 1) {
      r.push_back("hop indices not contiguous from 1");
      break;
    }
  }
  for (const auto& hop : path.hops) {
    for (auto& v : validate(hop)) r.push_back("hop " + std::to_string(hop.index) + ": " + v);
  }
  return r;
}

ValidationReport validate(const PathPair& pair) {
  ValidationReport r;
  const auto& a = pair.v4_path;
  const auto& b = pair.nat64_path;
  if (a.probe_id != b.probe_id || a.target_v4 != b.target_v4 || a.round != b.round) {
    r.push_back("pair members differ in probe, target or round");
  }
  if (a.family != Family::IPv4) r.push_back("v4_path is not IPv4");
  if (b.family != Family::NAT64) r.push_back("nat64_path is not NAT64");
  for (auto& v : validate(a)) r.push_back("v4_path: " + v);
  for (auto& v : validate(b)) r.push_back("nat64_path: " + v);
  return r;
}

}  // namespace nat64scope
