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

#include "nat64scope/detector.hpp"

#include <algorithm>
#include <array>
#include <tuple>
#include <utility>

namespace nat64scope {

namespace {

constexpr std::array<std::pair<DetectionGroup, std::string_view>, 5> kGroups{{
    {DetectionGroup::Nat64PlusDns64, "nat64_dns64"},
    {DetectionGroup::Nat64Only, "nat64_only"},
    {DetectionGroup::Dns64MisconfiguredOnly, "dns64_misconfigured"},
    {DetectionGroup::NoNat64, "no_nat64"},
    {DetectionGroup::Inconclusive, "inconclusive"},
}};

TestRun eval_dns(TestKind kind, const ProbeId& probe, Timestamp ts, const DnsResponse& response,
                 std::span<const Ipv4Address> known) {
  TestRun run;
  run.probe_id = probe;
  run.kind = kind;
  run.timestamp = ts;
  run.resolver_used = response.resolver;
  run.outcome = RawOutcome::Fail;

  if (response.status != DnsStatus::NoError) {
    run.diagnostic = std::string(to_string(response.status));
    if (!response.diagnostic.empty()) run.diagnostic += ": " + response.diagnostic;
    return run;
  }
  if (response.aaaa.empty()) {
    run.diagnostic = "empty answer";
    return run;
  }
  for (const auto& answer : response.aaaa) {
    if (auto prefix = try_derive_prefix(answer, known)) {
      run.outcome = RawOutcome::Pass;
      run.observed_prefix = *prefix;
      return run;
    }
  }
  run.diagnostic = "answer not synthesized";
  return run;
}

bool passed(const std::optional<Verdict>& v) {
  return v && v->value == VerdictValue::Passed;
}
bool failed(const std::optional<Verdict>& v) {
  return v && v->value == VerdictValue::Failed;
}

}  // namespace

std::string_view to_string(DetectionGroup g) {
  for (const auto& [value, name] : kGroups) {
    if (value == g) return name;
  }
  return "?";
}

std::optional<DetectionGroup> parse_detection_group(std::string_view s) {
  for (const auto& [value, name] : kGroups) {
    if (name == s) return value;
  }
  return std::nullopt;
}

TestRun eval_dns_test1(const ProbeId& probe, Timestamp ts, const DnsResponse& response,
                       std::span<const Ipv4Address> known) {
  return eval_dns(TestKind::DnsTest1, probe, ts, response, known);
}

TestRun eval_dns_test2(const ProbeId& probe, Timestamp ts, const DnsResponse& response,
                       std::span<const Ipv4Address> a_records) {
  return eval_dns(TestKind::DnsTest2, probe, ts, response, a_records);
}

TestRun eval_ping_test(const ProbeId& probe, Timestamp ts, TestKind kind,
                       const Nat64Prefix& prefix, const Ipv4Address& target,
                       std::span<const EchoOutcome> replies) {
  if (is_dns_test(kind)) throw Error("eval_ping_test called with a DNS test kind");
  TestRun run;
  run.probe_id = probe;
  run.kind = kind;
  run.timestamp = ts;
  run.ping_prefix = prefix;
  run.ping_target = target;
  const auto n = std::count_if(replies.begin(), replies.end(),
                               [](const EchoOutcome& e) { return e.replied; });
  run.outcome = n > 0 ? RawOutcome::Pass : RawOutcome::Fail;
  if (n == 0) run.diagnostic = "no echo reply";
  return run;
}

Verdict aggregate(std::span<const TestRun> runs) {
  if (runs.empty()) throw Error("aggregate: no runs");
  int pass = 0;
  for (const auto& r : runs) {
    if (r.probe_id != runs.front().probe_id || r.kind != runs.front().kind) {
      throw Error("aggregate: runs mix probes or test kinds");
    }
    if (r.outcome == RawOutcome::Pass) ++pass;
  }
  const int n = static_cast<int>(runs.size());
  Verdict v;
  v.supporting_runs = n;
  v.value = pass == n ? VerdictValue::Passed
            : pass == 0 ? VerdictValue::Failed
                        : VerdictValue::Inconclusive;
  return v;
}

std::set<CustomPingCandidate> select_custom_ping_candidates(std::span<const ProbeRecord> probes,
                                                            std::span<const TestRun> dns1_runs) {
  std::map<ProbeId, Asn> as_of;
  for (const auto& p : probes) {
    if (p.asn_v6) as_of[p.probe_id] = *p.asn_v6;
  }
  std::map<Asn, std::set<Nat64Prefix>> custom_by_as;
  for (const auto& run : dns1_runs) {
    if (run.kind != TestKind::DnsTest1 || run.outcome != RawOutcome::Pass || !run.observed_prefix) {
      continue;
    }
    if (run.observed_prefix->same_network(Nat64Prefix::standard())) continue;
    auto it = as_of.find(run.probe_id);
    if (it != as_of.end()) custom_by_as[it->second].insert(*run.observed_prefix);
  }
  std::set<CustomPingCandidate> out;
  for (const auto& p : probes) {
    if (!p.asn_v6) continue;
    auto it = custom_by_as.find(*p.asn_v6);
    if (it == custom_by_as.end()) continue;
    for (const auto& prefix : it->second) out.insert({p.probe_id, prefix});
  }
  return out;
}

bool is_public_prefix(const Nat64Prefix& prefix, const PrefixSet& public_nat64) {
  return prefix.kind == PrefixKind::PublicService || public_nat64.covers(prefix.to_ip_prefix());
}

GroupAssignment assign_group(const GroupInputs& in, const GroupPolicy& policy) {
  GroupAssignment out;
  auto& flags = out.flags;

  flags.uses_public_resolver =
      std::any_of(in.resolvers_used.begin(), in.resolvers_used.end(),
                  [&](const IpAddress& r) { return policy.public_resolvers.contains(r); });
  flags.dns1_public_prefix = in.dns1_prefix && is_public_prefix(*in.dns1_prefix, policy.public_nat64);

  bool any_ping_passed = false;
  bool private_ping_passed = false;
  bool all_pings_failed = !in.pings.empty();
  const PingVerdict* appropriate = nullptr;
  for (const auto& p : in.pings) {
    const bool ok = p.verdict.value == VerdictValue::Passed;
    any_ping_passed |= ok;
    private_ping_passed |= ok && !is_public_prefix(p.prefix, policy.public_nat64);
    all_pings_failed &= p.verdict.value == VerdictValue::Failed;
    if (in.dns1_prefix && p.prefix.same_network(*in.dns1_prefix)) appropriate = &p;
  }
  flags.public_nat64_only = any_ping_passed && !private_ping_passed;
  const bool appropriate_passed = appropriate && appropriate->verdict.value == VerdictValue::Passed;
  flags.rfc8880_style = passed(in.dns1) && failed(in.dns2) && appropriate_passed;

  if (!in.dns1) out.diagnostics.push_back("missing verdict: dns1");
  if (!in.dns2) out.diagnostics.push_back("missing verdict: dns2");
  if (in.pings.empty()) out.diagnostics.push_back("missing verdict: ping");
  if (!out.diagnostics.empty()) {
    out.group = DetectionGroup::Inconclusive;
    return out;
  }

  if (passed(in.dns1) && passed(in.dns2) && appropriate_passed) {
    out.group = DetectionGroup::Nat64PlusDns64;
  } else if ((failed(in.dns1) || failed(in.dns2)) && private_ping_passed) {
    out.group = DetectionGroup::Nat64Only;
  } else if (passed(in.dns1) && failed(in.dns2) && all_pings_failed) {
    out.group = DetectionGroup::Dns64MisconfiguredOnly;
  } else if (failed(in.dns1) && failed(in.dns2) && all_pings_failed) {
    out.group = DetectionGroup::NoNat64;
  } else {
    out.group = DetectionGroup::Inconclusive;
    if (passed(in.dns1) && passed(in.dns2) && !appropriate) {
      out.diagnostics.push_back("no ping verdict for the DNS test 1 prefix");
    }
    if (flags.public_nat64_only) out.diagnostics.push_back("only public NAT64 prefixes ping");
  }

  flags.likely_accidental = out.group == DetectionGroup::Nat64Only && !flags.uses_public_resolver &&
                            !passed(in.dns1) && !passed(in.dns2);
  return out;
}

void VerdictCounts::add(VerdictValue v) {
  switch (v) {
    case VerdictValue::Passed: ++passed; break;
    case VerdictValue::Failed: ++failed; break;
    case VerdictValue::Inconclusive: ++inconclusive; break;
  }
}

GroupInputs collect_inputs(std::span<const TestRun> runs) {
  GroupInputs in;
  std::vector<TestRun> dns1, dns2;
  // Ping runs are keyed by kind and prefix network; the tag is ignored.
  std::map<std::tuple<TestKind, Ipv6Address, int>, std::vector<TestRun>> pings;
  std::map<Nat64Prefix, int> dns1_prefixes;
  std::set<IpAddress> resolvers;

  for (const auto& r : runs) {
    switch (r.kind) {
      case TestKind::DnsTest1:
        dns1.push_back(r);
        if (r.outcome == RawOutcome::Pass && r.observed_prefix) ++dns1_prefixes[*r.observed_prefix];
        break;
      case TestKind::DnsTest2:
        dns2.push_back(r);
        break;
      case TestKind::StdPrefixPing:
      case TestKind::CustomPrefixPing:
        if (r.ping_prefix) pings[{r.kind, r.ping_prefix->base, r.ping_prefix->length}].push_back(r);
        break;
    }
    if (is_dns_test(r.kind) && r.resolver_used) resolvers.insert(*r.resolver_used);
  }

  if (!dns1.empty()) in.dns1 = aggregate(dns1);
  if (!dns2.empty()) in.dns2 = aggregate(dns2);
  // Most frequently observed prefix; ties go to the smallest.
  int best = 0;
  for (const auto& [prefix, n] : dns1_prefixes) {
    if (n > best) {
      best = n;
      in.dns1_prefix = prefix;
    }
  }
  for (const auto& [key, group] : pings) {
    in.pings.push_back({std::get<0>(key), *group.front().ping_prefix, aggregate(group)});
  }
  in.resolvers_used.assign(resolvers.begin(), resolvers.end());
  return in;
}

DetectionReport detect_all(std::span<const TestRun> runs, const GroupPolicy& policy) {
  std::map<ProbeId, std::vector<TestRun>> by_probe;
  for (const auto& r : runs) by_probe[r.probe_id].push_back(r);

  DetectionReport report;
  for (const auto& [id, probe_runs] : by_probe) {
    ProbeDetection d;
    d.probe_id = id;
    d.inputs = collect_inputs(probe_runs);
    d.assignment = assign_group(d.inputs, policy);
    for (const auto& p : d.inputs.pings) {
      if (p.verdict.value == VerdictValue::Passed) d.working_prefixes.push_back(p.prefix);
    }

    if (d.inputs.dns1) report.table[TestKind::DnsTest1].add(d.inputs.dns1->value);
    if (d.inputs.dns2) report.table[TestKind::DnsTest2].add(d.inputs.dns2->value);
    for (const auto& p : d.inputs.pings) {
      if (p.kind == TestKind::StdPrefixPing) report.table[TestKind::StdPrefixPing].add(p.verdict.value);
    }
    // A probe counts once for the custom ping test: passed if any prefix passed.
    std::optional<VerdictValue> custom;
    for (const auto& p : d.inputs.pings) {
      if (p.kind != TestKind::CustomPrefixPing) continue;
      if (!custom || p.verdict.value == VerdictValue::Passed ||
          (p.verdict.value == VerdictValue::Inconclusive && *custom == VerdictValue::Failed)) {
        custom = p.verdict.value;
      }
    }
    if (custom) report.table[TestKind::CustomPrefixPing].add(*custom);

    ++report.group_counts[d.assignment.group];
    report.probes.push_back(std::move(d));
  }
  return report;
}

}  // namespace nat64scope
