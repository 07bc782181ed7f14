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

#include <vector>

#include "doctest.h"

#include "nat64scope/addrsynth.hpp"
#include "nat64scope/detector.hpp"

using namespace nat64scope;

namespace {

const IpAddress kResolver = must_parse_ip("2001:db8:1::53");

DnsResponse answer(std::vector<const char*> aaaa, DnsStatus status = DnsStatus::NoError) {
  DnsResponse r;
  r.status = status;
  r.resolver = kResolver;
  for (auto a : aaaa) r.aaaa.push_back(Ipv6Address::must_parse(a));
  return r;
}

TestRun run(const char* probe, TestKind kind, bool pass, Timestamp ts = 0) {
  TestRun r;
  r.probe_id = probe;
  r.kind = kind;
  r.timestamp = ts;
  r.outcome = pass ? RawOutcome::Pass : RawOutcome::Fail;
  if (is_dns_test(kind)) {
    r.resolver_used = kResolver;
    if (pass && kind == TestKind::DnsTest1) r.observed_prefix = Nat64Prefix::standard();
  } else {
    r.ping_prefix = Nat64Prefix::standard();
    r.ping_target = Ipv4Address::must_parse("91.201.7.243");
  }
  return r;
}

}  // namespace

TEST_CASE("DNS test 1") {
  auto t = eval_dns_test1("p", 5, answer({"64:ff9b::c000:aa"}));
  CHECK(t.outcome == RawOutcome::Pass);
  CHECK(t.observed_prefix->same_network(Nat64Prefix::standard()));
  CHECK(t.resolver_used == kResolver);
  CHECK(t.timestamp == 5);

  t = eval_dns_test1("p", 5, answer({"2001:db8::1", "2001:db8:64::c000:ab"}));
  CHECK(t.outcome == RawOutcome::Pass);
  CHECK(t.observed_prefix->to_string() == "2001:db8:64::/96");

  t = eval_dns_test1("p", 5, answer({}));
  CHECK(t.outcome == RawOutcome::Fail);
  CHECK(t.diagnostic == "empty answer");

  t = eval_dns_test1("p", 5, answer({"2001:db8::1"}));
  CHECK(t.outcome == RawOutcome::Fail);
  CHECK_FALSE(t.observed_prefix);

  t = eval_dns_test1("p", 5, answer({}, DnsStatus::Timeout));
  CHECK(t.outcome == RawOutcome::Fail);
  CHECK(t.diagnostic.find("timeout") == 0);
}

TEST_CASE("DNS test 2 checks against the known A records") {
  const std::vector<Ipv4Address> a{Ipv4Address::must_parse("132.163.97.3")};
  const auto synth = synthesize(Nat64Prefix::standard(), a[0]).to_string();
  CHECK(eval_dns_test2("p", 0, answer({synth.c_str()}), a).outcome == RawOutcome::Pass);
  CHECK(eval_dns_test2("p", 0, answer({"64:ff9b::c000:aa"}), a).outcome == RawOutcome::Fail);
}

TEST_CASE("ping test") {
  const auto target = Ipv4Address::must_parse("91.201.7.243");
  const std::vector<EchoOutcome> one{{false, 0}, {true, 12.5}, {false, 0}};
  const std::vector<EchoOutcome> none{{false, 0}, {false, 0}, {false, 0}};
  CHECK(eval_ping_test("p", 0, TestKind::StdPrefixPing, Nat64Prefix::standard(), target, one).outcome ==
        RawOutcome::Pass);
  CHECK(eval_ping_test("p", 0, TestKind::StdPrefixPing, Nat64Prefix::standard(), target, none).outcome ==
        RawOutcome::Fail);
  CHECK_THROWS_AS(eval_ping_test("p", 0, TestKind::DnsTest1, Nat64Prefix::standard(), target, one), Error);
}

TEST_CASE("repeated runs aggregate to a verdict") {
  const std::vector<TestRun> pass{run("p", TestKind::DnsTest1, true, 1), run("p", TestKind::DnsTest1, true, 2)};
  const std::vector<TestRun> mixed{run("p", TestKind::DnsTest1, true, 1), run("p", TestKind::DnsTest1, false, 2)};
  const std::vector<TestRun> fail{run("p", TestKind::DnsTest1, false, 1)};
  CHECK(aggregate(pass) == Verdict{VerdictValue::Passed, 2});
  CHECK(aggregate(mixed) == Verdict{VerdictValue::Inconclusive, 2});
  CHECK(aggregate(fail) == Verdict{VerdictValue::Failed, 1});
  CHECK_THROWS_AS(aggregate(std::vector<TestRun>{}), Error);
  const std::vector<TestRun> two_kinds{run("p", TestKind::DnsTest1, true), run("p", TestKind::DnsTest2, true)};
  CHECK_THROWS_AS(aggregate(two_kinds), Error);
}

TEST_CASE("custom prefix pings go to every probe in the AS") {
  std::vector<ProbeRecord> probes(3);
  probes[0].probe_id = "a";
  probes[0].asn_v6 = 100;
  probes[1].probe_id = "b";
  probes[1].asn_v6 = 100;
  probes[2].probe_id = "c";
  probes[2].asn_v6 = 200;
  auto dns = run("a", TestKind::DnsTest1, true);
  dns.observed_prefix = *parse_nat64_prefix("2001:db8:64::/96");
  const std::vector<TestRun> runs{dns, run("c", TestKind::DnsTest1, true)};
  const auto got = select_custom_ping_candidates(probes, runs);
  REQUIRE(got.size() == 2);
  CHECK(got.begin()->probe_id == "a");
  CHECK(std::next(got.begin())->probe_id == "b");
}

TEST_CASE("missing verdicts are inconclusive") {
  GroupInputs in;
  in.dns1 = Verdict{VerdictValue::Passed, 1};
  const auto g = assign_group(in, {});
  CHECK(g.group == DetectionGroup::Inconclusive);
  CHECK(g.diagnostics.size() == 2);
}

TEST_CASE("group flags") {
  GroupPolicy policy;
  policy.public_resolvers.add(*IpPrefix::parse_address_or_prefix("2001:4860:4860::8888"));

  GroupInputs in;
  in.dns1 = Verdict{VerdictValue::Failed, 2};
  in.dns2 = Verdict{VerdictValue::Failed, 2};
  in.pings.push_back({TestKind::StdPrefixPing, Nat64Prefix::standard(), Verdict{VerdictValue::Passed, 2}});
  auto g = assign_group(in, policy);
  CHECK(g.group == DetectionGroup::Nat64Only);
  CHECK(g.flags.likely_accidental);

  in.resolvers_used = {must_parse_ip("2001:4860:4860::8888")};
  g = assign_group(in, policy);
  CHECK(g.flags.uses_public_resolver);
  CHECK_FALSE(g.flags.likely_accidental);

  in.dns1 = Verdict{VerdictValue::Passed, 2};
  in.dns1_prefix = Nat64Prefix::standard();
  g = assign_group(in, policy);
  CHECK(g.group == DetectionGroup::Nat64Only);
  CHECK(g.flags.rfc8880_style);
}

TEST_CASE("empty input gives an all-zero report") {
  const auto r = detect_all(std::vector<TestRun>{}, {});
  CHECK(r.probes.empty());
  CHECK(r.table.empty());
  CHECK(r.group_counts.empty());
}

TEST_CASE("detection table counts each probe once per test") {
  std::vector<TestRun> runs;
  for (const char* p : {"a", "b"}) {
    for (Timestamp ts : {1, 2}) {
      runs.push_back(run(p, TestKind::DnsTest1, true, ts));
      runs.push_back(run(p, TestKind::DnsTest2, p[0] == 'a', ts));
      runs.push_back(run(p, TestKind::StdPrefixPing, ts == 1 || p[0] == 'a', ts));
    }
  }
  const auto r = detect_all(runs, {});
  REQUIRE(r.probes.size() == 2);
  CHECK(r.probes[0].assignment.group == DetectionGroup::Nat64PlusDns64);
  CHECK(r.probes[1].assignment.group == DetectionGroup::Inconclusive);
  CHECK(r.table.at(TestKind::DnsTest1).passed == 2);
  CHECK(r.table.at(TestKind::DnsTest2).passed == 1);
  CHECK(r.table.at(TestKind::DnsTest2).failed == 1);
  CHECK(r.table.at(TestKind::StdPrefixPing).inconclusive == 1);
  CHECK(r.group_counts.at(DetectionGroup::Nat64PlusDns64) == 1);
  CHECK(parse_detection_group(to_string(DetectionGroup::Nat64Only)) == DetectionGroup::Nat64Only);
}
