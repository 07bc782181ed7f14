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

#include "nat64scope/classifier.hpp"

using namespace nat64scope;

namespace {

ProbeRecord probe(const char* id, Asn asn, const char* net) {
  ProbeRecord p;
  p.probe_id = id;
  p.asn_v4 = asn;
  p.asn_v6 = asn;
  if (net) p.network_prefix_v6 = IpPrefix::parse(net);
  return p;
}

TestRun dns_pass(const char* id, const char* resolver, const char* prefix = "64:ff9b::/96") {
  TestRun r;
  r.probe_id = id;
  r.kind = TestKind::DnsTest1;
  r.outcome = RawOutcome::Pass;
  r.resolver_used = must_parse_ip(resolver);
  r.observed_prefix = parse_nat64_prefix(prefix);
  return r;
}

TraceroutePath nat_path(std::vector<std::pair<const char*, double>> hops) {
  TraceroutePath p;
  p.family = Family::NAT64;
  p.prefix = Nat64Prefix::standard();
  int i = 0;
  for (auto [addr, rtt] : hops) {
    Hop h;
    h.index = ++i;
    if (addr) {
      h.address = must_parse_ip(addr);
      h.rtts_ms = {rtt, rtt + 0.2, rtt + 0.1};
    }
    p.hops.push_back(h);
  }
  return p;
}

}  // namespace

TEST_CASE("one probe per AS gives no ISP evidence") {
  const std::vector<ProbeRecord> probes{probe("a", 100, "2001:db8:1::/64")};
  const std::vector<TestRun> runs{dns_pass("a", "2001:db8::53")};
  const auto ev = detect_isp_dns64(probes, runs);
  REQUIRE(ev.count(100));
  CHECK_FALSE(ev.at(100).is_isp_dns64);
  CHECK(ev.at(100).probes_tested == 1);
}

TEST_CASE("two networks behind one resolver make ISP DNS64 evidence") {
  const std::vector<ProbeRecord> probes{probe("a", 100, "2001:db8:1::/64"), probe("b", 100, "2001:db8:2::/64"),
                                        probe("c", 100, "2001:db8:2::/64"), probe("d", 200, "2001:db8:9::/64"),
                                        probe("e", 200, "2001:db8:9::/64")};
  const std::vector<TestRun> runs{dns_pass("a", "2001:db8::53"), dns_pass("b", "2001:db8::53"),
                                  dns_pass("d", "2001:db8:9::53"), dns_pass("e", "2001:db8:9::53")};
  const auto ev = detect_isp_dns64(probes, runs);
  CHECK(ev.at(100).is_isp_dns64);
  CHECK(ev.at(100).resolver == must_parse_ip("2001:db8::53"));
  CHECK(ev.at(100).witnesses == std::vector<ProbeId>{"a", "b"});
  CHECK(ev.at(100).probes_tested == 2);
  // Same network twice is one home network, not an ISP.
  CHECK_FALSE(ev.at(200).is_isp_dns64);
}

TEST_CASE("probes without a known network count as distinct") {
  const std::vector<ProbeRecord> probes{probe("a", 100, nullptr), probe("b", 100, nullptr)};
  const std::vector<TestRun> runs{dns_pass("a", "2001:db8::53"), dns_pass("b", "2001:db8::53")};
  CHECK(detect_isp_dns64(probes, runs).at(100).is_isp_dns64);
}

TEST_CASE("similar prefixes within an AS") {
  const std::vector<ProbeRecord> probes{probe("a", 100, "2001:db8:1::/64"), probe("b", 100, "2001:db8:2::/64")};
  const std::vector<TestRun> runs{dns_pass("a", "2001:db8::53", "2001:db8:64:1::/96"),
                                  dns_pass("b", "2001:db8::54", "2001:db8:64:2::/96")};
  CHECK(detect_isp_dns64(probes, runs).at(100).multiple_similar_prefixes_per_as);
}

TEST_CASE("NAT hop RTT and local NAT64") {
  const std::vector<TraceroutePath> paths{
      nat_path({{"192.168.1.1", 0.3}, {"64:ff9b::c633:6401", 1.2}, {"64:ff9b::5bc9:7f3", 20}}),
      nat_path({{"192.168.1.1", 0.3}, {nullptr, 0}, {"64:ff9b::c633:6401", 0.9}}),
  };
  CHECK(nat_hop_rtt(paths, Nat64Prefix::standard()) == doctest::Approx(1.0));
  CHECK(detect_local_nat64(paths, Nat64Prefix::standard(), 2.0));
  CHECK_FALSE(detect_local_nat64(paths, Nat64Prefix::standard(), 1.0));
  const std::vector<TraceroutePath> opaque{nat_path({{"192.168.1.1", 0.3}, {nullptr, 0}})};
  CHECK_THROWS_AS(nat_hop_rtt(opaque, Nat64Prefix::standard()), NoNatHop);
}

TEST_CASE("probe categories") {
  CategoryInputs in;
  CHECK(categorize_probe(in) == std::set<ProbeCategory>{ProbeCategory::Unknown});

  IspEvidence ev;
  ev.is_isp_dns64 = true;
  ev.resolver = must_parse_ip("2001:db8::53");
  in.isp = &ev;
  in.group = DetectionGroup::Nat64PlusDns64;
  CHECK(categorize_probe(in) == std::set<ProbeCategory>{ProbeCategory::AsWithDns64});
  in.resolvers_used = {must_parse_ip("2001:db8::53")};
  CHECK(categorize_probe(in) ==
        std::set<ProbeCategory>{ProbeCategory::IspDns64, ProbeCategory::AsWithDns64});

  CategoryInputs pub;
  PrefixSet resolvers;
  resolvers.add(*IpPrefix::parse_address_or_prefix("2001:4860:4860::8888"));
  pub.public_resolvers = &resolvers;
  pub.resolvers_used = {must_parse_ip("2001:4860:4860::8888")};
  pub.group = DetectionGroup::Nat64Only;
  pub.any_ping_passed = true;
  pub.traceroute = TracerouteUsability::NoNatHop;
  pub.nat_locations = {NatLocation{NatLocationKind::Remote, false}};
  CHECK(categorize_probe(pub) == std::set<ProbeCategory>{ProbeCategory::PublicResolverOnly,
                                                         ProbeCategory::RemoteNat64,
                                                         ProbeCategory::NoTracerouteThroughNat});
  pub.group = DetectionGroup::Nat64PlusDns64;
  pub.flags.dns1_public_prefix = true;
  pub.home_setup = true;
  CHECK(categorize_probe(pub).count(ProbeCategory::PublicService));
  CHECK(categorize_probe(pub).count(ProbeCategory::HomeSetup));
  CHECK_FALSE(categorize_probe(pub).count(ProbeCategory::PublicResolverOnly));
}
