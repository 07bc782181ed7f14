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

#include <chrono>
#include <cstdint>
#include <vector>

#include "doctest.h"

#include "nat64scope/acquire/dns.hpp"
#include "nat64scope/acquire/icmp.hpp"
#include "nat64scope/acquire/traceroute.hpp"
#include "nat64scope/addrsynth.hpp"
#include "nat64scope/sim/mock_dns.hpp"
#include "nat64scope/sim/mock_net.hpp"

using namespace nat64scope;
using namespace nat64scope::sim;
using namespace std::chrono_literals;

namespace {

const Ipv4Address kArpa1 = Ipv4Address::must_parse("192.0.0.170");
const Ipv4Address kArpa2 = Ipv4Address::must_parse("192.0.0.171");

MockDnsConfig resolver(ResolverBehavior b) {
  MockDnsConfig c;
  c.behavior = b;
  c.zone["time-c-b.nist.gov"] = {Ipv4Address::must_parse("192.0.2.51")};
  return c;
}

}  // namespace

TEST_CASE("query wire format") {
  const auto q = build_query(0x1234, "ipv4only.arpa", RecordType::AAAA);
  // Header: id, RD, one question. Then the name in labels, QTYPE 28, QCLASS 1.
  const std::vector<std::uint8_t> expected{0x12, 0x34, 0x01, 0x00, 0, 1, 0, 0, 0, 0, 0, 0,
                                           8, 'i', 'p', 'v', '4', 'o', 'n', 'l', 'y',
                                           4, 'a', 'r', 'p', 'a', 0, 0, 28, 0, 1};
  CHECK(q == expected);
  const auto parsed = parse_query(q);
  REQUIRE(parsed);
  CHECK(parsed->id == 0x1234);
  CHECK(parsed->name == "ipv4only.arpa");
  CHECK(parsed->qtype == 28);
  CHECK_FALSE(parse_query(std::span(q.data(), 5)));
  CHECK_THROWS_AS(build_query(1, std::string(64, 'a') + ".example", RecordType::A), Error);
}

TEST_CASE("response wire format") {
  // Hand-encoded answer: one AAAA record behind a compression pointer.
  const std::vector<std::uint8_t> msg{
      0x00, 0x07, 0x81, 0x80, 0, 1, 0, 1, 0, 0, 0, 0,
      8, 'i', 'p', 'v', '4', 'o', 'n', 'l', 'y', 4, 'a', 'r', 'p', 'a', 0, 0, 28, 0, 1,
      0xc0, 0x0c, 0, 28, 0, 1, 0, 0, 0, 60, 0, 16,
      0x00, 0x64, 0xff, 0x9b, 0, 0, 0, 0, 0, 0, 0, 0, 192, 0, 0, 170};
  const auto r = parse_response(msg, 7);
  CHECK(r.status == DnsStatus::NoError);
  CHECK(r.qname == "ipv4only.arpa");
  REQUIRE(r.aaaa.size() == 1);
  CHECK(r.aaaa[0] == synthesize(Nat64Prefix::standard(), kArpa1));
  CHECK(parse_response(msg, 8).status == DnsStatus::Malformed);
  CHECK(parse_response(std::span(msg.data(), msg.size() - 3), 7).status == DnsStatus::Malformed);

  auto nx = msg;
  nx[3] = 0x83;
  CHECK(parse_response(nx, 7).status == DnsStatus::NxDomain);

  const DnsQuestion q{9, "example.org", 1};
  const std::vector<Ipv4Address> a{Ipv4Address::must_parse("192.0.2.1")};
  const auto built = parse_response(build_response(q, 0, {}, a), 9);
  CHECK(built.a == a);
  CHECK(parse_response(build_response(q, 2, {}, {}), 9).status == DnsStatus::ServFail);
  CHECK(parse_response(build_response(q, 5, {}, {}), 9).status == DnsStatus::Refused);
}

TEST_CASE("resolver behaviors over loopback") {
  {
    MockDnsServer s(resolver(ResolverBehavior::FullDns64));
    const auto arpa = dns_query(s.endpoint(), "ipv4only.arpa", RecordType::AAAA, 2s);
    CHECK(arpa.status == DnsStatus::NoError);
    CHECK(arpa.aaaa == std::vector<Ipv6Address>{synthesize(Nat64Prefix::standard(), kArpa1),
                                                synthesize(Nat64Prefix::standard(), kArpa2)});
    CHECK(arpa.resolver == IpAddress{s.endpoint().address});
    CHECK(dns_query(s.endpoint(), "time-c-b.nist.gov", RecordType::AAAA, 2s).aaaa.size() == 1);
    CHECK(dns_query(s.endpoint(), "time-c-b.nist.gov", RecordType::A, 2s).a.size() == 1);
    CHECK(dns_query(s.endpoint(), "missing.example", RecordType::A, 2s).status == DnsStatus::NxDomain);
  }
  {
    auto c = resolver(ResolverBehavior::Ipv4OnlyArpaOnly);
    c.prefix = *parse_nat64_prefix("2001:db8:64::/64");
    MockDnsServer s(c);
    const auto arpa = dns_query(s.endpoint(), "ipv4only.arpa", RecordType::AAAA, 2s);
    REQUIRE(arpa.aaaa.size() == 2);
    CHECK(try_derive_prefix(arpa.aaaa[0], std::vector<Ipv4Address>{kArpa1, kArpa2}) == c.prefix);
    CHECK(dns_query(s.endpoint(), "time-c-b.nist.gov", RecordType::AAAA, 2s).aaaa.empty());
  }
  {
    MockDnsServer s(resolver(ResolverBehavior::NoDns64));
    const auto arpa = dns_query(s.endpoint(), "ipv4only.arpa", RecordType::AAAA, 2s);
    CHECK(arpa.status == DnsStatus::NoError);
    CHECK(arpa.aaaa.empty());
  }
  {
    MockDnsServer s(resolver(ResolverBehavior::Broken));
    CHECK(dns_query(s.endpoint(), "ipv4only.arpa", RecordType::AAAA, 2s).status == DnsStatus::ServFail);
  }
  {
    auto c = resolver(ResolverBehavior::FullDns64);
    c.silent = true;
    MockDnsServer s(c);
    const auto t0 = std::chrono::steady_clock::now();
    CHECK(dns_query(s.endpoint(), "ipv4only.arpa", RecordType::AAAA, 200ms).status == DnsStatus::Timeout);
    CHECK(std::chrono::steady_clock::now() - t0 >= 200ms);
    CHECK(s.queries() >= 1);
  }
}

TEST_CASE("echo through a scripted NAT64") {
  MockNat64Echo net;
  const auto host = Ipv4Address::must_parse("91.201.7.243");
  net.add_nat(Nat64Prefix::standard(), 25.0);
  net.add_live_v4(host);
  net.add_unroutable(*IpPrefix::parse("2001:db8:dead::/48"));

  const auto out = icmp_echo(net, synthesize(Nat64Prefix::standard(), host), 3, 1s);
  REQUIRE(out.size() == 3);
  for (const auto& o : out) {
    CHECK(o.replied);
    CHECK(o.rtt_ms == 25.0);
  }
  const auto custom = *parse_nat64_prefix("2001:db8:64::/96");
  for (const auto& o : icmp_echo(net, synthesize(custom, host), 3, 1s)) CHECK_FALSE(o.replied);
  CHECK_THROWS_AS(icmp_echo(net, Ipv6Address::must_parse("2001:db8:dead::1"), 1, 1s), NoRoute);
  CHECK_THROWS_AS(icmp_echo(net, synthesize(Nat64Prefix::standard(), host), 0, 1s), Error);

  net.set_loss_every(2);
  int replied = 0;
  for (const auto& o : icmp_echo(net, synthesize(Nat64Prefix::standard(), host), 4, 1s)) replied += o.replied;
  CHECK(replied == 2);
}

TEST_CASE("traceroute over a hop script") {
  ScriptedTraceroute net;
  const auto target = Ipv4Address::must_parse("192.0.2.9");
  const IpAddress dst{target};
  net.add_route(dst, {MockHop{{must_parse_ip("10.0.0.1")}, {0.5, 0.7}},
                      MockHop{},
                      MockHop{{must_parse_ip("10.0.0.3"), must_parse_ip("10.0.0.33")}, {3.0}},
                      MockHop{{dst}, {9.0}}});
  TracerouteMeta meta;
  meta.probe_id = "p";
  meta.target_v4 = target;
  meta.round = 2;
  TracerouteOptions opt;
  opt.timeout = 10ms;
  const auto path = udp_traceroute(net, dst, meta, opt);
  REQUIRE(path.hops.size() == 4);
  CHECK(path.probe_id == "p");
  CHECK(path.round == 2);
  CHECK(path.hops[0].rtts_ms == std::vector<double>{0.5, 0.7, 0.5});
  CHECK_FALSE(path.hops[1].address);
  CHECK(path.hops[1].rtts_ms.empty());
  CHECK(path.hops[2].address == must_parse_ip("10.0.0.3"));
  CHECK(path.hops[2].rtts_ms.size() == 3);
  CHECK(path.hops[3].address == dst);

  // Replaying the recorded path gives the same path back.
  ScriptedTraceroute replay;
  replay.add_route(dst, route_from_path(path));
  CHECK(udp_traceroute(replay, dst, meta, opt) == path);

  // A destination that never answers runs to max_ttl.
  ScriptedTraceroute dead;
  dead.add_route(dst, {MockHop{{must_parse_ip("10.0.0.1")}}, MockHop{}});
  opt.max_ttl = 6;
  const auto lost = udp_traceroute(dead, dst, meta, opt);
  CHECK(lost.hops.size() == 6);
  CHECK_FALSE(lost.hops.back().address);
}
