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

#include <cmath>
#include <string>
#include <vector>

#include "doctest.h"

#include "nat64scope/acquire/ip2as.hpp"
#include "nat64scope/addrsynth.hpp"
#include "nat64scope/pathlab.hpp"

using namespace nat64scope;

namespace {

const Ipv4Address kTarget = Ipv4Address::must_parse("91.201.7.243");

// Hops: an address, "*" for silence, "T" for the target.
TraceroutePath path(const char* probe, Family f, int round, std::vector<std::string> hops,
                    Ipv4Address target = kTarget) {
  TraceroutePath p;
  p.probe_id = probe;
  p.family = f;
  p.round = round;
  p.target_v4 = target;
  if (f == Family::NAT64) p.prefix = Nat64Prefix::standard();
  int i = 0;
  for (const auto& h : hops) {
    Hop hop;
    hop.index = ++i;
    if (h == "T") {
      hop.address = f == Family::NAT64 ? IpAddress{synthesize(Nat64Prefix::standard(), target)}
                                       : IpAddress{target};
    } else if (h != "*") {
      hop.address = must_parse_ip(h);
    }
    if (hop.address) hop.rtts_ms = {10.0 * i, 10.0 * i + 2};
    p.hops.push_back(hop);
  }
  return p;
}

PathPair pair(int round, std::vector<std::string> v4, std::vector<std::string> nat, const char* probe = "p",
              Ipv4Address target = kTarget) {
  return {path(probe, Family::IPv4, round, std::move(v4), target),
          path(probe, Family::NAT64, round, std::move(nat), target)};
}

}  // namespace

TEST_CASE("pairing joins IPv4 and NAT64 paths per probe, target and round") {
  std::vector<TraceroutePath> paths{
      path("p", Family::IPv4, 0, {"10.0.0.1", "T"}),
      path("p", Family::NAT64, 0, {"64:ff9b::a00:1", "T"}),
      path("p", Family::NAT64, 0, {"64:ff9b::a00:2", "T"}),
      path("p", Family::IPv4, 1, {"10.0.0.1", "T"}),
      path("q", Family::NAT64, 0, {"T"}),
  };
  const auto r = pair_paths(paths);
  CHECK(r.pairs.size() == 1);
  REQUIRE(r.unpaired.size() == 3);
  std::vector<std::string> reasons;
  for (const auto& u : r.unpaired) reasons.push_back(u.reason);
  CHECK(std::count(reasons.begin(), reasons.end(), "duplicate NAT64 path") == 1);
  CHECK(std::count(reasons.begin(), reasons.end(), "no NAT64 counterpart") == 1);
  CHECK(std::count(reasons.begin(), reasons.end(), "no IPv4 counterpart") == 1);
}

TEST_CASE("target hop, success and missing hops") {
  const auto v4 = path("p", Family::IPv4, 0, {"10.0.0.1", "*", "10.0.0.3", "T", "*"});
  CHECK(target_hop(v4, kTarget, std::nullopt) == 4);
  CHECK(success(v4));
  CHECK(missing_hop_pct(v4) == 25.0);
  const auto lost = path("p", Family::IPv4, 0, {"10.0.0.1", "*", "*"});
  CHECK_FALSE(success(lost));
  CHECK_THROWS_AS(missing_hop_pct(lost), UnsuccessfulPath);
  const auto nat = path("p", Family::NAT64, 0, {"2001:db8::1", "T"});
  CHECK(success(nat));
  CHECK(target_address(nat) == must_parse_ip("64:ff9b::5bc9:7f3"));
}

TEST_CASE("path metrics and both percentage conventions") {
  const auto m = path_metrics(pair(0, {"10.0.0.1", "10.0.0.2", "10.0.0.3", "T"},
                                   {"2001:db8::1", "*", "64:ff9b::a00:2", "64:ff9b::a00:3", "T"}));
  CHECK(m.v4_len == 4);
  CHECK(m.nat_len == 5);
  CHECK(m.len_diff == 1);
  CHECK(m.len_pct == 25.0);
  CHECK(m.v4_rtt_ms == 41.0);
  CHECK(m.nat_rtt_ms == 51.0);
  CHECK(m.rtt_pct == doctest::Approx(100.0 * 10.0 / 41.0));
  CHECK(m.nat_missing_pct == 20.0);
  CHECK_FALSE(m.ttl_anomaly);
  CHECK(path_metrics(pair(0, {"10.0.0.1", "T"}, {"64:ff9b::a00:1", "64:ff9b::a00:2", "64:ff9b::a00:3", "T"})).ttl_anomaly);
  CHECK_THROWS_AS(path_metrics(pair(0, {"10.0.0.1"}, {"T"})), UnsuccessfulPath);
}

TEST_CASE("filters apply in order") {
  const auto dead = Ipv4Address::must_parse("192.0.2.99");
  std::vector<PathPair> pairs{
      pair(0, {"10.0.0.1", "T"}, {"64:ff9b::a00:1", "T"}),
      pair(0, {"10.0.0.1", "*"}, {"64:ff9b::a00:1", "*"}, "p", dead),
      pair(1, {"10.0.0.1", "T"}, {"2001:db8::1", "*", "*"}),
      pair(1, {"10.0.0.1", "*"}, {"*"}, "p", dead),
      pair(0, {"10.0.0.1", "T"}, {"64:ff9b::a00:1", "T"}, "q"),
      pair(2, {"10.0.0.1", "T"}, {"64:ff9b::a00:1", "T"}),
  };
  FilterConfig c;
  c.drop_final_round = true;
  auto r = filter_pairs(pairs, c);
  auto counts = r.counts();
  CHECK(counts[ExclusionReason::TrailingRound] == 1);
  CHECK(counts[ExclusionReason::IncompleteRound] == 1);  // q covers one target
  CHECK(counts[ExclusionReason::DeadTarget] == 2);
  CHECK(counts[ExclusionReason::NoNatHop] == 1);
  CHECK(r.kept.size() == 1);

  c.exclude_ttl_anomaly = true;
  c.extra_rules.push_back({"everything", [](const PathPair&) { return true; }});
  r = filter_pairs(pairs, c);
  counts = r.counts();
  CHECK(counts[ExclusionReason::TtlAnomaly] == 1);
  CHECK(r.kept.empty());
  c.exclude_ttl_anomaly = false;
  r = filter_pairs(pairs, c);
  REQUIRE(r.counts()[ExclusionReason::Custom] == 1);
  for (const auto& e : r.excluded) {
    CHECK((e.reason == ExclusionReason::Custom) == (e.detail == "everything"));
  }
}

TEST_CASE("NAT64 location") {
  ProbeRecord p;
  p.probe_id = "p";
  p.asn_v4 = 100;
  p.asn_v6 = 200;
  CHECK(locate_nat64(200, p) == NatLocation{NatLocationKind::NatInV6AS, true});
  CHECK(locate_nat64(100, p) == NatLocation{NatLocationKind::Remote, false});
  p.asn_v4 = 200;
  CHECK(locate_nat64(200, p) == NatLocation{NatLocationKind::AllEqual, true});
  p.asn_v4.reset();
  CHECK_THROWS_AS(locate_nat64(200, p), Error);
}

TEST_CASE("NAT64 attribution") {
  Ip2AsTable t;
  t.add(*IpPrefix::parse("10.0.0.0/16"), 100);
  t.add(*IpPrefix::parse("10.1.0.0/16"), 300);
  t.add(*IpPrefix::parse("2001:db8::/32"), 200);
  t.add(*IpPrefix::parse("2001:db9::/32"), 400);
  ProbeRecord probe;
  probe.asn_v6 = 999;

  const std::vector<TraceroutePath> std_paths{
      path("p", Family::NAT64, 0, {"2001:db8::1", "2001:db9::1", "*", "64:ff9b::a00:1", "T"}),
      path("p", Family::NAT64, 1, {"2001:db8::1", "*", "64:ff9b::a00:1", "T"}),
  };
  CHECK(attribute_nat64_as(std_paths, Nat64Prefix::standard(), t, probe) == 400u);
  CHECK(attribute_nat64_as(std::vector<TraceroutePath>{}, Nat64Prefix::standard(), t, probe) == 999u);

  const auto custom = *parse_nat64_prefix("2001:db8:64::/96");
  CHECK(attribute_nat64_as(std::vector<TraceroutePath>{}, custom, t, probe) == 200u);
}

TEST_CASE("aggregate report on an empty set") {
  const auto s = aggregate_report(std::vector<PathPair>{}, std::vector<PairAnalysis>{}, {});
  CHECK(s.pairs == 0);
  CHECK(std::isnan(s.v4_len.mean));
  CHECK(std::isnan(s.v4_success_pct));
  CHECK_FALSE(s.pearson_len_rtt);
  const auto f = flatten(s);
  CHECK(f.at("pairs") == 0);
  CHECK(std::isnan(f.at("len_pct_of_means")));
}

TEST_CASE("aggregate report on two pairs") {
  std::vector<PathPair> pairs{
      pair(0, {"10.0.0.1", "T"}, {"64:ff9b::a00:1", "*", "T"}),
      pair(0, {"10.0.0.1", "10.0.0.2", "T"}, {"64:ff9b::a00:1", "T"}, "p", Ipv4Address::must_parse("192.0.2.7")),
  };
  const auto analyses = analyze_pairs(pairs);
  Groupings g;
  g.group["p"] = DetectionGroup::Nat64Only;
  g.location[{"p", "64:ff9b::/96"}] = NatLocation{NatLocationKind::AllEqual, true};
  const auto s = aggregate_report(pairs, analyses, g);
  CHECK(s.pairs == 2);
  CHECK(s.successful_pairs == 2);
  CHECK(s.v4_len.mean == 2.5);
  CHECK(s.nat_len.mean == 2.5);
  CHECK(s.len_diff.mean == 0.0);
  CHECK(s.len_pct.mean == doctest::Approx((50.0 - 100.0 / 3.0) / 2.0));
  CHECK(s.len_pct_of_means == 0.0);
  CHECK(s.by_group.at("nat64_only").pairs == 2);
  CHECK(s.by_location.at("local").pairs == 2);
  CHECK(s.by_target.size() == 2);
  const auto f = flatten(s);
  CHECK(f.count("v4_len.mean"));
  CHECK(f.count("missing_hist.nat.3"));
}
