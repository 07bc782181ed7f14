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

// Acceptance checks. Prints one PASS/FAIL line per criterion and exits
// nonzero when any fails. Usage: acceptance <fixtures-dir> <scratch-dir>

#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"

#include "nat64scope/acquire/atlas.hpp"
#include "nat64scope/acquire/lists.hpp"
#include "nat64scope/addrsynth.hpp"
#include "nat64scope/classifier.hpp"
#include "nat64scope/cli/commands.hpp"
#include "nat64scope/detector.hpp"
#include "nat64scope/pathlab.hpp"
#include "nat64scope/sim/generate.hpp"
#include "nat64scope/sim/oracle.hpp"
#include "nat64scope/stats.hpp"

using namespace nat64scope;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool ok = true;
  std::string detail;

  void fail(const std::string& why) {
    if (ok) detail = why;
    ok = false;
  }
};

// ---- 1 and 2: address arithmetic -------------------------------------------

// Byte positions of the embedded IPv4 address for each layout: the octets
// after the prefix, skipping byte 8 (bits 64..71).
std::vector<int> v4_positions(int length) {
  std::vector<int> pos;
  for (int b = length / 8; pos.size() < 4; ++b) {
    if (b != 8) pos.push_back(b);
  }
  return pos;
}

Ipv6Address random_prefix_base(std::mt19937_64& rng, int length) {
  Ipv6Address a;
  for (auto& b : a.bytes) b = static_cast<std::uint8_t>(rng());
  a.bytes[8] = 0;
  return a.masked(length);
}

Ipv4Address random_v4(std::mt19937_64& rng) {
  return Ipv4Address::from_uint(static_cast<std::uint32_t>(rng()));
}

Outcome criterion_1() {
  Outcome o;
  const auto std_prefix = Nat64Prefix::standard();
  const auto v4 = Ipv4Address::must_parse("91.201.7.243");
  const auto v6 = Ipv6Address::must_parse("64:ff9b::5bc9:7f3");
  if (synthesize(std_prefix, v4) != v6) o.fail("synthesize(64:ff9b::/96, 91.201.7.243) mismatch");
  if (extract(std_prefix, v6) != v4) o.fail("extract(64:ff9b::5bc9:7f3) mismatch");

  std::mt19937_64 rng(1);
  for (int length : kEmbeddingLengths) {
    for (int i = 0; i < 10000 && o.ok; ++i) {
      Nat64Prefix p{random_prefix_base(rng, length), length, PrefixKind::Custom};
      const auto a = random_v4(rng);
      const auto s = synthesize(p, a);
      const auto pos = v4_positions(length);
      for (int k = 0; k < 4; ++k) {
        if (s.bytes[pos[k]] != a.octets[k]) o.fail("/" + std::to_string(length) + " layout mismatch");
      }
      if (s.bytes[8] != 0) o.fail("/" + std::to_string(length) + " u-octet set");
      if (!s.same_prefix(p.base, length)) o.fail("/" + std::to_string(length) + " prefix bits lost");
      if (extract(p, s) != a) o.fail("/" + std::to_string(length) + " round trip failed");
      if (synthesize(p, extract(p, s)) != s) o.fail("/" + std::to_string(length) + " reverse round trip failed");
    }
  }
  if (o.ok) o.detail = "vector exact; 60000 round trips";
  return o;
}

Outcome criterion_2() {
  Outcome o;
  const auto known = ipv4only_arpa_addresses();
  std::mt19937_64 rng(2);
  for (int length : kEmbeddingLengths) {
    for (int i = 0; i < 1000 && o.ok; ++i) {
      Nat64Prefix p{random_prefix_base(rng, length), length, PrefixKind::Custom};
      const auto aaaa = synthesize(p, known[i % known.size()]);
      const auto got = try_derive_prefix(aaaa, known);
      if (!got || !got->same_network(p)) {
        o.fail("/" + std::to_string(length) + ": planted prefix " + p.to_string() + " not recovered");
      }
    }
  }
  // Random addresses with no known address in any layout window.
  int rejected = 0, false_accepts = 0;
  while (rejected + false_accepts < 1000) {
    Ipv6Address a;
    for (auto& b : a.bytes) b = static_cast<std::uint8_t>(rng());
    bool collides = false;
    for (int length : kEmbeddingLengths) {
      const auto pos = v4_positions(length);
      for (const auto& k : known) {
        bool eq = true;
        for (int j = 0; j < 4; ++j) eq = eq && a.bytes[pos[j]] == k.octets[j];
        collides = collides || eq;
      }
    }
    if (collides) continue;
    if (try_derive_prefix(a, known)) ++false_accepts;
    else ++rejected;
  }
  if (false_accepts) o.fail(std::to_string(false_accepts) + " false accepts");
  if (o.ok) o.detail = "6000 recovered, 1000 rejected, 0 false accepts";
  return o;
}

// ---- 3: decision table -----------------------------------------------------

Outcome criterion_3() {
  Outcome o;
  using V = VerdictValue;
  using G = DetectionGroup;
  // (dns1, dns2, ping) -> group, read off the detection procedure.
  struct Row { V d1, d2, ping; G want; };
  const V P = V::Passed, F = V::Failed, I = V::Inconclusive;
  const Row table[] = {
      {P, P, P, G::Nat64PlusDns64}, {P, P, F, G::Inconclusive},
      {P, F, P, G::Nat64Only},      {P, F, F, G::Dns64MisconfiguredOnly},
      {P, I, P, G::Inconclusive},   {P, I, F, G::Inconclusive},
      {F, P, P, G::Nat64Only},      {F, P, F, G::Inconclusive},
      {F, F, P, G::Nat64Only},      {F, F, F, G::NoNat64},
      {F, I, P, G::Nat64Only},      {F, I, F, G::Inconclusive},
      {I, P, P, G::Inconclusive},   {I, P, F, G::Inconclusive},
      {I, F, P, G::Nat64Only},      {I, F, F, G::Inconclusive},
      {I, I, P, G::Inconclusive},   {I, I, F, G::Inconclusive},
  };
  const auto pub = *parse_nat64_prefix("2001:db8:6464::/96", PrefixKind::PublicService);
  GroupPolicy policy;
  policy.public_nat64.add(pub.to_ip_prefix());

  auto inputs = [](V d1, V d2, V ping, const Nat64Prefix& prefix, TestKind kind) {
    GroupInputs in;
    in.dns1 = Verdict{d1, 2};
    in.dns2 = Verdict{d2, 2};
    if (d1 == V::Passed) in.dns1_prefix = prefix;
    in.pings.push_back(PingVerdict{kind, prefix, Verdict{ping, 2}});
    return in;
  };
  int checked = 0;
  for (const auto& r : table) {
    const auto got = assign_group(inputs(r.d1, r.d2, r.ping, Nat64Prefix::standard(),
                                         TestKind::StdPrefixPing), policy);
    ++checked;
    if (got.group != r.want) {
      o.fail("dns1=" + std::string(to_string(r.d1)) + " dns2=" + std::string(to_string(r.d2)) +
             " ping=" + std::string(to_string(r.ping)) + ": got " + std::string(to_string(got.group)));
    }
    const auto pub_only = assign_group(inputs(r.d1, r.d2, r.ping, pub, TestKind::CustomPrefixPing), policy);
    ++checked;
    if (pub_only.group == G::Nat64Only) o.fail("public-only ping produced nat64_only");
  }
  if (o.ok) o.detail = std::to_string(checked) + " assignments";
  return o;
}

// ---- 4, 5 and 6: simulated datasets ----------------------------------------

struct Analysed {
  sim::Generated gen;
  Ip2AsTable ip2as;
  AsCategoryMap categories;
  GroupPolicy policy;
  DetectionReport detection;
  ClassificationReport classes;
};

PrefixSet prefix_set(const std::vector<std::string>& lines) {
  std::ostringstream text;
  for (const auto& l : lines) text << l << '\n';
  std::istringstream in(text.str());
  return parse_prefix_list(in);
}

Analysed analyse(const sim::Scenario& s) {
  Analysed a;
  a.gen = sim::generate(s);
  for (const auto& [p, asn] : a.gen.ip2as) a.ip2as.add(p, asn);
  for (const auto& [asn, c] : a.gen.as_categories) a.categories.set(asn, c);
  a.policy.public_nat64 = prefix_set(a.gen.public_nat64);
  a.policy.public_resolvers = prefix_set(a.gen.public_resolvers);
  const auto& ds = a.gen.dataset;
  a.detection = detect_all(ds.runs, a.policy);
  ClassifyContext ctx;
  ctx.probes = ds.probes;
  ctx.runs = ds.runs;
  ctx.paths = ds.paths;
  ctx.ip2as = &a.ip2as;
  ctx.as_categories = &a.categories;
  ctx.public_resolvers = &a.policy.public_resolvers;
  a.classes = classify_all(a.detection, ctx);
  return a;
}

PathsReport paths_of(const Analysed& a, bool exclude_ttl_anomaly) {
  FilterConfig f;
  f.drop_final_round = a.gen.truth.planted.trailing_round.has_value();
  f.exclude_ttl_anomaly = exclude_ttl_anomaly;
  const auto groupings = make_groupings(a.detection, a.classes, a.gen.dataset.probes);
  return analyze_paths(a.gen.dataset.paths, f, &a.ip2as, groupings);
}

std::string names(const std::set<ProbeCategory>& cs) {
  std::string s;
  for (auto c : cs) s += (s.empty() ? "" : ",") + std::string(to_string(c));
  return "{" + s + "}";
}

Outcome criterion_4() {
  Outcome o;
  std::size_t probes = 0, prefixes = 0, ases = 0;
  std::set<std::string> covered;
  for (std::uint64_t seed = 1; seed <= 20 && o.ok; ++seed) {
    auto s = sim::default_scenario(seed, 30);
    s.path_failure_rate = 0;
    s.silent_hop_rate = 0;
    const auto a = analyse(s);
    const auto& truth = a.gen.truth;
    const std::string at = "seed " + std::to_string(seed) + ": ";
    if (truth.probes.size() < 30) o.fail(at + "fewer than 30 probes");

    for (const auto& d : a.detection.probes) {
      const auto& t = truth.probes.at(d.probe_id);
      ++probes;
      if (d.assignment.group != t.group) {
        o.fail(at + d.probe_id + " group " + std::string(to_string(d.assignment.group)) +
               ", planted " + std::string(to_string(t.group)));
      }
    }
    if (a.detection.probes.size() != truth.probes.size()) o.fail(at + "probe count differs");

    std::set<ProbeId> classified;
    for (const auto& c : a.classes.probes) {
      classified.insert(c.probe_id);
      const auto& t = truth.probes.at(c.probe_id);
      if (c.categories != t.categories) {
        o.fail(at + c.probe_id + " categories " + names(c.categories) + ", planted " + names(t.categories));
      }
      for (const auto& tp : t.prefixes) {
        auto it = std::find_if(c.prefixes.begin(), c.prefixes.end(), [&](const PrefixPlacement& pp) {
          return pp.prefix.same_network(tp.prefix);
        });
        if (it == c.prefixes.end()) {
          o.fail(at + c.probe_id + " lost prefix " + tp.prefix.to_string());
          continue;
        }
        ++prefixes;
        if (tp.opaque) {
          if (it->traceroute != TracerouteUsability::NoNatHop) o.fail(at + c.probe_id + " opaque NAT not flagged");
          continue;
        }
        if (!it->location || it->location->value != tp.location || it->location->local != tp.local) {
          o.fail(at + c.probe_id + " " + tp.prefix.to_string() + " location differs from planted " +
                 std::string(to_string(tp.location)));
        }
        if (it->local_nat != tp.local_nat) o.fail(at + c.probe_id + " local NAT flag differs");
        covered.insert(std::string(tp.local ? "local" : "remote"));
      }
    }
    for (const auto& [id, t] : truth.probes) {
      if (!t.categories.empty() && !classified.count(id)) o.fail(at + id + " not classified");
    }

    for (const auto& [asn, t] : truth.ases) {
      ++ases;
      auto it = a.classes.evidence.find(asn);
      const bool isp = it != a.classes.evidence.end() && it->second.is_isp_dns64;
      if (isp != t.is_isp_dns64) o.fail(at + "AS" + std::to_string(asn) + " ISP DNS64 evidence differs");
      if (isp && it->second.resolver != t.resolver) o.fail(at + "AS" + std::to_string(asn) + " resolver differs");
      const bool similar = it != a.classes.evidence.end() && it->second.multiple_similar_prefixes_per_as;
      if (similar != t.multiple_similar_prefixes) {
        o.fail(at + "AS" + std::to_string(asn) + " similar-prefix flag differs");
      }
    }
    for (const auto& c : s.cohorts) {
      covered.insert(std::string(sim::to_string(c.resolver)));
      covered.insert(std::string(sim::to_string(c.nat)));
      covered.insert(std::string(sim::to_string(c.setup)));
    }
  }
  for (const char* need : {"full_dns64", "ipv4only_arpa_only", "no_dns64", "translating", "icmp_opaque",
                           "local", "remote", "isp", "home"}) {
    if (!covered.count(need)) o.fail(std::string("scenarios never cover ") + need);
  }
  if (o.ok) {
    o.detail = std::to_string(probes) + " probes, " + std::to_string(prefixes) + " prefixes, " +
               std::to_string(ases) + " ASes";
  }
  return o;
}

Outcome criterion_5() {
  Outcome o;
  std::size_t keys = 0;
  for (std::uint64_t seed = 1; seed <= 20 && o.ok; ++seed) {
    const auto a = analyse(sim::default_scenario(seed, 30));
    for (bool exclude : {false, true}) {
      const auto report = paths_of(a, exclude);
      const auto got = flatten(report.stats);
      const auto want = sim::oracle_stats(
          a.gen.dataset, sim::oracle_context(a.gen, a.gen.truth.planted.trailing_round.has_value(), exclude));
      for (const char* k : {"len_pct.mean", "len_pct_of_means", "rtt_pct.mean", "rtt_pct_of_means"}) {
        if (!got.count(k)) o.fail(std::string("missing key ") + k);
      }
      const auto diff = sim::compare_stats(got, want);
      if (!diff.empty()) {
        o.fail("seed " + std::to_string(seed) + (exclude ? " (ttl filter)" : "") + ": " +
               std::to_string(diff.size()) + " keys differ, first " + diff.front());
      }
      keys += got.size();
    }
  }
  if (o.ok) o.detail = std::to_string(keys) + " statistics agree";
  return o;
}

Outcome criterion_6() {
  Outcome o;
  int planted_total = 0;
  for (std::uint64_t seed = 1; seed <= 20 && o.ok; ++seed) {
    const auto a = analyse(sim::default_scenario(seed, 30));
    const auto report = paths_of(a, false);
    const auto counts = report.filtered.counts();
    const int got = counts.count(ExclusionReason::NoNatHop) ? counts.at(ExclusionReason::NoNatHop) : 0;
    const int planted = a.gen.truth.planted.no_nat_hop_pairs;
    planted_total += planted;
    if (got != planted) {
      o.fail("seed " + std::to_string(seed) + ": " + std::to_string(got) + " excluded, " +
             std::to_string(planted) + " planted");
    }
  }
  if (planted_total == 0) o.fail("no opaque NAT planted");
  if (o.ok) o.detail = std::to_string(planted_total) + " planted pairs matched";
  return o;
}

// ---- 7: missing-hop runs ---------------------------------------------------

// Letters are responding hops, '*' a missing hop.
TraceroutePath path_of(const std::string& spec) {
  TraceroutePath p;
  int ttl = 0;
  for (char c : spec) {
    if (c == ' ') continue;
    Hop h;
    h.index = ++ttl;
    if (c != '*') {
      h.address = Ipv4Address{{10, 0, 0, static_cast<std::uint8_t>(c)}};
      h.rtts_ms = {1.0};
    }
    p.hops.push_back(h);
  }
  return p;
}

// Enumerates every "A *...* B" window of tr1 and searches tr2 for it as a
// literal substring. Null when no run qualifies.
std::optional<double> brute_force_runs(std::string a, std::string b) {
  std::erase(a, ' ');
  std::erase(b, ' ');
  int considered = 0, matched = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a[i] == '*') continue;
    std::size_t j = i + 1;
    while (j < a.size() && a[j] == '*') ++j;
    if (j == a.size() || j == i + 1) continue;
    if (b.find(a[i]) == std::string::npos || b.find(a[j]) == std::string::npos) continue;
    ++considered;
    if (b.find(a.substr(i, j - i + 1)) != std::string::npos) ++matched;
  }
  if (considered == 0) return std::nullopt;
  return static_cast<double>(matched) / considered;
}

Outcome criterion_7() {
  Outcome o;
  struct Case { const char* tr1; const char* tr2; double hand; };
  const Case cases[] = {
      {"A * B C", "A * B C", 1.0},
      {"A * B", "A B", 0.0},
      {"A * * B", "A * B", 0.0},
      {"A * B * C", "A * B C", 0.5},
      {"A * B * C", "X A * B Y * C", 0.5},
      {"A * B", "Z * B A", 0.0},
      {"A * * * B * C", "A * * * B * C D", 1.0},
      {"A * B * C * D", "A * B * D * C", 1.0 / 3.0},
      {"A * B", "A * B * A * B", 1.0},
      {"A * B Q * R", "A * B", 1.0},
  };
  for (const auto& c : cases) {
    const double got = match_missing_runs(path_of(c.tr1), path_of(c.tr2));
    const auto brute = brute_force_runs(c.tr1, c.tr2);
    if (!brute || *brute != c.hand) o.fail(std::string("hand count disagrees with brute force on ") + c.tr1);
    if (got != c.hand) o.fail(std::string("'") + c.tr1 + "' vs '" + c.tr2 + "': " + std::to_string(got));
  }
  try {
    match_missing_runs(path_of("A B C"), path_of("A B C"));
    o.fail("no runs did not raise");
  } catch (const NoRuns&) {
  }
  // Identical paths from a simulated dataset.
  auto s = sim::default_scenario(7, 30);
  s.silent_hop_rate = 0.3;
  const auto gen = sim::generate(s);
  int identical = 0;
  for (const auto& p : gen.dataset.paths) {
    if (identical >= 500) break;
    try {
      if (match_missing_runs(p, p) != 1.0) o.fail("identical path below 1.0");
      ++identical;
    } catch (const NoRuns&) {
    }
  }
  if (identical == 0) o.fail("no simulated path had a bounded run");
  if (o.ok) o.detail = "10 crafted cases, " + std::to_string(identical) + " identical paths";
  return o;
}

// ---- 8: Pearson ------------------------------------------------------------

long double textbook_r(const std::vector<double>& x, const std::vector<double>& y) {
  const long double n = x.size();
  long double sx = 0, sy = 0, sxx = 0, syy = 0, sxy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sx += x[i];
    sy += y[i];
    sxx += static_cast<long double>(x[i]) * x[i];
    syy += static_cast<long double>(y[i]) * y[i];
    sxy += static_cast<long double>(x[i]) * y[i];
  }
  return (n * sxy - sx * sy) / std::sqrt((n * sxx - sx * sx) * (n * syy - sy * sy));
}

Outcome criterion_8() {
  Outcome o;
  std::vector<double> x, up, down;
  for (int i = 0; i < 50; ++i) {
    x.push_back(i * 0.5 + 3);
    up.push_back(4.0 * x.back() - 7.0);
    down.push_back(-2.5 * x.back() + 1.0);
  }
  if (pearson(x, up) != 1.0) o.fail("increasing line is not exactly 1");
  if (pearson(x, down) != -1.0) o.fail("decreasing line is not exactly -1");
  try {
    pearson(x, std::vector<double>(x.size(), 5.0));
    o.fail("constant series did not raise");
  } catch (const InsufficientData&) {
  }
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> u(0.0, 100.0);
  std::uniform_int_distribution<int> len(3, 200);
  double worst = 0;
  for (int k = 0; k < 1000; ++k) {
    const int n = len(rng);
    std::vector<double> a(n), b(n);
    for (int i = 0; i < n; ++i) {
      a[i] = u(rng);
      b[i] = 0.3 * a[i] + u(rng);
    }
    worst = std::max(worst, static_cast<double>(std::fabs(pearson(a, b) - textbook_r(a, b))));
  }
  if (worst > 1e-12) o.fail("max deviation " + std::to_string(worst));
  if (o.ok) {
    std::ostringstream d;
    d << "1000 random pairs, max deviation " << worst;
    o.detail = d.str();
  }
  return o;
}

// ---- 9: Atlas replay -------------------------------------------------------

nlohmann::json read_json(const fs::path& p) {
  std::ifstream in(p);
  if (!in) throw Error("cannot open " + p.string());
  return nlohmann::json::parse(in);
}

Outcome criterion_9(const fs::path& fixtures) {
  Outcome o;
  const auto dir = fixtures / "atlas";
  const auto dns_doc = read_json(dir / "dns.json");
  const auto ping_doc = read_json(dir / "ping.json");
  const auto tr_doc = read_json(dir / "traceroute.json");
  const auto notes = read_json(dir / "annotations.json");

  const auto dns = parse_atlas_dns(dns_doc);
  const auto ping = parse_atlas_ping(ping_doc);
  const auto tr = parse_atlas_traceroute(tr_doc);
  if (serialize_atlas(dns) != dns_doc) o.fail("dns fixture changed on re-serialization");
  if (serialize_atlas(ping) != ping_doc) o.fail("ping fixture changed on re-serialization");
  if (serialize_atlas(tr) != tr_doc) o.fail("traceroute fixture changed on re-serialization");

  const auto& nd = notes.at("dns");
  if (nd.size() != dns.size()) o.fail("dns sidecar size");
  for (std::size_t i = 0; i < std::min(nd.size(), dns.size()); ++i) {
    const auto r = to_dns_response(dns[i], "ipv4only.arpa");
    const std::string at = "dns[" + std::to_string(i) + "] ";
    if (std::string(to_string(r.status)) != nd[i].at("status")) o.fail(at + "status");
    if (r.aaaa.size() != nd[i].at("aaaa").get<std::size_t>()) o.fail(at + "AAAA count");
    std::optional<Nat64Prefix> p;
    if (!r.aaaa.empty()) p = try_derive_prefix(r.aaaa.front(), ipv4only_arpa_addresses());
    const nlohmann::json got = p ? nlohmann::json(p->to_string()) : nlohmann::json();
    if (got != nd[i].at("prefix")) o.fail(at + "prefix");
  }
  const auto& np = notes.at("ping");
  if (np.size() != ping.size()) o.fail("ping sidecar size");
  for (std::size_t i = 0; i < std::min(np.size(), ping.size()); ++i) {
    const auto n = std::count_if(ping[i].packets.begin(), ping[i].packets.end(),
                                 [](const EchoOutcome& e) { return e.replied; });
    if (n != np[i].at("replied").get<long>()) o.fail("ping[" + std::to_string(i) + "] replies");
  }
  const auto& nt = notes.at("traceroute");
  if (nt.size() != tr.size()) o.fail("traceroute sidecar size");
  int hops = 0;
  for (std::size_t i = 0; i < std::min(nt.size(), tr.size()); ++i) {
    const auto& n = nt[i];
    const std::string at = "traceroute[" + std::to_string(i) + "] ";
    std::optional<Nat64Prefix> prefix;
    if (!n.at("prefix").is_null()) prefix = parse_nat64_prefix(n.at("prefix").get<std::string>());
    const auto path = to_traceroute_path(tr[i], prefix, 0);
    hops += static_cast<int>(path.hops.size());
    if (std::string(to_string(path.family)) != n.at("family")) o.fail(at + "family");
    if (static_cast<int>(path.hops.size()) != n.at("hops").get<int>()) o.fail(at + "hop count");
    const auto missing = std::count_if(path.hops.begin(), path.hops.end(),
                                       [](const Hop& h) { return !h.responded(); });
    if (missing != n.at("missing").get<long>()) o.fail(at + "missing count");
    if (success(path) != n.at("reached").get<bool>()) o.fail(at + "reached");
    std::size_t rtts = 0;
    for (const auto& h : path.hops) rtts += h.rtts_ms.size();
    if (rtts != n.at("rtts").get<std::size_t>()) o.fail(at + "RTT count");
    if (n.contains("nat_hops")) {
      const IpAddress target = synthesize(*prefix, path.target_v4);
      const auto nat = std::count_if(path.hops.begin(), path.hops.end(), [&](const Hop& h) {
        return h.address && *h.address != target && matches_prefix(*h.address, *prefix);
      });
      if (nat != n.at("nat_hops").get<long>()) o.fail(at + "NAT64 hop count");
    }
  }
  if (o.ok) {
    o.detail = std::to_string(dns.size() + ping.size() + tr.size()) + " results, " +
               std::to_string(hops) + " hops";
  }
  return o;
}

// ---- 10: end to end --------------------------------------------------------

std::map<std::string, std::string> snapshot(const fs::path& dir) {
  std::map<std::string, std::string> files;
  for (const auto& e : fs::recursive_directory_iterator(dir)) {
    if (!e.is_regular_file()) continue;
    std::ifstream in(e.path(), std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    files[fs::relative(e.path(), dir).generic_string()] = s.str();
  }
  return files;
}

Outcome criterion_10(const fs::path& scratch) {
  Outcome o;
  std::ostringstream log;
  std::vector<std::map<std::string, std::string>> runs;
  for (const char* name : {"run1", "run2"}) {
    const auto dir = scratch / name;
    fs::remove_all(dir);
    cli::GlobalOptions g;
    g.out = dir;
    cli::SimulateOptions s;
    s.seed = 42;
    int rc = cli::cmd_simulate(g, s, log);
    cli::GlobalOptions c;
    c.config = dir / "config.json";
    rc |= cli::cmd_detect(c, log);
    rc |= cli::cmd_classify(c, log);
    rc |= cli::cmd_paths(c, log);
    if (rc != 0) o.fail(std::string(name) + " exited " + std::to_string(rc));
    runs.push_back(snapshot(dir));
  }
  if (runs[0].size() < 20) o.fail("only " + std::to_string(runs[0].size()) + " files written");
  if (runs[0] != runs[1]) {
    for (const auto& [f, body] : runs[0]) {
      auto it = runs[1].find(f);
      if (it == runs[1].end() || it->second != body) o.fail(f + " differs between runs");
    }
    o.fail("file sets differ");
  }
  if (o.ok) o.detail = std::to_string(runs[0].size()) + " files byte-identical";
  return o;
}

}  // namespace

int main(int argc, char** argv) {
  if (argc != 3) {
    std::cerr << "usage: acceptance <fixtures-dir> <scratch-dir>\n";
    return 2;
  }
  const fs::path fixtures = argv[1];
  const fs::path scratch = argv[2];
  fs::create_directories(scratch);

  struct Criterion {
    int id;
    const char* title;
    double limit_s;  // 0: untimed
    std::function<Outcome()> run;
  };
  const std::vector<Criterion> criteria = {
      {1, "address arithmetic", 1, criterion_1},
      {2, "prefix discovery", 5, criterion_2},
      {3, "detection decision table", 1, criterion_3},
      {4, "ground-truth recovery", 30, criterion_4},
      {5, "statistics oracle equivalence", 30, criterion_5},
      {6, "filter accounting", 0, criterion_6},
      {7, "missing-hop run matching", 1, criterion_7},
      {8, "pearson sanity", 0, criterion_8},
      {9, "atlas replay", 0, [&] { return criterion_9(fixtures); }},
      {10, "end-to-end offline", 0, [&] { return criterion_10(scratch); }},
  };
  int failed = 0;
  for (const auto& c : criteria) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o.fail(std::string("exception: ") + e.what());
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (c.limit_s > 0 && secs >= c.limit_s) o.fail("took " + std::to_string(secs) + " s");
    failed += !o.ok;
    std::printf("%s %2d %-30s %7.3f s  %s\n", o.ok ? "PASS" : "FAIL", c.id, c.title, secs, o.detail.c_str());
  }
  return failed == 0 ? 0 : 1;
}
