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

#include "nat64scope/sim/generate.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>

#include "nat64scope/addrsynth.hpp"
#include "nat64scope/sim/rng.hpp"

namespace nat64scope::sim {

namespace {

// Address plan. AS index j owns (40 + j/250).(j%250).0.0/16 and
// 2a10:(0x100 + j)::/32.
constexpr Asn kAsnBase = 4200000000u;

struct AsSlot {
  Asn asn = 0;
  std::uint32_t v4_base = 0;
  Ipv6Address v6_base;
};

class Registry {
public:
  /// A new AS, or with `owner` a further address block of that AS.
  int add(int owner = -1) {
    const int j = static_cast<int>(slots_.size());
    AsSlot s;
    s.asn = owner >= 0 ? slots_.at(owner).asn : kAsnBase + static_cast<Asn>(j);
    s.v4_base = (static_cast<std::uint32_t>(40 + j / 250) << 24) |
                (static_cast<std::uint32_t>(j % 250) << 16);
    const int g = 0x100 + j;
    s.v6_base.bytes[0] = 0x2a;
    s.v6_base.bytes[1] = 0x10;
    s.v6_base.bytes[2] = static_cast<std::uint8_t>(g >> 8);
    s.v6_base.bytes[3] = static_cast<std::uint8_t>(g & 0xff);
    slots_.push_back(s);
    return j;
  }
  const AsSlot& operator[](int j) const { return slots_.at(j); }
  std::size_t size() const { return slots_.size(); }

private:
  std::vector<AsSlot> slots_;
};

Ipv6Address v6_in(const AsSlot& as, std::uint16_t g3, std::uint16_t g4, std::uint16_t last) {
  Ipv6Address a = as.v6_base;
  a.bytes[4] = static_cast<std::uint8_t>(g3 >> 8);
  a.bytes[5] = static_cast<std::uint8_t>(g3 & 0xff);
  a.bytes[6] = static_cast<std::uint8_t>(g4 >> 8);
  a.bytes[7] = static_cast<std::uint8_t>(g4 & 0xff);
  a.bytes[14] = static_cast<std::uint8_t>(last >> 8);
  a.bytes[15] = static_cast<std::uint8_t>(last & 0xff);
  return a;
}

Ipv4Address v4_router(const AsSlot& as, int k) {
  return Ipv4Address::from_uint(as.v4_base | (1u << 8) | static_cast<std::uint32_t>(k + 1));
}

Ipv6Address v6_router(const AsSlot& as, int k) {
  return v6_in(as, 0, static_cast<std::uint16_t>(k + 1), 1);
}

/// Custom prefix number `k` of a given length inside an AS's /32.
Nat64Prefix custom_prefix(const AsSlot& as, int length, int k) {
  Ipv6Address a = as.v6_base;
  auto set16 = [&](int byte, int v) {
    a.bytes[byte] = static_cast<std::uint8_t>(v >> 8);
    a.bytes[byte + 1] = static_cast<std::uint8_t>(v & 0xff);
  };
  switch (length) {
    case 96: set16(4, 0x64); set16(6, k); break;
    case 64: set16(4, 0x64); set16(6, k); break;
    case 56: set16(4, 0x64); set16(6, k << 8); break;
    case 48: set16(4, 0x64 + k); break;
    case 40: set16(4, 0x6400); break;
    case 32: break;
    default: throw ScenarioError("unsupported prefix length");
  }
  return Nat64Prefix{a, length, PrefixKind::Custom};
}

Nat64Prefix as_observed(const Nat64Prefix& p) {
  Nat64Prefix out = p;
  out.kind = p.same_network(Nat64Prefix::standard()) ? PrefixKind::Standard : PrefixKind::Custom;
  return out;
}

double round_ms(double x) { return std::round(x * 1000.0) / 1000.0; }

struct NatInst {
  Nat64Prefix prefix;
  bool opaque = false;
  int as = 0;         // AS hosting the NAT64
  bool home_local = false;
  bool via_provider = false;  // remote: reached through a provider AS
  bool is_public = false;
};

struct Site {
  const Cohort* cohort = nullptr;
  int as = 0;
  int v4_as = 0;
  int provider = -1;
  std::vector<NatInst> nats;
};

struct SimProbe {
  int index = 0;
  ProbeId id;
  int site = 0;
  std::string cohort;
  Setup setup = Setup::Standalone;
  bool home = false;
  ResolverBehavior resolver = ResolverBehavior::NoDns64;
  bool public_resolver = false;
  IpAddress resolver_addr;
  std::optional<Nat64Prefix> synth;  // prefix the resolver synthesizes with
  IpPrefix network;
  bool flaky = false;
  bool near_target = false;
  bool public_service = false;  // hands out and uses the public prefix

  bool dns1_pass = false;
  bool dns2_pass = false;
  std::vector<Nat64Prefix> pinged;
  std::map<Nat64Prefix, VerdictValue> ping_verdicts;
  std::vector<const NatInst*> working;
};

struct HopSpec {
  IpAddress addr;
  double base = 0.0;
  bool pinned = false;  // always answers: keeps NAT attribution measurable
  bool post_nat = false;
  bool target = false;
};

/// Figure-2 reading of one probe's verdicts.
DetectionGroup expected_group(const SimProbe& p, const Nat64Prefix& public_prefix) {
  const bool dns1 = p.dns1_pass;
  const bool dns2 = p.dns2_pass;
  bool any_pass = false, private_pass = false, appropriate = false, all_fail = true;
  for (const auto& [q, v] : p.ping_verdicts) {
    if (v != VerdictValue::Failed) all_fail = false;
    if (v != VerdictValue::Passed) continue;
    any_pass = true;
    if (!q.same_network(public_prefix)) private_pass = true;
    if (p.synth && dns1 && q.same_network(*p.synth)) appropriate = true;
  }
  if (dns1 && dns2 && appropriate) return DetectionGroup::Nat64PlusDns64;
  if ((!dns1 || !dns2) && private_pass) return DetectionGroup::Nat64Only;
  if (dns1 && !dns2 && all_fail) return DetectionGroup::Dns64MisconfiguredOnly;
  if (!dns1 && !dns2 && all_fail) return DetectionGroup::NoNat64;
  (void)any_pass;
  return DetectionGroup::Inconclusive;
}

NatLocationKind location_of(Asn nat_as, Asn v4, Asn v6) {
  if (nat_as == v6 && nat_as == v4) return NatLocationKind::AllEqual;
  if (nat_as == v6) return NatLocationKind::NatInV6AS;
  return NatLocationKind::Remote;
}

class Generator {
public:
  explicit Generator(const Scenario& s) : s_(s), rng_(s.seed) {}

  Generated run();

private:
  void layout();
  void detection_runs();
  void truth();
  void traceroutes();
  void tables();
  Nat64Prefix site_prefix(int as, int length, int k);

  std::vector<HopSpec> v4_script(const SimProbe& p, int t, Rng& rng) const;
  std::vector<HopSpec> nat_script(const SimProbe& p, const NatInst& nat, int t,
                                  const std::vector<HopSpec>& v4, Rng& rng) const;
  TraceroutePath realize(const SimProbe& p, const std::vector<HopSpec>& script, Family family,
                         const NatInst* nat, int t, int round, bool protect, Rng& rng) const;

  const Scenario& s_;
  Rng rng_;
  Registry reg_;
  std::vector<int> transit_;
  std::vector<int> target_as_;
  int public_nat_as_ = 0;
  int public_dns_as_ = 0;
  NatInst public_nat_;
  std::vector<Site> sites_;
  std::vector<SimProbe> probes_;
  Generated g_;
  std::set<std::pair<int, int>> incomplete_;  // (probe index, round)
  std::map<int, int> blocks_;
};

Nat64Prefix Generator::site_prefix(int as, int length, int k) {
  // Prefixes of /40 and shorter would swallow the AS's router addresses,
  // so they come from a separate block announced by the same AS.
  if (length > 40) return custom_prefix(reg_[as], length, k);
  auto it = blocks_.find(as);
  if (it == blocks_.end()) it = blocks_.emplace(as, reg_.add(as)).first;
  return custom_prefix(reg_[it->second], length, k);
}

void Generator::layout() {
  transit_ = {reg_.add(), reg_.add()};
  for (int t = 0; t < s_.targets; ++t) target_as_.push_back(reg_.add());
  public_nat_as_ = reg_.add();
  public_dns_as_ = reg_.add();
  public_nat_ = NatInst{custom_prefix(reg_[public_nat_as_], 96, 0), false, public_nat_as_, false,
                        true, true};

  const auto& pdns = reg_[public_dns_as_];
  const IpAddress public_plain = v6_in(pdns, 0, 0, 0x53);
  const IpAddress public_dns64_std = v6_in(pdns, 0, 0, 0x64);
  const IpAddress public_dns64_svc = v6_in(pdns, 0, 0, 0x6464);

  for (int i = 0; i < s_.targets; ++i) {
    const auto& tas = reg_[target_as_[i]];
    g_.targets.push_back(i == 0 ? Ipv4Address::must_parse("91.201.7.243")
                                : Ipv4Address::from_uint(tas.v4_base | (7u << 8) | 243u));
  }
  g_.ping_target = g_.targets.front();

  for (const auto& c : s_.cohorts) {
    for (int si = 0; si < c.sites; ++si) {
      Site site;
      site.cohort = &c;
      site.as = reg_.add();
      site.v4_as = c.v4_elsewhere ? reg_.add() : site.as;
      if (c.nat != NatBehavior::None && c.prefix != PrefixChoice::Public &&
          c.placement == Placement::Remote) {
        site.provider = reg_.add();
      }
      const int nat_as = site.provider >= 0 ? site.provider : site.as;
      const bool opaque = c.nat == NatBehavior::IcmpOpaque;
      const bool home_local = c.setup == Setup::Home && c.placement == Placement::Local;
      if (c.nat != NatBehavior::None && c.prefix != PrefixChoice::Public) {
        if (c.prefix == PrefixChoice::Standard) {
          site.nats.push_back({Nat64Prefix::standard(), opaque, nat_as, home_local,
                               site.provider >= 0, false});
        } else {
          for (int k : c.similar_prefixes ? std::vector<int>{1, 2} : std::vector<int>{0}) {
            site.nats.push_back({site_prefix(nat_as, c.prefix_len, k), opaque, nat_as,
                                 home_local, site.provider >= 0, false});
          }
        }
      }
      const int site_index = static_cast<int>(sites_.size());
      sites_.push_back(std::move(site));
      const Site& st = sites_.back();
      const AsSlot& sas = reg_[st.as];

      const int extra = c.with_public_service ? 1 : 0;
      for (int m = 0; m < c.members + extra; ++m) {
        SimProbe p;
        p.index = static_cast<int>(probes_.size());
        p.id = std::to_string(1000 + p.index);
        p.site = site_index;
        p.setup = c.setup;
        p.home = c.setup == Setup::Home;
        p.flaky = c.flaky;
        p.near_target = c.near_target;
        const bool is_extra = m == c.members;
        p.cohort = is_extra ? c.name + "/public" : c.name;
        const int net = c.shared_network && !is_extra ? 0 : m;
        p.network = IpPrefix{v6_in(sas, static_cast<std::uint16_t>(0x1000 + net), 0, 0), 64};

        if (is_extra || c.prefix == PrefixChoice::Public) {
          p.public_service = true;
          p.public_resolver = true;
          p.resolver = is_extra ? ResolverBehavior::FullDns64 : c.resolver;
          p.resolver_addr = public_dns64_svc;
          p.synth = public_nat_.prefix;
        } else if (c.public_resolver) {
          p.public_resolver = true;
          p.resolver = c.resolver;
          const bool synthesizes = c.resolver == ResolverBehavior::FullDns64 ||
                                   c.resolver == ResolverBehavior::Ipv4OnlyArpaOnly;
          p.resolver_addr = synthesizes ? public_dns64_std : public_plain;
          if (synthesizes) p.synth = Nat64Prefix::standard();
        } else {
          p.resolver = c.resolver;
          const int k = c.similar_prefixes ? 1 + m % 2 : 0;
          p.resolver_addr = p.home ? IpAddress{v6_in(sas, 0x1000, 0, 1)}
                                   : IpAddress{v6_in(sas, 0, 0, static_cast<std::uint16_t>(0x53 + (k > 1)))};
          if (c.resolver == ResolverBehavior::FullDns64 ||
              c.resolver == ResolverBehavior::Ipv4OnlyArpaOnly) {
            if (c.prefix == PrefixChoice::Standard) {
              p.synth = Nat64Prefix::standard();
            } else {
              const int nat_as = st.provider >= 0 ? st.provider : st.as;
              p.synth = site_prefix(nat_as, c.prefix_len, k);
            }
          }
        }
        probes_.push_back(std::move(p));
      }
    }
  }

  g_.dns2_name = "time-c-b.nist.gov";
  g_.dns2_a_records = {Ipv4Address::must_parse("203.0.113.123")};
  g_.public_nat64 = {public_nat_.prefix.to_string()};
  g_.public_resolvers = {to_string(public_plain), to_string(public_dns64_std),
                         to_string(public_dns64_svc)};
}

void Generator::detection_runs() {
  auto& ds = g_.dataset;
  ds.header.window_start = s_.start - static_cast<Timestamp>(s_.repeats) * 3600;
  ds.header.window_end = s_.start + static_cast<Timestamp>(s_.rounds + 1) * s_.round_interval;
  ds.header.source = "simulate seed=" + std::to_string(s_.seed);

  // Non-standard prefixes seen by DNS test 1, per IPv6 AS.
  std::map<int, std::set<Nat64Prefix>> observed;
  for (auto& p : probes_) {
    p.dns1_pass = p.synth && (p.resolver == ResolverBehavior::FullDns64 ||
                              p.resolver == ResolverBehavior::Ipv4OnlyArpaOnly);
    p.dns2_pass = p.synth && p.resolver == ResolverBehavior::FullDns64;
    if (p.dns1_pass && !p.synth->same_network(Nat64Prefix::standard())) {
      observed[sites_[p.site].as].insert(as_observed(*p.synth));
    }
  }

  for (auto& p : probes_) {
    const Site& site = sites_[p.site];
    ProbeRecord rec;
    rec.probe_id = p.id;
    rec.asn_v4 = reg_[site.v4_as].asn;
    rec.asn_v6 = reg_[site.as].asn;
    rec.resolvers = {p.resolver_addr};
    rec.tags = {"cohort:" + p.cohort};
    rec.network_prefix_v6 = p.network;
    if (p.home) rec.annotations = {"home_setup"};
    ds.probes.push_back(rec);

    p.pinged = {Nat64Prefix::standard()};
    for (const auto& q : observed[site.as]) p.pinged.push_back(q);

    auto reaches = [&](const Nat64Prefix& q) -> const NatInst* {
      if (q.same_network(public_nat_.prefix)) return &public_nat_;
      for (const auto& n : site.nats) {
        if (n.prefix.same_network(q)) return &n;
      }
      return nullptr;
    };

    for (int k = 0; k < s_.repeats; ++k) {
      const Timestamp ts = s_.start - static_cast<Timestamp>(s_.repeats - k) * 3600 + p.index;
      for (auto kind : {TestKind::DnsTest1, TestKind::DnsTest2}) {
        TestRun r;
        r.probe_id = p.id;
        r.kind = kind;
        r.timestamp = ts;
        r.resolver_used = p.resolver_addr;
        const bool pass = kind == TestKind::DnsTest1 ? p.dns1_pass : p.dns2_pass;
        if (pass) {
          r.outcome = RawOutcome::Pass;
          r.observed_prefix = as_observed(*p.synth);
        } else {
          r.outcome = RawOutcome::Fail;
          r.diagnostic = p.resolver == ResolverBehavior::Broken ? "SERVFAIL" : "no AAAA answer";
        }
        ds.runs.push_back(std::move(r));
      }
      for (const auto& q : p.pinged) {
        TestRun r;
        r.probe_id = p.id;
        const bool standard = q.same_network(Nat64Prefix::standard());
        r.kind = standard ? TestKind::StdPrefixPing : TestKind::CustomPrefixPing;
        r.timestamp = ts + 1;
        r.ping_prefix = as_observed(q);
        r.ping_target = g_.ping_target;
        const bool reach = reaches(q) != nullptr;
        const bool pass = reach && (!p.flaky || k % 2 == 0);
        r.outcome = pass ? RawOutcome::Pass : RawOutcome::Fail;
        if (!pass) r.diagnostic = "no echo reply";
        ds.runs.push_back(std::move(r));
      }
    }

    for (const auto& q : p.pinged) {
      const NatInst* n = reaches(q);
      VerdictValue v = VerdictValue::Failed;
      if (n) v = p.flaky && s_.repeats > 1 ? VerdictValue::Inconclusive : VerdictValue::Passed;
      p.ping_verdicts[as_observed(q)] = v;
      if (v == VerdictValue::Passed) p.working.push_back(n);
    }
  }
}

void Generator::truth() {
  auto& gt = g_.truth;
  gt.seed = s_.seed;

  // ISP evidence: two or more DNS-passing probes on one resolver with
  // distinct network prefixes. Best resolver: most witnesses, then lowest.
  std::map<int, std::map<IpAddress, std::vector<const SimProbe*>>> by_resolver;
  std::map<int, std::set<Nat64Prefix>> prefixes_seen;
  for (const auto& p : probes_) {
    const int as = sites_[p.site].as;
    gt.ases[reg_[as].asn].asn = reg_[as].asn;
    if (p.dns1_pass || p.dns2_pass) {
      by_resolver[as][p.resolver_addr].push_back(&p);
      prefixes_seen[as].insert(as_observed(*p.synth));
    }
  }
  for (const auto& [as, resolvers] : by_resolver) {
    AsTruth& at = gt.ases[reg_[as].asn];
    std::size_t best = 0;
    for (const auto& [addr, ws] : resolvers) {
      std::set<IpPrefix> nets;
      for (const auto* w : ws) nets.insert(w->network);
      if (ws.size() >= 2 && nets.size() >= 2 && ws.size() > best) {
        best = ws.size();
        at.is_isp_dns64 = true;
        at.resolver = addr;
      }
    }
    const auto& seen = prefixes_seen[as];
    for (auto a = seen.begin(); a != seen.end(); ++a) {
      for (auto b = std::next(a); b != seen.end(); ++b) {
        if (!a->same_network(*b) && a->base.same_prefix(b->base, 48)) {
          at.multiple_similar_prefixes = true;
        }
      }
    }
  }

  for (const auto& p : probes_) {
    const Site& site = sites_[p.site];
    ProbeTruth t;
    t.probe_id = p.id;
    t.cohort = p.cohort;
    t.group = expected_group(p, public_nat_.prefix);
    t.setup = p.setup;
    t.public_resolver = p.public_resolver;
    const Asn v4 = reg_[site.v4_as].asn;
    const Asn v6 = reg_[site.as].asn;
    for (const auto* n : p.working) {
      PrefixTruth pt;
      pt.prefix = as_observed(n->prefix);
      pt.nat_as = reg_[n->as].asn;
      pt.opaque = n->opaque;
      pt.location = location_of(pt.nat_as, v4, v6);
      pt.local = pt.location != NatLocationKind::Remote;
      pt.local_nat = n->home_local;
      t.prefixes.push_back(pt);
    }

    if (t.group == DetectionGroup::Nat64PlusDns64 || t.group == DetectionGroup::Nat64Only) {
      const AsTruth& at = gt.ases.at(v6);
      if (at.is_isp_dns64) {
        t.categories.insert(ProbeCategory::AsWithDns64);
        if (at.resolver == p.resolver_addr) t.categories.insert(ProbeCategory::IspDns64);
      }
      if (p.home) t.categories.insert(ProbeCategory::HomeSetup);
      if (p.public_resolver && t.group == DetectionGroup::Nat64Only) {
        t.categories.insert(ProbeCategory::PublicResolverOnly);
      }
      if (t.group == DetectionGroup::Nat64PlusDns64 && p.dns1_pass &&
          p.synth->same_network(public_nat_.prefix)) {
        t.categories.insert(ProbeCategory::PublicService);
      }
      bool usable = false, opaque = false;
      for (const auto& pt : t.prefixes) {
        (pt.opaque ? opaque : usable) = true;
        if (!pt.opaque && !pt.local) t.categories.insert(ProbeCategory::RemoteNat64);
      }
      if (!usable && opaque) t.categories.insert(ProbeCategory::NoTracerouteThroughNat);
      if (t.categories.empty()) t.categories.insert(ProbeCategory::Unknown);
    }
    gt.probes[p.id] = std::move(t);
  }
}

std::vector<HopSpec> Generator::v4_script(const SimProbe& p, int t, Rng& rng) const {
  const Site& site = sites_[p.site];
  const Ipv4Address target = g_.targets[t];
  std::vector<HopSpec> out;
  double rtt = 0.0;
  auto push = [&](IpAddress a, double step) {
    rtt += step;
    out.push_back({a, rtt, false, false, false});
  };
  if (p.near_target && t == 0) {
    push(v4_router(reg_[site.v4_as], 0), rng.uniform(0.3, 1.0));
    push(target, rng.uniform(0.2, 1.0));
    out.back().target = true;
    return out;
  }
  const int n1 = rng.between(1, 3);
  for (int k = 0; k < n1; ++k) push(v4_router(reg_[site.v4_as], k), rng.uniform(0.3, 2.0));
  const auto& tr = reg_[transit_[t % 2]];
  const int n2 = rng.between(2, 5);
  for (int k = 0; k < n2; ++k) push(v4_router(tr, 10 * t + k), rng.uniform(2.0, 12.0));
  if (rng.chance(0.5)) push(v4_router(reg_[target_as_[t]], 0), rng.uniform(1.0, 4.0));
  push(target, rng.uniform(0.2, 1.0));
  out.back().target = true;
  return out;
}

std::vector<HopSpec> Generator::nat_script(const SimProbe& p, const NatInst& nat, int t,
                                           const std::vector<HopSpec>& v4, Rng& rng) const {
  const Site& site = sites_[p.site];
  const AsSlot& sas = reg_[site.as];
  std::vector<HopSpec> out;
  double rtt = 0.0;
  auto push = [&](IpAddress a, double step, bool post) {
    rtt += step;
    out.push_back({a, rtt, false, post, false});
  };

  // IPv6 side up to the NAT64.
  if (p.home) push(v6_in(sas, 0x1000, 0, 1), rng.uniform(0.2, 0.5), false);
  if (!nat.home_local) {
    const int n = rng.between(1, 2);
    for (int k = 0; k < n; ++k) push(v6_router(sas, k), k == 0 ? rng.uniform(3.0, 5.0) : rng.uniform(0.3, 2.0), false);
    if (nat.via_provider || nat.is_public) {
      const int m = rng.between(1, 2);
      for (int k = 0; k < m; ++k) push(v6_router(reg_[nat.as], k), rng.uniform(2.0, 8.0), false);
    }
  }
  if (!out.empty()) out.back().pinned = true;

  // IPv4 side, reported through the NAT64 as prefix-embedded addresses.
  auto embed = [&](const Ipv4Address& a) { return IpAddress{synthesize(nat.prefix, a)}; };
  const bool near = p.near_target && t == 0;
  if (!near) {
    const int n = rng.between(1, 2);
    for (int k = 0; k < n; ++k) {
      const double step = nat.home_local && k == 0 ? rng.uniform(0.1, 0.8) : rng.uniform(0.5, 2.0);
      push(embed(v4_router(reg_[nat.as], 100 + k)), step, true);
    }
    out[out.size() - n].pinned = true;
    // Shares the transit and target part of the IPv4 route.
    std::size_t first = 0;
    while (first < v4.size() && !(std::holds_alternative<Ipv4Address>(v4[first].addr) &&
                                  reg_[transit_[t % 2]].v4_base ==
                                      (std::get<Ipv4Address>(v4[first].addr).to_uint() & 0xffff0000u))) {
      ++first;
    }
    for (std::size_t i = first; i < v4.size(); ++i) {
      const double step = v4[i].base - (i == 0 ? 0.0 : v4[i - 1].base);
      push(embed(std::get<Ipv4Address>(v4[i].addr)), step + rng.uniform(0.0, 3.0), true);
    }
  } else {
    push(embed(g_.targets[t]), rng.uniform(0.5, 2.0), true);
  }
  out.back().target = true;
  return out;
}

TraceroutePath Generator::realize(const SimProbe& p, const std::vector<HopSpec>& script,
                                  Family family, const NatInst* nat, int t, int round,
                                  bool protect, Rng& rng) const {
  TraceroutePath path;
  path.probe_id = p.id;
  path.family = family;
  if (nat) path.prefix = as_observed(nat->prefix);
  path.target_v4 = g_.targets[t];
  path.round = round;
  path.timestamp = s_.start + static_cast<Timestamp>(round) * s_.round_interval + p.index * 10 + t;

  const bool dead = t >= s_.targets - s_.dead_targets;
  const bool opaque = nat && nat->opaque;
  // Failed paths go silent from a cut point after the NAT64's first hop.
  std::optional<std::size_t> cut;
  const bool fails = !protect && rng.chance(s_.path_failure_rate);
  if (fails) {
    std::size_t lo = 1;
    for (std::size_t i = 0; i < script.size(); ++i) {
      if (script[i].post_nat) {
        lo = i + 1;
        break;
      }
    }
    if (lo < script.size()) cut = lo + rng.below(script.size() - lo);
  }

  for (std::size_t i = 0; i < script.size(); ++i) {
    const auto& h = script[i];
    Hop hop;
    hop.index = static_cast<int>(i) + 1;
    bool answers = true;
    if (h.target && dead) answers = false;
    if (opaque && h.post_nat) answers = false;
    if (cut && i >= *cut) answers = false;
    if (answers && !h.pinned && !h.target && rng.chance(s_.silent_hop_rate)) answers = false;
    if (answers) {
      hop.address = h.addr;
      for (int k = 0; k < 3; ++k) hop.rtts_ms.push_back(round_ms(h.base * (1.0 + rng.uniform(0.0, 0.1))));
    }
    path.hops.push_back(std::move(hop));
  }
  if (!path.hops.back().address) {
    // A silent end keeps probing a few more TTLs before giving up.
    for (int k = 0; k < 3; ++k) {
      Hop hop;
      hop.index = static_cast<int>(path.hops.size()) + 1;
      path.hops.push_back(hop);
    }
  }
  return path;
}

void Generator::traceroutes() {
  auto& planted = g_.truth.planted;
  std::vector<const SimProbe*> tracing;
  for (const auto& p : probes_) {
    const auto g = g_.truth.probes.at(p.id).group;
    if ((g == DetectionGroup::Nat64PlusDns64 || g == DetectionGroup::Nat64Only) && !p.working.empty()) {
      tracing.push_back(&p);
    }
  }
  for (int t = s_.targets - s_.dead_targets; t < s_.targets; ++t) {
    planted.dead_targets.push_back(g_.targets[t]);
  }
  if (tracing.empty()) return;

  Rng plan = rng_.fork(2);
  // Incomplete (probe, round) combinations lose their last target.
  const int slots = static_cast<int>(tracing.size()) * s_.rounds;
  const int want = std::min(s_.incomplete_rounds, slots);
  while (static_cast<int>(incomplete_.size()) < want) {
    const auto* p = tracing[plan.below(tracing.size())];
    incomplete_.insert({p->index, plan.between(0, s_.rounds - 1)});
  }
  for (const auto& [idx, r] : incomplete_) planted.incomplete.emplace_back(probes_[idx].id, r);

  std::set<int> trailing;
  if (s_.trailing_round) {
    planted.trailing_round = s_.rounds;
    for (const auto* p : tracing) {
      if (p == tracing.front() || plan.chance(0.5)) trailing.insert(p->index);
    }
  }

  Rng paths_rng = rng_.fork(3);
  for (const auto* p : tracing) {
    Rng r = paths_rng.fork(static_cast<std::uint64_t>(p->index));
    const bool protect = p == tracing.front();
    if (p->near_target) ++planted.ttl_anomaly_probes;
    for (int t = 0; t < s_.targets; ++t) {
      const auto v4 = v4_script(*p, t, r);
      std::vector<std::vector<HopSpec>> nats;
      for (const auto* n : p->working) nats.push_back(nat_script(*p, *n, t, v4, r));
      const int last_round = trailing.count(p->index) ? s_.rounds : s_.rounds - 1;
      for (int round = 0; round <= last_round; ++round) {
        const bool is_incomplete = incomplete_.count({p->index, round}) > 0;
        if (is_incomplete && t == s_.targets - 1) continue;
        g_.dataset.paths.push_back(realize(*p, v4, Family::IPv4, nullptr, t, round, protect, r));
        for (std::size_t i = 0; i < nats.size(); ++i) {
          const NatInst* n = p->working[i];
          g_.dataset.paths.push_back(realize(*p, nats[i], Family::NAT64, n, t, round, protect, r));
          const bool counted_round = !s_.trailing_round || round < s_.rounds;
          const bool dead = t >= s_.targets - s_.dead_targets;
          if (n->opaque && counted_round && !is_incomplete && !dead) ++planted.no_nat_hop_pairs;
        }
      }
    }
  }
}

void Generator::tables() {
  for (std::size_t j = 0; j < reg_.size(); ++j) {
    const auto& as = reg_[static_cast<int>(j)];
    g_.ip2as.emplace_back(IpPrefix{Ipv4Address::from_uint(as.v4_base), 16}, as.asn);
    g_.ip2as.emplace_back(IpPrefix{as.v6_base, 32}, as.asn);
  }
  g_.ip2as.emplace_back(IpPrefix{Ipv4Address::must_parse("91.201.7.0"), 24},
                        reg_[target_as_[0]].asn);

  Rng cats = rng_.fork(4);
  std::set<int> listed;
  auto put = [&](int as, AsCategory c) {
    if (listed.insert(as).second) g_.as_categories.emplace_back(reg_[as].asn, c);
  };
  for (const auto& site : sites_) {
    if (cats.chance(0.1)) continue;  // left for the Unknown bucket
    switch (site.cohort->setup) {
      case Setup::Isp:
        put(site.as, cats.chance(0.5) ? AsCategory::ResidentialIsp : AsCategory::OtherIsp);
        break;
      case Setup::Home: put(site.as, AsCategory::Hobbyist); break;
      case Setup::Standalone:
        put(site.as, cats.chance(0.5) ? AsCategory::Academic : AsCategory::Other);
        break;
    }
    if (site.provider >= 0) put(site.provider, AsCategory::OtherIsp);
  }
  put(public_nat_as_, AsCategory::Other);
  put(public_dns_as_, AsCategory::Other);
  std::sort(g_.as_categories.begin(), g_.as_categories.end());
}

Generated Generator::run() {
  check_scenario(s_);
  layout();
  detection_runs();
  truth();
  traceroutes();
  tables();
  return std::move(g_);
}

nlohmann::json prefix_truth_json(const PrefixTruth& p) {
  return {{"prefix", to_json(p.prefix)},  {"nat_as", p.nat_as},
          {"opaque", p.opaque},           {"location", std::string(to_string(p.location))},
          {"local", p.local},             {"local_nat", p.local_nat}};
}

std::optional<ProbeCategory> parse_category(std::string_view s) {
  for (int i = 0; i <= static_cast<int>(ProbeCategory::Unknown); ++i) {
    const auto c = static_cast<ProbeCategory>(i);
    if (to_string(c) == s) return c;
  }
  return std::nullopt;
}

template <typename T>
T need(const std::optional<T>& v, const std::string& what) {
  if (!v) throw Error("truth: bad " + what);
  return *v;
}

std::optional<Setup> parse_setup(std::string_view s) {
  for (auto v : {Setup::Isp, Setup::Home, Setup::Standalone}) {
    if (to_string(v) == s) return v;
  }
  return std::nullopt;
}

}  // namespace

Generated generate(const Scenario& scenario) { return Generator(scenario).run(); }

nlohmann::json to_json(const GroundTruth& truth) {
  nlohmann::json probes = nlohmann::json::object();
  for (const auto& [id, t] : truth.probes) {
    nlohmann::json prefixes = nlohmann::json::array();
    for (const auto& p : t.prefixes) prefixes.push_back(prefix_truth_json(p));
    nlohmann::json cats = nlohmann::json::array();
    for (auto c : t.categories) cats.push_back(std::string(to_string(c)));
    probes[id] = {{"cohort", t.cohort},
                  {"group", std::string(to_string(t.group))},
                  {"setup", std::string(to_string(t.setup))},
                  {"public_resolver", t.public_resolver},
                  {"prefixes", prefixes},
                  {"categories", cats}};
  }
  nlohmann::json ases = nlohmann::json::object();
  for (const auto& [asn, a] : truth.ases) {
    nlohmann::json j = {{"is_isp_dns64", a.is_isp_dns64},
                        {"multiple_similar_prefixes", a.multiple_similar_prefixes}};
    if (a.resolver) j["resolver"] = to_string(*a.resolver);
    ases[std::to_string(asn)] = j;
  }
  const auto& pl = truth.planted;
  nlohmann::json incomplete = nlohmann::json::array();
  for (const auto& [id, r] : pl.incomplete) incomplete.push_back({{"probe_id", id}, {"round", r}});
  nlohmann::json dead = nlohmann::json::array();
  for (const auto& d : pl.dead_targets) dead.push_back(d.to_string());
  nlohmann::json planted = {{"no_nat_hop_pairs", pl.no_nat_hop_pairs},
                            {"dead_targets", dead},
                            {"incomplete", incomplete},
                            {"ttl_anomaly_probes", pl.ttl_anomaly_probes}};
  planted["trailing_round"] = pl.trailing_round ? nlohmann::json(*pl.trailing_round) : nlohmann::json();
  return {{"schema", "nat64scope-truth/1"},
          {"seed", truth.seed},
          {"probes", probes},
          {"ases", ases},
          {"planted", planted}};
}

GroundTruth truth_from_json(const nlohmann::json& j) {
  try {
    if (j.at("schema") != "nat64scope-truth/1") throw Error("truth: unknown schema");
    GroundTruth t;
    t.seed = j.at("seed").get<std::uint64_t>();
    for (const auto& [id, pj] : j.at("probes").items()) {
      ProbeTruth p;
      p.probe_id = id;
      p.cohort = pj.at("cohort").get<std::string>();
      p.group = need(parse_detection_group(pj.at("group").get<std::string>()), "group");
      p.setup = need(parse_setup(pj.at("setup").get<std::string>()), "setup");
      p.public_resolver = pj.at("public_resolver").get<bool>();
      for (const auto& x : pj.at("prefixes")) {
        PrefixTruth pt;
        pt.prefix = prefix_from_json(x.at("prefix"));
        pt.nat_as = x.at("nat_as").get<Asn>();
        pt.opaque = x.at("opaque").get<bool>();
        pt.location = need(parse_nat_location(x.at("location").get<std::string>()), "location");
        pt.local = x.at("local").get<bool>();
        pt.local_nat = x.at("local_nat").get<bool>();
        p.prefixes.push_back(pt);
      }
      for (const auto& c : pj.at("categories")) {
        p.categories.insert(need(parse_category(c.get<std::string>()), "category"));
      }
      t.probes[id] = std::move(p);
    }
    for (const auto& [asn, aj] : j.at("ases").items()) {
      AsTruth a;
      a.asn = static_cast<Asn>(std::stoul(asn));
      a.is_isp_dns64 = aj.at("is_isp_dns64").get<bool>();
      a.multiple_similar_prefixes = aj.at("multiple_similar_prefixes").get<bool>();
      if (aj.contains("resolver")) a.resolver = must_parse_ip(aj.at("resolver").get<std::string>());
      t.ases[a.asn] = a;
    }
    const auto& pj = j.at("planted");
    t.planted.no_nat_hop_pairs = pj.at("no_nat_hop_pairs").get<int>();
    if (!pj.at("trailing_round").is_null()) t.planted.trailing_round = pj.at("trailing_round").get<int>();
    for (const auto& d : pj.at("dead_targets")) {
      t.planted.dead_targets.push_back(Ipv4Address::must_parse(d.get<std::string>()));
    }
    for (const auto& x : pj.at("incomplete")) {
      t.planted.incomplete.emplace_back(x.at("probe_id").get<std::string>(), x.at("round").get<int>());
    }
    t.planted.ttl_anomaly_probes = pj.at("ttl_anomaly_probes").get<int>();
    return t;
  } catch (const nlohmann::json::exception& e) {
    throw Error(std::string("truth: ") + e.what());
  }
}

void write_generated(const Generated& g, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  auto open = [&](const char* name) {
    std::ofstream out(dir / name, std::ios::binary);
    if (!out) throw Error("cannot write " + (dir / name).string());
    return out;
  };
  save_dataset(dir / GeneratedFiles::dataset, g.dataset);
  {
    auto out = open(GeneratedFiles::truth);
    out << to_json(g.truth).dump(2) << "\n";
  }
  {
    auto out = open(GeneratedFiles::ip2as);
    out << "# prefix origin-asn\n";
    for (const auto& [p, asn] : g.ip2as) out << p.to_string() << " " << asn << "\n";
  }
  {
    auto out = open(GeneratedFiles::public_nat64);
    for (const auto& p : g.public_nat64) out << p << "\n";
  }
  {
    auto out = open(GeneratedFiles::public_resolvers);
    for (const auto& p : g.public_resolvers) out << p << "\n";
  }
  {
    auto out = open(GeneratedFiles::as_categories);
    for (const auto& [asn, c] : g.as_categories) out << asn << "," << to_string(c) << "\n";
  }
}

}  // namespace nat64scope::sim
