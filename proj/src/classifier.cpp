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

#include "nat64scope/classifier.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <fstream>
#include <limits>

#include "nat64scope/acquire/lists.hpp"
#include "nat64scope/addrsynth.hpp"

namespace nat64scope {

namespace {

constexpr std::array<std::pair<AsCategory, std::string_view>, 6> kAsCategories{{
    {AsCategory::OtherIsp, "other_isp"},
    {AsCategory::ResidentialIsp, "residential_isp"},
    {AsCategory::Hobbyist, "hobbyist"},
    {AsCategory::Academic, "academic"},
    {AsCategory::Other, "other"},
    {AsCategory::Unknown, "unknown"},
}};

double median_of(std::vector<double> xs) {
  std::sort(xs.begin(), xs.end());
  const auto n = xs.size();
  return n % 2 ? xs[n / 2] : (xs[n / 2 - 1] + xs[n / 2]) / 2.0;
}

}  // namespace

std::string_view to_string(AsCategory c) {
  for (const auto& [v, n] : kAsCategories) {
    if (v == c) return n;
  }
  return "?";
}

std::optional<AsCategory> parse_as_category(std::string_view s) {
  for (const auto& [v, n] : kAsCategories) {
    if (n == s) return v;
  }
  return std::nullopt;
}

AsCategory AsCategoryMap::category(Asn asn) const {
  auto it = map_.find(asn);
  return it == map_.end() ? AsCategory::Unknown : it->second;
}

AsCategoryMap AsCategoryMap::parse(std::istream& in) {
  AsCategoryMap m;
  for (const auto& line : read_list_lines(in)) {
    const auto comma = line.text.find(',');
    auto bad = [&] {
      return ListFormatError("as-category line " + std::to_string(line.number) +
                             ": expected `asn,category`");
    };
    if (comma == std::string::npos) throw bad();
    std::string_view asn_text(line.text.data(), comma);
    std::string_view cat_text(line.text.data() + comma + 1, line.text.size() - comma - 1);
    while (!cat_text.empty() && cat_text.front() == ' ') cat_text.remove_prefix(1);
    if (asn_text.starts_with("AS") || asn_text.starts_with("as")) asn_text.remove_prefix(2);
    Asn asn = 0;
    auto [ptr, ec] = std::from_chars(asn_text.data(), asn_text.data() + asn_text.size(), asn);
    auto cat = parse_as_category(cat_text);
    if (ec != std::errc{} || ptr != asn_text.data() + asn_text.size() || !cat) throw bad();
    m.set(asn, *cat);
  }
  return m;
}

AsCategoryMap AsCategoryMap::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ListFormatError("cannot open AS category file " + path.string());
  return parse(in);
}

std::map<Asn, IspEvidence> detect_isp_dns64(std::span<const ProbeRecord> probes,
                                            std::span<const TestRun> dns_runs) {
  std::map<ProbeId, const ProbeRecord*> by_id;
  for (const auto& p : probes) by_id[p.probe_id] = &p;

  struct AsData {
    std::set<ProbeId> tested;
    std::map<IpAddress, std::set<ProbeId>> witnesses;
    std::set<Nat64Prefix> prefixes;
  };
  std::map<Asn, AsData> per_as;
  for (const auto& run : dns_runs) {
    if (!is_dns_test(run.kind)) continue;
    auto it = by_id.find(run.probe_id);
    if (it == by_id.end() || !it->second->asn_v6) continue;
    auto& d = per_as[*it->second->asn_v6];
    d.tested.insert(run.probe_id);
    if (run.outcome != RawOutcome::Pass || !run.resolver_used) continue;
    d.witnesses[*run.resolver_used].insert(run.probe_id);
    if (run.observed_prefix) d.prefixes.insert(*run.observed_prefix);
  }

  std::map<Asn, IspEvidence> out;
  for (const auto& [asn, d] : per_as) {
    IspEvidence ev;
    ev.asn = asn;
    ev.probes_tested = d.tested.size();

    // Best resolver: ISP evidence first, then witness count, then address.
    std::size_t best_count = 0;
    for (const auto& [resolver, ids] : d.witnesses) {
      std::set<IpPrefix> networks;
      std::size_t unknown = 0;
      for (const auto& id : ids) {
        const auto& net = by_id[id]->network_prefix_v6;
        if (net) {
          networks.insert(*net);
        } else {
          ++unknown;
        }
      }
      const bool isp = ids.size() >= 2 && networks.size() + unknown >= 2;
      if ((isp && !ev.is_isp_dns64) || (isp == ev.is_isp_dns64 && ids.size() > best_count)) {
        ev.is_isp_dns64 = isp;
        ev.resolver = resolver;
        ev.witnesses.assign(ids.begin(), ids.end());
        best_count = ids.size();
      }
    }

    for (auto a = d.prefixes.begin(); a != d.prefixes.end() && !ev.multiple_similar_prefixes_per_as;
         ++a) {
      for (auto b = std::next(a); b != d.prefixes.end(); ++b) {
        if (!a->same_network(*b) && a->base.same_prefix(b->base, 48)) {
          ev.multiple_similar_prefixes_per_as = true;
          break;
        }
      }
    }
    out[asn] = std::move(ev);
  }
  return out;
}

double nat_hop_rtt(std::span<const TraceroutePath> nat_paths, const Nat64Prefix& prefix) {
  double best = std::numeric_limits<double>::infinity();
  bool found = false;
  for (const auto& path : nat_paths) {
    auto hop = std::find_if(path.hops.begin(), path.hops.end(), [&](const Hop& h) {
      return h.address && matches_prefix(*h.address, prefix);
    });
    if (hop == path.hops.end() || hop->rtts_ms.empty()) continue;
    found = true;
    best = std::min(best, median_of(hop->rtts_ms));
  }
  if (!found) throw NoNatHop("no traceroute has a responding hop in " + prefix.to_string());
  return best;
}

bool detect_local_nat64(std::span<const TraceroutePath> nat_paths, const Nat64Prefix& prefix,
                        double threshold_ms) {
  return nat_hop_rtt(nat_paths, prefix) < threshold_ms;
}

std::string_view to_string(ProbeCategory c) {
  switch (c) {
    case ProbeCategory::IspDns64: return "isp_dns64";
    case ProbeCategory::AsWithDns64: return "as_with_dns64";
    case ProbeCategory::HomeSetup: return "home_setup";
    case ProbeCategory::PublicResolverOnly: return "public_resolver_only";
    case ProbeCategory::PublicService: return "public_service";
    case ProbeCategory::RemoteNat64: return "remote_nat64";
    case ProbeCategory::NoTracerouteThroughNat: return "no_traceroute_through_nat";
    case ProbeCategory::Unknown: return "unknown";
  }
  return "?";
}

std::set<ProbeCategory> categorize_probe(const CategoryInputs& in) {
  std::set<ProbeCategory> out;
  if (in.isp && in.isp->is_isp_dns64) {
    out.insert(ProbeCategory::AsWithDns64);
    if (in.isp->resolver && std::find(in.resolvers_used.begin(), in.resolvers_used.end(),
                                      *in.isp->resolver) != in.resolvers_used.end()) {
      out.insert(ProbeCategory::IspDns64);
    }
  }
  if (in.home_setup) out.insert(ProbeCategory::HomeSetup);

  const bool all_public =
      in.public_resolvers && !in.resolvers_used.empty() &&
      std::all_of(in.resolvers_used.begin(), in.resolvers_used.end(),
                  [&](const IpAddress& r) { return in.public_resolvers->contains(r); });
  if (all_public && in.group == DetectionGroup::Nat64Only) {
    out.insert(ProbeCategory::PublicResolverOnly);
  }
  if (in.group == DetectionGroup::Nat64PlusDns64 && in.flags.dns1_public_prefix) {
    out.insert(ProbeCategory::PublicService);
  }
  if (std::any_of(in.nat_locations.begin(), in.nat_locations.end(),
                  [](const NatLocation& l) { return !l.local; })) {
    out.insert(ProbeCategory::RemoteNat64);
  }
  if (in.any_ping_passed && in.traceroute == TracerouteUsability::NoNatHop) {
    out.insert(ProbeCategory::NoTracerouteThroughNat);
  }
  if (out.empty()) out.insert(ProbeCategory::Unknown);
  return out;
}

ClassificationReport classify_all(const DetectionReport& detection, const ClassifyContext& ctx) {
  ClassificationReport out;
  out.evidence = detect_isp_dns64(ctx.probes, ctx.runs);
  for (const auto& [asn, ev] : out.evidence) {
    if (ev.probes_tested < 2 && !ev.witnesses.empty()) {
      out.warnings.push_back("AS" + std::to_string(asn) +
                             ": only one probe ran DNS tests; ISP DNS64 cannot be established");
    }
  }

  std::map<ProbeId, const ProbeRecord*> by_id;
  for (const auto& p : ctx.probes) by_id[p.probe_id] = &p;
  std::map<ProbeId, std::vector<const TraceroutePath*>> nat_paths;
  for (const auto& path : ctx.paths) {
    if (path.family == Family::NAT64 && path.prefix) nat_paths[path.probe_id].push_back(&path);
  }
  const Ip2AsTable empty_table;
  const Ip2AsTable& ip2as = ctx.ip2as ? *ctx.ip2as : empty_table;

  std::map<AsCategory, std::set<Asn>> as_members;
  for (const auto& det : detection.probes) {
    const auto group = det.assignment.group;
    if (group != DetectionGroup::Nat64PlusDns64 && group != DetectionGroup::Nat64Only) continue;
    auto pit = by_id.find(det.probe_id);
    const ProbeRecord fallback{det.probe_id, {}, {}, {}, {}, {}, {}};
    const ProbeRecord& probe = pit == by_id.end() ? fallback : *pit->second;

    ProbeClassification pc;
    pc.probe_id = det.probe_id;
    pc.group = group;
    pc.asn_v6 = probe.asn_v6;
    if (pc.asn_v6 && ctx.as_categories) pc.as_category = ctx.as_categories->category(*pc.asn_v6);

    CategoryInputs in;
    in.group = group;
    in.flags = det.assignment.flags;
    if (pc.asn_v6) {
      if (auto e = out.evidence.find(*pc.asn_v6); e != out.evidence.end()) in.isp = &e->second;
    }
    in.resolvers_used = det.inputs.resolvers_used;
    in.public_resolvers = ctx.public_resolvers;
    in.any_ping_passed = !det.working_prefixes.empty();
    in.home_setup = probe.has_annotation("home_setup");

    bool any_usable = false;
    bool any_opaque = false;
    for (const auto& prefix : det.working_prefixes) {
      PrefixPlacement pl;
      pl.prefix = prefix;
      std::vector<TraceroutePath> mine;
      for (const auto* path : nat_paths[det.probe_id]) {
        if (path->prefix->same_network(prefix)) mine.push_back(*path);
      }
      if (!mine.empty()) {
        try {
          pl.nat_hop_rtt_ms = nat_hop_rtt(mine, prefix);
          pl.local_nat = *pl.nat_hop_rtt_ms < ctx.local_threshold_ms;
          pl.traceroute = TracerouteUsability::Usable;
          any_usable = true;
          pl.nat_as = attribute_nat64_as(mine, prefix, ip2as, probe);
          if (pl.nat_as && probe.asn_v4 && probe.asn_v6) {
            pl.location = locate_nat64(*pl.nat_as, probe);
            in.nat_locations.push_back(*pl.location);
          }
        } catch (const NoNatHop&) {
          pl.traceroute = TracerouteUsability::NoNatHop;
          any_opaque = true;
        }
      }
      pc.prefixes.push_back(std::move(pl));
    }
    in.traceroute = any_usable   ? TracerouteUsability::Usable
                    : any_opaque ? TracerouteUsability::NoNatHop
                                 : TracerouteUsability::NotMeasured;
    pc.categories = categorize_probe(in);

    for (auto c : pc.categories) ++out.category_counts[c];
    ++out.as_table[pc.as_category].probes;
    if (pc.asn_v6) as_members[pc.as_category].insert(*pc.asn_v6);
    out.probes.push_back(std::move(pc));
  }
  for (const auto& [cat, ases] : as_members) out.as_table[cat].ases = static_cast<int>(ases.size());
  std::sort(out.probes.begin(), out.probes.end(),
            [](const auto& a, const auto& b) { return a.probe_id < b.probe_id; });
  return out;
}

Groupings make_groupings(const DetectionReport& detection, const ClassificationReport& classes,
                         std::span<const ProbeRecord> probes) {
  Groupings g;
  for (const auto& d : detection.probes) g.group[d.probe_id] = d.assignment.group;
  for (const auto& pc : classes.probes) {
    for (const auto& pl : pc.prefixes) {
      if (pl.location) g.location[{pc.probe_id, pl.prefix.to_string()}] = *pl.location;
    }
  }
  for (const auto& p : probes) {
    if (p.asn_v6) g.probe_asn_v6[p.probe_id] = *p.asn_v6;
  }
  return g;
}

}  // namespace nat64scope
