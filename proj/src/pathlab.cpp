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

#include "nat64scope/pathlab.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <set>
#include <tuple>

#include "nat64scope/addrsynth.hpp"

namespace nat64scope {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

using PairKey = std::tuple<ProbeId, Ipv4Address, int>;

PairKey key_of(const TraceroutePath& p) { return {p.probe_id, p.target_v4, p.round}; }

double pct(std::size_t num, std::size_t den) {
  return den == 0 ? kNaN : 100.0 * static_cast<double>(num) / static_cast<double>(den);
}

double mean_rtt(const Hop& hop) {
  if (hop.rtts_ms.empty()) throw UnsuccessfulPath("target hop carries no RTT samples");
  return std::accumulate(hop.rtts_ms.begin(), hop.rtts_ms.end(), 0.0) /
         static_cast<double>(hop.rtts_ms.size());
}

const Hop& hop_at(const TraceroutePath& path, int ttl) { return path.hops.at(ttl - 1); }

}  // namespace

std::string_view to_string(ExclusionReason r) {
  switch (r) {
    case ExclusionReason::TrailingRound: return "trailing_round";
    case ExclusionReason::IncompleteRound: return "incomplete_round";
    case ExclusionReason::DeadTarget: return "dead_target";
    case ExclusionReason::NoNatHop: return "no_nat_hop";
    case ExclusionReason::TtlAnomaly: return "ttl_anomaly";
    case ExclusionReason::Custom: return "custom";
  }
  return "?";
}

std::string_view to_string(NatLocationKind k) {
  switch (k) {
    case NatLocationKind::AllEqual: return "all_equal";
    case NatLocationKind::NatInV6AS: return "nat_in_v6_as";
    case NatLocationKind::Remote: return "remote";
  }
  return "?";
}

std::optional<NatLocationKind> parse_nat_location(std::string_view s) {
  for (auto k : {NatLocationKind::AllEqual, NatLocationKind::NatInV6AS, NatLocationKind::Remote}) {
    if (to_string(k) == s) return k;
  }
  return std::nullopt;
}

PairingResult pair_paths(std::span<const TraceroutePath> paths) {
  std::map<PairKey, std::vector<const TraceroutePath*>> v4;
  std::map<PairKey, std::map<Nat64Prefix, std::vector<const TraceroutePath*>>> nat;
  PairingResult out;

  for (const auto& p : paths) {
    if (p.family == Family::IPv4) {
      v4[key_of(p)].push_back(&p);
    } else if (!p.prefix) {
      out.unpaired.push_back({p, "NAT64 path without prefix"});
    } else {
      nat[key_of(p)][*p.prefix].push_back(&p);
    }
  }

  for (auto& [key, v4_paths] : v4) {
    for (std::size_t i = 1; i < v4_paths.size(); ++i) {
      out.unpaired.push_back({*v4_paths[i], "duplicate IPv4 path"});
    }
    auto it = nat.find(key);
    if (it == nat.end()) {
      out.unpaired.push_back({*v4_paths.front(), "no NAT64 counterpart"});
      continue;
    }
    for (auto& [prefix, nat_paths] : it->second) {
      out.pairs.push_back({*v4_paths.front(), *nat_paths.front()});
      for (std::size_t i = 1; i < nat_paths.size(); ++i) {
        out.unpaired.push_back({*nat_paths[i], "duplicate NAT64 path"});
      }
    }
    nat.erase(it);
  }
  for (auto& [key, by_prefix] : nat) {
    for (auto& [prefix, nat_paths] : by_prefix) {
      for (const auto* p : nat_paths) out.unpaired.push_back({*p, "no IPv4 counterpart"});
    }
  }
  return out;
}

std::map<ExclusionReason, int> FilterResult::counts() const {
  std::map<ExclusionReason, int> c;
  for (const auto& e : excluded) ++c[e.reason];
  return c;
}

FilterResult filter_pairs(std::vector<PathPair> pairs, const FilterConfig& config) {
  std::optional<int> final_round;
  if (config.drop_final_round && !pairs.empty()) {
    final_round = std::max_element(pairs.begin(), pairs.end(), [](const auto& a, const auto& b) {
                    return a.v4_path.round < b.v4_path.round;
                  })->v4_path.round;
  }

  std::set<Ipv4Address> expected;
  if (config.expected_targets) {
    expected.insert(config.expected_targets->begin(), config.expected_targets->end());
  } else {
    for (const auto& p : pairs) expected.insert(p.v4_path.target_v4);
  }

  std::map<std::pair<ProbeId, int>, std::set<Ipv4Address>> covered;
  std::set<Ipv4Address> answered;
  for (const auto& p : pairs) {
    covered[{p.v4_path.probe_id, p.v4_path.round}].insert(p.v4_path.target_v4);
    if (success(p.v4_path) || success(p.nat64_path)) answered.insert(p.v4_path.target_v4);
  }

  FilterResult out;
  for (auto& pair : pairs) {
    const auto& v4 = pair.v4_path;
    std::optional<ExclusionReason> reason;
    std::string detail;

    if (final_round && v4.round == *final_round) {
      reason = ExclusionReason::TrailingRound;
    } else if (const auto& got = covered[{v4.probe_id, v4.round}];
               !std::includes(got.begin(), got.end(), expected.begin(), expected.end())) {
      reason = ExclusionReason::IncompleteRound;
    } else if (!answered.count(v4.target_v4)) {
      reason = ExclusionReason::DeadTarget;
    } else if (std::none_of(pair.nat64_path.hops.begin(), pair.nat64_path.hops.end(),
                            [&](const Hop& h) {
                              return h.address && matches_prefix(*h.address, pair.prefix());
                            })) {
      reason = ExclusionReason::NoNatHop;
    } else if (config.exclude_ttl_anomaly) {
      auto a = target_hop(v4, v4.target_v4, std::nullopt);
      auto b = target_hop(pair.nat64_path, v4.target_v4, pair.nat64_path.prefix);
      if ((a && *a <= config.ttl_anomaly_max_hops) || (b && *b <= config.ttl_anomaly_max_hops)) {
        reason = ExclusionReason::TtlAnomaly;
      }
    }
    if (!reason) {
      for (const auto& rule : config.extra_rules) {
        if (rule.excludes && rule.excludes(pair)) {
          reason = ExclusionReason::Custom;
          detail = rule.name;
          break;
        }
      }
    }

    if (reason) {
      out.excluded.push_back({std::move(pair), *reason, std::move(detail)});
    } else {
      out.kept.push_back(std::move(pair));
    }
  }
  return out;
}

IpAddress target_address(const TraceroutePath& path) {
  if (path.family == Family::NAT64) {
    if (!path.prefix) throw Error("NAT64 path without prefix");
    return synthesize(*path.prefix, path.target_v4);
  }
  return path.target_v4;
}

std::optional<int> target_hop(const TraceroutePath& path, const Ipv4Address& target_v4,
                              const std::optional<Nat64Prefix>& prefix) {
  const IpAddress want = prefix ? IpAddress{synthesize(*prefix, target_v4)} : IpAddress{target_v4};
  for (const auto& hop : path.hops) {
    if (hop.address && *hop.address == want) return hop.index;
  }
  return std::nullopt;
}

bool success(const TraceroutePath& path, const Ipv4Address& target_v4,
             const std::optional<Nat64Prefix>& prefix) {
  return target_hop(path, target_v4, path.family == Family::NAT64 ? prefix : std::nullopt)
      .has_value();
}

std::optional<Asn> hop_asn(const IpAddress& addr, const std::optional<Nat64Prefix>& prefix,
                           const Ip2AsTable& ip2as) {
  if (prefix && matches_prefix(addr, *prefix)) {
    return ip2as.lookup(extract(*prefix, std::get<Ipv6Address>(addr)));
  }
  return ip2as.lookup(addr);
}

bool reached_target_as(const TraceroutePath& path, Asn target_asn, const Ip2AsTable& ip2as) {
  const auto prefix = path.family == Family::NAT64 ? path.prefix : std::nullopt;
  return std::any_of(path.hops.begin(), path.hops.end(), [&](const Hop& h) {
    return h.address && hop_asn(*h.address, prefix, ip2as) == target_asn;
  });
}

double missing_hop_pct(const TraceroutePath& path, const Ipv4Address& target_v4,
                       const std::optional<Nat64Prefix>& prefix) {
  const auto k = target_hop(path, target_v4, path.family == Family::NAT64 ? prefix : std::nullopt);
  if (!k) throw UnsuccessfulPath("missing_hop_pct: target not reached");
  const auto missing = std::count_if(path.hops.begin(), path.hops.begin() + *k,
                                     [](const Hop& h) { return !h.responded(); });
  return 100.0 * static_cast<double>(missing) / static_cast<double>(*k);
}

double match_missing_runs(const TraceroutePath& tr1, const TraceroutePath& tr2) {
  const auto& a = tr1.hops;
  const auto& b = tr2.hops;
  auto appears = [&](const IpAddress& addr) {
    return std::any_of(b.begin(), b.end(), [&](const Hop& h) { return h.address == addr; });
  };
  auto repeated = [&](const IpAddress& first, std::size_t gap, const IpAddress& last) {
    for (std::size_t k = 0; k + gap + 1 < b.size(); ++k) {
      if (b[k].address != first || b[k + gap + 1].address != last) continue;
      if (std::none_of(b.begin() + k + 1, b.begin() + k + gap + 1,
                       [](const Hop& h) { return h.responded(); })) {
        return true;
      }
    }
    return false;
  };

  std::size_t considered = 0, matched = 0;
  for (std::size_t i = 0; i + 1 < a.size(); ++i) {
    if (!a[i].responded() || a[i + 1].responded()) continue;
    std::size_t j = i + 1;
    while (j < a.size() && !a[j].responded()) ++j;
    if (j == a.size()) break;  // trailing silence is not bounded
    const auto& first = *a[i].address;
    const auto& last = *a[j].address;
    if (appears(first) && appears(last)) {
      ++considered;
      if (repeated(first, j - i - 1, last)) ++matched;
    }
    i = j - 1;
  }
  if (considered == 0) throw NoRuns("no bounded missing-hop runs shared by both traceroutes");
  return static_cast<double>(matched) / static_cast<double>(considered);
}

std::optional<Asn> attribute_nat64_as(std::span<const TraceroutePath> paths,
                                      const Nat64Prefix& prefix, const Ip2AsTable& ip2as,
                                      const ProbeRecord& probe) {
  if (!prefix.same_network(Nat64Prefix::standard())) {
    if (auto origin = ip2as.lookup_covering(prefix.to_ip_prefix())) return origin;
  }

  // (ttl, asn) of the best pre-NAT hop: highest TTL, then lowest AS.
  std::optional<std::pair<int, Asn>> best;
  for (const auto& path : paths) {
    auto first_nat = std::find_if(path.hops.begin(), path.hops.end(), [&](const Hop& h) {
      return h.address && matches_prefix(*h.address, prefix);
    });
    for (auto it = std::make_reverse_iterator(first_nat); it != path.hops.rend(); ++it) {
      if (!it->responded()) continue;
      if (auto asn = ip2as.lookup(*it->address)) {
        const std::pair<int, Asn> cand{it->index, *asn};
        if (!best || cand.first > best->first ||
            (cand.first == best->first && cand.second < best->second)) {
          best = cand;
        }
      }
      break;
    }
  }
  if (best) return best->second;
  return probe.asn_v6;
}

NatLocation locate_nat64(Asn nat_as, const ProbeRecord& probe) {
  if (!probe.asn_v4 || !probe.asn_v6) {
    throw Error("locate_nat64: probe " + probe.probe_id + " lacks an IPv4 or IPv6 AS number");
  }
  if (nat_as == *probe.asn_v6 && nat_as == *probe.asn_v4) return {NatLocationKind::AllEqual, true};
  if (nat_as == *probe.asn_v6) return {NatLocationKind::NatInV6AS, true};
  return {NatLocationKind::Remote, false};
}

PathMetrics path_metrics(const PathPair& pair, int ttl_anomaly_max_hops) {
  const auto& v4 = pair.v4_path;
  const auto& nat = pair.nat64_path;
  const auto v4_len = target_hop(v4, v4.target_v4, std::nullopt);
  const auto nat_len = target_hop(nat, nat.target_v4, nat.prefix);
  if (!v4_len || !nat_len) throw UnsuccessfulPath("path_metrics: pair member did not reach target");

  PathMetrics m;
  m.v4_len = *v4_len;
  m.nat_len = *nat_len;
  m.v4_rtt_ms = mean_rtt(hop_at(v4, m.v4_len));
  m.nat_rtt_ms = mean_rtt(hop_at(nat, m.nat_len));
  m.v4_missing_pct = missing_hop_pct(v4);
  m.nat_missing_pct = missing_hop_pct(nat);
  m.len_diff = m.nat_len - m.v4_len;
  m.rtt_diff_ms = m.nat_rtt_ms - m.v4_rtt_ms;
  m.len_pct = m.v4_len == 0 ? kNaN : 100.0 * m.len_diff / m.v4_len;
  m.rtt_pct = m.v4_rtt_ms == 0.0 ? kNaN : 100.0 * m.rtt_diff_ms / m.v4_rtt_ms;
  m.ttl_anomaly = m.v4_len <= ttl_anomaly_max_hops || m.nat_len <= ttl_anomaly_max_hops;
  return m;
}

std::vector<PairAnalysis> analyze_pairs(std::span<const PathPair> pairs, const Ip2AsTable* ip2as) {
  std::vector<PairAnalysis> out;
  out.reserve(pairs.size());
  for (const auto& pair : pairs) {
    PairAnalysis a;
    a.v4_success = success(pair.v4_path);
    a.nat_success = success(pair.nat64_path);
    if (ip2as) {
      if (auto target_as = ip2as->lookup(pair.v4_path.target_v4)) {
        a.v4_reached_target_as = reached_target_as(pair.v4_path, *target_as, *ip2as);
        a.nat_reached_target_as = reached_target_as(pair.nat64_path, *target_as, *ip2as);
      }
    }
    if (a.v4_success && a.nat_success) a.metrics = path_metrics(pair);
    out.push_back(a);
  }
  return out;
}

namespace {

struct Bucket {
  std::size_t pairs = 0, v4_ok = 0, nat_ok = 0, v4_reach = 0, nat_reach = 0;
  bool reach_known = true;
  std::vector<double> len_diff, rtt_diff;

  void add(const PairAnalysis& a) {
    ++pairs;
    v4_ok += a.v4_success;
    nat_ok += a.nat_success;
    if (a.v4_reached_target_as && a.nat_reached_target_as) {
      v4_reach += a.v4_success || *a.v4_reached_target_as;
      nat_reach += a.nat_success || *a.nat_reached_target_as;
    } else {
      reach_known = false;
    }
    if (a.metrics) {
      len_diff.push_back(a.metrics->len_diff);
      rtt_diff.push_back(a.metrics->rtt_diff_ms);
    }
  }

  GroupStats group() const {
    GroupStats g;
    g.pairs = pairs;
    g.successful_pairs = len_diff.size();
    g.v4_success_pct = pct(v4_ok, pairs);
    g.nat_success_pct = pct(nat_ok, pairs);
    g.len_diff = summarize(len_diff);
    g.rtt_diff = summarize(rtt_diff);
    return g;
  }

  TargetStats target() const {
    TargetStats t;
    t.pairs = pairs;
    t.v4_success_pct = pct(v4_ok, pairs);
    t.nat_success_pct = pct(nat_ok, pairs);
    t.v4_reached_as_pct = reach_known ? pct(v4_reach, pairs) : kNaN;
    t.nat_reached_as_pct = reach_known ? pct(nat_reach, pairs) : kNaN;
    return t;
  }
};

std::size_t bin_of(double missing_pct) {
  return std::min<std::size_t>(9, static_cast<std::size_t>(missing_pct / 10.0));
}

}  // namespace

AggregateStats aggregate_report(std::span<const PathPair> pairs,
                                std::span<const PairAnalysis> analyses,
                                const Groupings& groupings) {
  if (pairs.size() != analyses.size()) throw Error("aggregate_report: pairs and analyses differ");

  AggregateStats s;
  s.pairs = pairs.size();
  std::size_t v4_ok = 0, nat_ok = 0;
  std::size_t v4_fail_known = 0, v4_fail_reach = 0, nat_fail_known = 0, nat_fail_reach = 0;
  std::vector<double> v4_len, nat_len, len_diff, len_pct, v4_rtt, nat_rtt, rtt_diff, rtt_pct,
      v4_missing, nat_missing;
  std::map<std::string, Bucket> by_group, by_location, by_prefix, by_target;

  for (std::size_t i = 0; i < pairs.size(); ++i) {
    const auto& pair = pairs[i];
    const auto& a = analyses[i];
    const auto& probe = pair.v4_path.probe_id;
    v4_ok += a.v4_success;
    nat_ok += a.nat_success;
    if (!a.v4_success && a.v4_reached_target_as) {
      ++v4_fail_known;
      v4_fail_reach += *a.v4_reached_target_as;
    }
    if (!a.nat_success && a.nat_reached_target_as) {
      ++nat_fail_known;
      nat_fail_reach += *a.nat_reached_target_as;
    }

    if (a.metrics) {
      const auto& m = *a.metrics;
      v4_len.push_back(m.v4_len);
      nat_len.push_back(m.nat_len);
      len_diff.push_back(m.len_diff);
      v4_rtt.push_back(m.v4_rtt_ms);
      nat_rtt.push_back(m.nat_rtt_ms);
      rtt_diff.push_back(m.rtt_diff_ms);
      if (std::isfinite(m.len_pct)) len_pct.push_back(m.len_pct);
      if (std::isfinite(m.rtt_pct)) rtt_pct.push_back(m.rtt_pct);
      v4_missing.push_back(m.v4_missing_pct);
      nat_missing.push_back(m.nat_missing_pct);
      ++s.v4_missing_hist[bin_of(m.v4_missing_pct)];
      ++s.nat_missing_hist[bin_of(m.nat_missing_pct)];
      s.ttl_anomaly_pairs += m.ttl_anomaly;
    }

    const std::string prefix_text = pair.prefix().to_string();
    if (auto g = groupings.group.find(probe); g != groupings.group.end()) {
      by_group[std::string(to_string(g->second))].add(a);
    }
    if (auto l = groupings.location.find({probe, prefix_text}); l != groupings.location.end()) {
      by_location[l->second.local ? "local" : "remote"].add(a);
    }
    auto as6 = groupings.probe_asn_v6.find(probe);
    by_prefix[prefix_text + " AS" +
              (as6 == groupings.probe_asn_v6.end() ? std::string("?") : std::to_string(as6->second))]
        .add(a);
    by_target[pair.v4_path.target_v4.to_string()].add(a);
  }

  s.successful_pairs = v4_len.size();
  s.v4_success_pct = pct(v4_ok, s.pairs);
  s.nat_success_pct = pct(nat_ok, s.pairs);
  s.both_success_pct = pct(s.successful_pairs, s.pairs);
  s.v4_failed_reached_as_pct = pct(v4_fail_reach, v4_fail_known);
  s.nat_failed_reached_as_pct = pct(nat_fail_reach, nat_fail_known);

  s.v4_len = summarize(v4_len);
  s.nat_len = summarize(nat_len);
  s.len_diff = summarize(len_diff);
  s.len_pct = summarize(len_pct);
  s.v4_rtt = summarize(v4_rtt);
  s.nat_rtt = summarize(nat_rtt);
  s.rtt_diff = summarize(rtt_diff);
  s.rtt_pct = summarize(rtt_pct);
  s.v4_missing = summarize(v4_missing);
  s.nat_missing = summarize(nat_missing);
  s.len_pct_of_means = 100.0 * (s.nat_len.mean - s.v4_len.mean) / s.v4_len.mean;
  s.rtt_pct_of_means = 100.0 * (s.nat_rtt.mean - s.v4_rtt.mean) / s.v4_rtt.mean;
  try {
    s.pearson_len_rtt = pearson(len_diff, rtt_diff);
  } catch (const InsufficientData&) {
  }

  for (const auto& [k, b] : by_group) s.by_group[k] = b.group();
  for (const auto& [k, b] : by_location) s.by_location[k] = b.group();
  for (const auto& [k, b] : by_prefix) s.by_prefix[k] = b.group();
  for (const auto& [k, b] : by_target) s.by_target[k] = b.target();
  return s;
}

std::map<std::string, double> flatten(const AggregateStats& s) {
  std::map<std::string, double> f;
  auto put_summary = [&](const std::string& key, const Summary& x) {
    f[key + ".n"] = static_cast<double>(x.n);
    f[key + ".mean"] = x.mean;
    f[key + ".sd"] = x.sd;
    f[key + ".median"] = x.median;
  };
  auto put_group = [&](const std::string& key, const GroupStats& g) {
    f[key + ".pairs"] = static_cast<double>(g.pairs);
    f[key + ".successful_pairs"] = static_cast<double>(g.successful_pairs);
    f[key + ".v4_success_pct"] = g.v4_success_pct;
    f[key + ".nat_success_pct"] = g.nat_success_pct;
    put_summary(key + ".len_diff", g.len_diff);
    put_summary(key + ".rtt_diff", g.rtt_diff);
  };

  f["pairs"] = static_cast<double>(s.pairs);
  f["successful_pairs"] = static_cast<double>(s.successful_pairs);
  f["v4_success_pct"] = s.v4_success_pct;
  f["nat_success_pct"] = s.nat_success_pct;
  f["both_success_pct"] = s.both_success_pct;
  f["v4_failed_reached_as_pct"] = s.v4_failed_reached_as_pct;
  f["nat_failed_reached_as_pct"] = s.nat_failed_reached_as_pct;
  put_summary("v4_len", s.v4_len);
  put_summary("nat_len", s.nat_len);
  put_summary("len_diff", s.len_diff);
  put_summary("len_pct", s.len_pct);
  put_summary("v4_rtt", s.v4_rtt);
  put_summary("nat_rtt", s.nat_rtt);
  put_summary("rtt_diff", s.rtt_diff);
  put_summary("rtt_pct", s.rtt_pct);
  put_summary("v4_missing", s.v4_missing);
  put_summary("nat_missing", s.nat_missing);
  f["len_pct_of_means"] = s.len_pct_of_means;
  f["rtt_pct_of_means"] = s.rtt_pct_of_means;
  f["pearson_len_rtt"] = s.pearson_len_rtt.value_or(kNaN);
  f["ttl_anomaly_pairs"] = static_cast<double>(s.ttl_anomaly_pairs);
  for (const auto& [k, g] : s.by_group) put_group("group." + k, g);
  for (const auto& [k, g] : s.by_location) put_group("location." + k, g);
  for (const auto& [k, g] : s.by_prefix) put_group("prefix." + k, g);
  for (const auto& [k, t] : s.by_target) {
    f["target." + k + ".pairs"] = static_cast<double>(t.pairs);
    f["target." + k + ".v4_success_pct"] = t.v4_success_pct;
    f["target." + k + ".nat_success_pct"] = t.nat_success_pct;
    f["target." + k + ".v4_reached_as_pct"] = t.v4_reached_as_pct;
    f["target." + k + ".nat_reached_as_pct"] = t.nat_reached_as_pct;
  }
  for (std::size_t i = 0; i < s.v4_missing_hist.size(); ++i) {
    f["missing_hist.v4." + std::to_string(i)] = static_cast<double>(s.v4_missing_hist[i]);
    f["missing_hist.nat." + std::to_string(i)] = static_cast<double>(s.nat_missing_hist[i]);
  }
  return f;
}

PathsReport analyze_paths(std::span<const TraceroutePath> paths, const FilterConfig& config,
                          const Ip2AsTable* ip2as, const Groupings& groupings) {
  PathsReport r;
  r.pairing = pair_paths(paths);
  r.filtered = filter_pairs(r.pairing.pairs, config);
  r.analyses = analyze_pairs(r.filtered.kept, ip2as);
  r.stats = aggregate_report(r.filtered.kept, r.analyses, groupings);
  return r;
}

}  // namespace nat64scope
