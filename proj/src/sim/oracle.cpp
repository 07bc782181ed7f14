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

#include "nat64scope/sim/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>
#include <sstream>

namespace nat64scope::sim {

namespace {

const double NaN = std::numeric_limits<double>::quiet_NaN();

// ---- bits -------------------------------------------------------------------

int get_bit(const Ipv6Address& a, int i) { return (a.bytes[i / 8] >> (7 - i % 8)) & 1; }

void put_bit(Ipv6Address& a, int i, int v) {
  if (v) a.bytes[i / 8] |= static_cast<std::uint8_t>(1 << (7 - i % 8));
}

int v4_bit(const Ipv4Address& a, int i) { return (a.octets[i / 8] >> (7 - i % 8)) & 1; }

bool same_bits(const Ipv6Address& a, const Ipv6Address& b, int n) {
  for (int i = 0; i < n; ++i) {
    if (get_bit(a, i) != get_bit(b, i)) return false;
  }
  return true;
}

/// Bit positions of the 32 embedded IPv4 bits, skipping bits 64..71.
std::vector<int> embedding_bits(int length) {
  std::vector<int> out;
  for (int i = length; static_cast<int>(out.size()) < 32; ++i) {
    if (length != 96 && i >= 64 && i < 72) continue;
    out.push_back(i);
  }
  return out;
}

Ipv6Address embed(const Nat64Prefix& p, const Ipv4Address& v4) {
  Ipv6Address a;
  for (int i = 0; i < p.length; ++i) put_bit(a, i, get_bit(p.base, i));
  const auto pos = embedding_bits(p.length);
  for (int i = 0; i < 32; ++i) put_bit(a, pos[i], v4_bit(v4, i));
  return a;
}

Ipv4Address unembed(const Nat64Prefix& p, const Ipv6Address& a) {
  const auto pos = embedding_bits(p.length);
  std::uint32_t x = 0;
  for (int i = 0; i < 32; ++i) x = (x << 1) | static_cast<std::uint32_t>(get_bit(a, pos[i]));
  return Ipv4Address::from_uint(x);
}

bool in_prefix(const IpAddress& a, const Nat64Prefix& p) {
  const auto* v6 = std::get_if<Ipv6Address>(&a);
  return v6 && same_bits(*v6, p.base, p.length);
}

// ---- ip2as ------------------------------------------------------------------

std::optional<Asn> lpm(const std::vector<std::pair<IpPrefix, Asn>>& table, const IpAddress& a) {
  int best_len = -1;
  Asn best = 0;
  for (const auto& [pfx, asn] : table) {
    bool hit = false;
    if (is_v4(a) && is_v4(pfx.base)) {
      const auto& x = std::get<Ipv4Address>(a);
      const auto& y = std::get<Ipv4Address>(pfx.base);
      hit = true;
      for (int i = 0; i < pfx.length; ++i) hit = hit && v4_bit(x, i) == v4_bit(y, i);
    } else if (!is_v4(a) && !is_v4(pfx.base)) {
      hit = same_bits(std::get<Ipv6Address>(a), std::get<Ipv6Address>(pfx.base), pfx.length);
    }
    if (!hit) continue;
    if (pfx.length > best_len || (pfx.length == best_len && asn < best)) {
      best_len = pfx.length;
      best = asn;
    }
  }
  if (best_len < 0) return std::nullopt;
  return best;
}

// ---- per path ---------------------------------------------------------------

/// 1-based TTL of the first hop answering from the target, or 0.
int reach_ttl(const TraceroutePath& p) {
  const IpAddress want = p.family == Family::NAT64 ? IpAddress{embed(*p.prefix, p.target_v4)}
                                                   : IpAddress{p.target_v4};
  for (std::size_t i = 0; i < p.hops.size(); ++i) {
    if (p.hops[i].address == want) return p.hops[i].index;
  }
  return 0;
}

double hop_rtt(const TraceroutePath& p, int ttl) {
  const auto& r = p.hops[ttl - 1].rtts_ms;
  double sum = 0;
  for (double x : r) sum += x;
  return sum / static_cast<double>(r.size());
}

double missing_pct(const TraceroutePath& p, int ttl) {
  int silent = 0;
  for (int i = 0; i < ttl; ++i) silent += p.hops[i].address ? 0 : 1;
  return 100.0 * silent / ttl;
}

std::optional<bool> reaches_as(const TraceroutePath& p, const OracleContext& ctx) {
  if (ctx.ip2as.empty()) return std::nullopt;
  const auto target_as = lpm(ctx.ip2as, p.target_v4);
  if (!target_as) return std::nullopt;
  for (const auto& h : p.hops) {
    if (!h.address) continue;
    std::optional<Asn> asn;
    if (p.family == Family::NAT64 && in_prefix(*h.address, *p.prefix)) {
      asn = lpm(ctx.ip2as, unembed(*p.prefix, std::get<Ipv6Address>(*h.address)));
    } else {
      asn = lpm(ctx.ip2as, *h.address);
    }
    if (asn == target_as) return true;
  }
  return false;
}

// ---- summaries ----------------------------------------------------------------

void put_summary(FlatStats& f, const std::string& key, std::vector<double> xs) {
  const std::size_t n = xs.size();
  f[key + ".n"] = static_cast<double>(n);
  if (n == 0) {
    f[key + ".mean"] = f[key + ".sd"] = f[key + ".median"] = NaN;
    return;
  }
  long double sum = 0;
  for (double x : xs) sum += x;
  const long double mean = sum / n;
  f[key + ".mean"] = static_cast<double>(mean);
  if (n < 2) {
    f[key + ".sd"] = NaN;
  } else {
    long double ss = 0;
    for (double x : xs) ss += (x - mean) * (x - mean);
    f[key + ".sd"] = static_cast<double>(std::sqrt(ss / (n - 1)));
  }
  std::sort(xs.begin(), xs.end());
  f[key + ".median"] = n % 2 ? xs[n / 2] : (xs[n / 2 - 1] + xs[n / 2]) / 2.0;
}

double percent(double num, double den) { return den == 0 ? NaN : 100.0 * num / den; }

double mean_of(const std::vector<double>& xs) {
  if (xs.empty()) return NaN;
  long double s = 0;
  for (double x : xs) s += x;
  return static_cast<double>(s / xs.size());
}

double correlation(const std::vector<double>& x, const std::vector<double>& y) {
  const std::size_t n = x.size();
  if (n < 2) return NaN;
  const long double mx = mean_of(x), my = mean_of(y);
  long double sxy = 0, sxx = 0, syy = 0;
  for (std::size_t i = 0; i < n; ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
    syy += (y[i] - my) * (y[i] - my);
  }
  if (sxx == 0 || syy == 0) return NaN;
  const double r = static_cast<double>(sxy / std::sqrt(sxx * syy));
  return r > 1 ? 1 : r < -1 ? -1 : r;
}

struct Row {
  const TraceroutePath* v4 = nullptr;
  const TraceroutePath* nat = nullptr;
  int v4_ttl = 0, nat_ttl = 0;
  std::optional<bool> v4_as, nat_as;
};

struct Tally {
  double pairs = 0, v4_ok = 0, nat_ok = 0, v4_reach = 0, nat_reach = 0;
  bool reach_known = true;
  std::vector<double> len_diff, rtt_diff;
};

}  // namespace

OracleContext oracle_context(const Generated& g, bool drop_final_round, bool exclude_ttl_anomaly) {
  OracleContext ctx;
  for (const auto& [id, t] : g.truth.probes) {
    ctx.group[id] = std::string(to_string(t.group));
    for (const auto& p : t.prefixes) {
      if (!p.opaque) ctx.local[{id, p.prefix.to_string()}] = p.local;
    }
  }
  ctx.ip2as = g.ip2as;
  ctx.drop_final_round = drop_final_round;
  ctx.exclude_ttl_anomaly = exclude_ttl_anomaly;
  return ctx;
}

FlatStats oracle_stats(const DatasetFile& ds, const OracleContext& ctx) {
  // Pairing: first IPv4 path per (probe, target, round) joined with the
  // first NAT64 path per prefix under the same key.
  std::map<std::string, const TraceroutePath*> v4_first;
  std::map<std::string, std::map<std::string, const TraceroutePath*>> nat_first;
  for (const auto& p : ds.paths) {
    const std::string key = p.probe_id + "|" + p.target_v4.to_string() + "|" + std::to_string(p.round);
    if (p.family == Family::IPv4) {
      v4_first.emplace(key, &p);
    } else if (p.prefix) {
      nat_first[key].emplace(p.prefix->to_string() + "|" + std::string(to_string(p.prefix->kind)), &p);
    }
  }
  std::vector<Row> rows;
  for (const auto& [key, v4] : v4_first) {
    auto it = nat_first.find(key);
    if (it == nat_first.end()) continue;
    for (const auto& [pk, nat] : it->second) {
      Row r;
      r.v4 = v4;
      r.nat = nat;
      r.v4_ttl = reach_ttl(*v4);
      r.nat_ttl = reach_ttl(*nat);
      rows.push_back(r);
    }
  }

  // Filters.
  int last_round = -1;
  std::set<std::string> all_targets, answered;
  std::map<std::string, std::set<std::string>> covered;
  for (const auto& r : rows) {
    last_round = std::max(last_round, r.v4->round);
    const auto t = r.v4->target_v4.to_string();
    all_targets.insert(t);
    covered[r.v4->probe_id + "|" + std::to_string(r.v4->round)].insert(t);
    if (r.v4_ttl || r.nat_ttl) answered.insert(t);
  }
  std::vector<Row> kept;
  for (const auto& r : rows) {
    if (ctx.drop_final_round && r.v4->round == last_round) continue;
    if (covered[r.v4->probe_id + "|" + std::to_string(r.v4->round)] != all_targets) continue;
    if (!answered.count(r.v4->target_v4.to_string())) continue;
    bool nat_hop = false;
    for (const auto& h : r.nat->hops) nat_hop = nat_hop || (h.address && in_prefix(*h.address, *r.nat->prefix));
    if (!nat_hop) continue;
    if (ctx.exclude_ttl_anomaly && ((r.v4_ttl && r.v4_ttl <= 3) || (r.nat_ttl && r.nat_ttl <= 3))) continue;
    kept.push_back(r);
  }

  std::map<ProbeId, Asn> asn_v6;
  for (const auto& p : ds.probes) {
    if (p.asn_v6) asn_v6[p.probe_id] = *p.asn_v6;
  }

  FlatStats f;
  double v4_ok = 0, nat_ok = 0, v4_fail_known = 0, v4_fail_reach = 0, nat_fail_known = 0,
         nat_fail_reach = 0, anomalies = 0;
  std::vector<double> v4_len, nat_len, len_diff, len_pct, v4_rtt, nat_rtt, rtt_diff, rtt_pct,
      v4_miss, nat_miss;
  std::vector<double> v4_hist(10, 0), nat_hist(10, 0);
  std::map<std::string, Tally> groups, locations, prefixes, targets;

  for (auto& r : kept) {
    r.v4_as = reaches_as(*r.v4, ctx);
    r.nat_as = reaches_as(*r.nat, ctx);
    const bool a = r.v4_ttl > 0, b = r.nat_ttl > 0;
    v4_ok += a;
    nat_ok += b;
    if (!a && r.v4_as) {
      v4_fail_known += 1;
      v4_fail_reach += *r.v4_as;
    }
    if (!b && r.nat_as) {
      nat_fail_known += 1;
      nat_fail_reach += *r.nat_as;
    }
    double dl = 0, dr = 0;
    if (a && b) {
      const double l4 = r.v4_ttl, l6 = r.nat_ttl;
      const double t4 = hop_rtt(*r.v4, r.v4_ttl), t6 = hop_rtt(*r.nat, r.nat_ttl);
      const double m4 = missing_pct(*r.v4, r.v4_ttl), m6 = missing_pct(*r.nat, r.nat_ttl);
      dl = l6 - l4;
      dr = t6 - t4;
      v4_len.push_back(l4);
      nat_len.push_back(l6);
      len_diff.push_back(dl);
      rtt_diff.push_back(dr);
      v4_rtt.push_back(t4);
      nat_rtt.push_back(t6);
      len_pct.push_back(100.0 * dl / l4);
      if (t4 != 0) rtt_pct.push_back(100.0 * dr / t4);
      v4_miss.push_back(m4);
      nat_miss.push_back(m6);
      v4_hist[std::min(9, static_cast<int>(m4 / 10))] += 1;
      nat_hist[std::min(9, static_cast<int>(m6 / 10))] += 1;
      if (l4 <= 3 || l6 <= 3) anomalies += 1;
    }

    auto tally = [&](Tally& t) {
      t.pairs += 1;
      t.v4_ok += a;
      t.nat_ok += b;
      if (r.v4_as && r.nat_as) {
        t.v4_reach += a || *r.v4_as;
        t.nat_reach += b || *r.nat_as;
      } else {
        t.reach_known = false;
      }
      if (a && b) {
        t.len_diff.push_back(dl);
        t.rtt_diff.push_back(dr);
      }
    };
    const auto& id = r.v4->probe_id;
    const std::string ptext = r.nat->prefix->to_string();
    if (ctx.group.count(id)) tally(groups[ctx.group.at(id)]);
    if (auto l = ctx.local.find({id, ptext}); l != ctx.local.end()) {
      tally(locations[l->second ? "local" : "remote"]);
    }
    tally(prefixes[ptext + " AS" + (asn_v6.count(id) ? std::to_string(asn_v6[id]) : "?")]);
    tally(targets[r.v4->target_v4.to_string()]);
  }

  const double n = static_cast<double>(kept.size());
  f["pairs"] = n;
  f["successful_pairs"] = static_cast<double>(v4_len.size());
  f["v4_success_pct"] = percent(v4_ok, n);
  f["nat_success_pct"] = percent(nat_ok, n);
  f["both_success_pct"] = percent(static_cast<double>(v4_len.size()), n);
  f["v4_failed_reached_as_pct"] = percent(v4_fail_reach, v4_fail_known);
  f["nat_failed_reached_as_pct"] = percent(nat_fail_reach, nat_fail_known);
  put_summary(f, "v4_len", v4_len);
  put_summary(f, "nat_len", nat_len);
  put_summary(f, "len_diff", len_diff);
  put_summary(f, "len_pct", len_pct);
  put_summary(f, "v4_rtt", v4_rtt);
  put_summary(f, "nat_rtt", nat_rtt);
  put_summary(f, "rtt_diff", rtt_diff);
  put_summary(f, "rtt_pct", rtt_pct);
  put_summary(f, "v4_missing", v4_miss);
  put_summary(f, "nat_missing", nat_miss);
  f["len_pct_of_means"] = 100.0 * (mean_of(nat_len) - mean_of(v4_len)) / mean_of(v4_len);
  f["rtt_pct_of_means"] = 100.0 * (mean_of(nat_rtt) - mean_of(v4_rtt)) / mean_of(v4_rtt);
  f["pearson_len_rtt"] = correlation(len_diff, rtt_diff);
  f["ttl_anomaly_pairs"] = anomalies;

  auto put_group = [&](const std::string& key, const Tally& t) {
    f[key + ".pairs"] = t.pairs;
    f[key + ".successful_pairs"] = static_cast<double>(t.len_diff.size());
    f[key + ".v4_success_pct"] = percent(t.v4_ok, t.pairs);
    f[key + ".nat_success_pct"] = percent(t.nat_ok, t.pairs);
    put_summary(f, key + ".len_diff", t.len_diff);
    put_summary(f, key + ".rtt_diff", t.rtt_diff);
  };
  for (const auto& [k, t] : groups) put_group("group." + k, t);
  for (const auto& [k, t] : locations) put_group("location." + k, t);
  for (const auto& [k, t] : prefixes) put_group("prefix." + k, t);
  for (const auto& [k, t] : targets) {
    f["target." + k + ".pairs"] = t.pairs;
    f["target." + k + ".v4_success_pct"] = percent(t.v4_ok, t.pairs);
    f["target." + k + ".nat_success_pct"] = percent(t.nat_ok, t.pairs);
    f["target." + k + ".v4_reached_as_pct"] = t.reach_known ? percent(t.v4_reach, t.pairs) : NaN;
    f["target." + k + ".nat_reached_as_pct"] = t.reach_known ? percent(t.nat_reach, t.pairs) : NaN;
  }
  for (int i = 0; i < 10; ++i) {
    f["missing_hist.v4." + std::to_string(i)] = v4_hist[i];
    f["missing_hist.nat." + std::to_string(i)] = nat_hist[i];
  }
  return f;
}

std::vector<std::string> compare_stats(const FlatStats& a, const FlatStats& b, double rel_tol) {
  std::vector<std::string> out;
  for (const auto& [k, x] : a) {
    auto it = b.find(k);
    if (it == b.end()) {
      out.push_back(k + ": only in first");
      continue;
    }
    const double y = it->second;
    if (std::isnan(x) && std::isnan(y)) continue;
    const double scale = std::max(std::fabs(x), std::fabs(y));
    if (std::isnan(x) || std::isnan(y) || std::fabs(x - y) > rel_tol * scale) {
      std::ostringstream m;
      m.precision(17);
      m << k << ": " << x << " vs " << y;
      out.push_back(m.str());
    }
  }
  for (const auto& [k, y] : b) {
    if (!a.count(k)) out.push_back(k + ": only in second");
  }
  return out;
}

}  // namespace nat64scope::sim
