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

#include "nat64scope/report.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "nat64scope/acquire/dataset.hpp"

namespace nat64scope {

using nlohmann::json;

namespace {

// Fields here never contain quotes; commas and spaces inside lists use ';'.
std::string join(const std::vector<std::string>& xs, char sep = ';') {
  std::string out;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    if (i) out += sep;
    out += xs[i];
  }
  return out;
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + '"';
}

json verdict_json(const Verdict& v) {
  return {{"value", std::string(to_string(v.value))}, {"runs", v.supporting_runs}};
}

Verdict verdict_from(const json& j) {
  auto v = parse_verdict_value(j.at("value").get<std::string>());
  if (!v) throw Error("bad verdict value");
  return {*v, j.at("runs").get<int>()};
}

json flags_json(const GroupFlags& f) {
  return {{"uses_public_resolver", f.uses_public_resolver},
          {"likely_accidental", f.likely_accidental},
          {"rfc8880_style", f.rfc8880_style},
          {"public_nat64_only", f.public_nat64_only},
          {"dns1_public_prefix", f.dns1_public_prefix}};
}

std::vector<std::string> flag_names(const GroupFlags& f) {
  std::vector<std::string> out;
  if (f.uses_public_resolver) out.emplace_back("uses_public_resolver");
  if (f.likely_accidental) out.emplace_back("likely_accidental");
  if (f.rfc8880_style) out.emplace_back("rfc8880_style");
  if (f.public_nat64_only) out.emplace_back("public_nat64_only");
  if (f.dns1_public_prefix) out.emplace_back("dns1_public_prefix");
  return out;
}

std::string verdict_cell(const std::optional<Verdict>& v) {
  return v ? std::string(to_string(v->value)) : std::string();
}

constexpr TestKind kAllTests[] = {TestKind::DnsTest1, TestKind::DnsTest2, TestKind::StdPrefixPing,
                                  TestKind::CustomPrefixPing};
constexpr DetectionGroup kAllGroups[] = {
    DetectionGroup::Nat64PlusDns64, DetectionGroup::Nat64Only,
    DetectionGroup::Dns64MisconfiguredOnly, DetectionGroup::NoNat64,
    DetectionGroup::Inconclusive};

std::string categories_cell(const std::set<ProbeCategory>& cats) {
  std::vector<std::string> names;
  for (auto c : cats) names.emplace_back(to_string(c));
  return join(names);
}

json path_key_json(const PathPair& p) {
  return {{"probe_id", p.v4_path.probe_id},
          {"target", p.v4_path.target_v4.to_string()},
          {"round", p.v4_path.round},
          {"prefix", p.prefix().to_string()}};
}

}  // namespace

std::string format_number(double v) {
  if (std::isnan(v)) return "";
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return ec == std::errc{} ? std::string(buf, ptr) : std::string();
}

// ---- detection ----------------------------------------------------------------

json detection_json(const DetectionReport& report) {
  json table = json::object();
  for (auto k : kAllTests) {
    VerdictCounts c;
    if (auto it = report.table.find(k); it != report.table.end()) c = it->second;
    table[std::string(to_string(k))] = {{"failed", c.failed},
                                        {"passed", c.passed},
                                        {"inconclusive", c.inconclusive},
                                        {"total", c.total()}};
  }
  json groups = json::object();
  for (auto g : kAllGroups) {
    auto it = report.group_counts.find(g);
    groups[std::string(to_string(g))] = it == report.group_counts.end() ? 0 : it->second;
  }
  json probes = json::array();
  for (const auto& p : report.probes) {
    json pj{{"probe_id", p.probe_id},
            {"group", std::string(to_string(p.assignment.group))},
            {"flags", flags_json(p.assignment.flags)},
            {"diagnostics", p.assignment.diagnostics}};
    if (p.inputs.dns1) pj["dns1"] = verdict_json(*p.inputs.dns1);
    if (p.inputs.dns2) pj["dns2"] = verdict_json(*p.inputs.dns2);
    if (p.inputs.dns1_prefix) pj["dns1_prefix"] = to_json(*p.inputs.dns1_prefix);
    json pings = json::array();
    for (const auto& pv : p.inputs.pings) {
      pings.push_back({{"kind", std::string(to_string(pv.kind))},
                       {"prefix", to_json(pv.prefix)},
                       {"verdict", verdict_json(pv.verdict)}});
    }
    pj["pings"] = std::move(pings);
    json resolvers = json::array();
    for (const auto& r : p.inputs.resolvers_used) resolvers.push_back(to_string(r));
    pj["resolvers"] = std::move(resolvers);
    json working = json::array();
    for (const auto& w : p.working_prefixes) working.push_back(to_json(w));
    pj["working_prefixes"] = std::move(working);
    probes.push_back(std::move(pj));
  }
  return {{"schema", "nat64scope-detection/1"},
          {"table", std::move(table)},
          {"groups", std::move(groups)},
          {"probes", std::move(probes)}};
}

DetectionReport detection_from_json(const json& j) {
  DetectionReport r;
  try {
    if (j.at("schema") != "nat64scope-detection/1") throw Error("unsupported detection schema");
    for (const auto& [name, c] : j.at("table").items()) {
      auto k = parse_test_kind(name);
      if (!k) throw Error("unknown test '" + name + "'");
      VerdictCounts vc{c.at("failed").get<int>(), c.at("passed").get<int>(),
                       c.at("inconclusive").get<int>()};
      if (vc.total() > 0) r.table[*k] = vc;
    }
    for (const auto& [name, n] : j.at("groups").items()) {
      auto g = parse_detection_group(name);
      if (!g) throw Error("unknown group '" + name + "'");
      if (n.get<int>() > 0) r.group_counts[*g] = n.get<int>();
    }
    for (const auto& pj : j.at("probes")) {
      ProbeDetection p;
      p.probe_id = pj.at("probe_id").get<std::string>();
      auto g = parse_detection_group(pj.at("group").get<std::string>());
      if (!g) throw Error("unknown group for probe " + p.probe_id);
      p.assignment.group = *g;
      const auto& f = pj.at("flags");
      p.assignment.flags = {f.at("uses_public_resolver").get<bool>(),
                            f.at("likely_accidental").get<bool>(),
                            f.at("rfc8880_style").get<bool>(),
                            f.at("public_nat64_only").get<bool>(),
                            f.at("dns1_public_prefix").get<bool>()};
      p.assignment.diagnostics = pj.at("diagnostics").get<std::vector<std::string>>();
      if (pj.contains("dns1")) p.inputs.dns1 = verdict_from(pj["dns1"]);
      if (pj.contains("dns2")) p.inputs.dns2 = verdict_from(pj["dns2"]);
      if (pj.contains("dns1_prefix")) p.inputs.dns1_prefix = prefix_from_json(pj["dns1_prefix"]);
      for (const auto& pv : pj.at("pings")) {
        auto kind = parse_test_kind(pv.at("kind").get<std::string>());
        if (!kind) throw Error("unknown ping kind for probe " + p.probe_id);
        p.inputs.pings.push_back({*kind, prefix_from_json(pv.at("prefix")),
                                  verdict_from(pv.at("verdict"))});
      }
      for (const auto& rj : pj.at("resolvers")) {
        p.inputs.resolvers_used.push_back(must_parse_ip(rj.get<std::string>()));
      }
      for (const auto& w : pj.at("working_prefixes")) {
        p.working_prefixes.push_back(prefix_from_json(w));
      }
      r.probes.push_back(std::move(p));
    }
  } catch (const json::exception& e) {
    throw Error(std::string("malformed detection report: ") + e.what());
  } catch (const DatasetError& e) {
    throw Error(std::string("malformed detection report: ") + e.what());
  }
  return r;
}

std::string detection_probes_csv(const DetectionReport& report) {
  std::ostringstream out;
  out << "probe_id,group,dns1,dns2,dns1_prefix,working_prefixes,flags,diagnostics\n";
  for (const auto& p : report.probes) {
    std::vector<std::string> working;
    for (const auto& w : p.working_prefixes) working.push_back(w.to_string());
    out << csv_field(p.probe_id) << ',' << to_string(p.assignment.group) << ','
        << verdict_cell(p.inputs.dns1) << ',' << verdict_cell(p.inputs.dns2) << ','
        << (p.inputs.dns1_prefix ? p.inputs.dns1_prefix->to_string() : "") << ','
        << join(working) << ',' << join(flag_names(p.assignment.flags)) << ','
        << csv_field(join(p.assignment.diagnostics)) << '\n';
  }
  return out.str();
}

std::string detection_table_csv(const DetectionReport& report) {
  std::ostringstream out;
  out << "test,failed,passed,inconclusive,total\n";
  for (auto k : kAllTests) {
    VerdictCounts c;
    if (auto it = report.table.find(k); it != report.table.end()) c = it->second;
    out << to_string(k) << ',' << c.failed << ',' << c.passed << ',' << c.inconclusive << ','
        << c.total() << '\n';
  }
  return out.str();
}

std::string group_counts_csv(const DetectionReport& report) {
  std::ostringstream out;
  out << "group,probes\n";
  for (auto g : kAllGroups) {
    auto it = report.group_counts.find(g);
    out << to_string(g) << ',' << (it == report.group_counts.end() ? 0 : it->second) << '\n';
  }
  return out.str();
}

// ---- classification -------------------------------------------------------------

json classification_json(const ClassificationReport& report) {
  json probes = json::array();
  for (const auto& p : report.probes) {
    json cats = json::array();
    for (auto c : p.categories) cats.push_back(std::string(to_string(c)));
    json prefixes = json::array();
    for (const auto& pl : p.prefixes) {
      json pj{{"prefix", to_json(pl.prefix)}};
      pj["traceroute"] = pl.traceroute == TracerouteUsability::Usable     ? "usable"
                         : pl.traceroute == TracerouteUsability::NoNatHop ? "no_nat_hop"
                                                                          : "not_measured";
      if (pl.nat_as) pj["nat_as"] = *pl.nat_as;
      if (pl.location) {
        pj["location"] = std::string(to_string(pl.location->value));
        pj["local"] = pl.location->local;
      }
      if (pl.nat_hop_rtt_ms) pj["nat_hop_rtt_ms"] = *pl.nat_hop_rtt_ms;
      if (pl.local_nat) pj["local_nat"] = *pl.local_nat;
      prefixes.push_back(std::move(pj));
    }
    json pj{{"probe_id", p.probe_id},
            {"group", std::string(to_string(p.group))},
            {"as_category", std::string(to_string(p.as_category))},
            {"categories", std::move(cats)},
            {"prefixes", std::move(prefixes)}};
    if (p.asn_v6) pj["asn_v6"] = *p.asn_v6;
    probes.push_back(std::move(pj));
  }
  json evidence = json::array();
  for (const auto& [asn, ev] : report.evidence) {
    json ej{{"asn", asn},
            {"is_isp_dns64", ev.is_isp_dns64},
            {"witnesses", ev.witnesses},
            {"probes_tested", ev.probes_tested},
            {"multiple_similar_prefixes_per_as", ev.multiple_similar_prefixes_per_as}};
    if (ev.resolver) ej["resolver"] = to_string(*ev.resolver);
    evidence.push_back(std::move(ej));
  }
  json cat_counts = json::object();
  for (const auto& [c, n] : report.category_counts) cat_counts[std::string(to_string(c))] = n;
  json as_table = json::object();
  for (const auto& [c, n] : report.as_table) {
    as_table[std::string(to_string(c))] = {{"ases", n.ases}, {"probes", n.probes}};
  }
  return {{"schema", "nat64scope-classification/1"},
          {"probes", std::move(probes)},
          {"isp_evidence", std::move(evidence)},
          {"category_counts", std::move(cat_counts)},
          {"as_categories", std::move(as_table)},
          {"warnings", report.warnings}};
}

std::string classification_probes_csv(const ClassificationReport& report) {
  std::ostringstream out;
  out << "probe_id,group,asn_v6,as_category,categories,prefixes,locations,local_nat\n";
  for (const auto& p : report.probes) {
    std::vector<std::string> prefixes, locations, local;
    for (const auto& pl : p.prefixes) {
      prefixes.push_back(pl.prefix.to_string());
      locations.emplace_back(pl.location ? to_string(pl.location->value) : "");
      local.emplace_back(!pl.local_nat ? "" : *pl.local_nat ? "yes" : "no");
    }
    out << csv_field(p.probe_id) << ',' << to_string(p.group) << ','
        << (p.asn_v6 ? std::to_string(*p.asn_v6) : "") << ',' << to_string(p.as_category) << ','
        << categories_cell(p.categories) << ',' << join(prefixes) << ',' << join(locations) << ','
        << join(local) << '\n';
  }
  return out.str();
}

std::string isp_evidence_csv(const ClassificationReport& report) {
  std::ostringstream out;
  out << "asn,is_isp_dns64,resolver,witnesses,probes_tested,multiple_similar_prefixes_per_as\n";
  for (const auto& [asn, ev] : report.evidence) {
    out << asn << ',' << (ev.is_isp_dns64 ? "yes" : "no") << ','
        << (ev.resolver ? to_string(*ev.resolver) : "") << ',' << join(ev.witnesses) << ','
        << ev.probes_tested << ',' << (ev.multiple_similar_prefixes_per_as ? "yes" : "no")
        << '\n';
  }
  return out.str();
}

std::string as_category_csv(const ClassificationReport& report) {
  std::ostringstream out;
  out << "category,ases,probes\n";
  for (const auto& [c, n] : report.as_table) {
    out << to_string(c) << ',' << n.ases << ',' << n.probes << '\n';
  }
  return out.str();
}

std::string probe_category_csv(const ClassificationReport& report) {
  std::ostringstream out;
  out << "category,probes\n";
  for (const auto& [c, n] : report.category_counts) out << to_string(c) << ',' << n << '\n';
  return out.str();
}

// ---- paths ----------------------------------------------------------------------

json paths_json(const PathsReport& report) {
  json stats = json::object();
  for (const auto& [k, v] : flatten(report.stats)) {
    stats[k] = std::isfinite(v) ? json(v) : json(nullptr);
  }
  json unpaired = json::array();
  for (const auto& u : report.pairing.unpaired) {
    unpaired.push_back({{"probe_id", u.path.probe_id},
                        {"family", std::string(to_string(u.path.family))},
                        {"target", u.path.target_v4.to_string()},
                        {"round", u.path.round},
                        {"reason", u.reason}});
  }
  json counts = json::object();
  for (const auto& [reason, n] : report.filtered.counts()) counts[std::string(to_string(reason))] = n;
  json excluded = json::array();
  for (const auto& e : report.filtered.excluded) {
    auto ej = path_key_json(e.pair);
    ej["reason"] = std::string(to_string(e.reason));
    if (!e.detail.empty()) ej["detail"] = e.detail;
    excluded.push_back(std::move(ej));
  }
  json out{{"schema", "nat64scope-paths/1"},
           {"pairs_formed", report.pairing.pairs.size()},
           {"pairs_kept", report.filtered.kept.size()},
           {"unpaired", std::move(unpaired)},
           {"exclusion_counts", std::move(counts)},
           {"excluded", std::move(excluded)},
           {"stats", std::move(stats)}};
  if (report.filtered.kept.empty()) out["note"] = "no pairs survived filtering";
  return out;
}

std::string pairs_csv(const PathsReport& report) {
  std::ostringstream out;
  out << "probe_id,target,round,prefix,v4_success,nat_success,v4_len,nat_len,len_diff,len_pct,"
         "v4_rtt_ms,nat_rtt_ms,rtt_diff_ms,rtt_pct,v4_missing_pct,nat_missing_pct,ttl_anomaly\n";
  for (std::size_t i = 0; i < report.filtered.kept.size(); ++i) {
    const auto& p = report.filtered.kept[i];
    const auto& a = report.analyses[i];
    out << csv_field(p.v4_path.probe_id) << ',' << p.v4_path.target_v4.to_string() << ','
        << p.v4_path.round << ',' << p.prefix().to_string() << ',' << a.v4_success << ','
        << a.nat_success;
    if (a.metrics) {
      const auto& m = *a.metrics;
      out << ',' << m.v4_len << ',' << m.nat_len << ',' << m.len_diff << ','
          << format_number(m.len_pct) << ',' << format_number(m.v4_rtt_ms) << ','
          << format_number(m.nat_rtt_ms) << ',' << format_number(m.rtt_diff_ms) << ','
          << format_number(m.rtt_pct) << ',' << format_number(m.v4_missing_pct) << ','
          << format_number(m.nat_missing_pct) << ',' << m.ttl_anomaly;
    } else {
      out << ",,,,,,,,,,,";
    }
    out << '\n';
  }
  return out.str();
}

std::string exclusions_csv(const PathsReport& report) {
  std::ostringstream out;
  out << "probe_id,target,round,prefix,reason,detail\n";
  for (const auto& e : report.filtered.excluded) {
    out << csv_field(e.pair.v4_path.probe_id) << ',' << e.pair.v4_path.target_v4.to_string()
        << ',' << e.pair.v4_path.round << ',' << e.pair.prefix().to_string() << ','
        << to_string(e.reason) << ',' << csv_field(e.detail) << '\n';
  }
  return out.str();
}

std::string stats_csv(const AggregateStats& stats) {
  std::ostringstream out;
  out << "key,value\n";
  for (const auto& [k, v] : flatten(stats)) out << csv_field(k) << ',' << format_number(v) << '\n';
  return out.str();
}

std::string missing_histogram_csv(const AggregateStats& stats) {
  std::ostringstream out;
  out << "bin,ipv4,nat64\n";
  for (std::size_t i = 0; i < stats.v4_missing_hist.size(); ++i) {
    out << i * 10 << '-' << (i + 1) * 10 << ',' << stats.v4_missing_hist[i] << ','
        << stats.nat_missing_hist[i] << '\n';
  }
  return out.str();
}

void write_text_file(const std::filesystem::path& path, const std::string& text) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path.string());
  out << text;
  if (!out) throw Error("write failed for " + path.string());
}

void write_json_file(const std::filesystem::path& path, const json& j) {
  write_text_file(path, j.dump(2) + "\n");
}

}  // namespace nat64scope
