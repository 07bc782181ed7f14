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

#include "nat64scope/acquire/dataset.hpp"

#include <fstream>
#include <istream>
#include <ostream>
#include <set>

namespace nat64scope {

using nlohmann::json;

namespace {

[[noreturn]] void bad_field(std::string_view key, std::string_view why) {
  throw DatasetError(0, "field '" + std::string(key) + "': " + std::string(why));
}

const json& field(const json& j, std::string_view key) {
  auto it = j.find(key);
  if (it == j.end()) bad_field(key, "missing");
  return *it;
}

std::string get_string(const json& j, std::string_view key) {
  const auto& v = field(j, key);
  if (!v.is_string()) bad_field(key, "expected string");
  return v.get<std::string>();
}

template <typename Int>
Int get_int(const json& v, std::string_view key) {
  if (!v.is_number_integer()) bad_field(key, "expected integer");
  return v.get<Int>();
}

template <typename Int>
Int get_int(const json& j, std::string_view key, std::nullptr_t) {
  return get_int<Int>(field(j, key), key);
}

IpAddress get_ip(const json& v, std::string_view key) {
  if (!v.is_string()) bad_field(key, "expected address string");
  auto ip = parse_ip(v.get<std::string>());
  if (!ip) bad_field(key, "bad address '" + v.get<std::string>() + "'");
  return *ip;
}

std::vector<std::string> get_strings(const json& j, std::string_view key) {
  std::vector<std::string> out;
  auto it = j.find(key);
  if (it == j.end()) return out;
  if (!it->is_array()) bad_field(key, "expected array");
  for (const auto& v : *it) {
    if (!v.is_string()) bad_field(key, "expected array of strings");
    out.push_back(v.get<std::string>());
  }
  return out;
}

template <typename E>
E get_enum(const json& j, std::string_view key, std::optional<E> (*parse)(std::string_view)) {
  auto text = get_string(j, key);
  auto v = parse(text);
  if (!v) bad_field(key, "unknown value '" + text + "'");
  return *v;
}

std::optional<Nat64Prefix> opt_prefix(const json& j, std::string_view key) {
  auto it = j.find(key);
  if (it == j.end()) return std::nullopt;
  return prefix_from_json(*it);
}

}  // namespace

json to_json(const Nat64Prefix& prefix) {
  return {{"net", prefix.to_string()}, {"kind", std::string(to_string(prefix.kind))}};
}

json to_json(const ProbeRecord& probe) {
  json j{{"type", "probe"}, {"probe_id", probe.probe_id}};
  if (probe.asn_v4) j["asn_v4"] = *probe.asn_v4;
  if (probe.asn_v6) j["asn_v6"] = *probe.asn_v6;
  j["resolvers"] = json::array();
  for (const auto& r : probe.resolvers) j["resolvers"].push_back(to_string(r));
  j["tags"] = probe.tags;
  if (probe.network_prefix_v6) j["network_prefix_v6"] = probe.network_prefix_v6->to_string();
  j["annotations"] = probe.annotations;
  return j;
}

json to_json(const TestRun& run) {
  json j{{"type", "test_run"},
         {"probe_id", run.probe_id},
         {"kind", std::string(to_string(run.kind))},
         {"timestamp", run.timestamp},
         {"outcome", std::string(to_string(run.outcome))}};
  if (run.observed_prefix) j["observed_prefix"] = to_json(*run.observed_prefix);
  if (run.resolver_used) j["resolver"] = to_string(*run.resolver_used);
  if (run.ping_prefix) j["ping_prefix"] = to_json(*run.ping_prefix);
  if (run.ping_target) j["ping_target"] = run.ping_target->to_string();
  if (!run.diagnostic.empty()) j["diagnostic"] = run.diagnostic;
  return j;
}

json to_json(const TraceroutePath& path) {
  json j{{"type", "traceroute"},
         {"probe_id", path.probe_id},
         {"family", std::string(to_string(path.family))},
         {"target", path.target_v4.to_string()},
         {"round", path.round},
         {"timestamp", path.timestamp}};
  if (path.prefix) j["prefix"] = to_json(*path.prefix);
  json hops = json::array();
  for (const auto& h : path.hops) {
    json hj{{"ttl", h.index}, {"rtt", h.rtts_ms}};
    if (h.address) hj["from"] = to_string(*h.address);
    hops.push_back(std::move(hj));
  }
  j["hops"] = std::move(hops);
  return j;
}

Nat64Prefix prefix_from_json(const json& j) {
  if (!j.is_object()) bad_field("prefix", "expected object");
  auto net = get_string(j, "net");
  auto kind = get_enum<PrefixKind>(j, "kind", parse_prefix_kind);
  auto p = parse_nat64_prefix(net, kind);
  if (!p) bad_field("net", "bad prefix '" + net + "'");
  p->kind = kind;
  return *p;
}

ProbeRecord probe_from_json(const json& j) {
  ProbeRecord p;
  p.probe_id = get_string(j, "probe_id");
  if (j.contains("asn_v4")) p.asn_v4 = get_int<Asn>(j, "asn_v4", nullptr);
  if (j.contains("asn_v6")) p.asn_v6 = get_int<Asn>(j, "asn_v6", nullptr);
  if (auto it = j.find("resolvers"); it != j.end()) {
    if (!it->is_array()) bad_field("resolvers", "expected array");
    for (const auto& r : *it) p.resolvers.push_back(get_ip(r, "resolvers"));
  }
  p.tags = get_strings(j, "tags");
  if (j.contains("network_prefix_v6")) {
    auto text = get_string(j, "network_prefix_v6");
    p.network_prefix_v6 = IpPrefix::parse(text);
    if (!p.network_prefix_v6) bad_field("network_prefix_v6", "bad prefix '" + text + "'");
  }
  p.annotations = get_strings(j, "annotations");
  return p;
}

TestRun run_from_json(const json& j) {
  TestRun r;
  r.probe_id = get_string(j, "probe_id");
  r.kind = get_enum<TestKind>(j, "kind", parse_test_kind);
  r.timestamp = get_int<Timestamp>(j, "timestamp", nullptr);
  r.outcome = get_enum<RawOutcome>(j, "outcome", parse_raw_outcome);
  r.observed_prefix = opt_prefix(j, "observed_prefix");
  if (auto it = j.find("resolver"); it != j.end()) r.resolver_used = get_ip(*it, "resolver");
  r.ping_prefix = opt_prefix(j, "ping_prefix");
  if (auto it = j.find("ping_target"); it != j.end()) {
    auto ip = get_ip(*it, "ping_target");
    if (!is_v4(ip)) bad_field("ping_target", "expected IPv4 address");
    r.ping_target = std::get<Ipv4Address>(ip);
  }
  if (j.contains("diagnostic")) r.diagnostic = get_string(j, "diagnostic");
  return r;
}

TraceroutePath path_from_json(const json& j) {
  TraceroutePath p;
  p.probe_id = get_string(j, "probe_id");
  p.family = get_enum<Family>(j, "family", parse_family);
  auto target = get_ip(field(j, "target"), "target");
  if (!is_v4(target)) bad_field("target", "expected IPv4 address");
  p.target_v4 = std::get<Ipv4Address>(target);
  p.round = get_int<int>(j, "round", nullptr);
  p.timestamp = get_int<Timestamp>(j, "timestamp", nullptr);
  p.prefix = opt_prefix(j, "prefix");
  const auto& hops = field(j, "hops");
  if (!hops.is_array()) bad_field("hops", "expected array");
  for (const auto& hj : hops) {
    Hop h;
    h.index = get_int<int>(hj, "ttl", nullptr);
    if (auto it = hj.find("from"); it != hj.end()) h.address = get_ip(*it, "from");
    if (auto it = hj.find("rtt"); it != hj.end()) {
      if (!it->is_array()) bad_field("rtt", "expected array");
      for (const auto& v : *it) {
        if (!v.is_number()) bad_field("rtt", "expected numbers");
        h.rtts_ms.push_back(v.get<double>());
      }
    }
    p.hops.push_back(std::move(h));
  }
  return p;
}

ValidationReport check_integrity(const DatasetFile& dataset) {
  ValidationReport out = validate(std::span<const ProbeRecord>(dataset.probes));
  std::set<ProbeId> known;
  for (const auto& p : dataset.probes) known.insert(p.probe_id);
  for (const auto& r : dataset.runs) {
    if (!known.contains(r.probe_id)) out.push_back("test run references unknown probe " + r.probe_id);
  }
  for (const auto& p : dataset.paths) {
    if (!known.contains(p.probe_id)) {
      out.push_back("traceroute references unknown probe " + p.probe_id);
    }
  }
  return out;
}

void write_dataset(std::ostream& out, const DatasetFile& dataset) {
  json header{{"type", "header"},
              {"schema", dataset.header.schema},
              {"window_start", dataset.header.window_start},
              {"window_end", dataset.header.window_end},
              {"source", dataset.header.source}};
  out << header.dump() << '\n';
  for (const auto& p : dataset.probes) out << to_json(p).dump() << '\n';
  for (const auto& r : dataset.runs) out << to_json(r).dump() << '\n';
  for (const auto& p : dataset.paths) out << to_json(p).dump() << '\n';
}

void save_dataset(const std::filesystem::path& path, const DatasetFile& dataset) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DatasetError(0, "cannot write " + path.string());
  write_dataset(out, dataset);
  if (!out) throw DatasetError(0, "write failed for " + path.string());
}

DatasetFile read_dataset(std::istream& in) {
  DatasetFile ds;
  std::string line;
  int lineno = 0;
  bool have_header = false;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    json j;
    try {
      j = json::parse(line);
    } catch (const json::parse_error& e) {
      throw DatasetError(lineno, std::string("invalid JSON: ") + e.what());
    }
    if (!j.is_object()) throw DatasetError(lineno, "record is not an object");
    try {
      const auto type = get_string(j, "type");
      if (!have_header) {
        if (type != "header") throw DatasetError(0, "first record must be the header");
        ds.header.schema = get_string(j, "schema");
        if (ds.header.schema != kDatasetSchema) {
          throw DatasetError(0, "unsupported schema '" + ds.header.schema + "'");
        }
        if (j.contains("window_start")) {
          ds.header.window_start = get_int<Timestamp>(j, "window_start", nullptr);
        }
        if (j.contains("window_end")) {
          ds.header.window_end = get_int<Timestamp>(j, "window_end", nullptr);
        }
        if (j.contains("source")) ds.header.source = get_string(j, "source");
        have_header = true;
      } else if (type == "probe") {
        ds.probes.push_back(probe_from_json(j));
      } else if (type == "test_run") {
        ds.runs.push_back(run_from_json(j));
      } else if (type == "traceroute") {
        ds.paths.push_back(path_from_json(j));
      } else {
        throw DatasetError(0, "unknown record type '" + type + "'");
      }
    } catch (const DatasetError& e) {
      if (e.line() != 0) throw;
      throw DatasetError(lineno, e.what());
    }
  }
  if (!have_header) throw DatasetError(0, "dataset has no header line");
  if (auto problems = check_integrity(ds); !problems.empty()) {
    throw DatasetError(0, "referential integrity: " + problems.front());
  }
  return ds;
}

DatasetFile load_dataset(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DatasetError(0, "cannot open " + path.string());
  return read_dataset(in);
}

}  // namespace nat64scope
