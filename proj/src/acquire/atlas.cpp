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

#include "nat64scope/acquire/atlas.hpp"

#include <openssl/evp.h>

#include <algorithm>
#include <sstream>

#include "nat64scope/acquire/dns.hpp"
#include "nat64scope/addrsynth.hpp"

namespace nat64scope {

using nlohmann::json;

namespace {

std::string at(const std::string& path, std::string_view key) {
  return path + "." + std::string(key);
}
std::string at(const std::string& path, std::size_t index) {
  return path + "[" + std::to_string(index) + "]";
}

const json& need(const json& j, std::string_view key, const std::string& path) {
  if (!j.is_object()) throw SchemaViolation(path, "expected object");
  auto it = j.find(key);
  if (it == j.end()) throw SchemaViolation(at(path, key), "missing");
  return *it;
}

std::int64_t need_int(const json& j, std::string_view key, const std::string& path) {
  const auto& v = need(j, key, path);
  if (!v.is_number_integer()) throw SchemaViolation(at(path, key), "expected integer");
  return v.get<std::int64_t>();
}

std::string need_string(const json& j, std::string_view key, const std::string& path) {
  const auto& v = need(j, key, path);
  if (!v.is_string()) throw SchemaViolation(at(path, key), "expected string");
  return v.get<std::string>();
}

int opt_int(const json& j, std::string_view key, const std::string& path, int fallback) {
  auto it = j.find(key);
  if (it == j.end()) return fallback;
  if (!it->is_number_integer()) throw SchemaViolation(at(path, key), "expected integer");
  return it->get<int>();
}

double need_number(const json& v, const std::string& path) {
  if (!v.is_number()) throw SchemaViolation(path, "expected number");
  return v.get<double>();
}

/// Applies `fn(element, path)` to each result in a document.
template <typename Fn>
void each_result(const json& doc, Fn&& fn) {
  if (doc.is_object()) {
    fn(doc, std::string("$"));
    return;
  }
  if (!doc.is_array()) throw SchemaViolation("$", "expected array of results");
  for (std::size_t i = 0; i < doc.size(); ++i) fn(doc[i], at("$", i));
}

AtlasDnsResult dns_entry(const json& j, const std::string& path, const AtlasDnsResult& base) {
  AtlasDnsResult r = base;
  if (auto it = j.find("dst_addr"); it != j.end()) {
    if (!it->is_string()) throw SchemaViolation(at(path, "dst_addr"), "expected string");
    r.dst_addr = it->get<std::string>();
  }
  r.af = opt_int(j, "af", path, r.af);
  if (auto it = j.find("error"); it != j.end()) {
    r.error_raw = *it;
    if (it->is_object() && !it->empty()) {
      r.error = it->begin().key();
    } else if (it->is_string()) {
      r.error = it->get<std::string>();
    } else {
      throw SchemaViolation(at(path, "error"), "expected object or string");
    }
    return r;
  }
  const auto& result = need(j, "result", path);
  const auto rpath = at(path, "result");
  const auto abuf = need_string(result, "abuf", rpath);
  r.abuf = base64_decode(abuf);
  if (r.abuf.empty() && !abuf.empty()) throw SchemaViolation(at(rpath, "abuf"), "invalid base64");
  return r;
}

}  // namespace

std::string_view to_string(AtlasKind k) {
  switch (k) {
    case AtlasKind::Dns: return "dns";
    case AtlasKind::Ping: return "ping";
    case AtlasKind::Traceroute: return "traceroute";
  }
  return "?";
}

std::optional<AtlasKind> parse_atlas_kind(std::string_view s) {
  if (s == "dns") return AtlasKind::Dns;
  if (s == "ping") return AtlasKind::Ping;
  if (s == "traceroute") return AtlasKind::Traceroute;
  return std::nullopt;
}

std::vector<std::uint8_t> base64_decode(std::string_view text) {
  std::string clean;
  for (char c : text) {
    if (!std::isspace(static_cast<unsigned char>(c))) clean += c;
  }
  if (clean.empty() || clean.size() % 4 != 0) return {};
  std::vector<std::uint8_t> out(clean.size() / 4 * 3);
  int n = EVP_DecodeBlock(out.data(), reinterpret_cast<const unsigned char*>(clean.data()),
                          static_cast<int>(clean.size()));
  if (n < 0) return {};
  // EVP_DecodeBlock counts padding as zero bytes.
  std::size_t pad = 0;
  if (clean.back() == '=') ++pad;
  if (clean.size() > 1 && clean[clean.size() - 2] == '=') ++pad;
  out.resize(static_cast<std::size_t>(n) - pad);
  return out;
}

std::string base64_encode(std::span<const std::uint8_t> data) {
  std::string out(4 * ((data.size() + 2) / 3) + 1, '\0');
  int n = EVP_EncodeBlock(reinterpret_cast<unsigned char*>(out.data()), data.data(),
                          static_cast<int>(data.size()));
  out.resize(static_cast<std::size_t>(n));
  return out;
}

std::vector<AtlasDnsResult> parse_atlas_dns(const json& doc) {
  std::vector<AtlasDnsResult> out;
  each_result(doc, [&](const json& j, const std::string& path) {
    AtlasDnsResult base;
    base.msm_id = need_int(j, "msm_id", path);
    base.prb_id = need_int(j, "prb_id", path);
    base.timestamp = need_int(j, "timestamp", path);
    if (auto it = j.find("resultset"); it != j.end()) {
      const auto spath = at(path, "resultset");
      if (!it->is_array()) throw SchemaViolation(spath, "expected array");
      for (std::size_t i = 0; i < it->size(); ++i) {
        const auto& entry = (*it)[i];
        AtlasDnsResult e = base;
        if (entry.is_object() && entry.contains("time")) {
          e.timestamp = need_int(entry, "time", at(spath, i));
        }
        out.push_back(dns_entry(entry, at(spath, i), e));
      }
    } else {
      out.push_back(dns_entry(j, path, base));
    }
  });
  return out;
}

std::vector<AtlasPingResult> parse_atlas_ping(const json& doc) {
  std::vector<AtlasPingResult> out;
  each_result(doc, [&](const json& j, const std::string& path) {
    AtlasPingResult r;
    r.msm_id = need_int(j, "msm_id", path);
    r.prb_id = need_int(j, "prb_id", path);
    r.timestamp = need_int(j, "timestamp", path);
    r.af = opt_int(j, "af", path, 6);
    r.dst_addr = need_string(j, "dst_addr", path);
    const auto& results = need(j, "result", path);
    const auto rpath = at(path, "result");
    if (!results.is_array()) throw SchemaViolation(rpath, "expected array");
    for (std::size_t i = 0; i < results.size(); ++i) {
      const auto& p = results[i];
      const auto ppath = at(rpath, i);
      if (!p.is_object()) throw SchemaViolation(ppath, "expected object");
      EchoOutcome e;
      if (auto it = p.find("rtt"); it != p.end()) {
        e.replied = true;
        e.rtt_ms = need_number(*it, at(ppath, "rtt"));
      } else if (!p.contains("x") && !p.contains("error")) {
        throw SchemaViolation(ppath, "expected rtt, x or error");
      }
      r.packets.push_back(e);
    }
    out.push_back(std::move(r));
  });
  return out;
}

std::vector<AtlasTracerouteResult> parse_atlas_traceroute(const json& doc) {
  std::vector<AtlasTracerouteResult> out;
  each_result(doc, [&](const json& j, const std::string& path) {
    AtlasTracerouteResult r;
    r.msm_id = need_int(j, "msm_id", path);
    r.prb_id = need_int(j, "prb_id", path);
    r.timestamp = need_int(j, "timestamp", path);
    r.af = opt_int(j, "af", path, 4);
    r.dst_addr = need_string(j, "dst_addr", path);
    if (j.contains("proto")) r.proto = need_string(j, "proto", path);
    r.paris_id = opt_int(j, "paris_id", path, 0);
    const auto& hops = need(j, "result", path);
    const auto hpath = at(path, "result");
    if (!hops.is_array()) throw SchemaViolation(hpath, "expected array");
    for (std::size_t i = 0; i < hops.size(); ++i) {
      const auto hp = at(hpath, i);
      AtlasHop hop;
      hop.hop = static_cast<int>(need_int(hops[i], "hop", hp));
      if (hop.hop < 1 || hop.hop > 255) throw SchemaViolation(at(hp, "hop"), "out of range");
      auto it = hops[i].find("result");
      if (it == hops[i].end()) {
        // A hop-level error ("error": "...") carries no replies.
        r.hops.push_back(hop);
        continue;
      }
      const auto rp = at(hp, "result");
      if (!it->is_array()) throw SchemaViolation(rp, "expected array");
      for (std::size_t k = 0; k < it->size(); ++k) {
        const auto& e = (*it)[k];
        const auto ep = at(rp, k);
        if (!e.is_object()) throw SchemaViolation(ep, "expected object");
        AtlasReply reply;
        if (e.contains("from")) {
          reply.from = need_string(e, "from", ep);
          if (!parse_ip(*reply.from)) throw SchemaViolation(at(ep, "from"), "bad address");
          if (auto rt = e.find("rtt"); rt != e.end()) reply.rtt = need_number(*rt, at(ep, "rtt"));
          reply.ttl = opt_int(e, "ttl", ep, 0);
        } else if (!e.contains("x") && !e.contains("error")) {
          throw SchemaViolation(ep, "expected from, x or error");
        }
        hop.replies.push_back(std::move(reply));
      }
      r.hops.push_back(std::move(hop));
    }
    out.push_back(std::move(r));
  });
  return out;
}

json serialize_atlas(const std::vector<AtlasDnsResult>& results) {
  json out = json::array();
  for (const auto& r : results) {
    json j{{"type", "dns"},
           {"msm_id", r.msm_id},
           {"prb_id", r.prb_id},
           {"timestamp", r.timestamp},
           {"af", r.af}};
    if (r.dst_addr) j["dst_addr"] = *r.dst_addr;
    if (r.error) {
      j["error"] = r.error_raw.is_null() ? json{{*r.error, nullptr}} : r.error_raw;
    } else {
      j["result"] = {{"abuf", base64_encode(r.abuf)}};
    }
    out.push_back(std::move(j));
  }
  return out;
}

json serialize_atlas(const std::vector<AtlasPingResult>& results) {
  json out = json::array();
  for (const auto& r : results) {
    json packets = json::array();
    for (const auto& p : r.packets) {
      packets.push_back(p.replied ? json{{"rtt", p.rtt_ms}} : json{{"x", "*"}});
    }
    out.push_back({{"type", "ping"},
                   {"msm_id", r.msm_id},
                   {"prb_id", r.prb_id},
                   {"timestamp", r.timestamp},
                   {"af", r.af},
                   {"dst_addr", r.dst_addr},
                   {"result", std::move(packets)}});
  }
  return out;
}

json serialize_atlas(const std::vector<AtlasTracerouteResult>& results) {
  json out = json::array();
  for (const auto& r : results) {
    json hops = json::array();
    for (const auto& h : r.hops) {
      json replies = json::array();
      for (const auto& rep : h.replies) {
        if (!rep.from) {
          replies.push_back({{"x", "*"}});
          continue;
        }
        json e{{"from", *rep.from}};
        if (rep.rtt) e["rtt"] = *rep.rtt;
        if (rep.ttl) e["ttl"] = rep.ttl;
        replies.push_back(std::move(e));
      }
      hops.push_back({{"hop", h.hop}, {"result", std::move(replies)}});
    }
    out.push_back({{"type", "traceroute"},
                   {"msm_id", r.msm_id},
                   {"prb_id", r.prb_id},
                   {"timestamp", r.timestamp},
                   {"af", r.af},
                   {"dst_addr", r.dst_addr},
                   {"proto", r.proto},
                   {"paris_id", r.paris_id},
                   {"result", std::move(hops)}});
  }
  return out;
}

DnsResponse to_dns_response(const AtlasDnsResult& r, std::string_view qname) {
  DnsResponse resp;
  if (r.error) {
    resp.status = DnsStatus::Timeout;
    resp.diagnostic = "atlas error: " + *r.error;
  } else {
    resp = parse_response(r.abuf);
  }
  if (resp.qname.empty()) resp.qname = std::string(qname);
  if (r.dst_addr) resp.resolver = parse_ip(*r.dst_addr);
  return resp;
}

int round_of(Timestamp timestamp, Timestamp start, Timestamp interval) {
  if (interval <= 0) throw Error("round interval must be positive");
  if (timestamp < start) throw Error("timestamp before the capture window");
  return static_cast<int>((timestamp - start) / interval);
}

TraceroutePath to_traceroute_path(const AtlasTracerouteResult& r,
                                  const std::optional<Nat64Prefix>& prefix, int round) {
  TraceroutePath path;
  path.probe_id = std::to_string(r.prb_id);
  path.round = round;
  path.timestamp = r.timestamp;
  auto dst = parse_ip(r.dst_addr);
  if (!dst) throw SchemaViolation("dst_addr", "bad address '" + r.dst_addr + "'");
  if (const auto* v4 = std::get_if<Ipv4Address>(&*dst)) {
    path.family = Family::IPv4;
    path.target_v4 = *v4;
  } else {
    const auto& v6 = std::get<Ipv6Address>(*dst);
    if (!prefix || !matches_prefix(v6, *prefix)) {
      throw Error("IPv6 destination " + r.dst_addr + " is not inside the given NAT64 prefix");
    }
    path.family = Family::NAT64;
    path.prefix = prefix;
    path.target_v4 = extract(*prefix, v6);
  }

  int next = 1;
  for (const auto& h : r.hops) {
    if (h.hop < next) continue;  // duplicate hop numbers keep the first entry
    for (; next < h.hop; ++next) path.hops.push_back(Hop{next, std::nullopt, {}});
    Hop hop{h.hop, std::nullopt, {}};
    for (const auto& rep : h.replies) {
      if (!rep.from) continue;
      if (!hop.address) hop.address = parse_ip(*rep.from);
      if (rep.rtt) hop.rtts_ms.push_back(*rep.rtt);
    }
    path.hops.push_back(std::move(hop));
    next = h.hop + 1;
  }
  return path;
}

json atlas_measurement_spec(const AtlasSpecRequest& req) {
  if (req.probes.empty()) throw Error("atlas spec needs at least one probe");
  json def;
  switch (req.kind) {
    case AtlasKind::Dns:
      def = {{"type", "dns"},
             {"af", 6},
             {"query_class", "IN"},
             {"query_type", "AAAA"},
             {"query_argument", req.target},
             {"use_probe_resolver", true},
             {"resolve_on_probe", true},
             {"set_rd_bit", true}};
      break;
    case AtlasKind::Ping:
    case AtlasKind::Traceroute: {
      auto ip = parse_ip(req.target);
      if (!ip) throw Error("bad measurement target '" + req.target + "'");
      def = {{"type", std::string(to_string(req.kind))},
             {"af", is_v4(*ip) ? 4 : 6},
             {"target", req.target},
             {"packets", 3}};
      if (req.kind == AtlasKind::Traceroute) {
        def["protocol"] = "UDP";
        def["paris"] = req.paris_id;
        def["max_hops"] = req.max_hops;
      }
      break;
    }
  }
  def["description"] = req.description.empty()
                           ? "nat64scope " + std::string(to_string(req.kind)) + " " + req.target
                           : req.description;
  std::ostringstream ids;
  for (std::size_t i = 0; i < req.probes.size(); ++i) ids << (i ? "," : "") << req.probes[i];
  return {{"definitions", json::array({def})},
          {"probes", json::array({{{"type", "probes"},
                                   {"value", ids.str()},
                                   {"requested", req.probes.size()}}})},
          {"is_oneoff", true}};
}

}  // namespace nat64scope
