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

// RIPE Atlas result documents (dns, ping, traceroute) and measurement
// definitions.
//
// Only the subset the analysis needs is modelled; other fields are ignored
// on read and not written back. On that subset parse and serialize are
// inverses.

#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "nat64scope/model.hpp"

namespace nat64scope {

/// A document does not match the expected shape. `path()` points at the
/// offending field, e.g. "$[3].result[2].result[0].rtt".
class SchemaViolation : public Error {
public:
  SchemaViolation(std::string path, const std::string& what)
      : Error(path + ": " + what), path_(std::move(path)) {}
  const std::string& path() const { return path_; }

private:
  std::string path_;
};

enum class AtlasKind { Dns, Ping, Traceroute };
std::string_view to_string(AtlasKind k);
std::optional<AtlasKind> parse_atlas_kind(std::string_view s);

struct AtlasDnsResult {
  std::int64_t msm_id = 0;
  std::int64_t prb_id = 0;
  Timestamp timestamp = 0;
  int af = 6;
  std::optional<std::string> dst_addr;  // resolver used
  /// Raw answer buffer; empty when the probe reported an error.
  std::vector<std::uint8_t> abuf;
  /// Error text ("timeout" or the error object's first key) when no answer.
  std::optional<std::string> error;
  /// The error member as served, kept for re-serialization.
  nlohmann::json error_raw;

  bool operator==(const AtlasDnsResult&) const = default;
};

struct AtlasPingResult {
  std::int64_t msm_id = 0;
  std::int64_t prb_id = 0;
  Timestamp timestamp = 0;
  int af = 6;
  std::string dst_addr;
  std::vector<EchoOutcome> packets;  // {"x":"*"} is a lost packet

  bool operator==(const AtlasPingResult&) const = default;
};

struct AtlasReply {
  std::optional<std::string> from;  // absent for "*"
  std::optional<double> rtt;
  int ttl = 0;  // reply TTL when present, else 0

  bool operator==(const AtlasReply&) const = default;
};

struct AtlasHop {
  int hop = 0;
  std::vector<AtlasReply> replies;

  bool operator==(const AtlasHop&) const = default;
};

struct AtlasTracerouteResult {
  std::int64_t msm_id = 0;
  std::int64_t prb_id = 0;
  Timestamp timestamp = 0;
  int af = 4;
  std::string dst_addr;
  std::string proto = "UDP";
  int paris_id = 0;
  std::vector<AtlasHop> hops;

  bool operator==(const AtlasTracerouteResult&) const = default;
};

// A document is a JSON array of results (one object is also accepted).
std::vector<AtlasDnsResult> parse_atlas_dns(const nlohmann::json& doc);
std::vector<AtlasPingResult> parse_atlas_ping(const nlohmann::json& doc);
std::vector<AtlasTracerouteResult> parse_atlas_traceroute(const nlohmann::json& doc);

nlohmann::json serialize_atlas(const std::vector<AtlasDnsResult>& results);
nlohmann::json serialize_atlas(const std::vector<AtlasPingResult>& results);
nlohmann::json serialize_atlas(const std::vector<AtlasTracerouteResult>& results);

std::vector<std::uint8_t> base64_decode(std::string_view text);
std::string base64_encode(std::span<const std::uint8_t> data);

// ---- conversion into model types ------------------------------------------

/// Decoded answer; a result with an error maps to Timeout (or Malformed for
/// a buffer that does not parse).
DnsResponse to_dns_response(const AtlasDnsResult& r, std::string_view qname);

/// Measurement round of a result: (timestamp - start) / interval.
int round_of(Timestamp timestamp, Timestamp start, Timestamp interval);

/// IPv4 destinations give IPv4 paths. IPv6 destinations must fall inside
/// `prefix` and give NAT64 paths towards the embedded IPv4 address. Hops
/// keep the first responding address and all RTTs; gaps in the hop
/// numbering and all-"*" hops become missing hops.
TraceroutePath to_traceroute_path(const AtlasTracerouteResult& r,
                                  const std::optional<Nat64Prefix>& prefix, int round);

// ---- measurement definitions --------------------------------------------

struct AtlasSpecRequest {
  AtlasKind kind = AtlasKind::Traceroute;
  std::string target;  // address, or the query name for dns
  std::vector<std::int64_t> probes;
  std::string description;
  int paris_id = 16;
  int max_hops = 32;
};

/// Body for POST /api/v2/measurements/: a one-off AAAA dns lookup on the
/// probe's resolver, a 3-packet ping, or a 3-packet Paris UDP traceroute.
nlohmann::json atlas_measurement_spec(const AtlasSpecRequest& request);

}  // namespace nat64scope
