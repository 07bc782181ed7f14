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

// Minimal DNS stub: one question, A or AAAA, over UDP.

#pragma once

#include <chrono>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "nat64scope/model.hpp"

namespace nat64scope {

enum class RecordType : std::uint16_t { A = 1, AAAA = 28 };

struct DnsQuestion {
  std::uint16_t id = 0;
  std::string name;  // without trailing dot, lower case
  std::uint16_t qtype = 0;
};

/// Standard query with RD set. Throws Error for names that cannot be encoded.
std::vector<std::uint8_t> build_query(std::uint16_t id, std::string_view name, RecordType type);

/// Parses the header and question of a query; nullopt when malformed.
std::optional<DnsQuestion> parse_query(std::span<const std::uint8_t> msg);

/// Answer for `q` with the given RCODE and records, TTL 60.
std::vector<std::uint8_t> build_response(const DnsQuestion& q, std::uint8_t rcode,
                                         std::span<const Ipv6Address> aaaa,
                                         std::span<const Ipv4Address> a);

/// Decodes a response. Status is Malformed when the message cannot be parsed
/// or does not answer `expected_id`; RCODEs map onto DnsStatus.
DnsResponse parse_response(std::span<const std::uint8_t> msg,
                           std::optional<std::uint16_t> expected_id = std::nullopt);

struct DnsEndpoint {
  IpAddress address;
  std::uint16_t port = 53;
};

/// Sends one query and waits for the matching answer. Never throws for
/// network conditions: timeouts and unreachable resolvers come back as
/// Timeout, a DNS REFUSED (or an ICMP port unreachable) as Refused.
DnsResponse dns_query(const DnsEndpoint& resolver, std::string_view name, RecordType type,
                      std::chrono::milliseconds timeout);

}  // namespace nat64scope
