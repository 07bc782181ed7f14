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

#pragma once

#include <array>
#include <compare>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace nat64scope {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

using Asn = std::uint32_t;

/// IPv4 address in network byte order.
struct Ipv4Address {
  std::array<std::uint8_t, 4> octets{};

  static std::optional<Ipv4Address> parse(std::string_view text);
  static Ipv4Address from_uint(std::uint32_t host_order);
  /// Throws Error on malformed input.
  static Ipv4Address must_parse(std::string_view text);

  std::uint32_t to_uint() const;
  std::string to_string() const;

  auto operator<=>(const Ipv4Address&) const = default;
};

/// IPv6 address in network byte order.
struct Ipv6Address {
  std::array<std::uint8_t, 16> bytes{};

  static std::optional<Ipv6Address> parse(std::string_view text);
  static Ipv6Address must_parse(std::string_view text);

  /// RFC 5952 text form.
  std::string to_string() const;

  /// Bit `i` counted from the most significant bit of byte 0.
  bool bit(int i) const { return (bytes[i / 8] >> (7 - i % 8)) & 1; }

  /// Copy with every bit at position >= `length` cleared.
  Ipv6Address masked(int length) const;

  /// True when the first `length` bits of both addresses agree.
  bool same_prefix(const Ipv6Address& other, int length) const;

  auto operator<=>(const Ipv6Address&) const = default;
};

using IpAddress = std::variant<Ipv4Address, Ipv6Address>;

std::optional<IpAddress> parse_ip(std::string_view text);
IpAddress must_parse_ip(std::string_view text);
std::string to_string(const IpAddress& addr);
inline bool is_v4(const IpAddress& addr) { return std::holds_alternative<Ipv4Address>(addr); }

/// A network prefix of either family, e.g. `2001:db8::/32` or `10.0.0.0/8`.
struct IpPrefix {
  IpAddress base;
  int length = 0;

  static std::optional<IpPrefix> parse(std::string_view text);
  /// A bare address is accepted as a host prefix (/32 or /128).
  static std::optional<IpPrefix> parse_address_or_prefix(std::string_view text);

  bool contains(const IpAddress& addr) const;
  int max_length() const { return is_v4(base) ? 32 : 128; }
  std::string to_string() const;

  auto operator<=>(const IpPrefix&) const = default;
};

/// A set of addresses and prefixes with membership queries.
class PrefixSet {
public:
  PrefixSet() = default;
  explicit PrefixSet(std::vector<IpPrefix> entries);

  void add(IpPrefix prefix);
  bool contains(const IpAddress& addr) const;
  /// True when some entry contains every address of `prefix`.
  bool covers(const IpPrefix& prefix) const;
  bool empty() const { return entries_.empty(); }
  const std::vector<IpPrefix>& entries() const { return entries_; }

private:
  std::vector<IpPrefix> entries_;
};

}  // namespace nat64scope
