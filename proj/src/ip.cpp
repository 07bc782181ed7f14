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

#include "nat64scope/ip.hpp"

#include <arpa/inet.h>

#include <algorithm>
#include <charconv>
#include <cstring>

namespace nat64scope {

namespace {

// inet_pton needs a NUL-terminated buffer.
template <std::size_t N>
bool copy_terminated(std::string_view text, std::array<char, N>& buf) {
  if (text.size() >= N) return false;
  std::memcpy(buf.data(), text.data(), text.size());
  buf[text.size()] = '\0';
  return true;
}

}  // namespace

std::optional<Ipv4Address> Ipv4Address::parse(std::string_view text) {
  std::array<char, INET_ADDRSTRLEN> buf{};
  if (!copy_terminated(text, buf)) return std::nullopt;
  Ipv4Address out;
  if (inet_pton(AF_INET, buf.data(), out.octets.data()) != 1) return std::nullopt;
  return out;
}

Ipv4Address Ipv4Address::must_parse(std::string_view text) {
  auto a = parse(text);
  if (!a) throw Error("invalid IPv4 address: " + std::string(text));
  return *a;
}

Ipv4Address Ipv4Address::from_uint(std::uint32_t v) {
  return Ipv4Address{{static_cast<std::uint8_t>(v >> 24), static_cast<std::uint8_t>(v >> 16),
                      static_cast<std::uint8_t>(v >> 8), static_cast<std::uint8_t>(v)}};
}

std::uint32_t Ipv4Address::to_uint() const {
  return (std::uint32_t{octets[0]} << 24) | (std::uint32_t{octets[1]} << 16) |
         (std::uint32_t{octets[2]} << 8) | std::uint32_t{octets[3]};
}

std::string Ipv4Address::to_string() const {
  std::array<char, INET_ADDRSTRLEN> buf{};
  inet_ntop(AF_INET, octets.data(), buf.data(), buf.size());
  return buf.data();
}

std::optional<Ipv6Address> Ipv6Address::parse(std::string_view text) {
  std::array<char, INET6_ADDRSTRLEN> buf{};
  if (!copy_terminated(text, buf)) return std::nullopt;
  Ipv6Address out;
  if (inet_pton(AF_INET6, buf.data(), out.bytes.data()) != 1) return std::nullopt;
  return out;
}

Ipv6Address Ipv6Address::must_parse(std::string_view text) {
  auto a = parse(text);
  if (!a) throw Error("invalid IPv6 address: " + std::string(text));
  return *a;
}

std::string Ipv6Address::to_string() const {
  std::array<char, INET6_ADDRSTRLEN> buf{};
  inet_ntop(AF_INET6, bytes.data(), buf.data(), buf.size());
  return buf.data();
}

Ipv6Address Ipv6Address::masked(int length) const {
  Ipv6Address out = *this;
  for (int i = 0; i < 16; ++i) {
    const int keep = std::clamp(length - i * 8, 0, 8);
    const auto mask = static_cast<std::uint8_t>(keep == 0 ? 0 : 0xff << (8 - keep));
    out.bytes[i] &= mask;
  }
  return out;
}

bool Ipv6Address::same_prefix(const Ipv6Address& other, int length) const {
  return masked(length) == other.masked(length);
}

std::optional<IpAddress> parse_ip(std::string_view text) {
  if (text.find(':') != std::string_view::npos) {
    if (auto a = Ipv6Address::parse(text)) return IpAddress{*a};
    return std::nullopt;
  }
  if (auto a = Ipv4Address::parse(text)) return IpAddress{*a};
  return std::nullopt;
}

IpAddress must_parse_ip(std::string_view text) {
  auto a = parse_ip(text);
  if (!a) throw Error("invalid IP address: " + std::string(text));
  return *a;
}

std::string to_string(const IpAddress& addr) {
  return std::visit([](const auto& a) { return a.to_string(); }, addr);
}

std::optional<IpPrefix> IpPrefix::parse(std::string_view text) {
  const auto slash = text.find('/');
  if (slash == std::string_view::npos) return std::nullopt;
  auto base = parse_ip(text.substr(0, slash));
  if (!base) return std::nullopt;
  int len = -1;
  const auto digits = text.substr(slash + 1);
  auto [ptr, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), len);
  if (ec != std::errc{} || ptr != digits.data() + digits.size()) return std::nullopt;
  IpPrefix p{*base, len};
  if (len < 0 || len > p.max_length()) return std::nullopt;
  return p;
}

std::optional<IpPrefix> IpPrefix::parse_address_or_prefix(std::string_view text) {
  if (text.find('/') != std::string_view::npos) return parse(text);
  auto base = parse_ip(text);
  if (!base) return std::nullopt;
  IpPrefix p{*base, 0};
  p.length = p.max_length();
  return p;
}

bool IpPrefix::contains(const IpAddress& addr) const {
  if (addr.index() != base.index()) return false;
  if (const auto* v6 = std::get_if<Ipv6Address>(&addr)) {
    return v6->same_prefix(std::get<Ipv6Address>(base), length);
  }
  const std::uint32_t mask = length == 0 ? 0 : ~std::uint32_t{0} << (32 - length);
  return (std::get<Ipv4Address>(addr).to_uint() & mask) ==
         (std::get<Ipv4Address>(base).to_uint() & mask);
}

std::string IpPrefix::to_string() const {
  return nat64scope::to_string(base) + "/" + std::to_string(length);
}

PrefixSet::PrefixSet(std::vector<IpPrefix> entries) : entries_(std::move(entries)) {}

void PrefixSet::add(IpPrefix prefix) { entries_.push_back(std::move(prefix)); }

bool PrefixSet::contains(const IpAddress& addr) const {
  return std::any_of(entries_.begin(), entries_.end(),
                     [&](const IpPrefix& p) { return p.contains(addr); });
}

bool PrefixSet::covers(const IpPrefix& prefix) const {
  return std::any_of(entries_.begin(), entries_.end(), [&](const IpPrefix& p) {
    return p.length <= prefix.length && p.contains(prefix.base);
  });
}

}  // namespace nat64scope
