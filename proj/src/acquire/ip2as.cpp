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

#include "nat64scope/acquire/ip2as.hpp"

#include <charconv>
#include <fstream>
#include <sstream>
#include <string>

#include "nat64scope/acquire/lists.hpp"

namespace nat64scope {

namespace {

std::uint32_t mask_v4(std::uint32_t v, int length) {
  return length == 0 ? 0 : v & (~std::uint32_t{0} << (32 - length));
}

}  // namespace

void Ip2AsTable::add(const IpPrefix& prefix, Asn asn) {
  auto insert = [&](auto& map, auto key) {
    auto [it, fresh] = map.try_emplace(key, asn);
    if (!fresh && asn < it->second) it->second = asn;
    return fresh;
  };
  bool fresh;
  if (const auto* v4 = std::get_if<Ipv4Address>(&prefix.base)) {
    fresh = insert(v4_[prefix.length], mask_v4(v4->to_uint(), prefix.length));
  } else {
    fresh = insert(v6_[prefix.length], std::get<Ipv6Address>(prefix.base).masked(prefix.length));
  }
  if (fresh) entries_.push_back(prefix);
}

std::optional<Asn> Ip2AsTable::lookup_upto(const IpAddress& addr, int max_length) const {
  if (const auto* v4 = std::get_if<Ipv4Address>(&addr)) {
    for (const auto& [len, nets] : v4_) {
      if (len > max_length) continue;
      if (auto it = nets.find(mask_v4(v4->to_uint(), len)); it != nets.end()) return it->second;
    }
    return std::nullopt;
  }
  const auto& v6 = std::get<Ipv6Address>(addr);
  for (const auto& [len, nets] : v6_) {
    if (len > max_length) continue;
    if (auto it = nets.find(v6.masked(len)); it != nets.end()) return it->second;
  }
  return std::nullopt;
}

std::optional<Asn> Ip2AsTable::lookup(const IpAddress& addr) const {
  return lookup_upto(addr, 128);
}

std::optional<Asn> Ip2AsTable::lookup_covering(const IpPrefix& prefix) const {
  return lookup_upto(prefix.base, prefix.length);
}

std::vector<std::pair<IpPrefix, Asn>> Ip2AsTable::entries() const {
  std::vector<std::pair<IpPrefix, Asn>> out;
  out.reserve(entries_.size());
  for (const auto& p : entries_) out.emplace_back(p, *lookup_covering(p));
  return out;
}

Ip2AsTable Ip2AsTable::parse(std::istream& in) {
  Ip2AsTable table;
  int lineno = 0;
  for (const auto& line : read_list_lines(in, &lineno)) {
    std::istringstream fields(line.text);
    std::string prefix_text, asn_text;
    fields >> prefix_text >> asn_text;
    auto prefix = IpPrefix::parse_address_or_prefix(prefix_text);
    Asn asn = 0;
    if (!asn_text.empty() && (asn_text[0] == 'A' || asn_text[0] == 'a')) asn_text.erase(0, 2);
    auto [ptr, ec] = std::from_chars(asn_text.data(), asn_text.data() + asn_text.size(), asn);
    if (!prefix || asn_text.empty() || ec != std::errc{} ||
        ptr != asn_text.data() + asn_text.size()) {
      throw ListFormatError("ip2as line " + std::to_string(line.number) + ": expected `prefix asn`");
    }
    table.add(*prefix, asn);
  }
  return table;
}

Ip2AsTable Ip2AsTable::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ListFormatError("cannot open ip2as file " + path.string());
  return parse(in);
}

}  // namespace nat64scope
