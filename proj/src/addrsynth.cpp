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

#include "nat64scope/addrsynth.hpp"

#include <algorithm>

namespace nat64scope {

namespace {

constexpr int kReservedByte = 8;

// /96 first, then the remaining layouts from longest to shortest.
constexpr std::array<int, 6> kSearchOrder{96, 64, 56, 48, 40, 32};

void require_supported(int length) {
  if (!is_supported_length(length)) {
    throw InvalidPrefix("unsupported NAT64 prefix length /" + std::to_string(length));
  }
}

bool reserved_and_suffix_zero(const Ipv6Address& v6, int length) {
  if (length == 96) return true;
  const auto offsets = embedding_offsets(length);
  for (int i = kReservedByte; i < 16; ++i) {
    if (std::find(offsets.begin(), offsets.end(), i) == offsets.end() && v6.bytes[i] != 0) {
      return false;
    }
  }
  return true;
}

}  // namespace

bool is_supported_length(int length) {
  return std::find(kEmbeddingLengths.begin(), kEmbeddingLengths.end(), length) !=
         kEmbeddingLengths.end();
}

std::array<int, 4> embedding_offsets(int length) {
  require_supported(length);
  std::array<int, 4> out{};
  int pos = length / 8;
  for (int& o : out) {
    if (pos == kReservedByte && length != 96) ++pos;
    o = pos++;
  }
  return out;
}

Ipv6Address synthesize(const Nat64Prefix& prefix, const Ipv4Address& v4) {
  const auto offsets = embedding_offsets(prefix.length);
  Ipv6Address out = prefix.base.masked(prefix.length);
  for (int i = 0; i < 4; ++i) out.bytes[offsets[i]] = v4.octets[i];
  return out;
}

Ipv4Address extract(const Nat64Prefix& prefix, const Ipv6Address& v6) {
  const auto offsets = embedding_offsets(prefix.length);
  if (!matches_prefix(v6, prefix)) {
    throw PrefixMismatch(v6.to_string() + " is not within " + prefix.to_string());
  }
  Ipv4Address out;
  for (int i = 0; i < 4; ++i) out.octets[i] = v6.bytes[offsets[i]];
  return out;
}

bool matches_prefix(const Ipv6Address& v6, const Nat64Prefix& prefix) {
  return v6.same_prefix(prefix.base, prefix.length);
}

bool matches_prefix(const IpAddress& addr, const Nat64Prefix& prefix) {
  const auto* v6 = std::get_if<Ipv6Address>(&addr);
  return v6 != nullptr && matches_prefix(*v6, prefix);
}

std::span<const Ipv4Address> ipv4only_arpa_addresses() {
  static const std::array<Ipv4Address, 2> kWellKnown{
      Ipv4Address{{192, 0, 0, 170}},
      Ipv4Address{{192, 0, 0, 171}},
  };
  return kWellKnown;
}

std::optional<Nat64Prefix> try_derive_prefix(const Ipv6Address& aaaa,
                                             std::span<const Ipv4Address> known) {
  for (int length : kSearchOrder) {
    if (!reserved_and_suffix_zero(aaaa, length)) continue;
    const auto offsets = embedding_offsets(length);
    Ipv4Address window;
    for (int i = 0; i < 4; ++i) window.octets[i] = aaaa.bytes[offsets[i]];
    if (std::find(known.begin(), known.end(), window) == known.end()) continue;

    Nat64Prefix p{aaaa.masked(length), length, PrefixKind::Custom};
    if (p.same_network(Nat64Prefix::standard())) p.kind = PrefixKind::Standard;
    return p;
  }
  return std::nullopt;
}

Nat64Prefix derive_prefix_from_answer(const Ipv6Address& aaaa,
                                      std::span<const Ipv4Address> known) {
  if (known.empty()) throw NoEmbeddingFound("no known IPv4 addresses supplied");
  if (auto p = try_derive_prefix(aaaa, known)) return *p;
  throw NoEmbeddingFound("no embedded IPv4 address found in " + aaaa.to_string());
}

}  // namespace nat64scope
