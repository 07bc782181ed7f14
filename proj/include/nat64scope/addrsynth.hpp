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

// IPv4-embedded IPv6 addresses (RFC 6052 layouts).
//
// For a /96 prefix the IPv4 address occupies the last 32 bits. For the
// shorter prefixes it follows the prefix directly, except that bits 64..71
// (the "u" octet) are reserved and always zero, so the embedded bytes skip
// byte 8. Bits after the embedded address form the suffix and are zero.
//
//   /32  PPPP VVVV u--- ----
//   /40  PPPP PVVV uV-- ----
//   /48  PPPP PPVV uVV- ----
//   /56  PPPP PPPV uVVV ----
//   /64  PPPP PPPP uVVV V---
//   /96  PPPP PPPP PPPP VVVV

#pragma once

#include <array>
#include <span>

#include "nat64scope/model.hpp"

namespace nat64scope {

inline constexpr std::array<int, 6> kEmbeddingLengths{32, 40, 48, 56, 64, 96};

class InvalidPrefix : public Error {
public:
  using Error::Error;
};
class PrefixMismatch : public Error {
public:
  using Error::Error;
};
class NoEmbeddingFound : public Error {
public:
  using Error::Error;
};

bool is_supported_length(int length);

/// Byte offsets, in order, that carry the four IPv4 octets for `length`.
std::array<int, 4> embedding_offsets(int length);

Ipv6Address synthesize(const Nat64Prefix& prefix, const Ipv4Address& v4);

/// Inverse of synthesize. Throws PrefixMismatch when `v6` is outside `prefix`.
Ipv4Address extract(const Nat64Prefix& prefix, const Ipv6Address& v6);

bool matches_prefix(const Ipv6Address& v6, const Nat64Prefix& prefix);
bool matches_prefix(const IpAddress& addr, const Nat64Prefix& prefix);

/// 192.0.0.170 and 192.0.0.171, the addresses of ipv4only.arpa.
std::span<const Ipv4Address> ipv4only_arpa_addresses();

/// Finds the prefix a DNS64 used to synthesize `aaaa` from one of `known`.
/// Lengths are tried /96 first, then from longest to shortest; non-/96
/// layouts also require a zero u octet and zero suffix. The result is
/// Standard for 64:ff9b::/96 and Custom otherwise. Throws NoEmbeddingFound.
Nat64Prefix derive_prefix_from_answer(const Ipv6Address& aaaa, std::span<const Ipv4Address> known);
std::optional<Nat64Prefix> try_derive_prefix(const Ipv6Address& aaaa,
                                             std::span<const Ipv4Address> known);

}  // namespace nat64scope
