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

#include <cstdint>
#include <random>

#include "doctest.h"

#include "nat64scope/addrsynth.hpp"
#include "nat64scope/model.hpp"

using namespace nat64scope;

namespace {

Nat64Prefix prefix(const char* text) { return *parse_nat64_prefix(text); }

// Bit-level embedding: prefix bits, then the 32 IPv4 bits written from
// bit `length` on, jumping over bits 64..71.
Ipv6Address embed_bits(const Ipv6Address& base, int length, std::uint32_t v4) {
  Ipv6Address out{};
  auto set = [&](int i, bool b) {
    if (b) out.bytes[i / 8] |= static_cast<std::uint8_t>(0x80 >> (i % 8));
  };
  for (int i = 0; i < length; ++i) set(i, base.bit(i));
  int pos = length;
  for (int k = 31; k >= 0; --k) {
    if (pos == 64 && length != 96) pos = 72;
    set(pos++, (v4 >> k) & 1);
  }
  return out;
}

}  // namespace

TEST_CASE("standard prefix vector") {
  const auto v6 = synthesize(Nat64Prefix::standard(), Ipv4Address::must_parse("91.201.7.243"));
  CHECK(v6.to_string() == "64:ff9b::5bc9:7f3");
  CHECK(extract(Nat64Prefix::standard(), v6).to_string() == "91.201.7.243");
}

TEST_CASE("embedding layouts for 192.0.2.33") {
  const auto v4 = Ipv4Address::must_parse("192.0.2.33");
  CHECK(synthesize(prefix("2001:db8::/32"), v4).to_string() == "2001:db8:c000:221::");
  CHECK(synthesize(prefix("2001:db8:100::/40"), v4).to_string() == "2001:db8:1c0:2:21::");
  CHECK(synthesize(prefix("2001:db8:122::/48"), v4).to_string() == "2001:db8:122:c000:2:2100::");
  CHECK(synthesize(prefix("2001:db8:122:300::/56"), v4).to_string() == "2001:db8:122:3c0:0:221::");
  CHECK(synthesize(prefix("2001:db8:122:344::/64"), v4).to_string() == "2001:db8:122:344:c0:2:2100:0");
  CHECK(synthesize(prefix("2001:db8:122:344::/96"), v4).to_string() == "2001:db8:122:344::c000:221");
}

TEST_CASE("/32 layout agrees with the bit-level embedding") {
  const auto base = Ipv6Address::must_parse("2001:db8::");
  const auto v4 = Ipv4Address::must_parse("91.201.7.243");
  const auto want = embed_bits(base, 32, v4.to_uint());
  CHECK(synthesize(prefix("2001:db8::/32"), v4) == want);
  CHECK(want.to_string() == "2001:db8:5bc9:7f3::");
}

TEST_CASE("every layout agrees with the bit-level embedding") {
  std::mt19937_64 rng(11);
  for (int length : kEmbeddingLengths) {
    for (int i = 0; i < 500; ++i) {
      Ipv6Address base;
      for (auto& b : base.bytes) b = static_cast<std::uint8_t>(rng());
      base.bytes[8] = 0;
      base = base.masked(length);
      const auto v4 = Ipv4Address::from_uint(static_cast<std::uint32_t>(rng()));
      REQUIRE(synthesize(Nat64Prefix{base, length, PrefixKind::Custom}, v4) ==
              embed_bits(base, length, v4.to_uint()));
    }
  }
}

TEST_CASE("unsupported lengths and mismatched addresses raise") {
  CHECK_THROWS_AS(synthesize(Nat64Prefix{Ipv6Address::must_parse("2001:db8::"), 80, PrefixKind::Custom},
                             Ipv4Address::must_parse("192.0.2.1")),
                  InvalidPrefix);
  CHECK_THROWS_AS(embedding_offsets(33), InvalidPrefix);
  CHECK_THROWS_AS(extract(Nat64Prefix::standard(), Ipv6Address::must_parse("2001:db8::c000:201")),
                  PrefixMismatch);
  CHECK_FALSE(is_supported_length(128));
}

TEST_CASE("prefix membership looks at prefix bits only") {
  const auto p = prefix("2001:db8:122:344::/64");
  CHECK(matches_prefix(Ipv6Address::must_parse("2001:db8:122:344:c0:2:2100:0"), p));
  CHECK(matches_prefix(Ipv6Address::must_parse("2001:db8:122:344:c0:2:2100:1"), p));
  CHECK_FALSE(matches_prefix(Ipv6Address::must_parse("2001:db8:122:345::"), p));
  CHECK_FALSE(matches_prefix(IpAddress{Ipv4Address::must_parse("192.0.2.1")}, p));
}

TEST_CASE("discovery needs a zero u octet and suffix outside /96") {
  const auto known = ipv4only_arpa_addresses();
  CHECK(try_derive_prefix(Ipv6Address::must_parse("2001:db8:122:344:c0:0:aa00:0"), known));
  CHECK_FALSE(try_derive_prefix(Ipv6Address::must_parse("2001:db8:122:344:c0:0:aa00:1"), known));
  CHECK_FALSE(try_derive_prefix(Ipv6Address::must_parse("2001:db8:122:344:1c0:0:aa00:0"), known));
}

TEST_CASE("prefix discovery from ipv4only.arpa answers") {
  const auto known = ipv4only_arpa_addresses();
  REQUIRE(known.size() == 2);
  CHECK(known[0].to_string() == "192.0.0.170");
  CHECK(known[1].to_string() == "192.0.0.171");

  const auto got = derive_prefix_from_answer(Ipv6Address::must_parse("64:ff9b::c000:aa"), known);
  CHECK(got.same_network(Nat64Prefix::standard()));
  CHECK(got.kind == PrefixKind::Standard);

  const auto custom = derive_prefix_from_answer(Ipv6Address::must_parse("2001:db8:64::c000:ab"), known);
  CHECK(custom.to_string() == "2001:db8:64::/96");
  CHECK(custom.kind == PrefixKind::Custom);

  const auto p48 = derive_prefix_from_answer(
      synthesize(prefix("2001:db8:122::/48"), known[0]), known);
  CHECK(p48.to_string() == "2001:db8:122::/48");

  CHECK_THROWS_AS(derive_prefix_from_answer(Ipv6Address::must_parse("2001:db8::1"), known),
                  NoEmbeddingFound);
  CHECK_FALSE(try_derive_prefix(Ipv6Address::must_parse("2001:db8::1"), known));
  CHECK_THROWS_AS(derive_prefix_from_answer(Ipv6Address::must_parse("64:ff9b::c000:aa"), {}),
                  NoEmbeddingFound);
}
