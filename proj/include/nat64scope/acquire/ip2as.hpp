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

#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <utility>
#include <vector>

#include "nat64scope/ip.hpp"

namespace nat64scope {

/// Prefix to origin-AS table with longest-prefix-match lookup. When the
/// same prefix is listed with several origins the lowest AS wins.
///
/// File format: one `prefix asn` per line, `#` starts a comment.
///
///     91.201.7.0/24 12345
///     2001:db8::/32 64500   # documentation space
class Ip2AsTable {
public:
  void add(const IpPrefix& prefix, Asn asn);

  std::optional<Asn> lookup(const IpAddress& addr) const;
  /// Longest entry that contains all of `prefix` (entry length <= prefix length).
  std::optional<Asn> lookup_covering(const IpPrefix& prefix) const;

  std::size_t size() const { return entries_.size(); }
  /// Entries in insertion order, after de-duplication.
  std::vector<std::pair<IpPrefix, Asn>> entries() const;

  static Ip2AsTable parse(std::istream& in);
  static Ip2AsTable load(const std::filesystem::path& path);

private:
  std::optional<Asn> lookup_upto(const IpAddress& addr, int max_length) const;

  // length -> masked network -> asn; iterated from the longest length.
  std::map<int, std::map<std::uint32_t, Asn>, std::greater<>> v4_;
  std::map<int, std::map<Ipv6Address, Asn>, std::greater<>> v6_;
  std::vector<IpPrefix> entries_;
};

}  // namespace nat64scope
