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

#include "nat64scope/acquire/lists.hpp"

#include <fstream>
#include <istream>

namespace nat64scope {

std::vector<ListLine> read_list_lines(std::istream& in, int* last_line) {
  std::vector<ListLine> out;
  std::string line;
  int n = 0;
  while (std::getline(in, line)) {
    ++n;
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos) continue;
    const auto last = line.find_last_not_of(" \t\r");
    out.push_back({n, line.substr(first, last - first + 1)});
  }
  if (last_line) *last_line = n;
  return out;
}

PrefixSet parse_prefix_list(std::istream& in) {
  PrefixSet set;
  for (const auto& line : read_list_lines(in)) {
    auto p = IpPrefix::parse_address_or_prefix(line.text);
    if (!p) {
      throw ListFormatError("line " + std::to_string(line.number) + ": not an address or prefix: " +
                            line.text);
    }
    set.add(*p);
  }
  return set;
}

PrefixSet load_prefix_list(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ListFormatError("cannot open list file " + path.string());
  return parse_prefix_list(in);
}

}  // namespace nat64scope
