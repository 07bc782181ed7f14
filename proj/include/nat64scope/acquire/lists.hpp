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

// Plain-text list files: one entry per line, `#` comments, blank lines ignored.

#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "nat64scope/ip.hpp"

namespace nat64scope {

class ListFormatError : public Error {
public:
  using Error::Error;
};

struct ListLine {
  int number = 0;
  std::string text;  // comment stripped, whitespace trimmed
};

std::vector<ListLine> read_list_lines(std::istream& in, int* last_line = nullptr);

/// Public resolver / public NAT64 lists: one address or prefix per line.
PrefixSet parse_prefix_list(std::istream& in);
PrefixSet load_prefix_list(const std::filesystem::path& path);

}  // namespace nat64scope
