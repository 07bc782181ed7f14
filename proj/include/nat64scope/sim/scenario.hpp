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

// Simulation scenarios.
//
// A scenario is a seed, some global knobs, and cohorts. A cohort stamps out
// `sites`; each site is one network (one AS) holding `members` probes that
// share a resolver and a NAT64. Text format, one `key = value` per line,
// `#` comments:
//
//     seed = 42
//     rounds = 3
//     targets = 4
//     dead_targets = 1
//     trailing_round = true
//     incomplete_rounds = 1
//     repeats = 2
//     path_failure_rate = 0.1
//     silent_hop_rate = 0.1
//     cohort.isp = sites=2 members=3 setup=isp resolver=full_dns64 nat=translating placement=local prefix=custom
//
// Cohort attributes (defaults in brackets):
//     sites [1], members [1]
//     setup       isp | home | standalone                      [standalone]
//     resolver    full_dns64 | ipv4only_arpa_only | no_dns64 | broken   [no_dns64]
//     public_resolver  true | false: probes use a public resolver       [false]
//     nat         none | translating | icmp_opaque              [none]
//     placement   local | remote                                [local]
//     prefix      standard | custom | public                    [standard]
//     prefix_len  32 | 40 | 48 | 56 | 64 | 96 for custom prefixes [96]
//     v4_elsewhere  true: IPv4 is served by another AS            [false]
//     shared_network  true: members share one network prefix      [false]
//     similar_prefixes  true: members split over two resolvers whose
//                 prefixes differ but share a /48                  [false]
//     flaky       true: ping runs alternate pass and fail          [false]
//     near_target true: sits next to the first target              [false]
//     with_public_service  true: the site also holds a probe using a
//                 public DNS64/NAT64 service                       [false]

#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "nat64scope/model.hpp"

namespace nat64scope::sim {

class ScenarioError : public Error {
public:
  using Error::Error;
};

enum class ResolverBehavior { FullDns64, Ipv4OnlyArpaOnly, NoDns64, Broken };
enum class NatBehavior { None, Translating, IcmpOpaque };
enum class Setup { Isp, Home, Standalone };
enum class Placement { Local, Remote };
enum class PrefixChoice { Standard, Custom, Public };

std::string_view to_string(ResolverBehavior b);
std::string_view to_string(NatBehavior b);
std::string_view to_string(Setup s);
std::string_view to_string(Placement p);
std::string_view to_string(PrefixChoice p);

struct Cohort {
  std::string name;
  int sites = 1;
  int members = 1;
  Setup setup = Setup::Standalone;
  ResolverBehavior resolver = ResolverBehavior::NoDns64;
  bool public_resolver = false;
  NatBehavior nat = NatBehavior::None;
  Placement placement = Placement::Local;
  PrefixChoice prefix = PrefixChoice::Standard;
  int prefix_len = 96;
  bool v4_elsewhere = false;
  bool shared_network = false;
  bool similar_prefixes = false;
  bool flaky = false;
  bool near_target = false;
  bool with_public_service = false;

  bool operator==(const Cohort&) const = default;
};

struct Scenario {
  std::uint64_t seed = 42;
  int rounds = 3;  // complete rounds
  int targets = 4;
  int dead_targets = 1;
  bool trailing_round = true;
  int incomplete_rounds = 1;
  int repeats = 2;
  double path_failure_rate = 0.1;
  double silent_hop_rate = 0.1;
  Timestamp start = 1664582400;  // 2022-10-01T00:00:00Z
  Timestamp round_interval = 86400;
  std::vector<Cohort> cohorts;

  int probe_count() const;
  bool operator==(const Scenario&) const = default;
};

/// Throws ScenarioError naming the line for unknown keys, bad values and
/// inconsistent cohorts.
Scenario parse_scenario(std::istream& in);
Scenario load_scenario(const std::filesystem::path& path);
std::string format_scenario(const Scenario& s);

/// Checks cross-field consistency; throws ScenarioError.
void check_scenario(const Scenario& s);

/// Covers resolver {full, arpa-only, none} x nat {translating, opaque} x
/// placement {local, remote} x setup {isp, home}, plus no-NAT, broken,
/// misconfigured, flaky, public-service and similar-prefix cases. Site and
/// member counts vary with the seed; at least `min_probes` probes.
Scenario default_scenario(std::uint64_t seed, int min_probes = 30);

}  // namespace nat64scope::sim
