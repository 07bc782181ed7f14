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

#include "nat64scope/sim/scenario.hpp"

#include <cctype>
#include <charconv>
#include <fstream>
#include <set>
#include <sstream>

#include "nat64scope/addrsynth.hpp"
#include "nat64scope/sim/rng.hpp"

namespace nat64scope::sim {

namespace {

template <typename E, std::size_t N>
std::optional<E> parse_enum(std::string_view s, const E (&all)[N]) {
  for (E e : all) {
    if (to_string(e) == s) return e;
  }
  return std::nullopt;
}

constexpr ResolverBehavior kResolvers[] = {ResolverBehavior::FullDns64,
                                           ResolverBehavior::Ipv4OnlyArpaOnly,
                                           ResolverBehavior::NoDns64, ResolverBehavior::Broken};
constexpr NatBehavior kNats[] = {NatBehavior::None, NatBehavior::Translating,
                                 NatBehavior::IcmpOpaque};
constexpr Setup kSetups[] = {Setup::Isp, Setup::Home, Setup::Standalone};
constexpr Placement kPlacements[] = {Placement::Local, Placement::Remote};
constexpr PrefixChoice kPrefixes[] = {PrefixChoice::Standard, PrefixChoice::Custom,
                                      PrefixChoice::Public};

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

std::string where(int line) { return "scenario line " + std::to_string(line) + ": "; }

template <typename T>
T parse_number(std::string_view v, int line, std::string_view key) {
  T out{};
  auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc{} || p != v.data() + v.size()) {
    throw ScenarioError(where(line) + "bad number for " + std::string(key) + ": '" +
                        std::string(v) + "'");
  }
  return out;
}

double parse_rate(std::string_view v, int line, std::string_view key) {
  double x = 0;
  std::istringstream in{std::string(v)};
  in >> x;
  if (!in || !in.eof()) {
    throw ScenarioError(where(line) + "bad number for " + std::string(key) + ": '" +
                        std::string(v) + "'");
  }
  return x;
}

bool parse_bool(std::string_view v, int line, std::string_view key) {
  if (v == "true") return true;
  if (v == "false") return false;
  throw ScenarioError(where(line) + std::string(key) + " must be true or false, got '" +
                      std::string(v) + "'");
}

template <typename E, std::size_t N>
E parse_named(std::string_view v, const E (&all)[N], int line, std::string_view key) {
  if (auto e = parse_enum(v, all)) return *e;
  std::string names;
  for (E e : all) names += (names.empty() ? "" : ", ") + std::string(to_string(e));
  throw ScenarioError(where(line) + "unknown " + std::string(key) + " '" + std::string(v) +
                      "' (expected one of " + names + ")");
}

Cohort parse_cohort(const std::string& name, std::string_view attrs, int line) {
  Cohort c;
  c.name = name;
  std::istringstream in{std::string(attrs)};
  std::string tok;
  std::set<std::string> seen;
  while (in >> tok) {
    const auto eq = tok.find('=');
    if (eq == std::string::npos) throw ScenarioError(where(line) + "expected key=value, got '" + tok + "'");
    const std::string k = tok.substr(0, eq);
    const std::string v = tok.substr(eq + 1);
    if (!seen.insert(k).second) throw ScenarioError(where(line) + "duplicate attribute " + k);
    if (k == "sites") c.sites = parse_number<int>(v, line, k);
    else if (k == "members") c.members = parse_number<int>(v, line, k);
    else if (k == "setup") c.setup = parse_named(v, kSetups, line, k);
    else if (k == "resolver") c.resolver = parse_named(v, kResolvers, line, k);
    else if (k == "public_resolver") c.public_resolver = parse_bool(v, line, k);
    else if (k == "nat") c.nat = parse_named(v, kNats, line, k);
    else if (k == "placement") c.placement = parse_named(v, kPlacements, line, k);
    else if (k == "prefix") c.prefix = parse_named(v, kPrefixes, line, k);
    else if (k == "prefix_len") c.prefix_len = parse_number<int>(v, line, k);
    else if (k == "v4_elsewhere") c.v4_elsewhere = parse_bool(v, line, k);
    else if (k == "shared_network") c.shared_network = parse_bool(v, line, k);
    else if (k == "similar_prefixes") c.similar_prefixes = parse_bool(v, line, k);
    else if (k == "flaky") c.flaky = parse_bool(v, line, k);
    else if (k == "near_target") c.near_target = parse_bool(v, line, k);
    else if (k == "with_public_service") c.with_public_service = parse_bool(v, line, k);
    else throw ScenarioError(where(line) + "unknown cohort attribute '" + k + "'");
  }
  return c;
}

void check_cohort(const Cohort& c, const std::string& at) {
  auto fail = [&](const std::string& what) {
    throw ScenarioError(at + "cohort " + c.name + ": " + what);
  };
  if (c.name.empty()) fail("empty name");
  for (char ch : c.name) {
    if (!std::isalnum(static_cast<unsigned char>(ch)) && ch != '_' && ch != '-') {
      fail("name may only hold letters, digits, '_' and '-'");
    }
  }
  if (c.sites < 1 || c.members < 1) fail("sites and members must be at least 1");
  if (c.setup == Setup::Home && c.members != 1) fail("a home setup holds exactly one probe");
  if (!is_supported_length(c.prefix_len)) fail("prefix_len must be 32, 40, 48, 56, 64 or 96");
  if (c.prefix != PrefixChoice::Custom && c.prefix_len != 96) {
    fail("prefix_len only applies to custom prefixes");
  }
  if (c.prefix == PrefixChoice::Public) {
    if (!c.public_resolver) fail("a public prefix is handed out by a public resolver");
    if (c.nat != NatBehavior::Translating) fail("the public NAT64 service is translating");
    if (c.resolver != ResolverBehavior::FullDns64 && c.resolver != ResolverBehavior::Ipv4OnlyArpaOnly) {
      fail("a public prefix needs a synthesizing resolver");
    }
  }
  if (c.public_resolver && c.prefix == PrefixChoice::Custom &&
      c.resolver != ResolverBehavior::NoDns64 && c.resolver != ResolverBehavior::Broken) {
    fail("a public DNS64 cannot synthesize a site's custom prefix");
  }
  if (c.similar_prefixes) {
    if (c.prefix != PrefixChoice::Custom || c.prefix_len < 64) {
      fail("similar_prefixes needs a custom /64 or /96 prefix");
    }
    if (c.members < 2) fail("similar_prefixes needs at least two members");
    if (c.public_resolver) fail("similar_prefixes models per-site resolvers");
  }
  if (c.nat == NatBehavior::None && c.placement == Placement::Remote) {
    fail("placement=remote needs a NAT");
  }
}

}  // namespace

std::string_view to_string(ResolverBehavior b) {
  switch (b) {
    case ResolverBehavior::FullDns64: return "full_dns64";
    case ResolverBehavior::Ipv4OnlyArpaOnly: return "ipv4only_arpa_only";
    case ResolverBehavior::NoDns64: return "no_dns64";
    case ResolverBehavior::Broken: return "broken";
  }
  return "?";
}

std::string_view to_string(NatBehavior b) {
  switch (b) {
    case NatBehavior::None: return "none";
    case NatBehavior::Translating: return "translating";
    case NatBehavior::IcmpOpaque: return "icmp_opaque";
  }
  return "?";
}

std::string_view to_string(Setup s) {
  switch (s) {
    case Setup::Isp: return "isp";
    case Setup::Home: return "home";
    case Setup::Standalone: return "standalone";
  }
  return "?";
}

std::string_view to_string(Placement p) {
  return p == Placement::Local ? "local" : "remote";
}

std::string_view to_string(PrefixChoice p) {
  switch (p) {
    case PrefixChoice::Standard: return "standard";
    case PrefixChoice::Custom: return "custom";
    case PrefixChoice::Public: return "public";
  }
  return "?";
}

int Scenario::probe_count() const {
  int n = 0;
  for (const auto& c : cohorts) n += c.sites * (c.members + (c.with_public_service ? 1 : 0));
  return n;
}

void check_scenario(const Scenario& s) {
  if (s.rounds < 1) throw ScenarioError("scenario: rounds must be at least 1");
  if (s.targets < 1) throw ScenarioError("scenario: targets must be at least 1");
  if (s.targets > 20) throw ScenarioError("scenario: at most 20 targets");
  if (s.dead_targets < 0 || s.dead_targets >= s.targets) {
    throw ScenarioError("scenario: dead_targets must leave at least one live target");
  }
  if (s.incomplete_rounds < 0) throw ScenarioError("scenario: incomplete_rounds must be >= 0");
  if (s.incomplete_rounds > 0 && s.targets < 2) {
    throw ScenarioError("scenario: incomplete rounds need at least two targets");
  }
  if (s.repeats < 1) throw ScenarioError("scenario: repeats must be at least 1");
  for (double r : {s.path_failure_rate, s.silent_hop_rate}) {
    if (!(r >= 0.0 && r < 1.0)) throw ScenarioError("scenario: rates must lie in [0, 1)");
  }
  if (s.round_interval <= 0) throw ScenarioError("scenario: round_interval must be positive");
  if (s.cohorts.empty()) throw ScenarioError("scenario: no cohorts");
  std::set<std::string> names;
  for (const auto& c : s.cohorts) {
    check_cohort(c, "scenario: ");
    if (!names.insert(c.name).second) throw ScenarioError("scenario: duplicate cohort " + c.name);
    if (c.flaky && s.repeats < 2) throw ScenarioError("scenario: flaky cohorts need repeats >= 2");
  }
  if (s.probe_count() > 5000) throw ScenarioError("scenario: more than 5000 probes");
}

Scenario parse_scenario(std::istream& in) {
  Scenario s;
  std::set<std::string> seen;
  std::string raw;
  int line = 0;
  while (std::getline(in, raw)) {
    ++line;
    if (auto hash = raw.find('#'); hash != std::string::npos) raw.erase(hash);
    const std::string text = trim(raw);
    if (text.empty()) continue;
    const auto eq = text.find('=');
    if (eq == std::string::npos) throw ScenarioError(where(line) + "expected 'key = value'");
    const std::string key = trim(std::string_view(text).substr(0, eq));
    const std::string value = trim(std::string_view(text).substr(eq + 1));
    if (!seen.insert(key).second) throw ScenarioError(where(line) + "duplicate key " + key);

    if (key.rfind("cohort.", 0) == 0) {
      auto c = parse_cohort(key.substr(7), value, line);
      check_cohort(c, where(line));
      s.cohorts.push_back(std::move(c));
    } else if (key == "seed") s.seed = parse_number<std::uint64_t>(value, line, key);
    else if (key == "rounds") s.rounds = parse_number<int>(value, line, key);
    else if (key == "targets") s.targets = parse_number<int>(value, line, key);
    else if (key == "dead_targets") s.dead_targets = parse_number<int>(value, line, key);
    else if (key == "trailing_round") s.trailing_round = parse_bool(value, line, key);
    else if (key == "incomplete_rounds") s.incomplete_rounds = parse_number<int>(value, line, key);
    else if (key == "repeats") s.repeats = parse_number<int>(value, line, key);
    else if (key == "path_failure_rate") s.path_failure_rate = parse_rate(value, line, key);
    else if (key == "silent_hop_rate") s.silent_hop_rate = parse_rate(value, line, key);
    else if (key == "start") s.start = parse_number<Timestamp>(value, line, key);
    else if (key == "round_interval") s.round_interval = parse_number<Timestamp>(value, line, key);
    else throw ScenarioError(where(line) + "unknown key '" + key + "'");
  }
  check_scenario(s);
  return s;
}

Scenario load_scenario(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ScenarioError("cannot open scenario " + path.string());
  return parse_scenario(in);
}

std::string format_scenario(const Scenario& s) {
  std::ostringstream out;
  out.precision(17);
  out << "seed = " << s.seed << "\n"
      << "rounds = " << s.rounds << "\n"
      << "targets = " << s.targets << "\n"
      << "dead_targets = " << s.dead_targets << "\n"
      << "trailing_round = " << (s.trailing_round ? "true" : "false") << "\n"
      << "incomplete_rounds = " << s.incomplete_rounds << "\n"
      << "repeats = " << s.repeats << "\n"
      << "path_failure_rate = " << s.path_failure_rate << "\n"
      << "silent_hop_rate = " << s.silent_hop_rate << "\n"
      << "start = " << s.start << "\n"
      << "round_interval = " << s.round_interval << "\n";
  auto flag = [&](const char* k, bool v) {
    if (v) out << " " << k << "=true";
  };
  for (const auto& c : s.cohorts) {
    out << "cohort." << c.name << " = sites=" << c.sites << " members=" << c.members
        << " setup=" << to_string(c.setup) << " resolver=" << to_string(c.resolver)
        << " nat=" << to_string(c.nat) << " placement=" << to_string(c.placement)
        << " prefix=" << to_string(c.prefix);
    if (c.prefix_len != 96) out << " prefix_len=" << c.prefix_len;
    flag("public_resolver", c.public_resolver);
    flag("v4_elsewhere", c.v4_elsewhere);
    flag("shared_network", c.shared_network);
    flag("similar_prefixes", c.similar_prefixes);
    flag("flaky", c.flaky);
    flag("near_target", c.near_target);
    flag("with_public_service", c.with_public_service);
    out << "\n";
  }
  return out.str();
}

Scenario default_scenario(std::uint64_t seed, int min_probes) {
  Rng rng(seed);
  Scenario s;
  s.seed = seed;
  s.rounds = rng.between(2, 4);
  s.targets = rng.between(3, 5);

  constexpr int kLengths[] = {32, 40, 48, 56, 64, 96};
  auto add = [&](Cohort c) { s.cohorts.push_back(std::move(c)); };

  // The full cross product of the behaviors that decide groups, locations
  // and traceroute usability.
  for (auto setup : {Setup::Isp, Setup::Home}) {
    for (auto res : {ResolverBehavior::FullDns64, ResolverBehavior::Ipv4OnlyArpaOnly,
                     ResolverBehavior::NoDns64}) {
      for (auto nat : {NatBehavior::Translating, NatBehavior::IcmpOpaque}) {
        for (auto place : {Placement::Local, Placement::Remote}) {
          Cohort c;
          c.name = std::string(to_string(setup)) + "_" + std::string(to_string(res)) + "_" +
                   std::string(to_string(nat)) + "_" + std::string(to_string(place));
          c.setup = setup;
          c.resolver = res;
          c.nat = nat;
          c.placement = place;
          c.sites = setup == Setup::Home ? rng.between(1, 2) : 1;
          c.members = setup == Setup::Home ? 1 : rng.between(1, 3);
          // Without DNS64 only the well-known prefix is discoverable.
          if (res != ResolverBehavior::NoDns64 && rng.chance(0.6)) {
            c.prefix = PrefixChoice::Custom;
            c.prefix_len = kLengths[rng.below(6)];
          }
          c.v4_elsewhere = setup == Setup::Isp && rng.chance(0.3);
          add(std::move(c));
        }
      }
    }
  }

  Cohort plain{.name = "plain", .sites = rng.between(1, 3), .members = rng.between(1, 2)};
  add(plain);

  Cohort broken{.name = "broken", .members = 2, .resolver = ResolverBehavior::Broken};
  add(broken);

  Cohort misconfigured{.name = "misconfigured",
                       .members = rng.between(1, 2),
                       .setup = Setup::Isp,
                       .resolver = ResolverBehavior::Ipv4OnlyArpaOnly,
                       .prefix = PrefixChoice::Custom};
  add(misconfigured);

  Cohort dns64_no_nat{.name = "dns64_without_nat",
                      .members = 1,
                      .resolver = ResolverBehavior::FullDns64};
  add(dns64_no_nat);

  Cohort flaky{.name = "flaky",
               .members = 1,
               .resolver = ResolverBehavior::FullDns64,
               .nat = NatBehavior::Translating,
               .flaky = true};
  add(flaky);

  Cohort service{.name = "public_service",
                 .members = 1,
                 .resolver = ResolverBehavior::FullDns64,
                 .public_resolver = true,
                 .nat = NatBehavior::Translating,
                 .placement = Placement::Remote,
                 .prefix = PrefixChoice::Public};
  add(service);

  Cohort mix{.name = "public_mix", .members = 1, .with_public_service = true};
  add(mix);

  Cohort public_plain{.name = "public_resolver_users",
                      .members = 2,
                      .setup = Setup::Isp,
                      .public_resolver = true,
                      .nat = NatBehavior::Translating};
  add(public_plain);

  Cohort similar{.name = "similar_prefixes",
                 .members = 4,
                 .setup = Setup::Isp,
                 .resolver = ResolverBehavior::FullDns64,
                 .nat = NatBehavior::Translating,
                 .prefix = PrefixChoice::Custom,
                 .similar_prefixes = true};
  add(similar);

  Cohort office{.name = "shared_office",
                .members = 2,
                .setup = Setup::Isp,
                .resolver = ResolverBehavior::FullDns64,
                .nat = NatBehavior::Translating,
                .prefix = PrefixChoice::Custom,
                .shared_network = true};
  add(office);

  Cohort near{.name = "near_target",
              .members = 1,
              .setup = Setup::Isp,
              .resolver = ResolverBehavior::FullDns64,
              .nat = NatBehavior::Translating,
              .near_target = true};
  add(near);

  // Top up with ISP sites until the probe budget is met.
  for (int i = 0; s.probe_count() < min_probes; ++i) {
    Cohort c{.name = "filler" + std::to_string(i),
             .members = rng.between(2, 3),
             .setup = Setup::Isp,
             .resolver = ResolverBehavior::FullDns64,
             .nat = NatBehavior::Translating};
    add(std::move(c));
  }
  check_scenario(s);
  return s;
}

}  // namespace nat64scope::sim
