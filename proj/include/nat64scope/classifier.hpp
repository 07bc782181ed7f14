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

// Deployment classification: ISP-provided vs local NAT64 setups, probe
// categories, and the curated AS categories.

#pragma once

#include <filesystem>
#include <iosfwd>
#include <map>
#include <set>
#include <span>
#include <vector>

#include "nat64scope/detector.hpp"
#include "nat64scope/model.hpp"
#include "nat64scope/pathlab.hpp"

namespace nat64scope {

enum class AsCategory { OtherIsp, ResidentialIsp, Hobbyist, Academic, Other, Unknown };
std::string_view to_string(AsCategory c);
std::optional<AsCategory> parse_as_category(std::string_view s);

/// Curated `asn,category` mapping. Unlisted ASes are Unknown.
class AsCategoryMap {
public:
  void set(Asn asn, AsCategory c) { map_[asn] = c; }
  AsCategory category(Asn asn) const;
  std::size_t size() const { return map_.size(); }

  static AsCategoryMap parse(std::istream& in);
  static AsCategoryMap load(const std::filesystem::path& path);

private:
  std::map<Asn, AsCategory> map_;
};

/// Evidence that an AS's default resolver is a DNS64.
struct IspEvidence {
  Asn asn = 0;
  bool is_isp_dns64 = false;
  std::optional<IpAddress> resolver;
  std::vector<ProbeId> witnesses;  // probes that passed a DNS test via `resolver`
  /// Probes in the AS with any DNS run; one means the test cannot fire.
  std::size_t probes_tested = 0;
  /// Several distinct but similar (same /48) prefixes seen in the AS, as
  /// with redundant DNS64s behind per-probe resolvers.
  bool multiple_similar_prefixes_per_as = false;
};

/// Per IPv6 AS: true when at least two probes passed DNS tests via the same
/// resolver and their network prefixes differ. Probes without a known
/// network prefix count as distinct.
std::map<Asn, IspEvidence> detect_isp_dns64(std::span<const ProbeRecord> probes,
                                            std::span<const TestRun> dns_runs);

/// Median RTT to the first hop inside `prefix`, minimised over paths.
/// Throws NoNatHop when no path has a responding hop in the prefix.
double nat_hop_rtt(std::span<const TraceroutePath> nat_paths, const Nat64Prefix& prefix);

/// True iff nat_hop_rtt < threshold_ms.
bool detect_local_nat64(std::span<const TraceroutePath> nat_paths, const Nat64Prefix& prefix,
                        double threshold_ms = 2.0);

enum class ProbeCategory {
  IspDns64,
  AsWithDns64,
  HomeSetup,
  PublicResolverOnly,
  PublicService,
  RemoteNat64,
  NoTracerouteThroughNat,
  Unknown,
};
std::string_view to_string(ProbeCategory c);

enum class TracerouteUsability { Usable, NoNatHop, NotMeasured };

struct CategoryInputs {
  DetectionGroup group = DetectionGroup::Inconclusive;
  GroupFlags flags;
  const IspEvidence* isp = nullptr;  // evidence for the probe's IPv6 AS
  std::vector<IpAddress> resolvers_used;
  const PrefixSet* public_resolvers = nullptr;
  bool any_ping_passed = false;
  std::vector<NatLocation> nat_locations;  // one per usable prefix
  TracerouteUsability traceroute = TracerouteUsability::NotMeasured;
  /// Operator annotation; home setups cannot be measured.
  bool home_setup = false;
};

/// Non-empty set of categories; Unknown only when nothing else applies.
std::set<ProbeCategory> categorize_probe(const CategoryInputs& in);

// ---- whole-dataset classification ------------------------------------------

/// What traceroutes say about one working prefix of a probe.
struct PrefixPlacement {
  Nat64Prefix prefix;
  TracerouteUsability traceroute = TracerouteUsability::NotMeasured;
  std::optional<Asn> nat_as;
  std::optional<NatLocation> location;
  std::optional<double> nat_hop_rtt_ms;
  std::optional<bool> local_nat;  // nat_hop_rtt_ms below the threshold
};

struct ProbeClassification {
  ProbeId probe_id;
  DetectionGroup group = DetectionGroup::Inconclusive;
  std::optional<Asn> asn_v6;
  AsCategory as_category = AsCategory::Unknown;
  std::set<ProbeCategory> categories;
  std::vector<PrefixPlacement> prefixes;
};

struct AsCategoryCounts {
  int ases = 0;
  int probes = 0;
};

struct ClassificationReport {
  /// NAT64-reachable probes only (NAT64+DNS64 and NAT64-only), by probe id.
  std::vector<ProbeClassification> probes;
  std::map<Asn, IspEvidence> evidence;
  std::map<ProbeCategory, int> category_counts;
  std::map<AsCategory, AsCategoryCounts> as_table;
  std::vector<std::string> warnings;
};

struct ClassifyContext {
  std::span<const ProbeRecord> probes;
  std::span<const TestRun> runs;
  std::span<const TraceroutePath> paths;
  const Ip2AsTable* ip2as = nullptr;
  const AsCategoryMap* as_categories = nullptr;
  const PrefixSet* public_resolvers = nullptr;
  double local_threshold_ms = 2.0;
};

ClassificationReport classify_all(const DetectionReport& detection, const ClassifyContext& ctx);

/// Group and location lookups for the path breakdowns.
Groupings make_groupings(const DetectionReport& detection, const ClassificationReport& classes,
                         std::span<const ProbeRecord> probes);

}  // namespace nat64scope
