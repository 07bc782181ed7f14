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

#include "nat64scope/cli/commands.hpp"

#include <fstream>
#include <sstream>

#include "nat64scope/acquire/atlas.hpp"
#include "nat64scope/acquire/atlas_client.hpp"
#include "nat64scope/acquire/dataset.hpp"
#include "nat64scope/cli/live.hpp"
#include "nat64scope/pathlab.hpp"
#include "nat64scope/report.hpp"
#include "nat64scope/sim/generate.hpp"
#include "nat64scope/sim/scenario.hpp"

namespace nat64scope::cli {

namespace fs = std::filesystem;

namespace {

DatasetFile require_dataset(const RunConfig& c, const char* command) {
  if (!c.dataset) {
    throw ConfigError(std::string(command) + ": no dataset; pass --from-dataset or set \"dataset\"");
  }
  return load_dataset(*c.dataset);
}

GroupPolicy policy_of(const Inputs& in) { return GroupPolicy{in.public_nat64, in.public_resolvers}; }

ClassificationReport classify(const DetectionReport& detection, const DatasetFile& ds,
                              const RunConfig& c, const Inputs& in) {
  ClassifyContext ctx;
  ctx.probes = ds.probes;
  ctx.runs = ds.runs;
  ctx.paths = ds.paths;
  ctx.ip2as = in.ip2as ? &*in.ip2as : nullptr;
  ctx.as_categories = &in.as_categories;
  ctx.public_resolvers = &in.public_resolvers;
  ctx.local_threshold_ms = c.local_nat_threshold_ms;
  return classify_all(detection, ctx);
}

void write_detection(const DetectionReport& r, const fs::path& dir) {
  write_json_file(dir / OutputFiles::detection_json, detection_json(r));
  write_text_file(dir / OutputFiles::detection_probes, detection_probes_csv(r));
  write_text_file(dir / OutputFiles::detection_table, detection_table_csv(r));
  write_text_file(dir / OutputFiles::group_counts, group_counts_csv(r));
}

void log_groups(const DetectionReport& r, std::ostream& log) {
  log << "probes: " << r.probes.size() << '\n';
  for (const auto& [g, n] : r.group_counts) log << "  " << to_string(g) << ": " << n << '\n';
}

}  // namespace

RunConfig effective_config(const GlobalOptions& g) {
  RunConfig c = g.config ? load_run_config(*g.config) : RunConfig{};
  if (g.from_dataset) {
    if (!fs::is_regular_file(*g.from_dataset)) {
      throw ConfigError("dataset not found: " + g.from_dataset->string());
    }
    c.dataset = *g.from_dataset;
  }
  if (g.out) c.out_dir = *g.out;
  if (g.concurrency) {
    if (*g.concurrency < 1) throw ConfigError("--concurrency must be at least 1");
    c.concurrency = *g.concurrency;
  }
  if (g.exclude_ttl_anomaly) c.exclude_ttl_anomaly = true;
  check_files(c);
  return c;
}

int cmd_detect(const GlobalOptions& g, std::ostream& log, const std::atomic<bool>* stop) {
  const RunConfig c = effective_config(g);
  const Inputs in = load_inputs(c);
  fs::create_directories(c.out_dir);

  if (c.dataset) {
    const DatasetFile ds = load_dataset(*c.dataset);
    const auto report = detect_all(ds.runs, policy_of(in));
    write_detection(report, c.out_dir);
    log_groups(report, log);
    return kExitOk;
  }

  if (c.resolvers.empty()) {
    throw ConfigError("detect: no dataset and no resolvers configured for a live run");
  }
  LiveOptions o;
  o.probe_id = c.probe_id;
  o.resolvers = c.resolvers;
  o.dns2_name = c.dns2_name;
  o.dns2_a_records = c.dns2_a_records;
  o.ping_target = c.ping_target;
  o.repeat = c.repeat;
  o.concurrency = c.concurrency;
  o.dns_timeout = std::chrono::milliseconds(c.dns_timeout_ms);
  if (o.dns2_a_records.empty()) {
    const auto a = dns_query(c.resolvers.front(), c.dns2_name, RecordType::A, o.dns_timeout);
    if (a.a.empty()) {
      throw Error("detect: cannot resolve the A records of " + c.dns2_name +
                  "; set dns2_a_records in the config");
    }
    o.dns2_a_records = a.a;
  }

  RawIcmpv6Transport echo;
  const auto live = run_live_tests(o, echo, stop);

  DatasetFile ds;
  ds.header.source = "live " + c.probe_id;
  ds.probes.push_back(live_probe_record(o));
  ds.runs = live.runs;
  if (!ds.runs.empty()) {
    auto [lo, hi] = std::minmax_element(ds.runs.begin(), ds.runs.end(),
                                        [](const TestRun& a, const TestRun& b) {
                                          return a.timestamp < b.timestamp;
                                        });
    ds.header.window_start = lo->timestamp;
    ds.header.window_end = hi->timestamp + 1;
  }
  save_dataset(c.out_dir / OutputFiles::dataset, ds);
  const auto report = detect_all(ds.runs, policy_of(in));
  write_detection(report, c.out_dir);
  log_groups(report, log);
  if (live.interrupted) {
    log << "interrupted: partial results written to " << c.out_dir.string() << '\n';
    return kExitInterrupted;
  }
  return kExitOk;
}

int cmd_classify(const GlobalOptions& g, std::ostream& log) {
  const RunConfig c = effective_config(g);
  const Inputs in = load_inputs(c);
  const fs::path det_path = c.out_dir / OutputFiles::detection_json;
  if (!fs::is_regular_file(det_path)) {
    throw ConfigError("classify: " + det_path.string() + " not found; run detect first");
  }
  std::ifstream det_in(det_path);
  auto det_json = nlohmann::json::parse(det_in, nullptr, false);
  if (det_json.is_discarded()) throw Error("classify: " + det_path.string() + " is not valid JSON");
  const DetectionReport detection = detection_from_json(det_json);
  const DatasetFile ds = require_dataset(c, "classify");

  const auto report = classify(detection, ds, c, in);
  write_json_file(c.out_dir / OutputFiles::classification_json, classification_json(report));
  write_text_file(c.out_dir / OutputFiles::classification_probes, classification_probes_csv(report));
  write_text_file(c.out_dir / OutputFiles::isp_evidence, isp_evidence_csv(report));
  write_text_file(c.out_dir / OutputFiles::as_category_table, as_category_csv(report));
  write_text_file(c.out_dir / OutputFiles::probe_categories, probe_category_csv(report));

  log << "classified probes: " << report.probes.size() << '\n';
  for (const auto& [cat, n] : report.category_counts) log << "  " << to_string(cat) << ": " << n << '\n';
  for (const auto& w : report.warnings) log << "warning: " << w << '\n';
  return kExitOk;
}

int cmd_paths(const GlobalOptions& g, std::ostream& log) {
  const RunConfig c = effective_config(g);
  const Inputs in = load_inputs(c);
  const DatasetFile ds = require_dataset(c, "paths");
  fs::create_directories(c.out_dir);
  if (ds.paths.empty()) log << "warning: the dataset holds no traceroutes\n";

  const auto detection = detect_all(ds.runs, policy_of(in));
  const auto classes = classify(detection, ds, c, in);
  const auto groupings = make_groupings(detection, classes, ds.probes);

  FilterConfig filter;
  filter.drop_final_round = c.drop_final_round;
  if (!c.targets.empty()) filter.expected_targets = c.targets;
  filter.exclude_ttl_anomaly = c.exclude_ttl_anomaly;
  const auto report = analyze_paths(ds.paths, filter, in.ip2as ? &*in.ip2as : nullptr, groupings);

  write_json_file(c.out_dir / OutputFiles::paths_json, paths_json(report));
  write_text_file(c.out_dir / OutputFiles::pairs, pairs_csv(report));
  write_text_file(c.out_dir / OutputFiles::exclusions, exclusions_csv(report));
  write_text_file(c.out_dir / OutputFiles::stats, stats_csv(report.stats));
  write_text_file(c.out_dir / OutputFiles::missing_histogram, missing_histogram_csv(report.stats));

  log << "pairs formed: " << report.pairing.pairs.size() << ", kept: " << report.filtered.kept.size()
      << ", unpaired paths: " << report.pairing.unpaired.size() << '\n';
  for (const auto& [reason, n] : report.filtered.counts()) {
    log << "  excluded " << to_string(reason) << ": " << n << '\n';
  }
  if (report.filtered.kept.empty()) {
    log << "no pairs survived filtering; statistics are empty\n";
  } else {
    const auto& s = report.stats;
    log << "mean hops: IPv4 " << format_number(s.v4_len.mean) << ", NAT64 "
        << format_number(s.nat_len.mean) << "; mean RTT ms: IPv4 " << format_number(s.v4_rtt.mean)
        << ", NAT64 " << format_number(s.nat_rtt.mean) << '\n';
  }
  return kExitOk;
}

int cmd_simulate(const GlobalOptions& g, const SimulateOptions& s, std::ostream& log) {
  const fs::path dir = g.out ? *g.out : fs::path("sim");
  sim::Generated gen;
  sim::Scenario scenario;
  try {
    scenario = s.scenario ? sim::load_scenario(*s.scenario) : sim::default_scenario(s.seed, s.min_probes);
    gen = sim::generate(scenario);
  } catch (const sim::ScenarioError& e) {
    throw ConfigError(e.what());
  }
  fs::create_directories(dir);
  sim::write_generated(gen, dir);
  write_text_file(dir / "scenario.txt", sim::format_scenario(scenario));

  RunConfig c;
  c.targets = gen.targets;
  c.ping_target = gen.ping_target;
  c.dns2_name = gen.dns2_name;
  c.dns2_a_records = gen.dns2_a_records;
  c.dataset = dir / sim::GeneratedFiles::dataset;
  c.public_nat64_list = dir / sim::GeneratedFiles::public_nat64;
  c.public_resolver_list = dir / sim::GeneratedFiles::public_resolvers;
  c.ip2as = dir / sim::GeneratedFiles::ip2as;
  c.as_categories = dir / sim::GeneratedFiles::as_categories;
  c.repeat = scenario.repeats;
  c.out_dir = dir / "out";
  c.drop_final_round = scenario.trailing_round;
  if (g.exclude_ttl_anomaly) c.exclude_ttl_anomaly = true;
  write_json_file(dir / "config.json", to_json(c, dir));

  log << "simulated " << gen.dataset.probes.size() << " probes, " << gen.dataset.runs.size()
      << " test runs, " << gen.dataset.paths.size() << " traceroutes into " << dir.string() << '\n';
  return kExitOk;
}

int cmd_atlas_fetch(const GlobalOptions& g, const AtlasFetchOptions& a, std::ostream& log) {
  if (a.measurement_id <= 0) throw ConfigError("atlas-fetch: measurement id must be positive");
  if (a.window <= 0) throw ConfigError("atlas-fetch: window must be positive");
  if (a.start && a.stop && *a.stop < *a.start) throw ConfigError("atlas-fetch: stop precedes start");
  AtlasClientConfig client;
  client.base_url = a.base_url;
  client.api_key = atlas_key_from_env();
  AtlasFetchRequest req;
  req.measurement_id = a.measurement_id;
  req.start = a.start;
  req.stop = a.stop;
  req.window = a.window;
  const fs::path dir = g.out ? *g.out : fs::path("atlas");
  fs::create_directories(dir);
  const auto r = atlas_fetch(client, req, dir);
  log << "fetched " << r.results << " results in " << r.pages.size() << " pages into "
      << dir.string() << '\n';
  return kExitOk;
}

int cmd_atlas_spec(const AtlasSpecOptions& a, std::ostream& out) {
  const auto kind = parse_atlas_kind(a.kind);
  if (!kind) throw ConfigError("atlas-spec: unknown kind '" + a.kind + "'");
  if (a.target.empty()) throw ConfigError("atlas-spec: target is required");
  if (a.probes.empty()) throw ConfigError("atlas-spec: at least one probe id is required");
  AtlasSpecRequest req;
  req.kind = *kind;
  req.target = a.target;
  req.probes = a.probes;
  req.description = a.description;
  out << atlas_measurement_spec(req).dump(2) << '\n';
  return kExitOk;
}

}  // namespace nat64scope::cli
