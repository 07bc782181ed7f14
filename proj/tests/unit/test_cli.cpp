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

#include <sys/wait.h>

#include <atomic>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>

#include "doctest.h"
#include "json.hpp"

#include "nat64scope/cli/commands.hpp"
#include "nat64scope/cli/config.hpp"
#include "nat64scope/cli/live.hpp"
#include "nat64scope/detector.hpp"
#include "nat64scope/sim/generate.hpp"
#include "nat64scope/sim/mock_dns.hpp"
#include "nat64scope/sim/mock_net.hpp"

using namespace nat64scope;
using namespace nat64scope::cli;
using nlohmann::json;
namespace fs = std::filesystem;
using namespace std::chrono_literals;

namespace {

const fs::path kSeed42 = fs::path(NAT64SCOPE_FIXTURES) / "seed42";

fs::path scratch(const std::string& name) {
  auto dir = fs::temp_directory_path() / ("nat64scope-cli-" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

json read_json(const fs::path& p) { return json::parse(slurp(p)); }

void write(const fs::path& p, const std::string& text) {
  std::ofstream out(p, std::ios::binary);
  out << text;
}

// The seed-42 config with absolute input paths, edited by `edit`, saved
// in `dir` with output going to dir/out.
template <typename F>
fs::path seed42_config(const fs::path& dir, F edit) {
  auto j = read_json(kSeed42 / "config.json");
  for (const char* k : {"dataset", "public_nat64_list", "public_resolver_list", "ip2as", "as_categories"}) {
    j[k] = (kSeed42 / j[k].get<std::string>()).string();
  }
  j["out_dir"] = "out";
  edit(j);
  write(dir / "config.json", j.dump(2));
  return dir / "config.json";
}

fs::path seed42_config(const fs::path& dir) {
  return seed42_config(dir, [](json&) {});
}

sim::GroundTruth seed42_truth() { return sim::truth_from_json(read_json(kSeed42 / "truth.json")); }

int run_tool(const std::string& args) {
  const std::string cmd = std::string(NAT64SCOPE_TOOL) + " " + args + " >/dev/null 2>&1";
  const int rc = std::system(cmd.c_str());
  return WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
}

}  // namespace

TEST_CASE("resolver endpoints") {
  CHECK(parse_endpoint("2001:db8::53").port == 53);
  CHECK(parse_endpoint("[::1]:5353").port == 5353);
  CHECK(parse_endpoint("192.0.2.53:5300").address == must_parse_ip("192.0.2.53"));
  CHECK(format_endpoint(parse_endpoint("[::1]:5353")) == "[::1]:5353");
  CHECK(format_endpoint(parse_endpoint("2001:db8::53")) == "2001:db8::53");
  CHECK_THROWS_AS(parse_endpoint("[::1]:99999"), ConfigError);
  CHECK_THROWS_AS(parse_endpoint("resolver.example"), ConfigError);
}

TEST_CASE("config parsing") {
  const auto c = parse_run_config(json{{"dataset", "d.ndjson"}, {"repeat", 3}, {"resolvers", {"[::1]:5353"}}},
                                  "/base");
  CHECK(c.dataset == fs::path("/base/d.ndjson"));
  CHECK(c.repeat == 3);
  CHECK(c.resolvers.size() == 1);
  CHECK(parse_run_config(to_json(c, "/base"), "/base").dataset == c.dataset);
  CHECK(parse_run_config(json::object(), "/").concurrency == 64);
  CHECK_THROWS_AS(parse_run_config(json{{"colour", "blue"}}, "/"), ConfigError);
  CHECK_THROWS_AS(parse_run_config(json{{"repeat", "twice"}}, "/"), ConfigError);
  CHECK_THROWS_AS(parse_run_config(json{{"repeat", 0}}, "/"), ConfigError);
  CHECK_THROWS_AS(parse_run_config(json{{"targets", {"300.1.1.1"}}}, "/"), ConfigError);
  CHECK_THROWS_AS(parse_run_config(json::array(), "/"), ConfigError);
  CHECK_THROWS_AS(load_run_config("/nonexistent/config.json"), ConfigError);
}

TEST_CASE("detect on the seed-42 dataset reproduces the planted groups") {
  const auto dir = scratch("detect");
  std::ostringstream log;
  GlobalOptions g;
  g.config = seed42_config(dir);
  REQUIRE(cmd_detect(g, log) == kExitOk);

  std::map<std::string, int> expected;
  for (const auto& [id, p] : seed42_truth().probes) ++expected[std::string(to_string(p.group))];
  std::map<std::string, int> got;
  const auto doc = read_json(dir / "out" / OutputFiles::detection_json);
  for (const auto& p : doc["probes"]) {
    ++got[p["group"].get<std::string>()];
  }
  CHECK(got == expected);
  for (const char* f : {OutputFiles::detection_probes, OutputFiles::detection_table, OutputFiles::group_counts}) {
    CHECK(fs::is_regular_file(dir / "out" / f));
  }
  fs::remove_all(dir);
}

TEST_CASE("detect on an empty dataset gives an all-zero table") {
  const auto dir = scratch("empty");
  save_dataset(dir / "empty.ndjson", DatasetFile{});
  GlobalOptions g;
  g.from_dataset = dir / "empty.ndjson";
  g.out = dir / "out";
  std::ostringstream log;
  CHECK(cmd_detect(g, log) == kExitOk);
  const auto table = slurp(dir / "out" / OutputFiles::detection_table);
  CHECK(table ==
        "test,failed,passed,inconclusive,total\n"
        "dns1,0,0,0,0\n"
        "dns2,0,0,0,0\n"
        "std_ping,0,0,0,0\n"
        "custom_ping,0,0,0,0\n");
  CHECK(log.str().find("probes: 0") != std::string::npos);
  fs::remove_all(dir);
}

TEST_CASE("configuration errors") {
  const auto dir = scratch("config-errors");
  GlobalOptions g;
  g.config = seed42_config(dir, [](json& j) { j["ip2as"] = "missing-ip2as.txt"; });
  std::ostringstream log;
  CHECK_THROWS_AS(cmd_detect(g, log), ConfigError);

  GlobalOptions nothing;
  nothing.out = dir / "out";
  CHECK_THROWS_AS(cmd_detect(nothing, log), ConfigError);

  GlobalOptions no_file;
  no_file.from_dataset = dir / "absent.ndjson";
  CHECK_THROWS_AS(cmd_paths(no_file, log), ConfigError);

  GlobalOptions no_detection;
  no_detection.config = seed42_config(dir);
  CHECK_THROWS_AS(cmd_classify(no_detection, log), ConfigError);

  GlobalOptions bad_concurrency;
  bad_concurrency.concurrency = 0;
  CHECK_THROWS_AS(effective_config(bad_concurrency), ConfigError);
  fs::remove_all(dir);
}

TEST_CASE("classify on the seed-42 dataset reproduces the planted categories") {
  const auto dir = scratch("classify");
  std::ostringstream log;
  GlobalOptions g;
  g.config = seed42_config(dir);
  REQUIRE(cmd_detect(g, log) == kExitOk);
  REQUIRE(cmd_classify(g, log) == kExitOk);

  const auto truth = seed42_truth();
  int compared = 0;
  const auto doc = read_json(dir / "out" / OutputFiles::classification_json);
  for (const auto& p : doc["probes"]) {
    const auto& t = truth.probes.at(p["probe_id"].get<std::string>());
    if (t.categories.empty()) continue;
    std::set<std::string> want;
    for (auto c : t.categories) want.insert(std::string(to_string(c)));
    std::set<std::string> got;
    for (const auto& c : p["categories"]) got.insert(c.get<std::string>());
    CHECK_MESSAGE(got == want, p["probe_id"]);
    ++compared;
  }
  CHECK(compared > 10);
  fs::remove_all(dir);
}

TEST_CASE("classify puts unlisted ASes in the unknown category") {
  const auto dir = scratch("unknown-asn");
  write(dir / "cats.csv", "# only an AS no probe sits in\n64496,academic\n");
  GlobalOptions g;
  g.config = seed42_config(dir, [&](json& j) { j["as_categories"] = (dir / "cats.csv").string(); });
  std::ostringstream log;
  REQUIRE(cmd_detect(g, log) == kExitOk);
  REQUIRE(cmd_classify(g, log) == kExitOk);
  const auto doc = read_json(dir / "out" / OutputFiles::classification_json);
  for (const auto& p : doc["probes"]) {
    CHECK(p["as_category"] == "unknown");
  }
  fs::remove_all(dir);
}

TEST_CASE("an AS with a single probe gives no ISP evidence and a warning") {
  const auto dir = scratch("single");
  write(dir / "scenario.txt",
        "seed = 5\n"
        "cohort.lone = resolver=full_dns64 nat=translating setup=isp\n"
        "cohort.pair = sites=1 members=2 resolver=full_dns64 nat=translating setup=isp\n");
  GlobalOptions g;
  g.out = dir / "sim";
  std::ostringstream log;
  cmd_simulate(g, SimulateOptions{dir / "scenario.txt", 5, 1}, log);
  GlobalOptions run;
  run.config = dir / "sim" / "config.json";
  REQUIRE(cmd_detect(run, log) == kExitOk);
  std::ostringstream clog;
  REQUIRE(cmd_classify(run, clog) == kExitOk);
  const auto out = clog.str();
  CHECK(out.find("only one probe ran DNS tests") != std::string::npos);

  int isp = 0, single = 0;
  const auto doc = read_json(dir / "sim" / "out" / OutputFiles::classification_json);
  for (const auto& e : doc["isp_evidence"]) {
    if (e["probes_tested"] == 1) {
      ++single;
      CHECK(e["is_isp_dns64"] == false);
    } else {
      isp += e["is_isp_dns64"].get<bool>();
    }
  }
  CHECK(single == 1);
  CHECK(isp == 1);
  fs::remove_all(dir);
}

TEST_CASE("paths on the seed-42 dataset and the TTL anomaly switch") {
  const auto dir = scratch("paths");
  std::ostringstream log;
  GlobalOptions g;
  g.config = seed42_config(dir);
  REQUIRE(cmd_paths(g, log) == kExitOk);
  const auto without = slurp(dir / "out" / OutputFiles::exclusions);
  CHECK(without.find("ttl_anomaly") == std::string::npos);
  CHECK(read_json(dir / "out" / OutputFiles::paths_json).is_object());

  g.exclude_ttl_anomaly = true;
  REQUIRE(cmd_paths(g, log) == kExitOk);
  const auto with = slurp(dir / "out" / OutputFiles::exclusions);
  CHECK(with.find("ttl_anomaly") != std::string::npos);
  fs::remove_all(dir);
}

TEST_CASE("paths through opaque NAT64s keep nothing and say so") {
  const auto dir = scratch("opaque");
  write(dir / "scenario.txt",
        "seed = 3\n"
        "rounds = 2\n"
        "targets = 2\n"
        "dead_targets = 0\n"
        "incomplete_rounds = 0\n"
        "path_failure_rate = 0\n"
        "silent_hop_rate = 0\n"
        "cohort.opaque = sites=2 members=2 resolver=full_dns64 nat=icmp_opaque\n");
  GlobalOptions g;
  g.out = dir / "sim";
  std::ostringstream log;
  REQUIRE(cmd_simulate(g, SimulateOptions{dir / "scenario.txt", 3, 1}, log) == kExitOk);
  GlobalOptions run;
  run.config = dir / "sim" / "config.json";
  std::ostringstream plog;
  REQUIRE(cmd_paths(run, plog) == kExitOk);
  CHECK(plog.str().find("kept: 0") != std::string::npos);
  CHECK(plog.str().find("no pairs survived filtering; statistics are empty") != std::string::npos);
  CHECK(plog.str().find("excluded no_nat_hop") != std::string::npos);
  const auto pairs = slurp(dir / "sim" / "out" / OutputFiles::pairs);
  CHECK(std::count(pairs.begin(), pairs.end(), '\n') == 1);
  fs::remove_all(dir);
}

TEST_CASE("simulate is deterministic and rejects bad scenarios") {
  const auto dir = scratch("simulate");
  std::ostringstream log;
  GlobalOptions a, b;
  a.out = dir / "a";
  b.out = dir / "b";
  REQUIRE(cmd_simulate(a, SimulateOptions{std::nullopt, 42, 30}, log) == kExitOk);
  REQUIRE(cmd_simulate(b, SimulateOptions{std::nullopt, 42, 30}, log) == kExitOk);
  int files = 0;
  for (const auto& e : fs::directory_iterator(dir / "a")) {
    if (!e.is_regular_file()) continue;
    CHECK(slurp(e.path()) == slurp(dir / "b" / e.path().filename()));
    ++files;
  }
  CHECK(files == 8);
  // The committed fixture is this same output.
  CHECK(slurp(dir / "a" / "dataset.ndjson") == slurp(kSeed42 / "dataset.ndjson"));

  write(dir / "bad.txt", "cohort.x = resolver=sometimes\n");
  GlobalOptions c;
  c.out = dir / "c";
  CHECK_THROWS_AS(cmd_simulate(c, SimulateOptions{dir / "bad.txt", 1, 1}, log), ConfigError);
  CHECK_THROWS_AS(cmd_simulate(c, SimulateOptions{dir / "missing.txt", 1, 1}, log), ConfigError);
  fs::remove_all(dir);
}

TEST_CASE("live tests against a mock resolver and NAT64") {
  sim::MockDnsConfig dc;
  dc.behavior = sim::ResolverBehavior::FullDns64;
  dc.zone["time-c-b.nist.gov"] = {Ipv4Address::must_parse("192.0.2.51")};
  sim::MockDnsServer dns(dc);

  sim::MockNat64Echo echo;
  echo.add_nat(Nat64Prefix::standard(), 30.0);
  echo.add_live_v4(Ipv4Address::must_parse("91.201.7.243"));

  LiveOptions o;
  o.resolvers = {dns.endpoint()};
  o.dns2_name = "time-c-b.nist.gov";
  o.dns2_a_records = {Ipv4Address::must_parse("192.0.2.51")};
  o.ping_target = Ipv4Address::must_parse("91.201.7.243");
  o.concurrency = 4;
  o.dns_timeout = 2s;
  o.echo_timeout = 100ms;
  o.clock = [] { return Timestamp{1700000000}; };

  const auto live = run_live_tests(o, echo);
  CHECK_FALSE(live.interrupted);
  CHECK(live.runs.size() == 6);  // dns1, dns2 and ping, twice
  const auto report = detect_all(live.runs, GroupPolicy{});
  REQUIRE(report.probes.size() == 1);
  CHECK(report.probes[0].assignment.group == DetectionGroup::Nat64PlusDns64);
  CHECK(live_probe_record(o).probe_id == "local");

  sim::MockDnsConfig broken = dc;
  broken.behavior = sim::ResolverBehavior::Broken;
  sim::MockDnsServer bad(broken);
  o.resolvers = {bad.endpoint()};
  CHECK(detect_all(run_live_tests(o, echo).runs, GroupPolicy{}).probes[0].assignment.group == DetectionGroup::Nat64Only);

  std::atomic<bool> stop{true};
  const auto halted = run_live_tests(o, echo, &stop);
  CHECK(halted.interrupted);
  CHECK(halted.runs.empty());
}

TEST_CASE("tool exit codes") {
  const auto dir = scratch("tool");
  CHECK(run_tool("--help") == kExitOk);
  CHECK(run_tool("") == kExitConfig);
  CHECK(run_tool("frobnicate") == kExitConfig);
  CHECK(run_tool("detect --from-dataset " + (dir / "absent.ndjson").string()) == kExitConfig);
  CHECK(run_tool("simulate --min-probes 0 --out " + (dir / "s").string()) == kExitConfig);
  CHECK(run_tool("atlas-spec ping nowhere --probes 1") == kExitRuntime);
  CHECK(run_tool("atlas-spec ping 192.0.2.1 --probes 1,2") == kExitOk);
  CHECK(run_tool("simulate --seed 4 --out " + (dir / "s").string()) == kExitOk);
  CHECK(run_tool("detect --config " + (dir / "s" / "config.json").string()) == kExitOk);
  CHECK(run_tool("classify --config " + (dir / "s" / "config.json").string()) == kExitOk);
  CHECK(run_tool("paths --exclude-ttl-anomaly --config " + (dir / "s" / "config.json").string()) == kExitOk);
  CHECK(fs::is_regular_file(dir / "s" / "out" / OutputFiles::stats));
  fs::remove_all(dir);
}
