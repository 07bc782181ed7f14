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

#include "nat64scope/cli/live.hpp"

#include <algorithm>
#include <mutex>
#include <set>
#include <thread>

#include "nat64scope/addrsynth.hpp"
#include "nat64scope/detector.hpp"

namespace nat64scope::cli {

namespace {

Timestamp now(const LiveOptions& o) {
  if (o.clock) return o.clock();
  return std::chrono::duration_cast<std::chrono::seconds>(
             std::chrono::system_clock::now().time_since_epoch())
      .count();
}

// Runs tasks[i] into out[i] on a bounded pool. Skipped tasks stay empty.
void run_pool(const std::vector<std::function<TestRun()>>& tasks, int concurrency,
              const std::atomic<bool>* stop, std::vector<std::optional<TestRun>>& out) {
  out.assign(tasks.size(), std::nullopt);
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (;;) {
      if (stop && stop->load()) return;
      const std::size_t i = next.fetch_add(1);
      if (i >= tasks.size()) return;
      out[i] = tasks[i]();
    }
  };
  const auto n = static_cast<std::size_t>(std::max(1, concurrency));
  std::vector<std::jthread> pool;
  for (std::size_t t = 0; t < std::min(n, tasks.size()); ++t) pool.emplace_back(worker);
}

}  // namespace

ProbeRecord live_probe_record(const LiveOptions& options) {
  ProbeRecord p;
  p.probe_id = options.probe_id;
  for (const auto& r : options.resolvers) p.resolvers.push_back(r.address);
  return p;
}

LiveResult run_live_tests(const LiveOptions& o, EchoTransport& echo, const std::atomic<bool>* stop) {
  LiveResult result;
  auto collect = [&](std::vector<std::optional<TestRun>>& done) {
    for (auto& r : done) {
      if (r) result.runs.push_back(std::move(*r));
      else result.interrupted = true;
    }
  };

  std::vector<std::function<TestRun()>> dns;
  for (int rep = 0; rep < o.repeat; ++rep) {
    for (const auto& resolver : o.resolvers) {
      dns.emplace_back([&o, resolver] {
        const Timestamp ts = now(o);
        return eval_dns_test1(o.probe_id, ts,
                              dns_query(resolver, "ipv4only.arpa", RecordType::AAAA, o.dns_timeout));
      });
      dns.emplace_back([&o, resolver] {
        const Timestamp ts = now(o);
        return eval_dns_test2(o.probe_id, ts,
                              dns_query(resolver, o.dns2_name, RecordType::AAAA, o.dns_timeout),
                              o.dns2_a_records);
      });
    }
  }
  std::vector<std::optional<TestRun>> done;
  run_pool(dns, o.concurrency, stop, done);
  collect(done);
  if (stop && stop->load()) {
    result.interrupted = true;
    return result;
  }

  std::vector<std::pair<TestKind, Nat64Prefix>> prefixes{
      {TestKind::StdPrefixPing, Nat64Prefix::standard()}};
  std::set<Nat64Prefix> seen;
  for (const auto& r : result.runs) {
    if (r.kind != TestKind::DnsTest1 || !r.observed_prefix) continue;
    if (r.observed_prefix->same_network(Nat64Prefix::standard())) continue;
    if (seen.insert(*r.observed_prefix).second) {
      prefixes.emplace_back(TestKind::CustomPrefixPing, *r.observed_prefix);
    }
  }

  std::mutex echo_mutex;
  std::vector<std::function<TestRun()>> pings;
  for (int rep = 0; rep < o.repeat; ++rep) {
    for (const auto& [kind, prefix] : prefixes) {
      pings.emplace_back([&, kind = kind, prefix = prefix] {
        const Timestamp ts = now(o);
        std::vector<EchoOutcome> replies;
        std::string note;
        try {
          std::lock_guard lock(echo_mutex);
          replies = icmp_echo(echo, synthesize(prefix, o.ping_target), o.echo_count, o.echo_timeout);
        } catch (const NoRoute& e) {
          note = e.what();
        }
        auto run = eval_ping_test(o.probe_id, ts, kind, prefix, o.ping_target, replies);
        if (!note.empty()) run.diagnostic = note;
        return run;
      });
    }
  }
  run_pool(pings, o.concurrency, stop, done);
  collect(done);
  return result;
}

}  // namespace nat64scope::cli
