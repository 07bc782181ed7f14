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

// Live detection from the local host, which acts as a single probe.

#pragma once

#include <atomic>
#include <chrono>
#include <functional>
#include <string>
#include <vector>

#include "nat64scope/acquire/dns.hpp"
#include "nat64scope/acquire/icmp.hpp"
#include "nat64scope/model.hpp"

namespace nat64scope::cli {

struct LiveOptions {
  ProbeId probe_id = "local";
  std::vector<DnsEndpoint> resolvers;
  std::string dns2_name;
  std::vector<Ipv4Address> dns2_a_records;
  Ipv4Address ping_target;
  int repeat = 2;
  int concurrency = 64;
  std::chrono::milliseconds dns_timeout{5000};
  std::chrono::milliseconds echo_timeout{2000};
  int echo_count = 3;
  /// Seconds since the epoch; the system clock when unset.
  std::function<Timestamp()> clock;
};

struct LiveResult {
  std::vector<TestRun> runs;  // in task order
  bool interrupted = false;
};

/// DNS tests 1 and 2 against every resolver, then pings through the
/// standard prefix and every other prefix DNS test 1 revealed, all
/// repeated `repeat` times. Tasks run on `concurrency` threads; pings
/// share `echo`, which is used by one thread at a time. Setting `stop`
/// skips the remaining tasks and keeps the finished ones.
LiveResult run_live_tests(const LiveOptions& options, EchoTransport& echo,
                          const std::atomic<bool>* stop = nullptr);

/// A record for the local host listing the resolvers used.
ProbeRecord live_probe_record(const LiveOptions& options);

}  // namespace nat64scope::cli
