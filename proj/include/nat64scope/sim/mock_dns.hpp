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

// A UDP resolver on the loopback interface that plays one of the resolver
// behaviors, so the DNS driver can be exercised end to end offline.

#pragma once

#include <atomic>
#include <map>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "nat64scope/acquire/dns.hpp"
#include "nat64scope/acquire/socket.hpp"
#include "nat64scope/sim/scenario.hpp"

namespace nat64scope::sim {

struct MockDnsConfig {
  ResolverBehavior behavior = ResolverBehavior::FullDns64;
  /// Synthesis prefix for FullDns64 and Ipv4OnlyArpaOnly.
  Nat64Prefix prefix = Nat64Prefix::standard();
  /// Name -> A records. ipv4only.arpa is always present.
  std::map<std::string, std::vector<Ipv4Address>> zone;
  /// Swallow every query, to exercise client timeouts.
  bool silent = false;
};

class MockDnsServer {
public:
  /// Binds an ephemeral port on ::1 and starts serving.
  explicit MockDnsServer(MockDnsConfig config);
  ~MockDnsServer();
  MockDnsServer(const MockDnsServer&) = delete;
  MockDnsServer& operator=(const MockDnsServer&) = delete;

  std::uint16_t port() const { return port_; }
  DnsEndpoint endpoint() const;
  int queries() const { return queries_.load(); }

  /// The response this server gives; exposed for tests.
  std::vector<std::uint8_t> answer(const DnsQuestion& q) const;

private:
  void serve();

  MockDnsConfig config_;
  Fd fd_;
  std::uint16_t port_ = 0;
  std::atomic<bool> stop_{false};
  std::atomic<int> queries_{0};
  std::thread thread_;
};

}  // namespace nat64scope::sim
