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

// Scripted network for the echo and traceroute drivers: NAT64s that
// translate some prefixes toward live IPv4 hosts, and per-destination hop
// scripts.

#pragma once

#include <map>
#include <mutex>
#include <set>
#include <vector>

#include "nat64scope/acquire/icmp.hpp"
#include "nat64scope/acquire/traceroute.hpp"

namespace nat64scope::sim {

/// Echo replies for prefix-embedded addresses of live IPv4 hosts behind
/// the configured NAT64 prefixes, and for listed IPv6 hosts.
class MockNat64Echo : public EchoTransport {
public:
  void add_nat(const Nat64Prefix& prefix, double rtt_ms = 20.0);
  void add_live_v4(const Ipv4Address& host) { live_v4_.insert(host); }
  void add_live_v6(const Ipv6Address& host, double rtt_ms = 10.0) { live_v6_[host] = rtt_ms; }
  /// Echoes toward this prefix raise NoRoute.
  void add_unroutable(const IpPrefix& prefix) { unroutable_.push_back(prefix); }
  /// Every n-th request is lost (0: none).
  void set_loss_every(int n) { loss_every_ = n; }

  std::vector<EchoOutcome> echo(const Ipv6Address& target, int count,
                                std::chrono::milliseconds timeout) override;

private:
  std::vector<std::pair<Nat64Prefix, double>> nats_;
  std::set<Ipv4Address> live_v4_;
  std::map<Ipv6Address, double> live_v6_;
  std::vector<IpPrefix> unroutable_;
  int loss_every_ = 0;
  int sent_ = 0;
  std::mutex mu_;
};

struct MockHop {
  /// Answering addresses, used in turn by successive packets; empty means
  /// the hop stays silent.
  std::vector<IpAddress> responders;
  /// Per-packet RTTs, reused cyclically.
  std::vector<double> rtts_ms{1.0};
};

/// Replies from a hop script per destination. TTLs beyond the script reach
/// the destination, unless the script ends silent.
class ScriptedTraceroute : public TracerouteTransport {
public:
  void add_route(const IpAddress& target, std::vector<MockHop> hops);

  std::optional<ProbeReply> probe(const IpAddress& target, int ttl,
                                  const TracerouteOptions& options) override;

private:
  std::map<IpAddress, std::vector<MockHop>> routes_;
  std::map<std::pair<IpAddress, int>, int> packets_;  // per (target, ttl)
  std::mutex mu_;
};

/// A hop script that replays a recorded path packet for packet.
std::vector<MockHop> route_from_path(const TraceroutePath& path);

}  // namespace nat64scope::sim
