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

// Paris-style UDP traceroute. Source and destination ports stay fixed for
// every probe so per-flow load balancers keep the path stable.

#pragma once

#include <chrono>
#include <cstdint>
#include <optional>

#include "nat64scope/acquire/icmp.hpp"
#include "nat64scope/model.hpp"

namespace nat64scope {

struct TracerouteOptions {
  int max_ttl = 32;
  int packets_per_hop = 3;
  std::chrono::milliseconds timeout{4000};  // per packet
  std::uint16_t src_port = 33433;
  std::uint16_t dst_port = 33434;
};

/// Answer to one TTL-limited probe.
struct ProbeReply {
  IpAddress from;
  double rtt_ms = 0.0;
  /// The destination itself answered (port unreachable).
  bool reached = false;
};

class TracerouteTransport {
public:
  virtual ~TracerouteTransport() = default;
  /// Sends one probe with the given TTL; nullopt when nothing answered.
  virtual std::optional<ProbeReply> probe(const IpAddress& target, int ttl,
                                          const TracerouteOptions& options) = 0;
};

/// UDP socket with IP(V6)_RECVERR; ICMP errors are read from the error
/// queue. Probes go out one at a time.
class UdpTracerouteTransport : public TracerouteTransport {
public:
  std::optional<ProbeReply> probe(const IpAddress& target, int ttl,
                                  const TracerouteOptions& options) override;
};

/// Identifies the path being measured; copied onto the result.
struct TracerouteMeta {
  ProbeId probe_id;
  Family family = Family::IPv4;
  std::optional<Nat64Prefix> prefix;
  Ipv4Address target_v4;
  int round = 0;
  Timestamp timestamp = 0;
};

/// Hops 1..K where K is the TTL at which the target answered, or max_ttl.
/// A hop keeps the first responding address and every RTT received at that
/// TTL. Silent TTLs become missing hops.
TraceroutePath udp_traceroute(TracerouteTransport& transport, const IpAddress& target,
                              const TracerouteMeta& meta, const TracerouteOptions& options = {});

}  // namespace nat64scope
