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

#include "nat64scope/sim/mock_net.hpp"

#include "nat64scope/addrsynth.hpp"

namespace nat64scope::sim {

void MockNat64Echo::add_nat(const Nat64Prefix& prefix, double rtt_ms) {
  nats_.emplace_back(prefix, rtt_ms);
}

std::vector<EchoOutcome> MockNat64Echo::echo(const Ipv6Address& target, int count,
                                             std::chrono::milliseconds) {
  std::lock_guard lock(mu_);
  for (const auto& p : unroutable_) {
    if (p.contains(target)) throw NoRoute("mock: no route to " + target.to_string());
  }
  std::optional<double> rtt;
  if (auto it = live_v6_.find(target); it != live_v6_.end()) rtt = it->second;
  for (const auto& [prefix, ms] : nats_) {
    if (rtt || !matches_prefix(target, prefix)) continue;
    if (live_v4_.count(extract(prefix, target))) rtt = ms;
  }
  std::vector<EchoOutcome> out;
  for (int i = 0; i < count; ++i) {
    ++sent_;
    const bool lost = loss_every_ > 0 && sent_ % loss_every_ == 0;
    out.push_back(rtt && !lost ? EchoOutcome{true, *rtt} : EchoOutcome{});
  }
  return out;
}

void ScriptedTraceroute::add_route(const IpAddress& target, std::vector<MockHop> hops) {
  std::lock_guard lock(mu_);
  routes_[target] = std::move(hops);
}

std::optional<ProbeReply> ScriptedTraceroute::probe(const IpAddress& target, int ttl,
                                                    const TracerouteOptions&) {
  std::lock_guard lock(mu_);
  auto it = routes_.find(target);
  if (it == routes_.end() || ttl < 1 || it->second.empty()) return std::nullopt;
  const auto& hops = it->second;
  const int n = packets_[{target, ttl}]++;
  const auto& hop = hops[std::min<std::size_t>(static_cast<std::size_t>(ttl), hops.size()) - 1];
  if (hop.responders.empty()) return std::nullopt;
  ProbeReply r;
  r.from = hop.responders[static_cast<std::size_t>(n) % hop.responders.size()];
  r.rtt_ms = hop.rtts_ms.empty() ? 0.0 : hop.rtts_ms[static_cast<std::size_t>(n) % hop.rtts_ms.size()];
  r.reached = r.from == target;
  return r;
}

std::vector<MockHop> route_from_path(const TraceroutePath& path) {
  std::vector<MockHop> out;
  for (const auto& h : path.hops) {
    MockHop m;
    if (h.address) {
      m.responders = {*h.address};
      m.rtts_ms = h.rtts_ms;
    }
    out.push_back(std::move(m));
  }
  return out;
}

}  // namespace nat64scope::sim
