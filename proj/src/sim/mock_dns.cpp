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

#include "nat64scope/sim/mock_dns.hpp"

#include <netinet/in.h>
#include <sys/socket.h>

#include <algorithm>
#include <cerrno>

#include "nat64scope/addrsynth.hpp"

namespace nat64scope::sim {

namespace {

constexpr std::uint8_t kNoError = 0;
constexpr std::uint8_t kServFail = 2;
constexpr std::uint8_t kNxDomain = 3;

}  // namespace

MockDnsServer::MockDnsServer(MockDnsConfig config) : config_(std::move(config)) {
  const auto arpa = ipv4only_arpa_addresses();
  config_.zone["ipv4only.arpa"] = std::vector<Ipv4Address>(arpa.begin(), arpa.end());

  fd_ = Fd(::socket(AF_INET6, SOCK_DGRAM, 0));
  if (!fd_) throw Error(errno_message("mock dns: socket"));
  auto sa = make_sockaddr(Ipv6Address::must_parse("::1"), 0);
  if (::bind(fd_.get(), sa.get(), sa.length) != 0) throw Error(errno_message("mock dns: bind"));
  SockAddr bound;
  bound.length = sizeof(bound.storage);
  if (::getsockname(fd_.get(), bound.get(), &bound.length) != 0) {
    throw Error(errno_message("mock dns: getsockname"));
  }
  port_ = port_of(bound);
  thread_ = std::thread([this] { serve(); });
}

MockDnsServer::~MockDnsServer() {
  stop_ = true;
  if (thread_.joinable()) thread_.join();
}

DnsEndpoint MockDnsServer::endpoint() const {
  return DnsEndpoint{Ipv6Address::must_parse("::1"), port_};
}

std::vector<std::uint8_t> MockDnsServer::answer(const DnsQuestion& q) const {
  if (config_.behavior == ResolverBehavior::Broken) return build_response(q, kServFail, {}, {});
  auto it = config_.zone.find(q.name);
  if (it == config_.zone.end()) return build_response(q, kNxDomain, {}, {});
  const auto& a = it->second;

  if (q.qtype == static_cast<std::uint16_t>(RecordType::A)) return build_response(q, kNoError, {}, a);
  if (q.qtype != static_cast<std::uint16_t>(RecordType::AAAA)) return build_response(q, kNoError, {}, {});

  const bool synthesize_here =
      config_.behavior == ResolverBehavior::FullDns64 ||
      (config_.behavior == ResolverBehavior::Ipv4OnlyArpaOnly && q.name == "ipv4only.arpa");
  std::vector<Ipv6Address> aaaa;
  if (synthesize_here) {
    for (const auto& v4 : a) aaaa.push_back(synthesize(config_.prefix, v4));
  }
  return build_response(q, kNoError, aaaa, {});
}

void MockDnsServer::serve() {
  std::vector<std::uint8_t> buf(4096);
  while (!stop_) {
    if (!wait_readable(fd_.get(), std::chrono::milliseconds(20))) continue;
    SockAddr from;
    from.length = sizeof(from.storage);
    const auto n = ::recvfrom(fd_.get(), buf.data(), buf.size(), 0, from.get(), &from.length);
    if (n < 0) continue;
    ++queries_;
    if (config_.silent) continue;
    auto q = parse_query(std::span(buf.data(), static_cast<std::size_t>(n)));
    if (!q) continue;
    const auto reply = answer(*q);
    ::sendto(fd_.get(), reply.data(), reply.size(), 0, from.get(), from.length);
  }
}

}  // namespace nat64scope::sim
