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

#include "nat64scope/acquire/icmp.hpp"

#include <netinet/icmp6.h>
#include <netinet/in.h>
#include <sys/socket.h>
#include <unistd.h>

#include <atomic>
#include <cerrno>
#include <cstring>

#include "nat64scope/acquire/socket.hpp"

namespace nat64scope {

namespace {

std::atomic<std::uint16_t> next_ident{static_cast<std::uint16_t>(::getpid())};

}  // namespace

RawIcmpv6Transport::RawIcmpv6Transport() {
  fd_ = ::socket(AF_INET6, SOCK_RAW | SOCK_CLOEXEC, IPPROTO_ICMPV6);
  if (fd_ < 0) {
    if (errno == EPERM || errno == EACCES) {
      throw PermissionDenied(errno_message("raw ICMPv6 socket"));
    }
    throw Error(errno_message("raw ICMPv6 socket"));
  }
  icmp6_filter filter;
  ICMP6_FILTER_SETBLOCKALL(&filter);
  ICMP6_FILTER_SETPASS(ICMP6_ECHO_REPLY, &filter);
  ::setsockopt(fd_, IPPROTO_ICMPV6, ICMP6_FILTER, &filter, sizeof filter);
  ident_ = next_ident.fetch_add(1);
}

RawIcmpv6Transport::~RawIcmpv6Transport() {
  if (fd_ >= 0) ::close(fd_);
}

std::vector<EchoOutcome> RawIcmpv6Transport::echo(const Ipv6Address& target, int count,
                                                  std::chrono::milliseconds timeout) {
  using clock = std::chrono::steady_clock;
  std::vector<EchoOutcome> out;
  const auto dest = make_sockaddr(target, 0);
  for (int i = 0; i < count; ++i) {
    const std::uint16_t seq = ++seq_;
    icmp6_hdr req{};
    req.icmp6_type = ICMP6_ECHO_REQUEST;
    req.icmp6_id = htons(ident_);
    req.icmp6_seq = htons(seq);
    const auto sent = clock::now();
    if (::sendto(fd_, &req, sizeof req, 0, dest.get(), dest.length) < 0) {
      if (errno == ENETUNREACH || errno == EHOSTUNREACH || errno == EADDRNOTAVAIL) {
        throw NoRoute(errno_message("no route to " + target.to_string()));
      }
      throw Error(errno_message("sendto"));
    }

    EchoOutcome outcome;
    const auto deadline = sent + timeout;
    while (!outcome.replied) {
      auto left = std::chrono::duration_cast<std::chrono::milliseconds>(deadline - clock::now());
      if (left.count() <= 0 || !wait_readable(fd_, left)) break;
      std::uint8_t buf[1500];
      SockAddr from;
      from.length = sizeof from.storage;
      ssize_t n = ::recvfrom(fd_, buf, sizeof buf, 0, from.get(), &from.length);
      if (n < static_cast<ssize_t>(sizeof(icmp6_hdr))) continue;
      icmp6_hdr rep;
      std::memcpy(&rep, buf, sizeof rep);
      if (rep.icmp6_type != ICMP6_ECHO_REPLY || ntohs(rep.icmp6_id) != ident_ ||
          ntohs(rep.icmp6_seq) != seq) {
        continue;
      }
      if (std::get<Ipv6Address>(address_of(from)) != target) continue;
      outcome.replied = true;
      outcome.rtt_ms = std::chrono::duration<double, std::milli>(clock::now() - sent).count();
    }
    out.push_back(outcome);
  }
  return out;
}

std::vector<EchoOutcome> icmp_echo(EchoTransport& transport, const Ipv6Address& target, int count,
                                   std::chrono::milliseconds timeout) {
  if (count <= 0) throw Error("icmp_echo: count must be positive");
  if (timeout.count() <= 0) throw Error("icmp_echo: timeout must be positive");
  return transport.echo(target, count, timeout);
}

}  // namespace nat64scope
