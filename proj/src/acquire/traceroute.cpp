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

#include "nat64scope/acquire/traceroute.hpp"

#include <linux/errqueue.h>
#include <netinet/icmp6.h>
#include <netinet/in.h>
#include <netinet/ip_icmp.h>
#include <sys/socket.h>

#include <cerrno>
#include <cstring>

#include "nat64scope/acquire/socket.hpp"

namespace nat64scope {

namespace {

using clock = std::chrono::steady_clock;

Fd open_probe_socket(const IpAddress& target, const TracerouteOptions& options) {
  const bool v6 = !is_v4(target);
  Fd fd(::socket(v6 ? AF_INET6 : AF_INET, SOCK_DGRAM | SOCK_CLOEXEC, 0));
  if (!fd) {
    if (errno == EPERM || errno == EACCES) throw PermissionDenied(errno_message("udp socket"));
    throw Error(errno_message("udp socket"));
  }
  int on = 1;
  ::setsockopt(fd.get(), SOL_SOCKET, SO_REUSEADDR, &on, sizeof on);
  if (v6) {
    ::setsockopt(fd.get(), IPPROTO_IPV6, IPV6_RECVERR, &on, sizeof on);
  } else {
    ::setsockopt(fd.get(), IPPROTO_IP, IP_RECVERR, &on, sizeof on);
  }
  // The fixed source port keeps the flow identifier constant.
  const IpAddress any = v6 ? IpAddress{Ipv6Address{}} : IpAddress{Ipv4Address{}};
  const auto local = make_sockaddr(any, options.src_port);
  if (::bind(fd.get(), local.get(), local.length) != 0) {
    throw Error(errno_message("bind traceroute source port"));
  }
  const auto dest = make_sockaddr(target, options.dst_port);
  if (::connect(fd.get(), dest.get(), dest.length) != 0) {
    if (errno == ENETUNREACH || errno == EHOSTUNREACH) {
      throw NoRoute(errno_message("no route to " + to_string(target)));
    }
    throw Error(errno_message("connect"));
  }
  return fd;
}

/// Reads one queued ICMP error; nullopt when the queue is empty.
std::optional<ProbeReply> read_error(int fd, bool v6) {
  std::uint8_t data[512];
  std::uint8_t control[512];
  SockAddr from;
  iovec iov{data, sizeof data};
  msghdr msg{};
  msg.msg_name = from.get();
  msg.msg_namelen = sizeof from.storage;
  msg.msg_iov = &iov;
  msg.msg_iovlen = 1;
  msg.msg_control = control;
  msg.msg_controllen = sizeof control;
  if (::recvmsg(fd, &msg, MSG_ERRQUEUE | MSG_DONTWAIT) < 0) return std::nullopt;

  for (cmsghdr* c = CMSG_FIRSTHDR(&msg); c; c = CMSG_NXTHDR(&msg, c)) {
    const bool match = v6 ? (c->cmsg_level == IPPROTO_IPV6 && c->cmsg_type == IPV6_RECVERR)
                          : (c->cmsg_level == IPPROTO_IP && c->cmsg_type == IP_RECVERR);
    if (!match) continue;
    sock_extended_err ee;
    std::memcpy(&ee, CMSG_DATA(c), sizeof ee);
    const auto origin_icmp = v6 ? SO_EE_ORIGIN_ICMP6 : SO_EE_ORIGIN_ICMP;
    if (ee.ee_origin != origin_icmp && ee.ee_origin != SO_EE_ORIGIN_LOCAL) continue;
    SockAddr offender;
    const auto* off = SO_EE_OFFENDER(reinterpret_cast<sock_extended_err*>(CMSG_DATA(c)));
    offender.length = v6 ? sizeof(sockaddr_in6) : sizeof(sockaddr_in);
    std::memcpy(&offender.storage, off, offender.length);
    if (offender.family() != (v6 ? AF_INET6 : AF_INET)) return std::nullopt;
    ProbeReply reply{address_of(offender)};
    reply.reached = v6 ? (ee.ee_type == ICMP6_DST_UNREACH && ee.ee_code == ICMP6_DST_UNREACH_NOPORT)
                       : (ee.ee_type == ICMP_DEST_UNREACH && ee.ee_code == ICMP_PORT_UNREACH);
    return reply;
  }
  return std::nullopt;
}

}  // namespace

std::optional<ProbeReply> UdpTracerouteTransport::probe(const IpAddress& target, int ttl,
                                                        const TracerouteOptions& options) {
  const bool v6 = !is_v4(target);
  Fd fd = open_probe_socket(target, options);
  if (v6) {
    ::setsockopt(fd.get(), IPPROTO_IPV6, IPV6_UNICAST_HOPS, &ttl, sizeof ttl);
  } else {
    ::setsockopt(fd.get(), IPPROTO_IP, IP_TTL, &ttl, sizeof ttl);
  }
  const std::uint8_t payload[16] = {'n', 'a', 't', '6', '4', 's', 'c', 'o',
                                    'p', 'e', static_cast<std::uint8_t>(ttl)};
  const auto sent = clock::now();
  if (::send(fd.get(), payload, sizeof payload, 0) < 0) {
    if (errno == ENETUNREACH || errno == EHOSTUNREACH) {
      throw NoRoute(errno_message("no route to " + to_string(target)));
    }
    // Errors raised synchronously are still queued; fall through and read.
  }
  const auto deadline = sent + options.timeout;
  for (;;) {
    auto left = std::chrono::duration_cast<std::chrono::milliseconds>(deadline - clock::now());
    if (left.count() <= 0 || !wait_readable(fd.get(), left)) return std::nullopt;
    if (auto reply = read_error(fd.get(), v6)) {
      reply->rtt_ms = std::chrono::duration<double, std::milli>(clock::now() - sent).count();
      return reply;
    }
    // A UDP answer from the target also means it was reached.
    std::uint8_t buf[512];
    SockAddr from;
    from.length = sizeof from.storage;
    if (::recvfrom(fd.get(), buf, sizeof buf, MSG_DONTWAIT, from.get(), &from.length) >= 0) {
      ProbeReply reply{address_of(from)};
      reply.reached = true;
      reply.rtt_ms = std::chrono::duration<double, std::milli>(clock::now() - sent).count();
      return reply;
    }
  }
}

TraceroutePath udp_traceroute(TracerouteTransport& transport, const IpAddress& target,
                              const TracerouteMeta& meta, const TracerouteOptions& options) {
  if (options.max_ttl < 1 || options.max_ttl > 255) throw Error("max_ttl out of range");
  if (options.packets_per_hop < 1) throw Error("packets_per_hop must be positive");

  TraceroutePath path;
  path.probe_id = meta.probe_id;
  path.family = meta.family;
  path.prefix = meta.prefix;
  path.target_v4 = meta.target_v4;
  path.round = meta.round;
  path.timestamp = meta.timestamp;

  for (int ttl = 1; ttl <= options.max_ttl; ++ttl) {
    Hop hop;
    hop.index = ttl;
    bool reached = false;
    for (int k = 0; k < options.packets_per_hop; ++k) {
      auto reply = transport.probe(target, ttl, options);
      if (!reply) continue;
      if (!hop.address) hop.address = reply->from;
      hop.rtts_ms.push_back(reply->rtt_ms);
      reached = reached || (reply->reached && reply->from == target);
    }
    path.hops.push_back(std::move(hop));
    if (reached) break;
  }
  return path;
}

}  // namespace nat64scope
