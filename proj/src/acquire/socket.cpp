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

#include "nat64scope/acquire/socket.hpp"

#include <arpa/inet.h>
#include <netinet/in.h>
#include <poll.h>
#include <unistd.h>

#include <cerrno>
#include <cstring>

namespace nat64scope {

Fd& Fd::operator=(Fd&& o) noexcept {
  if (this != &o) {
    if (fd_ >= 0) ::close(fd_);
    fd_ = o.release();
  }
  return *this;
}

Fd::~Fd() {
  if (fd_ >= 0) ::close(fd_);
}

SockAddr make_sockaddr(const IpAddress& addr, std::uint16_t port) {
  SockAddr sa;
  if (const auto* v4 = std::get_if<Ipv4Address>(&addr)) {
    auto* in = reinterpret_cast<sockaddr_in*>(&sa.storage);
    in->sin_family = AF_INET;
    in->sin_port = htons(port);
    std::memcpy(&in->sin_addr, v4->octets.data(), 4);
    sa.length = sizeof(sockaddr_in);
  } else {
    auto* in6 = reinterpret_cast<sockaddr_in6*>(&sa.storage);
    in6->sin6_family = AF_INET6;
    in6->sin6_port = htons(port);
    std::memcpy(&in6->sin6_addr, std::get<Ipv6Address>(addr).bytes.data(), 16);
    sa.length = sizeof(sockaddr_in6);
  }
  return sa;
}

IpAddress address_of(const SockAddr& sa) {
  if (sa.family() == AF_INET) {
    Ipv4Address v4;
    std::memcpy(v4.octets.data(), &reinterpret_cast<const sockaddr_in*>(&sa.storage)->sin_addr, 4);
    return v4;
  }
  Ipv6Address v6;
  std::memcpy(v6.bytes.data(), &reinterpret_cast<const sockaddr_in6*>(&sa.storage)->sin6_addr, 16);
  return v6;
}

std::uint16_t port_of(const SockAddr& sa) {
  if (sa.family() == AF_INET) return ntohs(reinterpret_cast<const sockaddr_in*>(&sa.storage)->sin_port);
  return ntohs(reinterpret_cast<const sockaddr_in6*>(&sa.storage)->sin6_port);
}

std::string errno_message(const std::string& what) {
  return what + ": " + std::strerror(errno);
}

bool wait_readable(int fd, std::chrono::milliseconds timeout) {
  pollfd p{fd, POLLIN, 0};
  const auto deadline = std::chrono::steady_clock::now() + timeout;
  for (;;) {
    auto left = std::chrono::ceil<std::chrono::milliseconds>(
        deadline - std::chrono::steady_clock::now());
    if (left.count() < 0) left = std::chrono::milliseconds(0);
    int rc = ::poll(&p, 1, static_cast<int>(left.count()));
    if (rc > 0) return true;
    if (rc == 0) return false;
    if (errno != EINTR) return false;
  }
}

}  // namespace nat64scope
