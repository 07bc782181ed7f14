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

// Small POSIX socket helpers shared by the drivers and the mock servers.

#pragma once

#include <sys/socket.h>

#include <chrono>
#include <cstdint>
#include <string>

#include "nat64scope/ip.hpp"

namespace nat64scope {

/// Owning file descriptor.
class Fd {
public:
  Fd() = default;
  explicit Fd(int fd) : fd_(fd) {}
  Fd(Fd&& o) noexcept : fd_(o.release()) {}
  Fd& operator=(Fd&& o) noexcept;
  Fd(const Fd&) = delete;
  Fd& operator=(const Fd&) = delete;
  ~Fd();

  int get() const { return fd_; }
  explicit operator bool() const { return fd_ >= 0; }
  int release() {
    int fd = fd_;
    fd_ = -1;
    return fd;
  }

private:
  int fd_ = -1;
};

struct SockAddr {
  sockaddr_storage storage{};
  socklen_t length = 0;

  const sockaddr* get() const { return reinterpret_cast<const sockaddr*>(&storage); }
  sockaddr* get() { return reinterpret_cast<sockaddr*>(&storage); }
  int family() const { return storage.ss_family; }
};

SockAddr make_sockaddr(const IpAddress& addr, std::uint16_t port);
IpAddress address_of(const SockAddr& sa);
std::uint16_t port_of(const SockAddr& sa);

/// "what: strerror(errno)"
std::string errno_message(const std::string& what);

/// poll() for readability; false on timeout.
bool wait_readable(int fd, std::chrono::milliseconds timeout);

}  // namespace nat64scope
