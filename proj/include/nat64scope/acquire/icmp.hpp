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

#pragma once

#include <chrono>
#include <vector>

#include "nat64scope/model.hpp"

namespace nat64scope {

class PermissionDenied : public Error {
public:
  using Error::Error;
};
class NoRoute : public Error {
public:
  using Error::Error;
};

/// Sends ICMPv6 echo requests. Implementations: a raw socket for live use,
/// scripted mocks for tests.
class EchoTransport {
public:
  virtual ~EchoTransport() = default;
  /// One outcome per request, in send order.
  virtual std::vector<EchoOutcome> echo(const Ipv6Address& target, int count,
                                        std::chrono::milliseconds timeout) = 0;
};

/// Raw ICMPv6 socket. Construction throws PermissionDenied without
/// CAP_NET_RAW; echo throws NoRoute when the kernel has no route.
class RawIcmpv6Transport : public EchoTransport {
public:
  RawIcmpv6Transport();
  ~RawIcmpv6Transport() override;
  RawIcmpv6Transport(const RawIcmpv6Transport&) = delete;
  RawIcmpv6Transport& operator=(const RawIcmpv6Transport&) = delete;

  std::vector<EchoOutcome> echo(const Ipv6Address& target, int count,
                                std::chrono::milliseconds timeout) override;

private:
  int fd_ = -1;
  std::uint16_t ident_ = 0;
  std::uint16_t seq_ = 0;
};

/// Validates arguments and delegates; `timeout` bounds each request.
std::vector<EchoOutcome> icmp_echo(EchoTransport& transport, const Ipv6Address& target, int count,
                                   std::chrono::milliseconds timeout);

}  // namespace nat64scope
