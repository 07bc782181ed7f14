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

#include "nat64scope/acquire/dns.hpp"

#include <sys/socket.h>
#include <unistd.h>

#include <algorithm>
#include <cctype>
#include <cerrno>
#include <random>

#include "nat64scope/acquire/socket.hpp"

namespace nat64scope {

namespace {

constexpr std::uint16_t kClassIn = 1;
constexpr std::size_t kHeaderSize = 12;

void put16(std::vector<std::uint8_t>& out, std::uint16_t v) {
  out.push_back(static_cast<std::uint8_t>(v >> 8));
  out.push_back(static_cast<std::uint8_t>(v));
}

void put32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  put16(out, static_cast<std::uint16_t>(v >> 16));
  put16(out, static_cast<std::uint16_t>(v));
}

void put_name(std::vector<std::uint8_t>& out, std::string_view name) {
  if (!name.empty() && name.back() == '.') name.remove_suffix(1);
  if (name.size() > 253) throw Error("dns name too long");
  while (!name.empty()) {
    auto dot = name.find('.');
    auto label = name.substr(0, dot);
    if (label.empty() || label.size() > 63) throw Error("bad dns label in name");
    out.push_back(static_cast<std::uint8_t>(label.size()));
    out.insert(out.end(), label.begin(), label.end());
    name = dot == std::string_view::npos ? std::string_view{} : name.substr(dot + 1);
  }
  out.push_back(0);
}

/// Bounds-checked reader; every accessor reports failure via ok().
class Reader {
public:
  explicit Reader(std::span<const std::uint8_t> msg) : msg_(msg) {}

  bool ok() const { return ok_; }
  std::size_t pos() const { return pos_; }

  std::uint16_t u16() {
    if (!need(2)) return 0;
    std::uint16_t v = static_cast<std::uint16_t>(msg_[pos_] << 8 | msg_[pos_ + 1]);
    pos_ += 2;
    return v;
  }
  std::uint32_t u32() {
    std::uint32_t hi = u16();
    return hi << 16 | u16();
  }
  std::span<const std::uint8_t> bytes(std::size_t n) {
    if (!need(n)) return {};
    auto s = msg_.subspan(pos_, n);
    pos_ += n;
    return s;
  }

  /// Reads a possibly compressed name at the cursor.
  std::string name() {
    std::string out;
    std::size_t p = pos_;
    bool jumped = false;
    int hops = 0;
    for (;;) {
      if (p >= msg_.size()) return fail();
      std::uint8_t len = msg_[p];
      if ((len & 0xC0) == 0xC0) {
        if (p + 1 >= msg_.size() || ++hops > 16) return fail();
        std::size_t target = static_cast<std::size_t>((len & 0x3F) << 8 | msg_[p + 1]);
        if (!jumped) pos_ = p + 2;
        jumped = true;
        p = target;
        continue;
      }
      if (len & 0xC0) return fail();
      if (len == 0) {
        if (!jumped) pos_ = p + 1;
        return out;
      }
      if (p + 1 + len > msg_.size()) return fail();
      if (!out.empty()) out += '.';
      for (std::size_t i = 0; i < len; ++i) {
        out += static_cast<char>(std::tolower(msg_[p + 1 + i]));
      }
      if (out.size() > 255) return fail();
      p += 1 + len;
    }
  }

private:
  bool need(std::size_t n) {
    if (pos_ + n > msg_.size()) ok_ = false;
    return ok_;
  }
  std::string fail() {
    ok_ = false;
    return {};
  }

  std::span<const std::uint8_t> msg_;
  std::size_t pos_ = 0;
  bool ok_ = true;
};

DnsResponse malformed(std::string why) {
  DnsResponse r;
  r.status = DnsStatus::Malformed;
  r.diagnostic = std::move(why);
  return r;
}

}  // namespace

std::vector<std::uint8_t> build_query(std::uint16_t id, std::string_view name, RecordType type) {
  std::vector<std::uint8_t> out;
  put16(out, id);
  put16(out, 0x0100);  // RD
  put16(out, 1);
  put16(out, 0);
  put16(out, 0);
  put16(out, 0);
  put_name(out, name);
  put16(out, static_cast<std::uint16_t>(type));
  put16(out, kClassIn);
  return out;
}

std::optional<DnsQuestion> parse_query(std::span<const std::uint8_t> msg) {
  Reader r(msg);
  DnsQuestion q;
  q.id = r.u16();
  const auto flags = r.u16();
  const auto qdcount = r.u16();
  r.bytes(6);
  if (!r.ok() || (flags & 0x8000) || qdcount != 1) return std::nullopt;
  q.name = r.name();
  q.qtype = r.u16();
  r.u16();
  if (!r.ok()) return std::nullopt;
  return q;
}

std::vector<std::uint8_t> build_response(const DnsQuestion& q, std::uint8_t rcode,
                                         std::span<const Ipv6Address> aaaa,
                                         std::span<const Ipv4Address> a) {
  std::vector<std::uint8_t> out;
  put16(out, q.id);
  put16(out, static_cast<std::uint16_t>(0x8180 | (rcode & 0x0F)));  // QR, RD, RA
  put16(out, 1);
  put16(out, static_cast<std::uint16_t>(aaaa.size() + a.size()));
  put16(out, 0);
  put16(out, 0);
  put_name(out, q.name);
  put16(out, q.qtype);
  put16(out, kClassIn);
  auto answer = [&](RecordType type, std::span<const std::uint8_t> rdata) {
    put16(out, 0xC000 | kHeaderSize);  // pointer to the question name
    put16(out, static_cast<std::uint16_t>(type));
    put16(out, kClassIn);
    put32(out, 60);
    put16(out, static_cast<std::uint16_t>(rdata.size()));
    out.insert(out.end(), rdata.begin(), rdata.end());
  };
  for (const auto& v6 : aaaa) answer(RecordType::AAAA, v6.bytes);
  for (const auto& v4 : a) answer(RecordType::A, v4.octets);
  return out;
}

DnsResponse parse_response(std::span<const std::uint8_t> msg,
                           std::optional<std::uint16_t> expected_id) {
  Reader r(msg);
  const auto id = r.u16();
  const auto flags = r.u16();
  const auto qdcount = r.u16();
  const auto ancount = r.u16();
  r.bytes(4);
  if (!r.ok()) return malformed("short header");
  if (!(flags & 0x8000)) return malformed("not a response");
  if (expected_id && id != *expected_id) return malformed("transaction id mismatch");

  DnsResponse resp;
  for (int i = 0; i < qdcount; ++i) {
    auto name = r.name();
    r.bytes(4);
    if (i == 0) resp.qname = name;
  }
  if (!r.ok()) return malformed("bad question section");

  switch (flags & 0x0F) {
    case 0: resp.status = DnsStatus::NoError; break;
    case 2: resp.status = DnsStatus::ServFail; break;
    case 3: resp.status = DnsStatus::NxDomain; break;
    case 5: resp.status = DnsStatus::Refused; break;
    default:
      resp.status = DnsStatus::ServFail;
      resp.diagnostic = "rcode " + std::to_string(flags & 0x0F);
  }

  for (int i = 0; i < ancount; ++i) {
    r.name();
    const auto type = r.u16();
    r.u16();
    r.u32();
    const auto rdlen = r.u16();
    auto rdata = r.bytes(rdlen);
    if (!r.ok()) return malformed("bad answer section");
    if (type == static_cast<std::uint16_t>(RecordType::AAAA)) {
      if (rdlen != 16) return malformed("bad AAAA rdata length");
      Ipv6Address v6;
      std::copy(rdata.begin(), rdata.end(), v6.bytes.begin());
      resp.aaaa.push_back(v6);
    } else if (type == static_cast<std::uint16_t>(RecordType::A)) {
      if (rdlen != 4) return malformed("bad A rdata length");
      Ipv4Address v4;
      std::copy(rdata.begin(), rdata.end(), v4.octets.begin());
      resp.a.push_back(v4);
    }
  }
  return resp;
}

DnsResponse dns_query(const DnsEndpoint& resolver, std::string_view name, RecordType type,
                      std::chrono::milliseconds timeout) {
  auto result = [&](DnsStatus status, std::string diag) {
    DnsResponse r;
    r.status = status;
    r.qname = std::string(name);
    r.resolver = resolver.address;
    r.diagnostic = std::move(diag);
    return r;
  };

  static thread_local std::mt19937 ids{std::random_device{}()};
  const auto id = static_cast<std::uint16_t>(ids());
  const auto query = build_query(id, name, type);
  const auto sa = make_sockaddr(resolver.address, resolver.port);

  Fd fd(::socket(sa.family(), SOCK_DGRAM | SOCK_CLOEXEC, 0));
  if (!fd) return result(DnsStatus::Timeout, errno_message("socket"));
  if (::connect(fd.get(), sa.get(), sa.length) != 0 ||
      ::send(fd.get(), query.data(), query.size(), 0) < 0) {
    return result(errno == ECONNREFUSED ? DnsStatus::Refused : DnsStatus::Timeout,
                  errno_message("unreachable"));
  }

  const auto deadline = std::chrono::steady_clock::now() + timeout;
  std::vector<std::uint8_t> buf(4096);
  for (;;) {
    auto left = std::chrono::ceil<std::chrono::milliseconds>(
        deadline - std::chrono::steady_clock::now());
    if (left.count() <= 0 || !wait_readable(fd.get(), left)) {
      return result(DnsStatus::Timeout, "no answer within " + std::to_string(timeout.count()) + " ms");
    }
    ssize_t n = ::recv(fd.get(), buf.data(), buf.size(), 0);
    if (n < 0) {
      if (errno == EINTR) continue;
      if (errno == ECONNREFUSED) return result(DnsStatus::Refused, "port unreachable");
      return result(DnsStatus::Timeout, errno_message("recv"));
    }
    auto resp = parse_response(std::span(buf.data(), static_cast<std::size_t>(n)), id);
    // A stray datagram with another id is ignored; a broken one is reported.
    if (resp.status == DnsStatus::Malformed && resp.diagnostic == "transaction id mismatch") continue;
    resp.resolver = resolver.address;
    if (resp.qname.empty()) resp.qname = std::string(name);
    return resp;
  }
}

}  // namespace nat64scope
