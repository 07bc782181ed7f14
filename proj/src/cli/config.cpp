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

#include "nat64scope/cli/config.hpp"

#include <charconv>
#include <fstream>
#include <set>

#include "nat64scope/acquire/lists.hpp"

namespace nat64scope::cli {

namespace fs = std::filesystem;

namespace {

Ipv4Address v4_of(const nlohmann::json& j, const std::string& key) {
  if (!j.is_string()) throw ConfigError("config: " + key + " must hold IPv4 address strings");
  auto a = Ipv4Address::parse(j.get<std::string>());
  if (!a) throw ConfigError("config: " + key + ": bad IPv4 address '" + j.get<std::string>() + "'");
  return *a;
}

std::vector<Ipv4Address> v4_list(const nlohmann::json& j, const std::string& key) {
  if (!j.is_array()) throw ConfigError("config: " + key + " must be an array");
  std::vector<Ipv4Address> out;
  for (const auto& x : j) out.push_back(v4_of(x, key));
  return out;
}

int positive_int(const nlohmann::json& j, const std::string& key) {
  if (!j.is_number_integer() || j.get<long long>() < 1 || j.get<long long>() > 1'000'000) {
    throw ConfigError("config: " + key + " must be a positive integer");
  }
  return j.get<int>();
}

bool boolean(const nlohmann::json& j, const std::string& key) {
  if (!j.is_boolean()) throw ConfigError("config: " + key + " must be true or false");
  return j.get<bool>();
}

fs::path path_of(const nlohmann::json& j, const std::string& key, const fs::path& base) {
  if (!j.is_string() || j.get<std::string>().empty()) {
    throw ConfigError("config: " + key + " must be a non-empty path");
  }
  fs::path p = j.get<std::string>();
  return p.is_absolute() ? p : base / p;
}

std::string rel_text(const fs::path& p, const fs::path& base) {
  auto rel = p.lexically_relative(base);
  if (!rel.empty() && *rel.begin() != "..") return rel.generic_string();
  return p.generic_string();
}

template <typename F>
auto wrap(const fs::path& path, F&& f) {
  try {
    return f();
  } catch (const ConfigError&) {
    throw;
  } catch (const std::exception& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
}

}  // namespace

DnsEndpoint parse_endpoint(std::string_view text) {
  DnsEndpoint e;
  std::string_view host = text;
  std::optional<std::string_view> port;
  if (!text.empty() && text.front() == '[') {
    const auto close = text.find(']');
    if (close == std::string_view::npos) throw ConfigError("bad resolver '" + std::string(text) + "'");
    host = text.substr(1, close - 1);
    if (close + 1 < text.size()) {
      if (text[close + 1] != ':') throw ConfigError("bad resolver '" + std::string(text) + "'");
      port = text.substr(close + 2);
    }
  } else if (std::count(text.begin(), text.end(), ':') == 1) {
    const auto colon = text.find(':');
    host = text.substr(0, colon);
    port = text.substr(colon + 1);
  }
  auto addr = parse_ip(host);
  if (!addr) throw ConfigError("bad resolver address '" + std::string(text) + "'");
  e.address = *addr;
  if (port) {
    unsigned value = 0;
    auto [p, ec] = std::from_chars(port->data(), port->data() + port->size(), value);
    if (ec != std::errc{} || p != port->data() + port->size() || value == 0 || value > 65535) {
      throw ConfigError("bad resolver port in '" + std::string(text) + "'");
    }
    e.port = static_cast<std::uint16_t>(value);
  }
  return e;
}

std::string format_endpoint(const DnsEndpoint& e) {
  const std::string host = to_string(e.address);
  if (e.port == 53) return host;
  return (is_v4(e.address) ? host : "[" + host + "]") + ":" + std::to_string(e.port);
}

RunConfig parse_run_config(const nlohmann::json& j, const fs::path& base) {
  if (!j.is_object()) throw ConfigError("config: top level must be an object");
  RunConfig c;
  for (const auto& [key, v] : j.items()) {
    if (key == "targets") c.targets = v4_list(v, key);
    else if (key == "ping_target") c.ping_target = v4_of(v, key);
    else if (key == "dns2_name") {
      if (!v.is_string() || v.get<std::string>().empty()) throw ConfigError("config: dns2_name must be a name");
      c.dns2_name = v.get<std::string>();
    } else if (key == "dns2_a_records") c.dns2_a_records = v4_list(v, key);
    else if (key == "dataset") c.dataset = path_of(v, key, base);
    else if (key == "public_nat64_list") c.public_nat64_list = path_of(v, key, base);
    else if (key == "public_resolver_list") c.public_resolver_list = path_of(v, key, base);
    else if (key == "ip2as") c.ip2as = path_of(v, key, base);
    else if (key == "as_categories") c.as_categories = path_of(v, key, base);
    else if (key == "repeat") c.repeat = positive_int(v, key);
    else if (key == "concurrency") c.concurrency = positive_int(v, key);
    else if (key == "out_dir") c.out_dir = path_of(v, key, base);
    else if (key == "drop_final_round") c.drop_final_round = boolean(v, key);
    else if (key == "exclude_ttl_anomaly") c.exclude_ttl_anomaly = boolean(v, key);
    else if (key == "local_nat_threshold_ms") {
      if (!v.is_number() || !(v.get<double>() > 0)) throw ConfigError("config: local_nat_threshold_ms must be positive");
      c.local_nat_threshold_ms = v.get<double>();
    } else if (key == "resolvers") {
      if (!v.is_array()) throw ConfigError("config: resolvers must be an array");
      for (const auto& r : v) {
        if (!r.is_string()) throw ConfigError("config: resolvers must hold strings");
        c.resolvers.push_back(parse_endpoint(r.get<std::string>()));
      }
    } else if (key == "dns_timeout_ms") c.dns_timeout_ms = positive_int(v, key);
    else if (key == "probe_id") {
      if (!v.is_string() || v.get<std::string>().empty()) throw ConfigError("config: probe_id must be a string");
      c.probe_id = v.get<std::string>();
    } else if (key == "traceroute") {
      if (!v.is_object()) throw ConfigError("config: traceroute must be an object");
      for (const auto& [k, x] : v.items()) {
        if (k == "max_ttl") c.traceroute.max_ttl = positive_int(x, "traceroute.max_ttl");
        else if (k == "timeout_ms") c.traceroute.timeout_ms = positive_int(x, "traceroute.timeout_ms");
        else if (k == "packets_per_hop") c.traceroute.packets_per_hop = positive_int(x, "traceroute.packets_per_hop");
        else throw ConfigError("config: unknown key traceroute." + k);
      }
      if (c.traceroute.max_ttl > 255) throw ConfigError("config: traceroute.max_ttl must be at most 255");
    } else {
      throw ConfigError("config: unknown key '" + key + "'");
    }
  }
  return c;
}

void check_files(const RunConfig& c) {
  const std::pair<const char*, const std::optional<fs::path>*> files[] = {
      {"dataset", &c.dataset},
      {"public_nat64_list", &c.public_nat64_list},
      {"public_resolver_list", &c.public_resolver_list},
      {"ip2as", &c.ip2as},
      {"as_categories", &c.as_categories},
  };
  for (const auto& [name, p] : files) {
    if (*p && !fs::is_regular_file(**p)) {
      throw ConfigError(std::string("config: ") + name + " file not found: " + (*p)->string());
    }
  }
}

RunConfig load_run_config(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config: cannot open " + path.string());
  auto j = nlohmann::json::parse(in, nullptr, false);
  if (j.is_discarded()) throw ConfigError("config: " + path.string() + " is not valid JSON");
  auto c = parse_run_config(j, path.parent_path());
  check_files(c);
  return c;
}

nlohmann::json to_json(const RunConfig& c, const fs::path& base) {
  nlohmann::json j;
  auto v4s = [](const std::vector<Ipv4Address>& xs) {
    nlohmann::json a = nlohmann::json::array();
    for (const auto& x : xs) a.push_back(x.to_string());
    return a;
  };
  j["targets"] = v4s(c.targets);
  j["ping_target"] = c.ping_target.to_string();
  j["dns2_name"] = c.dns2_name;
  j["dns2_a_records"] = v4s(c.dns2_a_records);
  if (c.dataset) j["dataset"] = rel_text(*c.dataset, base);
  if (c.public_nat64_list) j["public_nat64_list"] = rel_text(*c.public_nat64_list, base);
  if (c.public_resolver_list) j["public_resolver_list"] = rel_text(*c.public_resolver_list, base);
  if (c.ip2as) j["ip2as"] = rel_text(*c.ip2as, base);
  if (c.as_categories) j["as_categories"] = rel_text(*c.as_categories, base);
  j["repeat"] = c.repeat;
  j["concurrency"] = c.concurrency;
  j["out_dir"] = rel_text(c.out_dir, base);
  j["drop_final_round"] = c.drop_final_round;
  j["exclude_ttl_anomaly"] = c.exclude_ttl_anomaly;
  j["local_nat_threshold_ms"] = c.local_nat_threshold_ms;
  nlohmann::json rs = nlohmann::json::array();
  for (const auto& r : c.resolvers) rs.push_back(format_endpoint(r));
  j["resolvers"] = rs;
  j["dns_timeout_ms"] = c.dns_timeout_ms;
  j["probe_id"] = c.probe_id;
  j["traceroute"] = {{"max_ttl", c.traceroute.max_ttl},
                     {"timeout_ms", c.traceroute.timeout_ms},
                     {"packets_per_hop", c.traceroute.packets_per_hop}};
  return j;
}

Inputs load_inputs(const RunConfig& c) {
  check_files(c);
  Inputs in;
  if (c.public_nat64_list) {
    in.public_nat64 = wrap(*c.public_nat64_list, [&] { return load_prefix_list(*c.public_nat64_list); });
  }
  if (c.public_resolver_list) {
    in.public_resolvers =
        wrap(*c.public_resolver_list, [&] { return load_prefix_list(*c.public_resolver_list); });
  }
  if (c.ip2as) in.ip2as = wrap(*c.ip2as, [&] { return Ip2AsTable::load(*c.ip2as); });
  if (c.as_categories) {
    in.as_categories = wrap(*c.as_categories, [&] { return AsCategoryMap::load(*c.as_categories); });
  }
  return in;
}

}  // namespace nat64scope::cli
