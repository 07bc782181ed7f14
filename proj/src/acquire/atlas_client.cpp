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

#include "nat64scope/acquire/atlas_client.hpp"

#include <cstdlib>
#include <fstream>
#include <thread>

#include "httplib.h"
#include "json.hpp"

namespace nat64scope {

namespace {

std::string page_path(std::int64_t id, const std::optional<std::pair<Timestamp, Timestamp>>& win) {
  std::string path = "/api/v2/measurements/" + std::to_string(id) + "/results/?format=json";
  if (win) {
    path += "&start=" + std::to_string(win->first) + "&stop=" + std::to_string(win->second);
  }
  return path;
}

/// One page with retries; returns the body of a complete JSON array.
std::string fetch_page(httplib::Client& client, const AtlasClientConfig& config,
                       const std::string& path, std::size_t* count) {
  std::string last_error;
  for (int attempt = 0; attempt <= config.max_retries; ++attempt) {
    if (attempt > 0) std::this_thread::sleep_for(config.initial_backoff * (1 << (attempt - 1)));
    auto res = client.Get(path);
    if (!res) {
      last_error = "transport error: " + httplib::to_string(res.error());
      continue;
    }
    if (res->status == 404) throw NotFound("atlas: " + path + " not found");
    if (res->status >= 400 && res->status < 500) {
      throw HttpError(res->status, "atlas: HTTP " + std::to_string(res->status) + " for " + path);
    }
    if (res->status >= 500) {
      last_error = "HTTP " + std::to_string(res->status);
      continue;
    }
    auto parsed = nlohmann::json::parse(res->body, nullptr, false);
    if (parsed.is_discarded() || !parsed.is_array()) {
      last_error = "truncated or malformed page";
      continue;
    }
    *count = parsed.size();
    return res->body;
  }
  throw HttpError(0, "atlas: giving up on " + path + " after " +
                         std::to_string(config.max_retries) + " retries: " + last_error);
}

}  // namespace

std::optional<std::string> atlas_key_from_env() {
  const char* key = std::getenv("NAT64SCOPE_ATLAS_KEY");
  if (!key || !*key) return std::nullopt;
  return std::string(key);
}

AtlasFetchResult atlas_fetch(const AtlasClientConfig& config, const AtlasFetchRequest& request,
                             const std::filesystem::path& out_dir) {
  if (request.measurement_id <= 0) throw Error("atlas: measurement id must be positive");
  if (request.start.has_value() != request.stop.has_value()) {
    throw Error("atlas: start and stop go together");
  }
  if (request.window <= 0) throw Error("atlas: window must be positive");

  httplib::Client client(config.base_url);
  client.set_connection_timeout(config.timeout);
  client.set_read_timeout(config.timeout);
  client.set_follow_location(true);
  httplib::Headers headers{{"Accept", "application/json"}};
  if (auto key = config.api_key ? config.api_key : atlas_key_from_env()) {
    headers.emplace("Authorization", "Key " + *key);
  }
  client.set_default_headers(headers);

  std::vector<std::optional<std::pair<Timestamp, Timestamp>>> windows;
  if (request.start) {
    for (Timestamp s = *request.start; s < *request.stop; s += request.window) {
      windows.emplace_back(std::pair{s, std::min(s + request.window, *request.stop) - 1});
    }
  } else {
    windows.emplace_back(std::nullopt);
  }

  std::filesystem::create_directories(out_dir);
  AtlasFetchResult result;
  for (std::size_t i = 0; i < windows.size(); ++i) {
    std::size_t count = 0;
    const auto body = fetch_page(client, config, page_path(request.measurement_id, windows[i]), &count);
    auto file = out_dir / ("msm-" + std::to_string(request.measurement_id) + "-page-" +
                           std::to_string(i) + ".json");
    std::ofstream out(file, std::ios::binary);
    out << body;
    if (!out) throw Error("cannot write " + file.string());
    result.pages.push_back(file);
    result.results += count;
  }
  return result;
}

}  // namespace nat64scope
