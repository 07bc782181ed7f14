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
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "nat64scope/model.hpp"

namespace nat64scope {

class NotFound : public Error {
public:
  using Error::Error;
};

/// Non-retryable HTTP failure, or retries exhausted.
class HttpError : public Error {
public:
  HttpError(int status, const std::string& what) : Error(what), status_(status) {}
  int status() const { return status_; }  // 0 for transport errors

private:
  int status_;
};

struct AtlasClientConfig {
  /// Scheme, host and optional port, e.g. "https://atlas.ripe.net".
  std::string base_url = "https://atlas.ripe.net";
  /// Defaults to $NAT64SCOPE_ATLAS_KEY when unset.
  std::optional<std::string> api_key;
  int max_retries = 3;
  std::chrono::milliseconds initial_backoff{500};
  std::chrono::seconds timeout{60};
};

/// Results are fetched in time windows of `window` seconds between start
/// and stop; without a range a single page covers everything.
struct AtlasFetchRequest {
  std::int64_t measurement_id = 0;
  std::optional<Timestamp> start;
  std::optional<Timestamp> stop;
  Timestamp window = 86400;
};

struct AtlasFetchResult {
  std::vector<std::filesystem::path> pages;  // in fetch order
  std::size_t results = 0;
};

/// Reads NAT64SCOPE_ATLAS_KEY.
std::optional<std::string> atlas_key_from_env();

/// Downloads every page into `out_dir` as msm-<id>-page-<n>.json, bytes
/// exactly as served. 5xx answers, transport errors and bodies that are
/// not a complete JSON array are retried with exponential backoff; 404
/// throws NotFound at once, other 4xx throw HttpError.
AtlasFetchResult atlas_fetch(const AtlasClientConfig& config, const AtlasFetchRequest& request,
                             const std::filesystem::path& out_dir);

}  // namespace nat64scope
