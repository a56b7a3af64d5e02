// Copyright 2026 The bdlab Authors.
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

#include "bdlab/http.h"

#include <thread>

#include "bdlab/errors.h"
#include "httplib.h"

namespace bdlab {

namespace {

void SplitUrl(const std::string& url, std::string* origin, std::string* path) {
  std::size_t scheme = url.find("://");
  std::size_t host_start = scheme == std::string::npos ? 0 : scheme + 3;
  std::size_t slash = url.find('/', host_start);
  if (slash == std::string::npos) {
    *origin = url;
    *path = "/";
  } else {
    *origin = url.substr(0, slash);
    *path = url.substr(slash);
  }
  if (scheme == std::string::npos) *origin = "http://" + *origin;
}

template <typename Send>
nlohmann::json WithRetries(const Endpoint& ep, const std::string& what, Send&& send) {
  std::string last_error = "no attempt made";
  for (int attempt = 0; attempt <= std::max(0, ep.retries); ++attempt) {
    httplib::Result res = send();
    if (!res) {
      last_error = "connection failed (" + httplib::to_string(res.error()) + ")";
      continue;
    }
    if (res->status >= 500) {
      last_error = "server status " + std::to_string(res->status);
      continue;
    }
    if (res->status >= 400) {
      throw LabError(ErrorCode::kTransport,
                     what + ": client error status " + std::to_string(res->status));
    }
    try {
      return nlohmann::json::parse(res->body);
    } catch (const nlohmann::json::exception&) {
      throw LabError(ErrorCode::kTransport, what + ": reply is not JSON");
    }
  }
  throw LabError(ErrorCode::kTransport, what + ": " + last_error);
}

}  // namespace

HttpJsonClient::HttpJsonClient(Endpoint endpoint) : endpoint_(std::move(endpoint)) {
  if (!endpoint_.configured()) {
    throw LabError(ErrorCode::kConfig, "HTTP endpoint has no base URL");
  }
  SplitUrl(endpoint_.base_url, &origin_, &path_);
}

nlohmann::json HttpJsonClient::PostJson(const nlohmann::json& body) const {
  const std::string payload = body.dump();
  return WithRetries(endpoint_, endpoint_.base_url, [&] {
    httplib::Client cli(origin_);
    auto secs = std::chrono::duration_cast<std::chrono::seconds>(endpoint_.timeout);
    auto usecs = std::chrono::duration_cast<std::chrono::microseconds>(endpoint_.timeout - secs);
    cli.set_connection_timeout(secs.count(), usecs.count());
    cli.set_read_timeout(secs.count(), usecs.count());
    cli.set_write_timeout(secs.count(), usecs.count());
    return cli.Post(path_, payload, "application/json");
  });
}

nlohmann::json HttpJsonClient::PostForm(
    const std::vector<std::pair<std::string, std::string>>& fields) const {
  httplib::Params params;
  for (const auto& [k, v] : fields) params.emplace(k, v);
  return WithRetries(endpoint_, endpoint_.base_url, [&] {
    httplib::Client cli(origin_);
    auto secs = std::chrono::duration_cast<std::chrono::seconds>(endpoint_.timeout);
    auto usecs = std::chrono::duration_cast<std::chrono::microseconds>(endpoint_.timeout - secs);
    cli.set_connection_timeout(secs.count(), usecs.count());
    cli.set_read_timeout(secs.count(), usecs.count());
    return cli.Post(path_, params);
  });
}

}  // namespace bdlab
