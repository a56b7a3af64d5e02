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

// Thin JSON-over-HTTP client used by the three external services (poison
// generator, back-translation, grammar check), plus a bounded fan-out helper.

#ifndef BDLAB_HTTP_H_
#define BDLAB_HTTP_H_

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cstddef>
#include <exception>
#include <optional>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "json.hpp"

namespace bdlab {

struct Endpoint {
  std::string base_url;  // e.g. "http://127.0.0.1:6006" or "http://host:8081/v2/check"
  std::chrono::milliseconds timeout{30000};
  int retries = 2;  // extra attempts after the first
  std::size_t max_in_flight = 4;

  bool configured() const { return !base_url.empty(); }
};

class HttpJsonClient {
 public:
  explicit HttpJsonClient(Endpoint endpoint);

  const Endpoint& endpoint() const { return endpoint_; }

  // POSTs `body` as application/json to the endpoint path. Throws
  // LabError(kTransport) after the retry budget is spent, or immediately on
  // a 4xx status or a non-JSON reply.
  nlohmann::json PostJson(const nlohmann::json& body) const;

  // POSTs application/x-www-form-urlencoded fields.
  nlohmann::json PostForm(const std::vector<std::pair<std::string, std::string>>& fields) const;

 private:
  Endpoint endpoint_;
  std::string origin_;  // scheme://host:port
  std::string path_;    // request path, "/" if none
};

template <typename T>
struct Outcome {
  std::optional<T> value;
  std::string error;

  bool ok() const { return value.has_value(); }
};

// Calls fn(i) for i in [0, n) on at most `limit` threads. Results keep input
// order; an exception in one call is captured in its slot only.
template <typename T, typename Fn>
std::vector<Outcome<T>> RunBounded(std::size_t n, std::size_t limit, Fn&& fn) {
  std::vector<Outcome<T>> out(n);
  if (n == 0) return out;
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (;;) {
      std::size_t i = next.fetch_add(1);
      if (i >= n) return;
      try {
        out[i].value = fn(i);
      } catch (const std::exception& e) {
        out[i].error = e.what();
      }
    }
  };
  std::size_t threads = std::clamp<std::size_t>(limit, 1, n);
  std::vector<std::jthread> pool;
  pool.reserve(threads);
  for (std::size_t t = 0; t < threads; ++t) pool.emplace_back(worker);
  pool.clear();  // joins
  return out;
}

}  // namespace bdlab

#endif  // BDLAB_HTTP_H_
