/*
 * Copyright 2026 The cxrlabel Authors.
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include <cstdlib>

#include "httplib.h"
#include "json.hpp"

#include "backend.h"
#include "error.h"

namespace cxrlabel {
namespace {

// Splits "scheme://host[:port]/path" into base URL and path.
std::pair<std::string, std::string> SplitUrl(const std::string& url) {
  auto scheme_end = url.find("://");
  if (scheme_end == std::string::npos) Fail(ErrorCode::kInvalidArgument, "endpoint must be a URL: " + url);
  auto path_begin = url.find('/', scheme_end + 3);
  if (path_begin == std::string::npos) return {url, "/v1/chat/completions"};
  return {url.substr(0, path_begin), url.substr(path_begin)};
}

}  // namespace

HttpBackend::HttpBackend(BackendConfig config) : config_(std::move(config)) {
  Validate(config_);
  std::tie(base_url_, path_) = SplitUrl(config_.endpoint);
#ifndef CPPHTTPLIB_OPENSSL_SUPPORT
  if (base_url_.starts_with("https://")) {
    Fail(ErrorCode::kInvalidArgument, "this build has no TLS support; use an http:// endpoint");
  }
#endif
}

std::string HttpBackend::Complete(const CompletionRequest& request) {
  httplib::Client client(base_url_);
  const auto seconds = config_.timeout.count() / 1000;
  const auto micros = (config_.timeout.count() % 1000) * 1000;
  client.set_connection_timeout(seconds, micros);
  client.set_read_timeout(seconds, micros);
  client.set_write_timeout(seconds, micros);

  httplib::Headers headers;
  if (const char* key = std::getenv(config_.api_key_env.c_str()); key && *key) {
    headers.emplace("Authorization", std::string("Bearer ") + key);
  }

  nlohmann::json body = {
      {"model", request.model.empty() ? config_.model : request.model},
      {"messages", nlohmann::json::array({{{"role", "user"}, {"content", request.prompt}}})},
      {"temperature", request.temperature},
      {"max_tokens", request.max_tokens},
  };
  auto res = client.Post(path_, headers, body.dump(), "application/json");
  if (!res) {
    Fail(ErrorCode::kBackendUnavailable,
         "request to " + config_.endpoint + " failed: " + httplib::to_string(res.error()));
  }
  if (res->status >= 500 || res->status == 429) {
    Fail(ErrorCode::kBackendUnavailable,
         "backend returned HTTP " + std::to_string(res->status));
  }
  if (res->status != 200) {
    Fail(ErrorCode::kBackendUnavailable,
         "backend rejected request with HTTP " + std::to_string(res->status) + ": " + res->body);
  }
  // Anything unexpected inside a 200 is passed through as raw text so that
  // the response parser reports it and the retry loop can react.
  auto doc = nlohmann::json::parse(res->body, nullptr, false);
  if (doc.is_discarded()) return res->body;
  try {
    return doc.at("choices").at(0).at("message").at("content").get<std::string>();
  } catch (const nlohmann::json::exception&) {
    return res->body;
  }
}

}  // namespace cxrlabel
