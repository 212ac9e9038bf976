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

#ifndef CXRLABEL_BACKEND_H_
#define CXRLABEL_BACKEND_H_

#include <chrono>
#include <cstddef>
#include <deque>
#include <memory>
#include <mutex>
#include <string>
#include <vector>

#include "json.hpp"

namespace cxrlabel {

struct CompletionRequest {
  std::string prompt;
  std::string model;
  double temperature = 0.0;
  int max_tokens = 1024;
};

// A text-completion service. Implementations must be safe to call from
// several threads at once. Transport failures are reported by throwing
// Error(kBackendUnavailable); whatever text comes back is returned as is.
class Backend {
 public:
  virtual ~Backend() = default;
  virtual std::string id() const = 0;
  virtual std::string Complete(const CompletionRequest& request) = 0;
};

struct BackendConfig {
  std::string kind = "mock";  // "mock" or "http"
  std::string endpoint;       // e.g. http://localhost:8000/v1/chat/completions
  std::string model = "rule-mock";
  int max_retries = 2;
  std::vector<std::chrono::milliseconds> backoff{std::chrono::milliseconds(250),
                                                 std::chrono::milliseconds(1000),
                                                 std::chrono::milliseconds(4000)};
  std::size_t max_parallel = 4;
  std::chrono::milliseconds timeout{60000};
  double temperature = 0.0;
  int max_tokens = 1024;
  // Name of the environment variable holding the bearer token. The token
  // itself is never stored in a config or run artifact.
  std::string api_key_env = "CXRLABEL_API_KEY";
};

// Throws kInvalidArgument when max_retries < 0 or max_parallel < 1.
void Validate(const BackendConfig& config);
BackendConfig BackendConfigFromJson(const nlohmann::json& doc);
nlohmann::ordered_json ToJson(const BackendConfig& config);

// Deterministic stand-in for an LLM: recovers the report and the label
// blocks from the rendered prompt and answers with RuleLabel.
class MockBackend : public Backend {
 public:
  std::string id() const override { return "mock"; }
  std::string Complete(const CompletionRequest& request) override;
};

// Test adapter. Each rule fires when the prompt contains its marker and
// replays its responses in order, repeating the last one. Prompts that
// match no rule go to the fallback backend, or fail as unavailable.
class ScriptedBackend : public Backend {
 public:
  explicit ScriptedBackend(std::shared_ptr<Backend> fallback = nullptr)
      : fallback_(std::move(fallback)) {}

  // An empty response string means "throw BackendUnavailable".
  void AddRule(std::string marker, std::vector<std::string> responses);

  std::string id() const override { return "scripted"; }
  std::string Complete(const CompletionRequest& request) override;

  std::size_t calls() const;

 private:
  struct Rule {
    std::string marker;
    std::deque<std::string> responses;
  };

  mutable std::mutex mu_;
  std::vector<Rule> rules_;
  std::shared_ptr<Backend> fallback_;
  std::size_t calls_ = 0;
};

// OpenAI-compatible chat-completions adapter over HTTP(S).
class HttpBackend : public Backend {
 public:
  explicit HttpBackend(BackendConfig config);

  std::string id() const override { return "http:" + config_.model; }
  std::string Complete(const CompletionRequest& request) override;

 private:
  BackendConfig config_;
  std::string base_url_;
  std::string path_;
};

std::unique_ptr<Backend> MakeBackend(const BackendConfig& config);

}  // namespace cxrlabel

#endif  // CXRLABEL_BACKEND_H_
