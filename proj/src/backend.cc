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

#include "backend.h"

#include <optional>
#include <string_view>

#include "error.h"
#include "prompt.h"
#include "rule_labeler.h"
#include "taxonomy.h"

namespace cxrlabel {
namespace {

// Pulls "[Label]" blocks out of a rendered prompt and feeds their terms and
// exemplars back into the rule labeler.
struct ParsedPrompt {
  std::string report;
  KeywordTable keywords = DefaultKeywords();
  ExemplarSet exemplars;
};

std::string_view Between(std::string_view text, std::string_view open, std::string_view close) {
  auto b = text.find(open);
  if (b == std::string_view::npos) return {};
  b += open.size();
  if (b < text.size() && text[b] == '\n') ++b;
  auto e = text.find(close, b);
  if (e == std::string_view::npos) return {};
  if (e > b && text[e - 1] == '\n') --e;
  return text.substr(b, e - b);
}

ParsedPrompt ParsePrompt(std::string_view prompt) {
  ParsedPrompt parsed;
  parsed.report = std::string(Between(prompt, kReportBegin, kReportEnd));
  const auto defs = prompt.substr(0, prompt.find(kReportBegin));

  std::optional<LabelId> current;
  std::string section;
  std::size_t pos = 0;
  while (pos < defs.size()) {
    auto eol = defs.find('\n', pos);
    if (eol == std::string_view::npos) eol = defs.size();
    std::string_view line = defs.substr(pos, eol - pos);
    pos = eol + 1;
    if (line.size() > 2 && line.front() == '[' && line.back() == ']') {
      current = Taxonomy::Default().Find(line.substr(1, line.size() - 2));
      section.clear();
    } else if (!line.empty() && line.back() == ':' && !line.starts_with("- ")) {
      section = std::string(line.substr(0, line.size() - 1));
    } else if (current && line.starts_with("- ")) {
      std::string item(line.substr(2));
      if (section == "Core terms" || section == "Synonyms") {
        for (auto& ch : item) ch = static_cast<char>(std::tolower(static_cast<unsigned char>(ch)));
        parsed.keywords[*current].push_back(std::move(item));
      } else if (section == "Positive examples") {
        parsed.exemplars.positive[*current].push_back(std::move(item));
      } else if (section == "Negative examples") {
        parsed.exemplars.negative[*current].push_back(std::move(item));
      }
    }
  }
  return parsed;
}

}  // namespace

void Validate(const BackendConfig& config) {
  if (config.max_retries < 0) Fail(ErrorCode::kInvalidArgument, "max_retries must be >= 0");
  if (config.max_parallel < 1) Fail(ErrorCode::kInvalidArgument, "max_parallel must be >= 1");
  if (config.kind != "mock" && config.kind != "http") {
    Fail(ErrorCode::kInvalidArgument, "unknown backend kind '" + config.kind + "'");
  }
  if (config.kind == "http" && config.endpoint.empty()) {
    Fail(ErrorCode::kInvalidArgument, "http backend needs an endpoint");
  }
}

BackendConfig BackendConfigFromJson(const nlohmann::json& doc) {
  BackendConfig c;
  try {
    c.kind = doc.value("kind", c.kind);
    c.endpoint = doc.value("endpoint", c.endpoint);
    c.model = doc.value("model", c.model);
    c.max_retries = doc.value("max_retries", c.max_retries);
    if (doc.contains("backoff_ms")) {
      c.backoff.clear();
      for (const auto& ms : doc.at("backoff_ms")) c.backoff.emplace_back(ms.get<long>());
    }
    c.max_parallel = doc.value("max_parallel", c.max_parallel);
    c.timeout = std::chrono::milliseconds(doc.value("timeout_ms", static_cast<long>(c.timeout.count())));
    c.temperature = doc.value("temperature", c.temperature);
    c.max_tokens = doc.value("max_tokens", c.max_tokens);
    c.api_key_env = doc.value("api_key_env", c.api_key_env);
  } catch (const nlohmann::json::exception& e) {
    Fail(ErrorCode::kInvalidArgument, std::string("backend config: ") + e.what());
  }
  Validate(c);
  return c;
}

nlohmann::ordered_json ToJson(const BackendConfig& c) {
  nlohmann::ordered_json backoff = nlohmann::ordered_json::array();
  for (auto ms : c.backoff) backoff.push_back(ms.count());
  return {
      {"kind", c.kind},
      {"endpoint", c.endpoint},
      {"model", c.model},
      {"max_retries", c.max_retries},
      {"backoff_ms", backoff},
      {"max_parallel", c.max_parallel},
      {"timeout_ms", c.timeout.count()},
      {"temperature", c.temperature},
      {"max_tokens", c.max_tokens},
      {"api_key_env", c.api_key_env},
  };
}

std::string MockBackend::Complete(const CompletionRequest& request) {
  auto parsed = ParsePrompt(request.prompt);
  const auto values = RuleLabel(parsed.report, parsed.keywords, &parsed.exemplars);
  nlohmann::ordered_json out;
  for (LabelId id = 0; id < kNumLabels; ++id) out[std::string(LabelName(id))] = values[id];
  return out.dump();
}

void ScriptedBackend::AddRule(std::string marker, std::vector<std::string> responses) {
  std::lock_guard lock(mu_);
  rules_.push_back({std::move(marker), {responses.begin(), responses.end()}});
}

std::string ScriptedBackend::Complete(const CompletionRequest& request) {
  std::unique_lock lock(mu_);
  ++calls_;
  for (auto& rule : rules_) {
    if (request.prompt.find(rule.marker) == std::string::npos || rule.responses.empty()) continue;
    std::string response = rule.responses.front();
    if (rule.responses.size() > 1) rule.responses.pop_front();
    if (response.empty()) Fail(ErrorCode::kBackendUnavailable, "scripted outage for '" + rule.marker + "'");
    return response;
  }
  auto fallback = fallback_;
  lock.unlock();
  if (!fallback) Fail(ErrorCode::kBackendUnavailable, "scripted backend has no response for prompt");
  return fallback->Complete(request);
}

std::size_t ScriptedBackend::calls() const {
  std::lock_guard lock(mu_);
  return calls_;
}

std::unique_ptr<Backend> MakeBackend(const BackendConfig& config) {
  Validate(config);
  if (config.kind == "http") return std::make_unique<HttpBackend>(config);
  return std::make_unique<MockBackend>();
}

}  // namespace cxrlabel
