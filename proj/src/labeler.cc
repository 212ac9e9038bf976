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

#include "labeler.h"

#include <algorithm>
#include <atomic>
#include <optional>
#include <thread>

#include "json.hpp"

#include "corpus.h"

namespace cxrlabel {
namespace {

// End of the balanced {...} starting at `open`, honoring JSON strings.
std::optional<std::size_t> MatchingBrace(std::string_view text, std::size_t open) {
  int depth = 0;
  bool in_string = false;
  for (std::size_t i = open; i < text.size(); ++i) {
    const char ch = text[i];
    if (in_string) {
      if (ch == '\\') {
        ++i;
      } else if (ch == '"') {
        in_string = false;
      }
      continue;
    }
    if (ch == '"') {
      in_string = true;
    } else if (ch == '{') {
      ++depth;
    } else if (ch == '}') {
      if (--depth == 0) return i;
    }
  }
  return std::nullopt;
}

std::optional<nlohmann::json> FirstObject(std::string_view raw) {
  for (auto open = raw.find('{'); open != std::string_view::npos; open = raw.find('{', open + 1)) {
    auto close = MatchingBrace(raw, open);
    if (!close) continue;
    auto doc = nlohmann::json::parse(raw.substr(open, *close - open + 1), nullptr, false);
    if (!doc.is_discarded() && doc.is_object()) return doc;
  }
  return std::nullopt;
}

std::uint8_t BinaryValue(const std::string& key, const nlohmann::json& v) {
  if (v.is_number_integer() || v.is_number_unsigned()) {
    auto n = v.get<long long>();
    if (n == 0 || n == 1) return static_cast<std::uint8_t>(n);
  } else if (v.is_number_float()) {
    double d = v.get<double>();
    if (d == 0.0 || d == 1.0) return static_cast<std::uint8_t>(d);
  } else if (v.is_string()) {
    const auto& s = v.get_ref<const std::string&>();
    if (s == "0" || s == "1") return static_cast<std::uint8_t>(s[0] - '0');
  }
  Fail(ErrorCode::kIllegalValue, "label '" + key + "' has value " + v.dump() + "; expected 0 or 1");
}

std::string Truncate(const std::string& text, std::size_t limit) {
  return text.size() <= limit ? text : text.substr(0, limit) + "...";
}

}  // namespace

LabelValues ParseLabelResponse(std::string_view raw) {
  auto doc = FirstObject(raw);
  if (!doc) Fail(ErrorCode::kMalformedResponse, "no JSON object found in response");

  const auto& taxonomy = Taxonomy::Default();
  LabelValues values{};
  std::array<bool, kNumLabels> seen{};
  for (const auto& [key, v] : doc->items()) {
    auto id = taxonomy.Find(key);
    if (!id) Fail(ErrorCode::kMalformedResponse, "response has unknown label key '" + key + "'");
    if (seen[*id]) {
      Fail(ErrorCode::kMalformedResponse, "response repeats label '" + std::string(LabelName(*id)) + "'");
    }
    seen[*id] = true;
    values[*id] = BinaryValue(key, v);
  }
  std::vector<std::string> missing;
  for (LabelId id = 0; id < kNumLabels; ++id) {
    if (!seen[id]) missing.emplace_back(LabelName(id));
  }
  if (!missing.empty()) {
    std::string list;
    for (const auto& m : missing) list += (list.empty() ? "" : ", ") + m;
    Fail(ErrorCode::kMissingLabel, "response lacks " + std::to_string(missing.size()) + " label(s): " + list);
  }
  return values;
}

std::string SerializeLabelValues(const LabelValues& values) {
  nlohmann::ordered_json out;
  for (LabelId id = 0; id < kNumLabels; ++id) out[std::string(LabelName(id))] = values[id];
  return out.dump();
}

LabelVector LabelReport(Backend& backend, const PromptVersion& version, const Report& report,
                        const LabelOptions& options) {
  const auto& config = options.backend;
  const std::string base_prompt = RenderPrompt(version, report, options.scope);
  CompletionRequest request{base_prompt, config.model, config.temperature, config.max_tokens};

  std::string last_response;
  std::string last_problem;
  bool last_was_transport = false;
  const int attempts = config.max_retries + 1;
  for (int attempt = 0; attempt < attempts; ++attempt) {
    try {
      last_response = backend.Complete(request);
      last_was_transport = false;
    } catch (const Error& e) {
      if (e.code() != ErrorCode::kBackendUnavailable) throw;
      last_was_transport = true;
      last_problem = e.what();
      if (attempt + 1 < attempts && !config.backoff.empty()) {
        const auto idx = std::min<std::size_t>(static_cast<std::size_t>(attempt), config.backoff.size() - 1);
        std::this_thread::sleep_for(config.backoff[idx]);
      }
      continue;
    }
    try {
      LabelVector v;
      v.report_id = report.report_id;
      v.values = ParseLabelResponse(last_response);
      v.prompt_version = version.version_id;
      v.backend_id = backend.id();
      v.retries = attempt;
      if (auto conflicts = NoFindingConflicts(v.values); !conflicts.empty()) {
        std::string list;
        for (const auto& c : conflicts) list += (list.empty() ? "" : ", ") + c;
        v.warnings.push_back("report '" + report.report_id + "': No Finding asserted with " + list);
      }
      return v;
    } catch (const Error& e) {
      last_problem = e.what();
      request.prompt = base_prompt + FormatCorrection(last_problem);
    }
  }
  if (last_was_transport) {
    Fail(ErrorCode::kBackendUnavailable, "report '" + report.report_id + "': " + last_problem);
  }
  throw ExhaustedRetriesError("report '" + report.report_id + "': no valid response after " +
                                  std::to_string(attempts) + " attempt(s); last problem: " +
                                  last_problem + "; last response: " + Truncate(last_response, 200),
                              last_response, attempts);
}

LabelingResult LabelCorpus(Backend& backend, const PromptVersion& version, const Corpus& corpus,
                           const LabelOptions& options) {
  Validate(options.backend);
  const auto reports = corpus.reports();
  const std::size_t n = reports.size();
  std::vector<std::optional<LabelVector>> done(n);
  std::vector<std::optional<LabelFailure>> failed(n);

  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < n; i = next++) {
      try {
        done[i] = LabelReport(backend, version, reports[i], options);
      } catch (const ExhaustedRetriesError& e) {
        failed[i] = LabelFailure{reports[i].report_id, e.code(), e.what(), e.last_response()};
      } catch (const Error& e) {
        failed[i] = LabelFailure{reports[i].report_id, e.code(), e.what(), {}};
      } catch (const std::exception& e) {
        failed[i] = LabelFailure{reports[i].report_id, ErrorCode::kBackendUnavailable, e.what(), {}};
      }
    }
  };
  const std::size_t threads = std::min(options.backend.max_parallel, std::max<std::size_t>(n, 1));
  if (threads <= 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    pool.reserve(threads);
    for (std::size_t t = 0; t < threads; ++t) pool.emplace_back(worker);
  }

  LabelingResult result;
  for (std::size_t i = 0; i < n; ++i) {
    if (done[i]) {
      result.matrix.Add(done[i]->report_id, done[i]->values);
      result.total_retries += static_cast<std::size_t>(done[i]->retries);
      for (auto& w : done[i]->warnings) result.warnings.push_back(std::move(w));
    } else if (failed[i]) {
      result.failures.push_back(std::move(*failed[i]));
    }
  }
  return result;
}

}  // namespace cxrlabel
