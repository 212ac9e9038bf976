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

#ifndef CXRLABEL_PROMPT_H_
#define CXRLABEL_PROMPT_H_

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

#include "taxonomy.h"

namespace cxrlabel {

struct Report;

using VersionId = std::uint64_t;

// Guidance for one label. Refinement only ever appends to these lists.
struct LabelBlock {
  std::vector<std::string> core_terms;
  std::vector<std::string> synonyms;
  std::vector<std::string> clarifications;
  std::vector<std::string> positive_exemplars;
  std::vector<std::string> negative_exemplars;

  friend bool operator==(const LabelBlock&, const LabelBlock&) = default;
};

// An immutable prompt template. Instances are only created through the
// registry (or parsed from storage) and are never edited in place.
struct PromptVersion {
  VersionId version_id = 1;
  std::string system_preamble;
  std::array<LabelBlock, kNumLabels> blocks;
  std::optional<VersionId> parent_version;
  std::string change_note;

  friend bool operator==(const PromptVersion&, const PromptVersion&) = default;
};

// Which part of the report goes into the prompt.
enum class ReportScope {
  kFullText,  // raw_text as stored (default)
  kSections,  // Findings and Impression only, falling back to raw_text
};

ReportScope ParseReportScope(std::string_view text);
std::string_view ToString(ReportScope scope);

// Delimiters of the report text inside a rendered prompt.
inline constexpr std::string_view kReportBegin = "<<<REPORT";
inline constexpr std::string_view kReportEnd = "REPORT>>>";

// Deterministic rendering: preamble, the 21 label blocks in canonical
// order, the report, then the output-format instruction. List items are
// rendered one per line with embedded newlines flattened to spaces.
std::string RenderPrompt(const PromptVersion& version, const Report& report,
                         ReportScope scope = ReportScope::kFullText);

// Instruction appended when a response could not be parsed.
std::string FormatCorrection(std::string_view problem);

// The prompt shipped in data/prompt_root.json (version 1, no parent).
PromptVersion RootPrompt();

// Labels are keyed by canonical name (aliases accepted on read); all 21
// must be present. Throws kInvalidArgument / kUnknownLabel / kMissingLabel.
PromptVersion PromptFromJson(const nlohmann::json& doc);
nlohmann::ordered_json ToJson(const PromptVersion& version);

}  // namespace cxrlabel

#endif  // CXRLABEL_PROMPT_H_
