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

#include "prompt.h"

#include <sstream>

#include "corpus.h"
#include "embedded_data.h"
#include "error.h"

namespace cxrlabel {
namespace {

std::string Flatten(std::string_view text) {
  std::string out;
  out.reserve(text.size());
  for (char ch : text) out.push_back(ch == '\n' || ch == '\r' ? ' ' : ch);
  return out;
}

void RenderList(std::ostringstream& out, std::string_view title,
                const std::vector<std::string>& items) {
  if (items.empty()) return;
  out << title << ":\n";
  for (const auto& item : items) out << "- " << Flatten(item) << '\n';
}

std::string ReportBody(const Report& report, ReportScope scope) {
  if (scope == ReportScope::kSections && (report.findings || report.impression)) {
    std::string body;
    if (report.findings) body += "FINDINGS: " + *report.findings;
    if (report.impression) {
      if (!body.empty()) body += '\n';
      body += "IMPRESSION: " + *report.impression;
    }
    return body;
  }
  return report.raw_text;
}

std::vector<std::string> StringList(const nlohmann::json& block, const char* key) {
  if (!block.contains(key)) return {};
  return block.at(key).get<std::vector<std::string>>();
}

}  // namespace

ReportScope ParseReportScope(std::string_view text) {
  auto norm = NormalizeName(text);
  if (norm == "full" || norm == "full_text" || norm == "fulltext") return ReportScope::kFullText;
  if (norm == "sections") return ReportScope::kSections;
  Fail(ErrorCode::kInvalidArgument, "unknown report scope '" + std::string(text) + "'");
}

std::string_view ToString(ReportScope scope) {
  return scope == ReportScope::kSections ? "sections" : "full_text";
}

std::string RenderPrompt(const PromptVersion& version, const Report& report, ReportScope scope) {
  std::ostringstream out;
  out << version.system_preamble << "\n\n";
  out << "LABEL DEFINITIONS\n";
  for (LabelId id = 0; id < kNumLabels; ++id) {
    const auto& b = version.blocks[id];
    out << "\n[" << LabelName(id) << "]\n";
    RenderList(out, "Core terms", b.core_terms);
    RenderList(out, "Synonyms", b.synonyms);
    RenderList(out, "Clarifications", b.clarifications);
    RenderList(out, "Positive examples", b.positive_exemplars);
    RenderList(out, "Negative examples", b.negative_exemplars);
  }
  out << "\nREPORT\n" << kReportBegin << '\n' << ReportBody(report, scope) << '\n' << kReportEnd << "\n\n";
  out << "OUTPUT FORMAT\n"
         "Respond with exactly one JSON object and nothing else. The object must contain all 21 "
         "keys listed below, each mapped to 0 (absent) or 1 (present). Uncertain is not an "
         "allowed value.\nKeys: ";
  for (LabelId id = 0; id < kNumLabels; ++id) {
    if (id) out << ", ";
    out << '"' << LabelName(id) << '"';
  }
  out << '\n';
  return out.str();
}

std::string FormatCorrection(std::string_view problem) {
  return "\n\nYour previous response was rejected (" + std::string(problem) +
         "). Respond with exactly one JSON object containing all 21 label keys, each mapped to 0 "
         "or 1, and nothing else.";
}

PromptVersion RootPrompt() {
  static const PromptVersion root = PromptFromJson(nlohmann::json::parse(embedded::RootPromptJson()));
  return root;
}

PromptVersion PromptFromJson(const nlohmann::json& doc) {
  if (!doc.is_object()) Fail(ErrorCode::kInvalidArgument, "prompt version must be a JSON object");
  PromptVersion v;
  try {
    v.version_id = doc.at("version_id").get<VersionId>();
    v.system_preamble = doc.value("system_preamble", "");
    v.change_note = doc.value("change_note", "");
    if (doc.contains("parent_version") && !doc.at("parent_version").is_null()) {
      v.parent_version = doc.at("parent_version").get<VersionId>();
    }
    const auto& labels = doc.at("labels");
    std::array<bool, kNumLabels> seen{};
    for (const auto& [name, block] : labels.items()) {
      const auto& label = Taxonomy::Default().Resolve(name);
      if (seen[label.id]) {
        Fail(ErrorCode::kInvalidArgument, "prompt lists label '" + label.canonical_name + "' twice");
      }
      seen[label.id] = true;
      auto& b = v.blocks[label.id];
      b.core_terms = StringList(block, "core_terms");
      b.synonyms = StringList(block, "synonyms");
      b.clarifications = StringList(block, "clarifications");
      b.positive_exemplars = StringList(block, "positive_exemplars");
      b.negative_exemplars = StringList(block, "negative_exemplars");
    }
    for (LabelId id = 0; id < kNumLabels; ++id) {
      if (!seen[id]) {
        Fail(ErrorCode::kMissingLabel, "prompt has no block for '" + std::string(LabelName(id)) + "'");
      }
    }
  } catch (const nlohmann::json::exception& e) {
    Fail(ErrorCode::kInvalidArgument, std::string("prompt version: ") + e.what());
  }
  if (v.parent_version && *v.parent_version >= v.version_id) {
    Fail(ErrorCode::kInvalidArgument, "prompt version " + std::to_string(v.version_id) +
                                          " must be greater than its parent");
  }
  return v;
}

nlohmann::ordered_json ToJson(const PromptVersion& v) {
  nlohmann::ordered_json labels = nlohmann::ordered_json::object();
  for (LabelId id = 0; id < kNumLabels; ++id) {
    const auto& b = v.blocks[id];
    labels[std::string(LabelName(id))] = {
        {"core_terms", b.core_terms},
        {"synonyms", b.synonyms},
        {"clarifications", b.clarifications},
        {"positive_exemplars", b.positive_exemplars},
        {"negative_exemplars", b.negative_exemplars},
    };
  }
  nlohmann::ordered_json doc;
  doc["version_id"] = v.version_id;
  doc["parent_version"] = v.parent_version ? nlohmann::ordered_json(*v.parent_version) : nullptr;
  doc["change_note"] = v.change_note;
  doc["system_preamble"] = v.system_preamble;
  doc["labels"] = std::move(labels);
  return doc;
}

}  // namespace cxrlabel
