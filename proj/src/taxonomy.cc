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

#include "taxonomy.h"

#include <cctype>
#include <fstream>
#include <set>
#include <sstream>

#include "json.hpp"

#include "embedded_data.h"
#include "error.h"

namespace cxrlabel {

std::string NormalizeName(std::string_view name) {
  std::string out;
  out.reserve(name.size());
  bool pending_space = false;
  for (char ch : name) {
    const auto uc = static_cast<unsigned char>(ch);
    if (std::isspace(uc)) {
      pending_space = !out.empty();
      continue;
    }
    if (pending_space) {
      out.push_back(' ');
      pending_space = false;
    }
    out.push_back(static_cast<char>(std::tolower(uc)));
  }
  return out;
}

const Taxonomy& Taxonomy::Default() {
  static const Taxonomy taxonomy = FromJson(embedded::TaxonomyJson());
  return taxonomy;
}

Taxonomy Taxonomy::FromJson(std::string_view json_text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(json_text);
  } catch (const nlohmann::json::exception& e) {
    Fail(ErrorCode::kInvalidArgument, std::string("taxonomy: ") + e.what());
  }

  Taxonomy t;
  t.version_ = doc.value("taxonomy_version", "");
  const auto& labels = doc.at("labels");
  if (!labels.is_array() || labels.size() != kNumLabels) {
    Fail(ErrorCode::kInvalidArgument,
         "taxonomy: expected exactly " + std::to_string(kNumLabels) + " labels");
  }

  t.labels_.resize(kNumLabels);
  std::vector<bool> seen(kNumLabels, false);
  std::size_t comparable = 0;
  for (const auto& entry : labels) {
    const auto id = entry.at("id").get<std::size_t>();
    if (id >= kNumLabels || seen[id]) {
      Fail(ErrorCode::kInvalidArgument,
           "taxonomy: ids must be unique and dense in 0..20, got " + std::to_string(id));
    }
    seen[id] = true;
    FindingLabel& label = t.labels_[id];
    label.id = id;
    label.canonical_name = entry.at("canonical_name").get<std::string>();
    if (label.canonical_name != kCanonicalNames[id]) {
      Fail(ErrorCode::kInvalidArgument,
           "taxonomy: label " + std::to_string(id) + " must be '" +
               std::string(kCanonicalNames[id]) + "', got '" + label.canonical_name + "'");
    }
    label.aliases = entry.value("aliases", std::vector<std::string>{});
    label.chexbert_comparable = entry.value("chexbert_comparable", false);
    if (label.chexbert_comparable) ++comparable;
  }
  if (comparable != kNumChexbertComparable) {
    Fail(ErrorCode::kInvalidArgument,
         "taxonomy: expected 14 CheXbert-comparable labels, got " + std::to_string(comparable));
  }

  // Canonical names first so that an alias can never shadow one.
  for (const auto& label : t.labels_) {
    t.by_name_.emplace(NormalizeName(label.canonical_name), label.id);
  }
  for (const auto& label : t.labels_) {
    for (const auto& alias : label.aliases) {
      auto key = NormalizeName(alias);
      auto [it, inserted] = t.by_name_.emplace(key, label.id);
      if (!inserted && it->second != label.id) {
        Fail(ErrorCode::kInvalidArgument,
             "taxonomy: alias '" + alias + "' maps to both '" +
                 std::string(kCanonicalNames[it->second]) + "' and '" + label.canonical_name + "'");
      }
    }
  }
  return t;
}

Taxonomy Taxonomy::Load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) Fail(ErrorCode::kIoError, "cannot open taxonomy file " + path.string());
  std::stringstream buffer;
  buffer << in.rdbuf();
  return FromJson(buffer.str());
}

std::vector<LabelId> Taxonomy::ChexbertComparable() const {
  std::vector<LabelId> ids;
  for (const auto& label : labels_) {
    if (label.chexbert_comparable) ids.push_back(label.id);
  }
  return ids;
}

std::optional<LabelId> Taxonomy::Find(std::string_view name) const {
  auto it = by_name_.find(NormalizeName(name));
  if (it == by_name_.end()) return std::nullopt;
  return it->second;
}

const FindingLabel& Taxonomy::Resolve(std::string_view name) const {
  auto id = Find(name);
  if (!id) Fail(ErrorCode::kUnknownLabel, "unknown label '" + std::string(name) + "'");
  return labels_[*id];
}

}  // namespace cxrlabel
