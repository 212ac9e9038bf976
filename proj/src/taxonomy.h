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

#ifndef CXRLABEL_TAXONOMY_H_
#define CXRLABEL_TAXONOMY_H_

#include <array>
#include <cstddef>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace cxrlabel {

inline constexpr std::size_t kNumLabels = 21;

// Index into the canonical label order, 0..20.
using LabelId = std::size_t;

// Row order of the standardized finding schema. Every label vector, matrix
// column and exported table follows this order.
inline constexpr std::array<std::string_view, kNumLabels> kCanonicalNames = {
    "Atelectasis",
    "Cardiomegaly",
    "Consolidation",
    "Edema",
    "Enlarged Cardiomediastinum",
    "Fracture",
    "Lung Lesion",
    "No Finding",
    "Pleural Effusion",
    "Pleural Other",
    "Lung Opacity",
    "Pneumonia",
    "Pneumothorax",
    "Support Devices",
    "Emphysema",
    "Interstitial Lung Disease",
    "Calcification (Lung/Mediastinal)",
    "Trachea and Bronchus",
    "Cavity and Cyst",
    "Mediastinal Other",
    "Pulmonary Vascular Abnormal",
};

inline constexpr LabelId kNoFindingLabel = 7;
inline constexpr std::size_t kNumChexbertComparable = 14;

struct FindingLabel {
  LabelId id = 0;
  std::string canonical_name;
  std::vector<std::string> aliases;
  bool chexbert_comparable = false;
};

// Lowercases ASCII, trims, and collapses internal whitespace runs to a
// single space. Used for every name lookup.
std::string NormalizeName(std::string_view name);

class Taxonomy {
 public:
  // The taxonomy compiled into the library from data/taxonomy.json.
  static const Taxonomy& Default();

  // Parses and validates a taxonomy document. Throws Error(kInvalidArgument)
  // when any schema invariant is violated.
  static Taxonomy FromJson(std::string_view json_text);
  static Taxonomy Load(const std::filesystem::path& path);

  std::span<const FindingLabel> labels() const { return labels_; }
  const FindingLabel& label(LabelId id) const { return labels_.at(id); }
  const std::string& version() const { return version_; }

  std::vector<LabelId> ChexbertComparable() const;

  // Case-insensitive match on a canonical name or any alias.
  std::optional<LabelId> Find(std::string_view name) const;
  // Like Find, but throws Error(kUnknownLabel).
  const FindingLabel& Resolve(std::string_view name) const;

 private:
  Taxonomy() = default;

  std::string version_;
  std::vector<FindingLabel> labels_;
  std::map<std::string, LabelId, std::less<>> by_name_;
};

inline std::string_view LabelName(LabelId id) { return kCanonicalNames.at(id); }

}  // namespace cxrlabel

#endif  // CXRLABEL_TAXONOMY_H_
