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

#ifndef CXRLABEL_LABEL_MATRIX_H_
#define CXRLABEL_LABEL_MATRIX_H_

#include <array>
#include <cstdint>
#include <filesystem>
#include <string>
#include <unordered_map>
#include <vector>

#include "taxonomy.h"

namespace cxrlabel {

// Strict-binary assignment over the 21 labels, in canonical order. Every
// entry is 0 or 1; uncertainty is not representable.
using LabelValues = std::array<std::uint8_t, kNumLabels>;

// Throws Error(kIllegalValue) if any entry is not 0 or 1.
void CheckBinary(const LabelValues& values);

// Returns names of the labels that are positive alongside a positive
// "No Finding". Empty when the vector is consistent.
std::vector<std::string> NoFindingConflicts(const LabelValues& values);

// Report x label matrix of strict-binary values. Rows keep insertion order;
// lookups by report_id are O(1).
class LabelMatrix {
 public:
  void Add(const std::string& report_id, const LabelValues& values);

  std::size_t size() const { return ids_.size(); }
  bool empty() const { return ids_.empty(); }
  const std::vector<std::string>& report_ids() const { return ids_; }
  const LabelValues& row(std::size_t i) const { return rows_[i]; }
  const LabelValues* Find(const std::string& report_id) const;

  // Copy with rows ordered by report_id.
  LabelMatrix Sorted() const;

  // CSV header: report_id,<21 canonical names>; values 0/1.
  static LabelMatrix ReadCsv(const std::filesystem::path& path);
  void WriteCsv(const std::filesystem::path& path) const;

  friend bool operator==(const LabelMatrix& a, const LabelMatrix& b) {
    return a.ids_ == b.ids_ && a.rows_ == b.rows_;
  }

 private:
  std::vector<std::string> ids_;
  std::vector<LabelValues> rows_;
  std::unordered_map<std::string, std::size_t> index_;
};

// Header row shared by every per-report CSV export.
std::vector<std::string> LabelHeader(const std::string& first_column);

// Maps header columns 1..21 onto label ids (canonical names or aliases, any
// order). Throws kMissingLabel / kUnknownLabel.
std::array<std::size_t, kNumLabels> MapLabelColumns(const std::vector<std::string>& header,
                                                    std::size_t first_label_column);

}  // namespace cxrlabel

#endif  // CXRLABEL_LABEL_MATRIX_H_
