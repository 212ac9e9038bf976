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

#include "label_matrix.h"

#include <algorithm>
#include <numeric>

#include "csv.h"
#include "error.h"

namespace cxrlabel {

void CheckBinary(const LabelValues& values) {
  for (std::size_t i = 0; i < kNumLabels; ++i) {
    if (values[i] > 1) {
      Fail(ErrorCode::kIllegalValue,
           "label '" + std::string(LabelName(i)) + "' has non-binary value " +
               std::to_string(values[i]));
    }
  }
}

std::vector<std::string> NoFindingConflicts(const LabelValues& values) {
  std::vector<std::string> conflicts;
  if (values[kNoFindingLabel] != 1) return conflicts;
  for (LabelId id = 0; id < kNumLabels; ++id) {
    if (id != kNoFindingLabel && values[id] == 1) conflicts.emplace_back(LabelName(id));
  }
  return conflicts;
}

void LabelMatrix::Add(const std::string& report_id, const LabelValues& values) {
  CheckBinary(values);
  auto [it, inserted] = index_.emplace(report_id, ids_.size());
  if (!inserted) Fail(ErrorCode::kDuplicateReportId, "duplicate report_id '" + report_id + "'");
  ids_.push_back(report_id);
  rows_.push_back(values);
}

const LabelValues* LabelMatrix::Find(const std::string& report_id) const {
  auto it = index_.find(report_id);
  return it == index_.end() ? nullptr : &rows_[it->second];
}

LabelMatrix LabelMatrix::Sorted() const {
  std::vector<std::size_t> order(ids_.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return ids_[a] < ids_[b]; });
  LabelMatrix out;
  for (auto i : order) out.Add(ids_[i], rows_[i]);
  return out;
}

std::vector<std::string> LabelHeader(const std::string& first_column) {
  std::vector<std::string> header{first_column};
  for (auto name : kCanonicalNames) header.emplace_back(name);
  return header;
}

std::array<std::size_t, kNumLabels> MapLabelColumns(const std::vector<std::string>& header,
                                                    std::size_t first_label_column) {
  constexpr auto kUnset = static_cast<std::size_t>(-1);
  std::array<std::size_t, kNumLabels> columns;
  columns.fill(kUnset);
  const auto& taxonomy = Taxonomy::Default();
  for (std::size_t c = first_label_column; c < header.size(); ++c) {
    const auto& label = taxonomy.Resolve(header[c]);
    if (columns[label.id] != kUnset) {
      Fail(ErrorCode::kInvalidArgument, "duplicate column for label '" + label.canonical_name + "'");
    }
    columns[label.id] = c;
  }
  for (LabelId id = 0; id < kNumLabels; ++id) {
    if (columns[id] == kUnset) {
      Fail(ErrorCode::kMissingLabel, "missing column for label '" + std::string(LabelName(id)) + "'");
    }
  }
  return columns;
}

LabelMatrix LabelMatrix::ReadCsv(const std::filesystem::path& path) {
  auto rows = csv::ReadFile(path);
  if (rows.empty()) Fail(ErrorCode::kInvalidArgument, path.string() + ": empty label matrix");
  auto columns = MapLabelColumns(rows[0], 1);
  LabelMatrix m;
  for (std::size_t r = 1; r < rows.size(); ++r) {
    const auto& row = rows[r];
    if (row.size() != rows[0].size()) {
      Fail(ErrorCode::kInvalidArgument,
           path.string() + ": row " + std::to_string(r) + " has wrong column count");
    }
    LabelValues values{};
    for (LabelId id = 0; id < kNumLabels; ++id) {
      const auto& cell = row[columns[id]];
      if (cell != "0" && cell != "1") {
        Fail(ErrorCode::kIllegalValue, path.string() + ": report '" + row[0] + "' label '" +
                                           std::string(LabelName(id)) + "' has value '" + cell + "'");
      }
      values[id] = cell == "1" ? 1 : 0;
    }
    m.Add(row[0], values);
  }
  return m;
}

void LabelMatrix::WriteCsv(const std::filesystem::path& path) const {
  std::vector<csv::Row> rows;
  rows.reserve(ids_.size() + 1);
  rows.push_back(LabelHeader("report_id"));
  for (std::size_t i = 0; i < ids_.size(); ++i) {
    csv::Row row{ids_[i]};
    for (auto v : rows_[i]) row.push_back(v ? "1" : "0");
    rows.push_back(std::move(row));
  }
  csv::WriteFile(path, rows);
}

}  // namespace cxrlabel
