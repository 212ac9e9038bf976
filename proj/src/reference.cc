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

#include "reference.h"

#include <algorithm>
#include <map>
#include <set>

#include "csv.h"
#include "error.h"
#include "label_matrix.h"

namespace cxrlabel {

void CheckVotes(const VoteValues& values) {
  for (LabelId id = 0; id < kNumLabels; ++id) {
    const int v = values[id];
    if (v != 1 && v != 0 && v != -1) {
      Fail(ErrorCode::kBadVote, "label '" + std::string(LabelName(id)) + "' has vote " +
                                    std::to_string(v) + "; expected 1, 0 or -1");
    }
  }
}

CellState Aggregate(std::span<const int> votes, std::size_t quorum) {
  if (quorum == 0 || votes.size() < quorum) {
    Fail(ErrorCode::kInvalidArgument, "aggregate: need 1 <= quorum <= readers (quorum=" +
                                          std::to_string(quorum) + ", readers=" +
                                          std::to_string(votes.size()) + ")");
  }
  std::size_t present = 0, absent = 0;
  for (int v : votes) {
    switch (v) {
      case 1: ++present; break;
      case 0: ++absent; break;
      case -1: break;
      default: Fail(ErrorCode::kBadVote, "vote " + std::to_string(v) + " not in {1, 0, -1}");
    }
  }
  if (present >= quorum) return CellState::kPositive;
  if (absent >= quorum) return CellState::kNegative;
  return CellState::kUnresolved;
}

char CellSymbol(CellState state) {
  switch (state) {
    case CellState::kPositive: return '1';
    case CellState::kNegative: return '0';
    case CellState::kUnresolved: return 'U';
  }
  return '?';
}

ReferenceStandard ReferenceStandard::FromLabelMatrix(const LabelMatrix& labels) {
  ReferenceStandard ref(1, 1);
  for (std::size_t i = 0; i < labels.size(); ++i) {
    ReferenceRow row;
    for (LabelId id = 0; id < kNumLabels; ++id) {
      row[id] = labels.row(i)[id] ? CellState::kPositive : CellState::kNegative;
    }
    ref.Add(labels.report_ids()[i], row);
  }
  return ref;
}

void ReferenceStandard::Add(const std::string& report_id, const ReferenceRow& row) {
  auto [it, inserted] = index_.emplace(report_id, ids_.size());
  if (!inserted) Fail(ErrorCode::kDuplicateReportId, "duplicate report_id '" + report_id + "'");
  ids_.push_back(report_id);
  rows_.push_back(row);
}

const ReferenceRow* ReferenceStandard::Find(const std::string& report_id) const {
  auto it = index_.find(report_id);
  return it == index_.end() ? nullptr : &rows_[it->second];
}

std::size_t ReferenceStandard::ResolvedCount(LabelId label) const {
  return static_cast<std::size_t>(std::count_if(rows_.begin(), rows_.end(), [&](const auto& row) {
    return row[label] != CellState::kUnresolved;
  }));
}

ReferenceStandard ReferenceStandard::ReadCsv(const std::filesystem::path& path) {
  auto rows = csv::ReadFile(path);
  if (rows.empty()) Fail(ErrorCode::kInvalidArgument, path.string() + ": empty reference");
  auto columns = MapLabelColumns(rows[0], 1);
  ReferenceStandard ref;
  for (std::size_t r = 1; r < rows.size(); ++r) {
    const auto& row = rows[r];
    if (row.size() != rows[0].size()) {
      Fail(ErrorCode::kInvalidArgument,
           path.string() + ": row " + std::to_string(r) + " has wrong column count");
    }
    ReferenceRow cells;
    for (LabelId id = 0; id < kNumLabels; ++id) {
      const auto& v = row[columns[id]];
      if (v == "1") {
        cells[id] = CellState::kPositive;
      } else if (v == "0") {
        cells[id] = CellState::kNegative;
      } else if (v == "U" || v == "u") {
        cells[id] = CellState::kUnresolved;
      } else {
        Fail(ErrorCode::kIllegalValue, path.string() + ": report '" + row[0] + "' label '" +
                                           std::string(LabelName(id)) + "' has value '" + v + "'");
      }
    }
    ref.Add(row[0], cells);
  }
  return ref;
}

void ReferenceStandard::WriteCsv(const std::filesystem::path& path) const {
  std::vector<csv::Row> rows{LabelHeader("report_id")};
  for (std::size_t i = 0; i < ids_.size(); ++i) {
    csv::Row row{ids_[i]};
    for (auto cell : rows_[i]) row.emplace_back(1, CellSymbol(cell));
    rows.push_back(std::move(row));
  }
  csv::WriteFile(path, rows);
}

ReferenceStandard BuildReference(std::span<const ReaderAnnotation> annotations,
                                 std::size_t quorum) {
  std::set<std::string> readers;
  // report_id -> reader_id -> index into annotations
  std::map<std::string, std::map<std::string, std::size_t>> by_report;
  for (std::size_t i = 0; i < annotations.size(); ++i) {
    const auto& a = annotations[i];
    CheckVotes(a.values);
    readers.insert(a.reader_id);
    auto [it, inserted] = by_report[a.report_id].emplace(a.reader_id, i);
    if (!inserted) {
      Fail(ErrorCode::kDuplicateReader,
           "reader '" + a.reader_id + "' annotated report '" + a.report_id + "' more than once");
    }
  }
  if (readers.size() < quorum) {
    Fail(ErrorCode::kInvalidArgument, "quorum " + std::to_string(quorum) + " exceeds reader count " +
                                          std::to_string(readers.size()));
  }

  ReferenceStandard ref(quorum, readers.size());
  std::vector<int> votes(readers.size());
  for (const auto& [report_id, reader_map] : by_report) {
    if (reader_map.size() != readers.size()) {
      for (const auto& r : readers) {
        if (!reader_map.count(r)) {
          Fail(ErrorCode::kMissingReader,
               "report '" + report_id + "' lacks an annotation from reader '" + r + "'");
        }
      }
    }
    ReferenceRow row;
    for (LabelId id = 0; id < kNumLabels; ++id) {
      std::size_t k = 0;
      for (const auto& [reader, index] : reader_map) votes[k++] = annotations[index].values[id];
      row[id] = Aggregate(votes, quorum);
    }
    ref.Add(report_id, row);
  }
  return ref;
}

std::vector<ReaderAnnotation> ReadAnnotationsCsv(const std::filesystem::path& path) {
  auto rows = csv::ReadFile(path);
  if (rows.empty()) Fail(ErrorCode::kInvalidArgument, path.string() + ": empty annotation file");
  const auto& header = rows[0];
  if (header.size() < 2 || NormalizeName(header[0]) != "reader_id" ||
      NormalizeName(header[1]) != "report_id") {
    Fail(ErrorCode::kInvalidArgument, path.string() + ": header must start with reader_id,report_id");
  }
  auto columns = MapLabelColumns(header, 2);
  std::vector<ReaderAnnotation> out;
  for (std::size_t r = 1; r < rows.size(); ++r) {
    const auto& row = rows[r];
    if (row.size() != header.size()) {
      Fail(ErrorCode::kInvalidArgument,
           path.string() + ": row " + std::to_string(r) + " has wrong column count");
    }
    ReaderAnnotation a{row[0], row[1], {}};
    for (LabelId id = 0; id < kNumLabels; ++id) {
      const auto& v = row[columns[id]];
      if (v == "1") {
        a.values[id] = 1;
      } else if (v == "0") {
        a.values[id] = 0;
      } else if (v == "-1") {
        a.values[id] = -1;
      } else {
        Fail(ErrorCode::kBadVote, path.string() + ": reader '" + a.reader_id + "' report '" +
                                      a.report_id + "' label '" + std::string(LabelName(id)) +
                                      "' has vote '" + v + "'");
      }
    }
    out.push_back(std::move(a));
  }
  return out;
}

void WriteAnnotationsCsv(const std::filesystem::path& path,
                         std::span<const ReaderAnnotation> annotations) {
  auto header = LabelHeader("report_id");
  header.insert(header.begin(), "reader_id");
  std::vector<csv::Row> rows{header};
  for (const auto& a : annotations) {
    csv::Row row{a.reader_id, a.report_id};
    for (auto v : a.values) row.push_back(std::to_string(static_cast<int>(v)));
    rows.push_back(std::move(row));
  }
  csv::WriteFile(path, rows);
}

KappaResult CohenKappa(std::span<const int> a, std::span<const int> b) {
  if (a.size() != b.size()) {
    Fail(ErrorCode::kInvalidArgument, "cohen_kappa: sequences differ in length");
  }
  std::size_t n = 0, agree = 0, a_pos = 0, b_pos = 0;
  bool identical = true;
  for (std::size_t i = 0; i < a.size(); ++i) {
    for (int v : {a[i], b[i]}) {
      if (v != 0 && v != 1 && v != -1) {
        Fail(ErrorCode::kInvalidArgument, "cohen_kappa: value " + std::to_string(v) + " not in {1, 0, -1}");
      }
    }
    if (a[i] == -1 || b[i] == -1) continue;
    ++n;
    if (a[i] == b[i]) {
      ++agree;
    } else {
      identical = false;
    }
    a_pos += static_cast<std::size_t>(a[i]);
    b_pos += static_cast<std::size_t>(b[i]);
  }
  if (n == 0) Fail(ErrorCode::kNoOverlap, "cohen_kappa: no pair left after dropping uncertain votes");

  const double dn = static_cast<double>(n);
  const double pa = static_cast<double>(a_pos) / dn;
  const double pb = static_cast<double>(b_pos) / dn;
  KappaResult r;
  r.n = n;
  r.observed = static_cast<double>(agree) / dn;
  r.expected = pa * pb + (1 - pa) * (1 - pb);
  if (r.expected >= 1.0) {
    r.kappa = identical ? 1.0 : 0.0;
  } else {
    r.kappa = (r.observed - r.expected) / (1 - r.expected);
  }
  return r;
}

InterraterSummary SummarizeInterrater(std::span<const ReaderAnnotation> annotations, LabelId label) {
  if (label >= kNumLabels) Fail(ErrorCode::kUnknownLabel, "label id out of range");
  std::map<std::string, std::map<std::string, int>> votes;  // reader -> report -> vote
  for (const auto& a : annotations) {
    CheckVotes(a.values);
    votes[a.reader_id][a.report_id] = a.values[label];
  }
  if (votes.size() < 2) Fail(ErrorCode::kInvalidArgument, "inter-rater agreement needs at least two readers");

  InterraterSummary summary;
  summary.label = label;
  double total = 0;
  for (auto i = votes.begin(); i != votes.end(); ++i) {
    for (auto j = std::next(i); j != votes.end(); ++j) {
      std::vector<int> a, b;
      for (const auto& [report, v] : i->second) {
        auto other = j->second.find(report);
        if (other == j->second.end()) continue;
        a.push_back(v);
        b.push_back(other->second);
      }
      PairwiseKappa pair{i->first, j->first, std::nullopt};
      try {
        pair.result = CohenKappa(a, b);
        total += pair.result->kappa;
        ++summary.computed_pairs;
      } catch (const Error& e) {
        if (e.code() != ErrorCode::kNoOverlap) throw;
        summary.warnings.push_back("readers '" + i->first + "' and '" + j->first +
                                   "' share no certain ratings on '" +
                                   std::string(LabelName(label)) + "'; pair skipped");
      }
      summary.pairs.push_back(std::move(pair));
    }
  }
  if (summary.computed_pairs > 0) summary.mean_kappa = total / static_cast<double>(summary.computed_pairs);
  return summary;
}

}  // namespace cxrlabel
