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

#ifndef CXRLABEL_REFERENCE_H_
#define CXRLABEL_REFERENCE_H_

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "taxonomy.h"

namespace cxrlabel {

class LabelMatrix;

// Reader votes: 1 present, 0 absent, -1 uncertain.
using VoteValues = std::array<std::int8_t, kNumLabels>;

enum class CellState : std::uint8_t { kNegative = 0, kPositive = 1, kUnresolved = 2 };
using ReferenceRow = std::array<CellState, kNumLabels>;

inline constexpr std::size_t kDefaultQuorum = 4;
inline constexpr std::size_t kDefaultReaders = 6;

struct ReaderAnnotation {
  std::string reader_id;
  std::string report_id;
  VoteValues values{};
};

// Throws kBadVote if any value is outside {1, 0, -1}.
void CheckVotes(const VoteValues& values);

// Majority rule over one cell. Positive if at least `quorum` votes are 1,
// Negative if at least `quorum` are 0, Unresolved otherwise. Uncertain votes
// support neither side and the quorum stays absolute over all R readers.
// Throws kBadVote for a vote outside {1, 0, -1}, kInvalidArgument when
// R < quorum or quorum == 0.
CellState Aggregate(std::span<const int> votes, std::size_t quorum = kDefaultQuorum);

class ReferenceStandard {
 public:
  ReferenceStandard() = default;
  ReferenceStandard(std::size_t quorum, std::size_t readers) : quorum_(quorum), readers_(readers) {}

  // Every cell resolved; the ground truth used for generated-report scoring.
  static ReferenceStandard FromLabelMatrix(const LabelMatrix& labels);

  void Add(const std::string& report_id, const ReferenceRow& row);

  std::size_t size() const { return ids_.size(); }
  std::size_t quorum() const { return quorum_; }
  std::size_t readers() const { return readers_; }
  const std::vector<std::string>& report_ids() const { return ids_; }
  const ReferenceRow& row(std::size_t i) const { return rows_[i]; }
  const ReferenceRow* Find(const std::string& report_id) const;

  std::size_t ResolvedCount(LabelId label) const;

  // CSV header report_id,<21 names>; cells 1, 0 or U.
  static ReferenceStandard ReadCsv(const std::filesystem::path& path);
  void WriteCsv(const std::filesystem::path& path) const;

  friend bool operator==(const ReferenceStandard& a, const ReferenceStandard& b) {
    return a.ids_ == b.ids_ && a.rows_ == b.rows_;
  }

 private:
  std::size_t quorum_ = kDefaultQuorum;
  std::size_t readers_ = kDefaultReaders;
  std::vector<std::string> ids_;
  std::vector<ReferenceRow> rows_;
  std::unordered_map<std::string, std::size_t> index_;
};

char CellSymbol(CellState state);

// Cell-wise aggregation with no adjudication. Reports come out in report_id
// order. Every report must carry one annotation from each reader seen
// anywhere in the input (kMissingReader); a reader may annotate a report
// only once (kDuplicateReader).
ReferenceStandard BuildReference(std::span<const ReaderAnnotation> annotations,
                                 std::size_t quorum = kDefaultQuorum);

// CSV header reader_id,report_id,<21 names>; values 1, 0 or -1.
std::vector<ReaderAnnotation> ReadAnnotationsCsv(const std::filesystem::path& path);
void WriteAnnotationsCsv(const std::filesystem::path& path,
                         std::span<const ReaderAnnotation> annotations);

struct KappaResult {
  double kappa = 0;
  double observed = 0;  // p_o
  double expected = 0;  // p_e
  std::size_t n = 0;    // retained pairs
};

// Cohen's kappa over paired binary ratings. Pairs where either side is -1
// are dropped first. When p_e == 1 the result is 1 if the sequences agree
// everywhere and 0 otherwise. Throws kNoOverlap when nothing is left,
// kInvalidArgument on length mismatch or values outside {1, 0, -1}.
KappaResult CohenKappa(std::span<const int> a, std::span<const int> b);

struct PairwiseKappa {
  std::string reader_a;
  std::string reader_b;
  std::optional<KappaResult> result;  // empty when the pair had no overlap
};

struct InterraterSummary {
  LabelId label = 0;
  std::vector<PairwiseKappa> pairs;
  double mean_kappa = 0;
  std::size_t computed_pairs = 0;
  std::vector<std::string> warnings;
};

// Cohen's kappa for every reader pair on one label over the reports both
// annotated; the summary is the arithmetic mean over pairs that could be
// computed. Throws kInvalidArgument with fewer than two readers.
InterraterSummary SummarizeInterrater(std::span<const ReaderAnnotation> annotations, LabelId label);

}  // namespace cxrlabel

#endif  // CXRLABEL_REFERENCE_H_
