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

#ifndef CXRLABEL_TABLES_H_
#define CXRLABEL_TABLES_H_

#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "csv.h"
#include "metrics.h"

namespace cxrlabel {

// Fixed three-decimal rendering used by every emitted table.
std::string Fixed3(double value);
// "0.987 [0.966, 0.996]"
std::string AccuracyCell(const IntervalEstimate& accuracy);

// Per-run exports: one row per label plus "micro" and "macro" rows.
std::vector<csv::Row> MetricsCsvRows(const MetricReport& report);
std::string MetricsMarkdown(const MetricReport& report);

// Per-label accuracy with intervals, one column per labeler.
struct NamedReport {
  std::string name;
  const MetricReport* report = nullptr;
};
std::vector<csv::Row> AccuracyTableRows(std::span<const NamedReport> columns);
std::string AccuracyTableMarkdown(std::span<const NamedReport> columns);

// Before/after comparison with optional CheXbert reference F1.
struct LabelScores {
  double accuracy = 0;
  double precision = 0;
  double recall = 0;
  double f1 = 0;
};

struct ComparisonRow {
  LabelId label = 0;
  LabelScores pre;
  LabelScores post;
  std::optional<double> chexbert_f1;
};

struct ComparisonAverages {
  LabelScores pre;
  LabelScores post;
  double delta_f1 = 0;  // mean of post - pre
  std::optional<double> chexbert_f1;
  std::optional<double> delta_vs_chexbert;  // mean of post - chexbert
};

// Plain means over the rows; the CheXbert columns average only rows that
// carry a CheXbert value.
ComparisonAverages AverageComparison(std::span<const ComparisonRow> rows);

// CheXbert values are only attached to CheXbert-comparable labels.
std::vector<ComparisonRow> BuildComparison(const MetricReport& pre, const MetricReport& post,
                                           const std::map<LabelId, double>& chexbert_f1);
std::vector<csv::Row> ComparisonTableRows(std::span<const ComparisonRow> rows);
std::string ComparisonTableMarkdown(std::span<const ComparisonRow> rows);

// Reads label,f1 rows; label names go through alias resolution.
std::map<LabelId, double> ReadChexbertCsv(const std::filesystem::path& path);

// Generation leaderboard: micro and macro blocks, one row per model.
struct LeaderboardEntry {
  std::string model;
  MetricReport report;
};
std::vector<csv::Row> LeaderboardRows(std::span<const LeaderboardEntry> entries);
std::string LeaderboardMarkdown(std::span<const LeaderboardEntry> entries);

void WriteText(const std::filesystem::path& path, const std::string& text);

}  // namespace cxrlabel

#endif  // CXRLABEL_TABLES_H_
