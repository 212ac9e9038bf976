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

#ifndef CXRLABEL_CORPUS_H_
#define CXRLABEL_CORPUS_H_

#include <array>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "json.hpp"
#include <vector>

#include "taxonomy.h"

namespace cxrlabel {

class LabelMatrix;

enum class Language { kEN, kCN };
enum class CohortTag { kTaxonomy, kDevelopment, kTest, kExternal };

std::string_view ToString(Language language);
std::string_view ToString(CohortTag tag);
// Accepts "EN"/"CN" in any case.
Language ParseLanguage(std::string_view text);
// Accepts the four tag names in any case, plus "dev" for development.
CohortTag ParseCohortTag(std::string_view text);

struct Report {
  std::string report_id;
  std::string raw_text;
  std::optional<std::string> findings;
  std::optional<std::string> impression;
  Language language = Language::kEN;
  std::optional<CohortTag> cohort;
};

// Header words recognized for each section, matched case-insensitively.
struct SectionHeaders {
  std::vector<std::string> findings{"findings"};
  std::vector<std::string> impression{"impression"};
};

struct Sections {
  std::optional<std::string> findings;
  std::optional<std::string> impression;
  // Everything that is neither a header nor a section body, trimmed.
  std::string residual;
};

// Splits a report into its Findings and Impression bodies.
//
// A header is one of the configured words, in any case, that either
//   * starts a line and is followed by a colon or by the end of that line, or
//   * follows sentence-final punctuation plus whitespace and is followed by a
//     colon (single-line reports: "FINDINGS: ... IMPRESSION: ...").
// A section body runs to the next header or end of text and is trimmed. A
// repeated header appends to the earlier body, separated by a newline.
Sections ExtractSections(std::string_view raw_text, const SectionHeaders& headers = {});

struct Deidentified {
  std::string clean_text;
  std::size_t removals = 0;
};

// Replaces exact dates, honorific-prefixed names, phone numbers and ID
// numbers with [DATE], [NAME], [PHONE] and [ID]. Idempotent: placeholders
// never match any pattern.
Deidentified Deidentify(std::string_view text);

// {"report_id", "raw_text", "findings", "impression", "language", "cohort"},
// absent optionals as null.
nlohmann::ordered_json ToJson(const Report& report);
Report ReportFromJson(const nlohmann::json& doc);

struct SourceRecord {
  std::string report_id;
  std::string text;
  Language language = Language::kEN;
  std::optional<CohortTag> cohort;
};

struct IngestOptions {
  bool deidentify = true;
  // Drop reports lacking either section instead of keeping them.
  bool require_sections = false;
  std::map<Language, SectionHeaders> headers;
};

struct IngestSummary {
  std::size_t records_read = 0;
  std::size_t reports_kept = 0;
  std::size_t dropped_without_sections = 0;
  std::size_t phi_removals = 0;
};

class Corpus {
 public:
  Corpus() = default;

  // Throws kDuplicateReportId (naming the id) or kEmptyText.
  static Corpus Ingest(std::vector<SourceRecord> records, const IngestOptions& options = {},
                       IngestSummary* summary = nullptr);

  // JSONL: {"report_id", "text", "language"} per line. Stored corpora also
  // carry "cohort", "findings" and "impression"; those are honored on read.
  static std::vector<SourceRecord> ReadJsonlRecords(const std::filesystem::path& path);
  // CSV with header report_id,text.
  static std::vector<SourceRecord> ReadCsvRecords(const std::filesystem::path& path);
  // Picks the reader by extension (.csv, otherwise JSONL).
  static std::vector<SourceRecord> ReadRecords(const std::filesystem::path& path);

  // Takes already processed reports as they are. Throws kDuplicateReportId.
  static Corpus FromReports(std::vector<Report> reports);
  // Loads a corpus previously written by WriteJsonl without re-running
  // de-identification.
  static Corpus Load(const std::filesystem::path& path);
  void WriteJsonl(const std::filesystem::path& path) const;

  std::size_t size() const { return reports_.size(); }
  bool empty() const { return reports_.empty(); }
  std::span<const Report> reports() const { return reports_; }
  const Report* Find(std::string_view report_id) const;
  const Report& at(std::string_view report_id) const;

  // Sets cohort tags from a report_id -> tag assignment; unknown ids throw.
  void AssignCohorts(const std::vector<std::pair<std::string, CohortTag>>& assignment);
  Corpus Cohort(CohortTag tag) const;
  // Sub-corpus of the given ids, in the given order.
  Corpus Subset(std::span<const std::string> report_ids) const;

  std::vector<std::string> SortedIds() const;

 private:
  void Append(Report report);

  std::vector<Report> reports_;
  std::unordered_map<std::string, std::size_t> index_;
};

// Draws pairwise-disjoint cohorts of the requested sizes. Reports are put in
// report_id order and shuffled with a seeded Fisher-Yates pass, so the result
// depends only on the id set and the seed. Throws kInsufficientReports.
std::vector<std::vector<std::string>> SplitCohorts(const Corpus& corpus,
                                                   std::span<const std::size_t> sizes,
                                                   std::uint64_t seed);

void WriteCohortAssignment(const std::filesystem::path& path,
                           const std::vector<std::vector<std::string>>& cohorts,
                           std::span<const CohortTag> tags);
std::vector<std::pair<std::string, CohortTag>> ReadCohortAssignment(
    const std::filesystem::path& path);

struct CorpusStats {
  std::size_t n_reports = 0;
  double median_word_count = 0;
  std::pair<double, double> iqr_word_count{0, 0};
  std::optional<std::array<double, kNumLabels>> per_label_prevalence;
};

// Number of maximal non-whitespace runs.
std::size_t WordCount(std::string_view text);

// Linear-interpolation quantile on sorted data: position h = (n - 1) p,
// value = x[floor h] + (h - floor h) (x[floor h + 1] - x[floor h]).
double Quantile(std::span<const double> sorted, double p);

// Word counts use raw_text. Prevalence is filled when labels are supplied
// and covers the reports present in both. Throws kEmptyCorpus.
CorpusStats ComputeStats(const Corpus& corpus, const LabelMatrix* labels = nullptr);

}  // namespace cxrlabel

#endif  // CXRLABEL_CORPUS_H_
