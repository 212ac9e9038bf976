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

#include "corpus.h"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <random>
#include <regex>
#include <set>

#include "json.hpp"

#include "csv.h"
#include "error.h"
#include "label_matrix.h"

namespace cxrlabel {
namespace {

bool IsSpace(char ch) { return std::isspace(static_cast<unsigned char>(ch)) != 0; }
bool IsAlnum(char ch) { return std::isalnum(static_cast<unsigned char>(ch)) != 0; }

std::string Trim(std::string_view text) {
  std::size_t b = 0, e = text.size();
  while (b < e && IsSpace(text[b])) ++b;
  while (e > b && IsSpace(text[e - 1])) --e;
  return std::string(text.substr(b, e - b));
}

bool EqualsIgnoreCase(std::string_view text, std::size_t pos, std::string_view word) {
  if (pos + word.size() > text.size()) return false;
  for (std::size_t k = 0; k < word.size(); ++k) {
    if (std::tolower(static_cast<unsigned char>(text[pos + k])) !=
        std::tolower(static_cast<unsigned char>(word[k]))) {
      return false;
    }
  }
  return true;
}

bool AtLineStart(std::string_view text, std::size_t pos) {
  while (pos > 0) {
    char prev = text[pos - 1];
    if (prev == '\n') return true;
    if (prev != ' ' && prev != '\t' && prev != '\r') return false;
    --pos;
  }
  return true;
}

bool AfterSentenceEnd(std::string_view text, std::size_t pos) {
  std::size_t p = pos;
  while (p > 0 && IsSpace(text[p - 1])) --p;
  if (p == pos || p == 0) return false;
  char prev = text[p - 1];
  return prev == '.' || prev == '!' || prev == '?';
}

struct HeaderHit {
  std::size_t start;
  std::size_t end;
  bool is_findings;
};

// Returns the end of the header (past the colon, if any) when `word` at
// `pos` is a header in context, otherwise npos.
std::size_t MatchHeader(std::string_view text, std::size_t pos, std::string_view word) {
  if (!EqualsIgnoreCase(text, pos, word)) return std::string_view::npos;
  if (pos > 0 && IsAlnum(text[pos - 1]) && IsAlnum(word.front())) return std::string_view::npos;
  std::size_t after = pos + word.size();
  if (after < text.size() && IsAlnum(text[after]) && IsAlnum(word.back())) {
    return std::string_view::npos;
  }
  std::size_t p = after;
  while (p < text.size() && (text[p] == ' ' || text[p] == '\t')) ++p;
  const bool has_colon = p < text.size() && text[p] == ':';
  const bool line_start = AtLineStart(text, pos);
  if (has_colon && (line_start || AfterSentenceEnd(text, pos))) return p + 1;
  if (line_start && (p == text.size() || text[p] == '\n' || text[p] == '\r')) return p;
  return std::string_view::npos;
}

std::vector<HeaderHit> FindHeaders(std::string_view text, const SectionHeaders& headers) {
  std::vector<HeaderHit> hits;
  for (std::size_t i = 0; i < text.size();) {
    std::size_t best_end = std::string_view::npos;
    bool best_findings = false;
    auto consider = [&](const std::vector<std::string>& words, bool is_findings) {
      for (const auto& w : words) {
        if (w.empty()) continue;
        auto end = MatchHeader(text, i, w);
        if (end != std::string_view::npos &&
            (best_end == std::string_view::npos || end > best_end)) {
          best_end = end;
          best_findings = is_findings;
        }
      }
    };
    consider(headers.findings, true);
    consider(headers.impression, false);
    if (best_end != std::string_view::npos) {
      hits.push_back({i, best_end, best_findings});
      i = best_end;
    } else {
      ++i;
    }
  }
  return hits;
}

void AppendBody(std::optional<std::string>& section, std::string body) {
  if (!section) {
    section = std::move(body);
  } else if (!body.empty()) {
    if (!section->empty()) section->push_back('\n');
    section->append(body);
  }
}

struct PhiPattern {
  std::regex pattern;
  const char* placeholder;
};

const std::vector<PhiPattern>& PhiPatterns() {
  using std::regex;
  static const std::vector<PhiPattern> patterns = [] {
    const auto ecma = regex::ECMAScript;
    const auto icase = regex::ECMAScript | regex::icase;
    std::vector<PhiPattern> p;
    // Dates.
    p.push_back({regex(R"(\b\d{4}-\d{1,2}-\d{1,2}\b)", ecma), "[DATE]"});
    p.push_back({regex(R"(\b\d{1,2}/\d{1,2}/\d{2,4}\b)", ecma), "[DATE]"});
    p.push_back({regex(R"(\b\d{1,2}\.\d{1,2}\.\d{4}\b)", ecma), "[DATE]"});
    p.push_back({regex(R"(\b(Jan(uary)?|Feb(ruary)?|Mar(ch)?|Apr(il)?|May|June?|July?|Aug(ust)?|)"
                       R"(Sep(t(ember)?)?|Oct(ober)?|Nov(ember)?|Dec(ember)?)\.?\s+\d{1,2})"
                       R"((st|nd|rd|th)?,?\s+\d{4}\b)",
                       icase),
                 "[DATE]"});
    // Phone numbers.
    p.push_back({regex(R"((\(\d{3}\)\s?|\b\d{3}[-. ])\d{3}[-.]\d{4}\b)", ecma), "[PHONE]"});
    // Record, accession and other ID numbers: a keyword followed by a token
    // containing at least one digit, or any bare run of six or more digits.
    p.push_back({regex(R"(\b(MRN|ID|Accession|Acc|Medical Record)(\s+(No|Number|#))?\.?\s*[:#]?\s*)"
                       R"((?=[A-Z0-9-]*\d)[A-Z0-9-]{4,}\b)",
                       icase),
                 "[ID]"});
    p.push_back({regex(R"(\b\d{6,}\b)", ecma), "[ID]"});
    // Honorific followed by one or two capitalized words.
    p.push_back({regex(R"(\b(Dr|Mr|Mrs|Ms|Miss|Prof)\.?\s+[A-Z][A-Za-z'-]+( [A-Z][A-Za-z'-]+)?)",
                       ecma),
                 "[NAME]"});
    return p;
  }();
  return patterns;
}

Report MakeReport(SourceRecord record, const IngestOptions& options, IngestSummary* summary) {
  Report report;
  report.report_id = std::move(record.report_id);
  report.language = record.language;
  report.cohort = record.cohort;
  if (options.deidentify) {
    auto clean = Deidentify(record.text);
    report.raw_text = std::move(clean.clean_text);
    if (summary) summary->phi_removals += clean.removals;
  } else {
    report.raw_text = std::move(record.text);
  }
  auto it = options.headers.find(report.language);
  const SectionHeaders headers = it == options.headers.end() ? SectionHeaders{} : it->second;
  auto sections = ExtractSections(report.raw_text, headers);
  report.findings = std::move(sections.findings);
  report.impression = std::move(sections.impression);
  return report;
}

// Unbiased draw in [0, bound) from a 64-bit engine. Written out so that the
// shuffle is identical across standard library implementations.
std::uint64_t BoundedDraw(std::mt19937_64& engine, std::uint64_t bound) {
  const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                              std::numeric_limits<std::uint64_t>::max() % bound;
  std::uint64_t draw;
  do {
    draw = engine();
  } while (draw >= limit);
  return draw % bound;
}

}  // namespace

std::string_view ToString(Language language) {
  return language == Language::kCN ? "CN" : "EN";
}

std::string_view ToString(CohortTag tag) {
  switch (tag) {
    case CohortTag::kTaxonomy: return "taxonomy";
    case CohortTag::kDevelopment: return "development";
    case CohortTag::kTest: return "test";
    case CohortTag::kExternal: return "external";
  }
  return "";
}

Language ParseLanguage(std::string_view text) {
  auto norm = NormalizeName(text);
  if (norm == "en") return Language::kEN;
  if (norm == "cn" || norm == "zh") return Language::kCN;
  Fail(ErrorCode::kInvalidArgument, "unknown language tag '" + std::string(text) + "'");
}

CohortTag ParseCohortTag(std::string_view text) {
  auto norm = NormalizeName(text);
  if (norm == "taxonomy") return CohortTag::kTaxonomy;
  if (norm == "development" || norm == "dev") return CohortTag::kDevelopment;
  if (norm == "test") return CohortTag::kTest;
  if (norm == "external") return CohortTag::kExternal;
  Fail(ErrorCode::kInvalidArgument, "unknown cohort tag '" + std::string(text) + "'");
}

nlohmann::ordered_json ToJson(const Report& r) {
  nlohmann::ordered_json doc;
  doc["report_id"] = r.report_id;
  doc["raw_text"] = r.raw_text;
  doc["findings"] = r.findings ? nlohmann::ordered_json(*r.findings) : nullptr;
  doc["impression"] = r.impression ? nlohmann::ordered_json(*r.impression) : nullptr;
  doc["language"] = ToString(r.language);
  doc["cohort"] = r.cohort ? nlohmann::ordered_json(ToString(*r.cohort)) : nullptr;
  return doc;
}

Report ReportFromJson(const nlohmann::json& doc) {
  Report r;
  r.report_id = doc.at("report_id").get<std::string>();
  r.raw_text = doc.at("raw_text").get<std::string>();
  if (doc.contains("findings") && !doc["findings"].is_null()) r.findings = doc["findings"].get<std::string>();
  if (doc.contains("impression") && !doc["impression"].is_null()) {
    r.impression = doc["impression"].get<std::string>();
  }
  r.language = ParseLanguage(doc.value("language", "EN"));
  if (doc.contains("cohort") && !doc["cohort"].is_null()) {
    r.cohort = ParseCohortTag(doc["cohort"].get<std::string>());
  }
  return r;
}

Sections ExtractSections(std::string_view raw_text, const SectionHeaders& headers) {
  Sections out;
  auto hits = FindHeaders(raw_text, headers);
  if (hits.empty()) {
    out.residual = Trim(raw_text);
    return out;
  }
  out.residual = Trim(raw_text.substr(0, hits.front().start));
  for (std::size_t h = 0; h < hits.size(); ++h) {
    std::size_t body_end = h + 1 < hits.size() ? hits[h + 1].start : raw_text.size();
    auto body = Trim(raw_text.substr(hits[h].end, body_end - hits[h].end));
    AppendBody(hits[h].is_findings ? out.findings : out.impression, std::move(body));
  }
  return out;
}

Deidentified Deidentify(std::string_view text) {
  Deidentified result{std::string(text), 0};
  for (const auto& phi : PhiPatterns()) {
    std::string out;
    std::size_t last = 0;
    const std::string& src = result.clean_text;
    for (std::sregex_iterator it(src.begin(), src.end(), phi.pattern), end; it != end; ++it) {
      const auto& m = *it;
      out.append(src, last, static_cast<std::size_t>(m.position()) - last);
      out.append(phi.placeholder);
      last = static_cast<std::size_t>(m.position() + m.length());
      ++result.removals;
    }
    out.append(src, last, std::string::npos);
    result.clean_text = std::move(out);
  }
  return result;
}

Corpus Corpus::Ingest(std::vector<SourceRecord> records, const IngestOptions& options,
                      IngestSummary* summary) {
  Corpus corpus;
  std::set<std::string> seen;
  if (summary) *summary = IngestSummary{};
  for (auto& record : records) {
    if (summary) ++summary->records_read;
    if (record.report_id.empty()) Fail(ErrorCode::kInvalidArgument, "record without report_id");
    if (!seen.insert(record.report_id).second) {
      Fail(ErrorCode::kDuplicateReportId, "duplicate report_id '" + record.report_id + "'");
    }
    if (Trim(record.text).empty()) {
      Fail(ErrorCode::kEmptyText, "report '" + record.report_id + "' has empty text");
    }
    auto report = MakeReport(std::move(record), options, summary);
    if (options.require_sections && (!report.findings || !report.impression)) {
      if (summary) ++summary->dropped_without_sections;
      continue;
    }
    corpus.Append(std::move(report));
  }
  if (summary) summary->reports_kept = corpus.size();
  return corpus;
}

Corpus Corpus::FromReports(std::vector<Report> reports) {
  Corpus corpus;
  for (auto& r : reports) corpus.Append(std::move(r));
  return corpus;
}

void Corpus::Append(Report report) {
  auto [it, inserted] = index_.emplace(report.report_id, reports_.size());
  if (!inserted) {
    Fail(ErrorCode::kDuplicateReportId, "duplicate report_id '" + report.report_id + "'");
  }
  reports_.push_back(std::move(report));
}

std::vector<SourceRecord> Corpus::ReadJsonlRecords(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) Fail(ErrorCode::kIoError, "cannot open " + path.string());
  std::vector<SourceRecord> records;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (Trim(line).empty()) continue;
    nlohmann::json obj;
    try {
      obj = nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception& e) {
      Fail(ErrorCode::kInvalidArgument,
           path.string() + ":" + std::to_string(line_no) + ": " + e.what());
    }
    if (!obj.is_object() || !obj.contains("report_id")) {
      Fail(ErrorCode::kInvalidArgument,
           path.string() + ":" + std::to_string(line_no) + ": missing report_id");
    }
    SourceRecord record;
    const auto& id = obj["report_id"];
    record.report_id = id.is_string() ? id.get<std::string>() : id.dump();
    if (obj.contains("text")) {
      record.text = obj["text"].get<std::string>();
    } else if (obj.contains("raw_text")) {
      record.text = obj["raw_text"].get<std::string>();
    }
    if (obj.contains("language")) record.language = ParseLanguage(obj["language"].get<std::string>());
    if (obj.contains("cohort") && !obj["cohort"].is_null()) {
      record.cohort = ParseCohortTag(obj["cohort"].get<std::string>());
    }
    records.push_back(std::move(record));
  }
  return records;
}

std::vector<SourceRecord> Corpus::ReadCsvRecords(const std::filesystem::path& path) {
  auto rows = csv::ReadFile(path);
  if (rows.empty()) return {};
  const auto& header = rows[0];
  std::size_t id_col = header.size(), text_col = header.size(), lang_col = header.size();
  for (std::size_t c = 0; c < header.size(); ++c) {
    auto name = NormalizeName(header[c]);
    if (name == "report_id") id_col = c;
    if (name == "text") text_col = c;
    if (name == "language") lang_col = c;
  }
  if (id_col == header.size() || text_col == header.size()) {
    Fail(ErrorCode::kInvalidArgument, path.string() + ": header must contain report_id,text");
  }
  std::vector<SourceRecord> records;
  for (std::size_t r = 1; r < rows.size(); ++r) {
    const auto& row = rows[r];
    if (row.size() != header.size()) {
      Fail(ErrorCode::kInvalidArgument,
           path.string() + ": row " + std::to_string(r) + " has wrong column count");
    }
    SourceRecord record;
    record.report_id = row[id_col];
    record.text = row[text_col];
    if (lang_col != header.size()) record.language = ParseLanguage(row[lang_col]);
    records.push_back(std::move(record));
  }
  return records;
}

std::vector<SourceRecord> Corpus::ReadRecords(const std::filesystem::path& path) {
  auto ext = NormalizeName(path.extension().string());
  return ext == ".csv" ? ReadCsvRecords(path) : ReadJsonlRecords(path);
}

Corpus Corpus::Load(const std::filesystem::path& path) {
  IngestOptions options;
  options.deidentify = false;
  return Ingest(ReadRecords(path), options);
}

void Corpus::WriteJsonl(const std::filesystem::path& path) const {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) Fail(ErrorCode::kIoError, "cannot write " + path.string());
  for (const auto& r : reports_) {
    nlohmann::ordered_json obj;
    obj["report_id"] = r.report_id;
    obj["text"] = r.raw_text;
    obj["language"] = ToString(r.language);
    if (r.cohort) obj["cohort"] = ToString(*r.cohort);
    if (r.findings) obj["findings"] = *r.findings;
    if (r.impression) obj["impression"] = *r.impression;
    out << obj.dump() << '\n';
  }
}

const Report* Corpus::Find(std::string_view report_id) const {
  auto it = index_.find(std::string(report_id));
  return it == index_.end() ? nullptr : &reports_[it->second];
}

const Report& Corpus::at(std::string_view report_id) const {
  const Report* r = Find(report_id);
  if (!r) Fail(ErrorCode::kNotFound, "unknown report_id '" + std::string(report_id) + "'");
  return *r;
}

void Corpus::AssignCohorts(const std::vector<std::pair<std::string, CohortTag>>& assignment) {
  for (const auto& [id, tag] : assignment) {
    auto it = index_.find(id);
    if (it == index_.end()) Fail(ErrorCode::kNotFound, "cohort assignment names unknown report '" + id + "'");
    reports_[it->second].cohort = tag;
  }
}

Corpus Corpus::Cohort(CohortTag tag) const {
  Corpus out;
  for (const auto& r : reports_) {
    if (r.cohort == tag) out.Append(r);
  }
  return out;
}

Corpus Corpus::Subset(std::span<const std::string> report_ids) const {
  Corpus out;
  for (const auto& id : report_ids) out.Append(at(id));
  return out;
}

std::vector<std::string> Corpus::SortedIds() const {
  std::vector<std::string> ids;
  ids.reserve(reports_.size());
  for (const auto& r : reports_) ids.push_back(r.report_id);
  std::sort(ids.begin(), ids.end());
  return ids;
}

std::vector<std::vector<std::string>> SplitCohorts(const Corpus& corpus,
                                                   std::span<const std::size_t> sizes,
                                                   std::uint64_t seed) {
  std::size_t total = 0;
  for (auto s : sizes) total += s;
  if (total > corpus.size()) {
    Fail(ErrorCode::kInsufficientReports, "requested " + std::to_string(total) +
                                              " reports but corpus has " +
                                              std::to_string(corpus.size()));
  }
  auto ids = corpus.SortedIds();
  std::mt19937_64 engine(seed);
  for (std::size_t i = ids.size(); i > 1; --i) {
    std::swap(ids[i - 1], ids[BoundedDraw(engine, i)]);
  }
  std::vector<std::vector<std::string>> cohorts;
  std::size_t offset = 0;
  for (auto s : sizes) {
    cohorts.emplace_back(ids.begin() + static_cast<std::ptrdiff_t>(offset),
                         ids.begin() + static_cast<std::ptrdiff_t>(offset + s));
    offset += s;
  }
  return cohorts;
}

void WriteCohortAssignment(const std::filesystem::path& path,
                           const std::vector<std::vector<std::string>>& cohorts,
                           std::span<const CohortTag> tags) {
  if (tags.size() != cohorts.size()) {
    Fail(ErrorCode::kInvalidArgument, "one cohort tag is needed per cohort");
  }
  std::vector<csv::Row> rows{{"report_id", "cohort_tag"}};
  for (std::size_t c = 0; c < cohorts.size(); ++c) {
    for (const auto& id : cohorts[c]) rows.push_back({id, std::string(ToString(tags[c]))});
  }
  csv::WriteFile(path, rows);
}

std::vector<std::pair<std::string, CohortTag>> ReadCohortAssignment(
    const std::filesystem::path& path) {
  auto rows = csv::ReadFile(path);
  std::vector<std::pair<std::string, CohortTag>> out;
  for (std::size_t r = 1; r < rows.size(); ++r) {
    if (rows[r].size() != 2) Fail(ErrorCode::kInvalidArgument, path.string() + ": expected 2 columns");
    out.emplace_back(rows[r][0], ParseCohortTag(rows[r][1]));
  }
  return out;
}

std::size_t WordCount(std::string_view text) {
  std::size_t count = 0;
  bool in_word = false;
  for (char ch : text) {
    if (IsSpace(ch)) {
      in_word = false;
    } else if (!in_word) {
      in_word = true;
      ++count;
    }
  }
  return count;
}

double Quantile(std::span<const double> sorted, double p) {
  if (sorted.empty()) Fail(ErrorCode::kDomainError, "quantile of empty data");
  const double h = static_cast<double>(sorted.size() - 1) * p;
  const auto lo = static_cast<std::size_t>(std::floor(h));
  if (lo + 1 >= sorted.size()) return sorted.back();
  return sorted[lo] + (h - static_cast<double>(lo)) * (sorted[lo + 1] - sorted[lo]);
}

CorpusStats ComputeStats(const Corpus& corpus, const LabelMatrix* labels) {
  if (corpus.empty()) Fail(ErrorCode::kEmptyCorpus, "corpus statistics need at least one report");
  std::vector<double> counts;
  counts.reserve(corpus.size());
  for (const auto& r : corpus.reports()) counts.push_back(static_cast<double>(WordCount(r.raw_text)));
  std::sort(counts.begin(), counts.end());

  CorpusStats stats;
  stats.n_reports = corpus.size();
  stats.median_word_count = Quantile(counts, 0.5);
  stats.iqr_word_count = {Quantile(counts, 0.25), Quantile(counts, 0.75)};
  if (labels) {
    std::array<double, kNumLabels> positives{};
    std::size_t covered = 0;
    for (const auto& r : corpus.reports()) {
      const auto* row = labels->Find(r.report_id);
      if (!row) continue;
      ++covered;
      for (LabelId id = 0; id < kNumLabels; ++id) positives[id] += (*row)[id];
    }
    if (covered > 0) {
      for (auto& p : positives) p /= static_cast<double>(covered);
      stats.per_label_prevalence = positives;
    }
  }
  return stats;
}

}  // namespace cxrlabel
