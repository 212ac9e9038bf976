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

#include <gtest/gtest.h>

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

#include "corpus.h"
#include "csv.h"
#include "error.h"
#include "fixtures.h"
#include "label_matrix.h"
#include "taxonomy.h"

namespace cxrlabel {
namespace {

using testing::MakeFixture;
using testing::TempDir;

template <typename F>
ErrorCode CodeOf(F&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  return ErrorCode::kOk;
}

TEST(TaxonomyTest, DefaultHasCanonicalOrder) {
  const Taxonomy& t = Taxonomy::Default();
  ASSERT_EQ(t.labels().size(), kNumLabels);
  for (LabelId id = 0; id < kNumLabels; ++id) EXPECT_EQ(t.label(id).canonical_name, kCanonicalNames[id]);
  const auto comparable = t.ChexbertComparable();
  ASSERT_EQ(comparable.size(), kNumChexbertComparable);
  for (LabelId id = 0; id < kNumChexbertComparable; ++id) EXPECT_EQ(comparable[id], id);
  EXPECT_EQ(LabelName(kNoFindingLabel), "No Finding");
}

TEST(TaxonomyTest, ResolvesNamesAndAliases) {
  const Taxonomy& t = Taxonomy::Default();
  EXPECT_EQ(t.Resolve("  pleural   EFFUSION ").id, 8u);
  EXPECT_EQ(t.Resolve("ETT/lines").id, 13u);
  EXPECT_EQ(t.Resolve("ILD").id, 15u);
  EXPECT_EQ(t.Resolve("No acute findings").id, kNoFindingLabel);
  EXPECT_FALSE(t.Find("Scoliosis").has_value());
  EXPECT_EQ(CodeOf([&] { t.Resolve("Scoliosis"); }), ErrorCode::kUnknownLabel);
}

TEST(TaxonomyTest, RejectsBrokenDocuments) {
  EXPECT_EQ(CodeOf([] { Taxonomy::FromJson("{"); }), ErrorCode::kInvalidArgument);
  EXPECT_EQ(CodeOf([] { Taxonomy::FromJson(R"({"labels": []})"); }), ErrorCode::kInvalidArgument);
}

TEST(SectionsTest, MultiLineHeaders) {
  const Sections s = ExtractSections("EXAM: chest\nFindings:\nLungs clear.\n\nImpression:\nNormal.\n");
  ASSERT_TRUE(s.findings && s.impression);
  EXPECT_EQ(*s.findings, "Lungs clear.");
  EXPECT_EQ(*s.impression, "Normal.");
  EXPECT_EQ(s.residual, "EXAM: chest");
}

TEST(SectionsTest, SingleLineAndRepeatedHeaders) {
  const Sections s =
      ExtractSections("FINDINGS: Small effusion. IMPRESSION: Effusion. FINDINGS: Also a nodule.");
  ASSERT_TRUE(s.findings && s.impression);
  EXPECT_EQ(*s.findings, "Small effusion.\nAlso a nodule.");
  EXPECT_EQ(*s.impression, "Effusion.");
}

TEST(SectionsTest, HeaderWordInsideSentenceIsText) {
  const Sections s = ExtractSections("The findings are stable. No impression given");
  EXPECT_FALSE(s.findings.has_value());
  EXPECT_FALSE(s.impression.has_value());
}

TEST(SectionsTest, ConfigurableHeaders) {
  SectionHeaders cn{{"所见"}, {"印象"}};
  const Sections s = ExtractSections("所见: 双肺纹理清晰。\n印象: 未见异常。", cn);
  ASSERT_TRUE(s.findings && s.impression);
  EXPECT_EQ(*s.impression, "未见异常。");
}

TEST(DeidentifyTest, ReplacesPhi) {
  const Deidentified d = Deidentify(
      "Seen by Dr. Smith on 2023-04-05, callback (555) 123-4567, MRN: 12345678. Stable.");
  EXPECT_EQ(d.clean_text.find("Smith"), std::string::npos);
  EXPECT_NE(d.clean_text.find("[NAME]"), std::string::npos);
  EXPECT_NE(d.clean_text.find("[DATE]"), std::string::npos);
  EXPECT_NE(d.clean_text.find("[PHONE]"), std::string::npos);
  EXPECT_NE(d.clean_text.find("[ID]"), std::string::npos);
  EXPECT_EQ(d.removals, 4u);
  EXPECT_EQ(Deidentify(d.clean_text).clean_text, d.clean_text);
  EXPECT_EQ(Deidentify("2.5 cm nodule").clean_text, "2.5 cm nodule");
}

TEST(CorpusTest, IngestSplitsSectionsAndRejectsDuplicates) {
  const auto fx = MakeFixture({.reports = 12});
  IngestSummary summary;
  const Corpus c = Corpus::Ingest(fx.records, {}, &summary);
  EXPECT_EQ(c.size(), 12u);
  EXPECT_EQ(summary.reports_kept, 12u);
  for (const auto& r : c.reports()) {
    EXPECT_TRUE(r.findings.has_value());
    EXPECT_TRUE(r.impression.has_value());
  }
  auto dup = fx.records;
  dup.push_back(dup.front());
  try {
    Corpus::Ingest(dup);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kDuplicateReportId);
    EXPECT_NE(std::string(e.what()).find(dup.front().report_id), std::string::npos);
  }
  auto empty = fx.records;
  empty[0].text = "   ";
  EXPECT_EQ(CodeOf([&] { Corpus::Ingest(empty); }), ErrorCode::kEmptyText);
}

TEST(CorpusTest, RequireSectionsDrops) {
  std::vector<SourceRecord> records = {{"a", "FINDINGS: x.\nIMPRESSION: y."}, {"b", "No headers."}};
  IngestOptions opts;
  opts.require_sections = true;
  IngestSummary summary;
  const Corpus c = Corpus::Ingest(records, opts, &summary);
  EXPECT_EQ(c.size(), 1u);
  EXPECT_EQ(summary.dropped_without_sections, 1u);
}

TEST(CorpusTest, JsonlRoundTripKeepsEverything) {
  TempDir dir;
  const auto fx = MakeFixture({.reports = 8});
  Corpus c = Corpus::Ingest(fx.records);
  c.AssignCohorts({{fx.records[0].report_id, CohortTag::kTest}});
  c.WriteJsonl(dir / "c.jsonl");
  const Corpus back = Corpus::Load(dir / "c.jsonl");
  ASSERT_EQ(back.size(), c.size());
  for (std::size_t i = 0; i < c.size(); ++i) {
    EXPECT_EQ(ToJson(back.reports()[i]), ToJson(c.reports()[i]));
  }
  EXPECT_EQ(back.Cohort(CohortTag::kTest).size(), 1u);
}

TEST(CorpusTest, CsvRecords) {
  TempDir dir;
  {
    std::ofstream out(dir / "r.csv");
    out << "report_id,text\nx1,\"FINDINGS: a, b.\nIMPRESSION: c.\"\nx2,plain\n";
  }
  const auto records = Corpus::ReadRecords(dir / "r.csv");
  ASSERT_EQ(records.size(), 2u);
  EXPECT_EQ(records[0].text, "FINDINGS: a, b.\nIMPRESSION: c.");
}

TEST(SplitTest, DisjointDeterministicAndOrderFree) {
  const auto fx = MakeFixture({.reports = 100});
  const Corpus c = Corpus::Ingest(fx.records);
  const std::vector<std::size_t> sizes = {20, 30, 10};
  const auto a = SplitCohorts(c, sizes, 42);
  auto reversed = fx.records;
  std::reverse(reversed.begin(), reversed.end());
  const auto b = SplitCohorts(Corpus::Ingest(reversed), sizes, 42);
  EXPECT_EQ(a, b);
  std::set<std::string> seen;
  for (std::size_t k = 0; k < sizes.size(); ++k) {
    EXPECT_EQ(a[k].size(), sizes[k]);
    for (const auto& id : a[k]) EXPECT_TRUE(seen.insert(id).second);
  }
  EXPECT_NE(SplitCohorts(c, sizes, 43), a);
  const std::vector<std::size_t> too_many = {60, 50};
  EXPECT_EQ(CodeOf([&] { SplitCohorts(c, too_many, 1); }), ErrorCode::kInsufficientReports);
}

TEST(SplitTest, AssignmentFileRoundTrips) {
  TempDir dir;
  const auto fx = MakeFixture({.reports = 10});
  const Corpus c = Corpus::Ingest(fx.records);
  const std::vector<std::size_t> sizes = {3, 4};
  const auto cohorts = SplitCohorts(c, sizes, 1);
  const std::vector<CohortTag> tags = {CohortTag::kDevelopment, CohortTag::kTest};
  WriteCohortAssignment(dir / "a.csv", cohorts, tags);
  const auto assignment = ReadCohortAssignment(dir / "a.csv");
  EXPECT_EQ(assignment.size(), 7u);
  Corpus tagged = c;
  tagged.AssignCohorts(assignment);
  EXPECT_EQ(tagged.Cohort(CohortTag::kDevelopment).size(), 3u);
  EXPECT_EQ(tagged.Cohort(CohortTag::kTest).size(), 4u);
}

TEST(StatsTest, QuantileAndWordCounts) {
  const std::vector<double> x = {1, 2, 3, 4};
  EXPECT_DOUBLE_EQ(Quantile(x, 0.5), 2.5);
  EXPECT_DOUBLE_EQ(Quantile(x, 0.25), 1.75);
  EXPECT_DOUBLE_EQ(Quantile(x, 0.75), 3.25);
  EXPECT_EQ(WordCount("  a  bb\tc\n"), 3u);
  std::vector<SourceRecord> records = {{"a", "one"}, {"b", "one two"}, {"c", "one two three"}};
  const Corpus c = Corpus::Ingest(records);
  LabelMatrix labels;
  LabelValues v{};
  v[2] = 1;
  labels.Add("a", v);
  labels.Add("b", LabelValues{});
  const CorpusStats s = ComputeStats(c, &labels);
  EXPECT_EQ(s.n_reports, 3u);
  EXPECT_DOUBLE_EQ(s.median_word_count, 2);
  EXPECT_DOUBLE_EQ(s.iqr_word_count.first, 1.5);
  EXPECT_DOUBLE_EQ(s.iqr_word_count.second, 2.5);
  ASSERT_TRUE(s.per_label_prevalence.has_value());
  EXPECT_DOUBLE_EQ((*s.per_label_prevalence)[2], 0.5);
  EXPECT_EQ(CodeOf([] { ComputeStats(Corpus{}); }), ErrorCode::kEmptyCorpus);
}

TEST(CsvTest, QuotingRoundTrips) {
  std::stringstream buffer;
  const csv::Row row = {"plain", "with,comma", "with \"quote\"", "multi\nline", ""};
  csv::WriteRow(buffer, row);
  const auto rows = csv::Parse(buffer);
  ASSERT_EQ(rows.size(), 1u);
  EXPECT_EQ(rows[0], row);
}

TEST(LabelMatrixTest, CsvAcceptsAliasesInAnyOrder) {
  TempDir dir;
  auto header = LabelHeader("report_id");
  std::reverse(header.begin() + 1, header.end());
  header[1] = "pulmonary vascular abnormality";
  csv::Row row = {"z"};
  for (std::size_t k = 1; k <= kNumLabels; ++k) row.push_back(k == 1 ? "1" : "0");
  csv::WriteFile(dir / "m.csv", {header, row});
  const LabelMatrix m = LabelMatrix::ReadCsv(dir / "m.csv");
  ASSERT_EQ(m.size(), 1u);
  EXPECT_EQ(m.row(0)[20], 1);
  EXPECT_EQ(m.row(0)[0], 0);
  csv::Row bad = row;
  bad[3] = "2";
  csv::WriteFile(dir / "bad.csv", {header, bad});
  EXPECT_EQ(CodeOf([&] { LabelMatrix::ReadCsv(dir / "bad.csv"); }), ErrorCode::kIllegalValue);
  header.pop_back();
  row.pop_back();
  csv::WriteFile(dir / "short.csv", {header, row});
  EXPECT_EQ(CodeOf([&] { LabelMatrix::ReadCsv(dir / "short.csv"); }), ErrorCode::kMissingLabel);
}

TEST(LabelMatrixTest, NoFindingConflicts) {
  LabelValues v{};
  v[kNoFindingLabel] = 1;
  EXPECT_TRUE(NoFindingConflicts(v).empty());
  v[3] = 1;
  EXPECT_EQ(NoFindingConflicts(v), std::vector<std::string>{"Edema"});
  v[3] = 2;
  EXPECT_EQ(CodeOf([&] { CheckBinary(v); }), ErrorCode::kIllegalValue);
}

}  // namespace
}  // namespace cxrlabel
