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

#include "tables.h"

#include <cstdio>
#include <fstream>
#include <sstream>

#include "error.h"

namespace cxrlabel {
namespace {

std::string MarkdownTable(const std::vector<csv::Row>& rows) {
  std::ostringstream out;
  for (std::size_t r = 0; r < rows.size(); ++r) {
    out << '|';
    for (const auto& cell : rows[r]) out << ' ' << cell << " |";
    out << '\n';
    if (r == 0) {
      out << '|';
      for (std::size_t c = 0; c < rows[0].size(); ++c) out << (c == 0 ? " --- |" : " ---: |");
      out << '\n';
    }
  }
  return out.str();
}

std::string OptionalFixed3(const std::optional<double>& v) { return v ? Fixed3(*v) : "-"; }

LabelScores ScoresOf(const LabelMetrics& m) {
  return {m.accuracy.point, m.scores.precision, m.scores.recall, m.scores.f1};
}

}  // namespace

std::string Fixed3(double value) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3f", value);
  // Avoid "-0.000" for tiny negative differences.
  if (std::string(buf) == "-0.000") return "0.000";
  return buf;
}

std::string AccuracyCell(const IntervalEstimate& a) {
  if (a.degenerate) return "n/a";
  return Fixed3(a.point) + " [" + Fixed3(a.lower) + ", " + Fixed3(a.upper) + "]";
}

std::vector<csv::Row> MetricsCsvRows(const MetricReport& report) {
  std::vector<csv::Row> rows{{"label", "resolved", "tp", "fp", "fn", "tn", "accuracy",
                              "accuracy_lower", "accuracy_upper", "precision", "recall", "f1",
                              "included", "degenerate"}};
  for (LabelId id = 0; id < kNumLabels; ++id) {
    const auto& m = report.per_label[id];
    const auto& c = m.confusion;
    rows.push_back({std::string(LabelName(id)), std::to_string(c.total()), std::to_string(c.tp),
                    std::to_string(c.fp), std::to_string(c.fn), std::to_string(c.tn),
                    Fixed3(m.accuracy.point), Fixed3(m.accuracy.lower), Fixed3(m.accuracy.upper),
                    Fixed3(m.scores.precision), Fixed3(m.scores.recall), Fixed3(m.scores.f1),
                    m.included ? "1" : "0", m.scores.degenerate() ? "1" : "0"});
  }
  const auto& p = report.pooled;
  rows.push_back({"micro", std::to_string(p.total()), std::to_string(p.tp), std::to_string(p.fp),
                  std::to_string(p.fn), std::to_string(p.tn), Fixed3(report.micro.accuracy), "", "",
                  Fixed3(report.micro.precision), Fixed3(report.micro.recall),
                  Fixed3(report.micro.f1), "", report.micro_scores.degenerate() ? "1" : "0"});
  rows.push_back({"macro", std::to_string(report.included_labels.size()), "", "", "", "",
                  Fixed3(report.macro.accuracy), "", "", Fixed3(report.macro.precision),
                  Fixed3(report.macro.recall), Fixed3(report.macro.f1), "", ""});
  return rows;
}

std::string MetricsMarkdown(const MetricReport& report) {
  std::vector<csv::Row> rows{{"Label", "Accuracy [95% CI]", "Precision", "Recall", "F1", "TP",
                              "FP", "FN", "TN"}};
  for (LabelId id = 0; id < kNumLabels; ++id) {
    const auto& m = report.per_label[id];
    std::string name(LabelName(id));
    if (!m.included) name += " (excluded)";
    rows.push_back({name, AccuracyCell(m.accuracy), Fixed3(m.scores.precision),
                    Fixed3(m.scores.recall), Fixed3(m.scores.f1), std::to_string(m.confusion.tp),
                    std::to_string(m.confusion.fp), std::to_string(m.confusion.fn),
                    std::to_string(m.confusion.tn)});
  }
  std::ostringstream out;
  out << MarkdownTable(rows) << '\n';
  out << MarkdownTable({{"Average", "Accuracy", "Precision", "Recall", "F1"},
                        {"Micro", Fixed3(report.micro.accuracy), Fixed3(report.micro.precision),
                         Fixed3(report.micro.recall), Fixed3(report.micro.f1)},
                        {"Macro", Fixed3(report.macro.accuracy), Fixed3(report.macro.precision),
                         Fixed3(report.macro.recall), Fixed3(report.macro.f1)}});
  if (!report.excluded_labels.empty()) {
    out << "\nExcluded from macro averages (no reference or predicted positives):";
    for (auto id : report.excluded_labels) out << ' ' << LabelName(id) << ';';
    out << '\n';
  }
  return out.str();
}

std::vector<csv::Row> AccuracyTableRows(std::span<const NamedReport> columns) {
  csv::Row header{"Label"};
  for (const auto& c : columns) header.push_back(c.name);
  std::vector<csv::Row> rows{header};
  for (LabelId id = 0; id < kNumLabels; ++id) {
    csv::Row row{std::string(LabelName(id))};
    for (const auto& c : columns) row.push_back(AccuracyCell(c.report->per_label[id].accuracy));
    rows.push_back(std::move(row));
  }
  return rows;
}

std::string AccuracyTableMarkdown(std::span<const NamedReport> columns) {
  return MarkdownTable(AccuracyTableRows(columns));
}

ComparisonAverages AverageComparison(std::span<const ComparisonRow> rows) {
  ComparisonAverages avg;
  std::vector<double> pa, pp, pr, pf, qa, qp, qr, qf, delta, chex, chex_delta;
  for (const auto& r : rows) {
    pa.push_back(r.pre.accuracy);
    pp.push_back(r.pre.precision);
    pr.push_back(r.pre.recall);
    pf.push_back(r.pre.f1);
    qa.push_back(r.post.accuracy);
    qp.push_back(r.post.precision);
    qr.push_back(r.post.recall);
    qf.push_back(r.post.f1);
    delta.push_back(r.post.f1 - r.pre.f1);
    if (r.chexbert_f1) {
      chex.push_back(*r.chexbert_f1);
      chex_delta.push_back(r.post.f1 - *r.chexbert_f1);
    }
  }
  avg.pre = {MacroMean(pa), MacroMean(pp), MacroMean(pr), MacroMean(pf)};
  avg.post = {MacroMean(qa), MacroMean(qp), MacroMean(qr), MacroMean(qf)};
  avg.delta_f1 = MacroMean(delta);
  if (!chex.empty()) {
    avg.chexbert_f1 = MacroMean(chex);
    avg.delta_vs_chexbert = MacroMean(chex_delta);
  }
  return avg;
}

std::vector<ComparisonRow> BuildComparison(const MetricReport& pre, const MetricReport& post,
                                           const std::map<LabelId, double>& chexbert_f1) {
  const auto& taxonomy = Taxonomy::Default();
  std::vector<ComparisonRow> rows;
  for (LabelId id = 0; id < kNumLabels; ++id) {
    ComparisonRow row{id, ScoresOf(pre.per_label[id]), ScoresOf(post.per_label[id]), std::nullopt};
    auto it = chexbert_f1.find(id);
    if (it != chexbert_f1.end() && taxonomy.label(id).chexbert_comparable) row.chexbert_f1 = it->second;
    rows.push_back(row);
  }
  return rows;
}

std::vector<csv::Row> ComparisonTableRows(std::span<const ComparisonRow> rows) {
  std::vector<csv::Row> out{{"Label", "Accuracy pre", "Accuracy post", "Precision pre",
                             "Precision post", "Recall pre", "Recall post", "F1 pre", "F1 post",
                             "Delta F1", "CheXbert F1", "Delta F1 vs CheXbert"}};
  for (const auto& r : rows) {
    std::optional<double> vs;
    if (r.chexbert_f1) vs = r.post.f1 - *r.chexbert_f1;
    out.push_back({std::string(LabelName(r.label)), Fixed3(r.pre.accuracy), Fixed3(r.post.accuracy),
                   Fixed3(r.pre.precision), Fixed3(r.post.precision), Fixed3(r.pre.recall),
                   Fixed3(r.post.recall), Fixed3(r.pre.f1), Fixed3(r.post.f1),
                   Fixed3(r.post.f1 - r.pre.f1), OptionalFixed3(r.chexbert_f1), OptionalFixed3(vs)});
  }
  const auto avg = AverageComparison(rows);
  out.push_back({"Average", Fixed3(avg.pre.accuracy), Fixed3(avg.post.accuracy),
                 Fixed3(avg.pre.precision), Fixed3(avg.post.precision), Fixed3(avg.pre.recall),
                 Fixed3(avg.post.recall), Fixed3(avg.pre.f1), Fixed3(avg.post.f1),
                 Fixed3(avg.delta_f1), OptionalFixed3(avg.chexbert_f1),
                 OptionalFixed3(avg.delta_vs_chexbert)});
  return out;
}

std::string ComparisonTableMarkdown(std::span<const ComparisonRow> rows) {
  return MarkdownTable(ComparisonTableRows(rows));
}

std::map<LabelId, double> ReadChexbertCsv(const std::filesystem::path& path) {
  auto rows = csv::ReadFile(path);
  std::map<LabelId, double> out;
  for (std::size_t r = 1; r < rows.size(); ++r) {
    if (rows[r].size() < 2) Fail(ErrorCode::kInvalidArgument, path.string() + ": expected label,f1");
    const auto& label = Taxonomy::Default().Resolve(rows[r][0]);
    try {
      out[label.id] = std::stod(rows[r][1]);
    } catch (const std::exception&) {
      Fail(ErrorCode::kInvalidArgument, path.string() + ": bad F1 value '" + rows[r][1] + "'");
    }
  }
  return out;
}

std::vector<csv::Row> LeaderboardRows(std::span<const LeaderboardEntry> entries) {
  std::vector<csv::Row> rows{{"model", "micro_accuracy", "micro_precision", "micro_recall",
                              "micro_f1", "macro_accuracy", "macro_precision", "macro_recall",
                              "macro_f1", "ran_score"}};
  for (const auto& e : entries) {
    const auto& r = e.report;
    rows.push_back({e.model, Fixed3(r.micro.accuracy), Fixed3(r.micro.precision),
                    Fixed3(r.micro.recall), Fixed3(r.micro.f1), Fixed3(r.macro.accuracy),
                    Fixed3(r.macro.precision), Fixed3(r.macro.recall), Fixed3(r.macro.f1),
                    Fixed3(r.macro.f1)});
  }
  return rows;
}

std::string LeaderboardMarkdown(std::span<const LeaderboardEntry> entries) {
  std::vector<csv::Row> rows{{"Model", "Micro Accuracy", "Micro Precision", "Micro Recall",
                              "Micro F1", "Macro Accuracy", "Macro Precision", "Macro Recall",
                              "Macro F1 (Ran Score)"}};
  for (const auto& e : entries) {
    const auto& r = e.report;
    rows.push_back({e.model, Fixed3(r.micro.accuracy), Fixed3(r.micro.precision),
                    Fixed3(r.micro.recall), Fixed3(r.micro.f1), Fixed3(r.macro.accuracy),
                    Fixed3(r.macro.precision), Fixed3(r.macro.recall), Fixed3(r.macro.f1)});
  }
  return MarkdownTable(rows);
}

void WriteText(const std::filesystem::path& path, const std::string& text) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) Fail(ErrorCode::kIoError, "cannot write " + path.string());
  out << text;
}

}  // namespace cxrlabel
