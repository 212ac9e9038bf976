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

#include "metrics.h"

#include <set>
#include <string>

#include "error.h"
#include "label_matrix.h"
#include "reference.h"

namespace cxrlabel {
namespace {

double Ratio(std::uint64_t num, std::uint64_t den, bool* degenerate) {
  if (den == 0) {
    *degenerate = true;
    return 0;
  }
  return static_cast<double>(num) / static_cast<double>(den);
}

const LabelValues& PredictionFor(const LabelMatrix& pred, const std::string& report_id) {
  const auto* row = pred.Find(report_id);
  if (!row) Fail(ErrorCode::kMissingPrediction, "no prediction for report '" + report_id + "'");
  return *row;
}

nlohmann::ordered_json AveragesJson(const Averages& a) {
  return {{"accuracy", a.accuracy}, {"precision", a.precision}, {"recall", a.recall}, {"f1", a.f1}};
}

}  // namespace

PrF1 ComputePrF1(const Confusion& c) {
  PrF1 r;
  r.precision = Ratio(c.tp, c.tp + c.fp, &r.precision_degenerate);
  r.recall = Ratio(c.tp, c.tp + c.fn, &r.recall_degenerate);
  const double sum = r.precision + r.recall;
  if (sum == 0) {
    r.f1 = 0;
    r.f1_degenerate = true;
  } else {
    r.f1 = 2 * r.precision * r.recall / sum;
  }
  return r;
}

IntervalEstimate EstimateProportion(std::uint64_t x, std::uint64_t n, double alpha) {
  IntervalEstimate e;
  e.x = x;
  e.n = n;
  e.alpha = alpha;
  if (n == 0) {
    e.degenerate = true;
    return e;
  }
  auto ci = ClopperPearson(x, n, alpha);
  e.point = static_cast<double>(x) / static_cast<double>(n);
  e.lower = ci.lower;
  e.upper = ci.upper;
  return e;
}

Confusion ComputeConfusion(const LabelMatrix& pred, const ReferenceStandard& ref, LabelId label) {
  Confusion c;
  for (std::size_t i = 0; i < ref.size(); ++i) {
    const auto state = ref.row(i)[label];
    if (state == CellState::kUnresolved) continue;
    const bool predicted = PredictionFor(pred, ref.report_ids()[i])[label] == 1;
    const bool actual = state == CellState::kPositive;
    if (predicted && actual) {
      ++c.tp;
    } else if (predicted) {
      ++c.fp;
    } else if (actual) {
      ++c.fn;
    } else {
      ++c.tn;
    }
  }
  return c;
}

double MacroMean(std::span<const double> values) {
  if (values.empty()) return 0;
  double sum = 0;
  for (double v : values) sum += v;
  return sum / static_cast<double>(values.size());
}

MetricReport BuildMetricReport(const LabelMatrix& pred, const ReferenceStandard& ref, double alpha) {
  // Surface a missing prediction even when every cell of that report is
  // unresolved.
  for (const auto& id : ref.report_ids()) PredictionFor(pred, id);

  MetricReport report;
  report.alpha = alpha;
  std::vector<double> acc, prec, rec, f1;
  for (LabelId id = 0; id < kNumLabels; ++id) {
    auto& m = report.per_label[id];
    m.confusion = ComputeConfusion(pred, ref, id);
    m.accuracy = EstimateProportion(m.confusion.correct(), m.confusion.total(), alpha);
    m.scores = ComputePrF1(m.confusion);
    const std::uint64_t ref_positives = m.confusion.tp + m.confusion.fn;
    const std::uint64_t pred_positives = m.confusion.tp + m.confusion.fp;
    m.included = ref_positives > 0 || pred_positives > 0;
    report.pooled += m.confusion;
    if (m.included) {
      report.included_labels.push_back(id);
      acc.push_back(m.accuracy.point);
      prec.push_back(m.scores.precision);
      rec.push_back(m.scores.recall);
      f1.push_back(m.scores.f1);
    } else {
      report.excluded_labels.push_back(id);
    }
  }
  report.macro = {MacroMean(acc), MacroMean(prec), MacroMean(rec), MacroMean(f1)};

  report.micro_scores = ComputePrF1(report.pooled);
  bool unused = false;
  report.micro.accuracy = Ratio(report.pooled.correct(), report.pooled.total(), &unused);
  report.micro.precision = report.micro_scores.precision;
  report.micro.recall = report.micro_scores.recall;
  report.micro.f1 = report.micro_scores.f1;
  return report;
}

RanScore ComputeRanScore(const LabelMatrix& generated, const LabelMatrix& reference) {
  std::set<std::string> gen_ids(generated.report_ids().begin(), generated.report_ids().end());
  std::set<std::string> ref_ids(reference.report_ids().begin(), reference.report_ids().end());
  if (gen_ids != ref_ids) {
    Fail(ErrorCode::kReportSetMismatch,
         "generated and reference label sets cover different reports (" +
             std::to_string(gen_ids.size()) + " vs " + std::to_string(ref_ids.size()) + ")");
  }
  RanScore result;
  result.report = BuildMetricReport(generated, ReferenceStandard::FromLabelMatrix(reference));
  result.score = result.report.macro.f1;
  return result;
}

McNemarResult PairedTest(const LabelMatrix& pred_a, const LabelMatrix& pred_b,
                         const ReferenceStandard& ref, LabelId label) {
  std::uint64_t only_a = 0, only_b = 0;
  for (std::size_t i = 0; i < ref.size(); ++i) {
    const auto state = ref.row(i)[label];
    if (state == CellState::kUnresolved) continue;
    const auto& id = ref.report_ids()[i];
    const std::uint8_t truth = state == CellState::kPositive ? 1 : 0;
    const bool a_ok = PredictionFor(pred_a, id)[label] == truth;
    const bool b_ok = PredictionFor(pred_b, id)[label] == truth;
    if (a_ok && !b_ok) ++only_a;
    if (b_ok && !a_ok) ++only_b;
  }
  return McNemarExact(only_a, only_b);
}

nlohmann::ordered_json ToJson(const MetricReport& report) {
  nlohmann::ordered_json per_label = nlohmann::ordered_json::array();
  for (LabelId id = 0; id < kNumLabels; ++id) {
    const auto& m = report.per_label[id];
    per_label.push_back({
        {"label", LabelName(id)},
        {"included", m.included},
        {"confusion", {{"tp", m.confusion.tp}, {"fp", m.confusion.fp}, {"fn", m.confusion.fn}, {"tn", m.confusion.tn}}},
        {"accuracy",
         {{"point", m.accuracy.point},
          {"lower", m.accuracy.lower},
          {"upper", m.accuracy.upper},
          {"x", m.accuracy.x},
          {"n", m.accuracy.n},
          {"degenerate", m.accuracy.degenerate}}},
        {"precision", m.scores.precision},
        {"recall", m.scores.recall},
        {"f1", m.scores.f1},
        {"degenerate", m.scores.degenerate()},
    });
  }
  nlohmann::ordered_json included = nlohmann::ordered_json::array();
  for (auto id : report.included_labels) included.push_back(LabelName(id));
  nlohmann::ordered_json excluded = nlohmann::ordered_json::array();
  for (auto id : report.excluded_labels) excluded.push_back(LabelName(id));
  return {
      {"alpha", report.alpha},
      {"per_label", per_label},
      {"macro", AveragesJson(report.macro)},
      {"micro", AveragesJson(report.micro)},
      {"included_labels", included},
      {"excluded_labels", excluded},
  };
}

}  // namespace cxrlabel
