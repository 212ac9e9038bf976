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

#ifndef CXRLABEL_METRICS_H_
#define CXRLABEL_METRICS_H_

#include <array>
#include <cstdint>
#include <span>
#include <vector>

#include "json.hpp"

#include "stats.h"
#include "taxonomy.h"

namespace cxrlabel {

class LabelMatrix;
class ReferenceStandard;

struct Confusion {
  std::uint64_t tp = 0;
  std::uint64_t fp = 0;
  std::uint64_t fn = 0;
  std::uint64_t tn = 0;

  std::uint64_t total() const { return tp + fp + fn + tn; }
  std::uint64_t correct() const { return tp + tn; }

  Confusion& operator+=(const Confusion& o) {
    tp += o.tp;
    fp += o.fp;
    fn += o.fn;
    tn += o.tn;
    return *this;
  }
  friend bool operator==(const Confusion&, const Confusion&) = default;
};

// 0/0 ratios are reported as 0 and flagged rather than silently averaged.
struct PrF1 {
  double precision = 0;
  double recall = 0;
  double f1 = 0;
  bool precision_degenerate = false;
  bool recall_degenerate = false;
  bool f1_degenerate = false;

  bool degenerate() const { return precision_degenerate || recall_degenerate || f1_degenerate; }
};

PrF1 ComputePrF1(const Confusion& c);

struct IntervalEstimate {
  double point = 0;
  double lower = 0;
  double upper = 1;
  std::uint64_t n = 0;
  std::uint64_t x = 0;
  double alpha = 0.05;
  // Set when n == 0: no interval exists and point is 0 by convention.
  bool degenerate = false;
};

// x / n with its Clopper-Pearson interval.
IntervalEstimate EstimateProportion(std::uint64_t x, std::uint64_t n, double alpha = 0.05);

struct LabelMetrics {
  Confusion confusion;
  IntervalEstimate accuracy;
  PrF1 scores;
  // False when the reference has no positive cell and nothing was predicted
  // positive: such a label is left out of the macro mean and disclosed.
  bool included = true;
};

struct Averages {
  double accuracy = 0;
  double precision = 0;
  double recall = 0;
  double f1 = 0;
};

struct MetricReport {
  std::array<LabelMetrics, kNumLabels> per_label;
  Averages macro;
  Averages micro;
  Confusion pooled;
  PrF1 micro_scores;
  std::vector<LabelId> included_labels;
  std::vector<LabelId> excluded_labels;
  double alpha = 0.05;
};

// Counts over the cells where the reference is resolved. Every report the
// reference covers must be predicted (kMissingPrediction).
Confusion ComputeConfusion(const LabelMatrix& pred, const ReferenceStandard& ref, LabelId label);

// Per-label confusion, accuracy interval (x = tp + tn over resolved cells)
// and precision/recall/F1; macro = unweighted mean over included labels;
// micro = scores of the pooled confusion.
MetricReport BuildMetricReport(const LabelMatrix& pred, const ReferenceStandard& ref,
                               double alpha = 0.05);

// Arithmetic mean, 0 for an empty range.
double MacroMean(std::span<const double> values);

struct RanScore {
  double score = 0;  // macro F1
  MetricReport report;
};

// Labels extracted from generated reports scored against labels extracted
// from the matching reference reports. The reference side has no
// unresolved cells. Throws kReportSetMismatch unless the id sets agree.
RanScore ComputeRanScore(const LabelMatrix& generated, const LabelMatrix& reference);

// Exact McNemar test on per-report correctness of two labelers over the
// resolved cells of one label.
McNemarResult PairedTest(const LabelMatrix& pred_a, const LabelMatrix& pred_b,
                         const ReferenceStandard& ref, LabelId label);

nlohmann::ordered_json ToJson(const MetricReport& report);

}  // namespace cxrlabel

#endif  // CXRLABEL_METRICS_H_
