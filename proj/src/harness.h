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

#ifndef CXRLABEL_HARNESS_H_
#define CXRLABEL_HARNESS_H_

#include <array>
#include <cstddef>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

#include "corpus.h"
#include "label_matrix.h"
#include "labeler.h"
#include "metrics.h"
#include "reference.h"
#include "registry.h"
#include "rule_labeler.h"

namespace cxrlabel {

enum class RunKind { kLabelerValidation, kGenerationBenchmark };

std::string_view ToString(RunKind kind);
RunKind ParseRunKind(std::string_view text);

struct GateThresholds {
  double accuracy = 0.90;
  double kappa = 0.90;
};

// Rounding allowance when comparing a statistic to its threshold, so that
// e.g. a kappa of exactly 0.9 is not failed by floating-point error.
inline constexpr double kGateSlack = 1e-9;

struct LabelGate {
  double accuracy = 0;
  double kappa = 0;
  // Resolved reference cells behind the two numbers.
  std::size_t resolved = 0;
  bool passed = false;
};

struct GateResult {
  GateThresholds thresholds;
  std::array<LabelGate, kNumLabels> per_label{};
  bool all_passed = false;

  std::size_t PassedCount() const;
};

// Per label: accuracy from the metric report and Cohen's kappa between the
// predictions and the resolved reference cells. A label with no resolved
// cell cannot pass.
GateResult EvaluateGate(const LabelMatrix& pred, const ReferenceStandard& ref,
                        const MetricReport& report, const GateThresholds& thresholds = {});

struct EvaluationRun {
  std::string run_id;
  RunKind kind = RunKind::kLabelerValidation;
  VersionId prompt_version = 0;
  std::string backend_id;
  std::string cohort_tag;
  // Wall-clock time; kept out of the run directory so that reruns compare
  // byte for byte, and recorded in the event log instead.
  std::string created_at;
  // Benchmarks only: the model whose reports were scored.
  std::string model;

  MetricReport metric_report;
  std::optional<GateResult> gate;

  LabelMatrix predictions;
  ReferenceStandard reference;

  std::vector<LabelFailure> failures;
  std::vector<std::string> warnings;
  std::size_t total_retries = 0;

  // Effective configuration echoed into config.json.
  nlohmann::ordered_json config = nlohmann::ordered_json::object();
};

// Scores `pred` against `ref` and fills in metric report and gate. Reports
// the reference covers but `pred` lacks are left out of both.
EvaluationRun AssembleValidationRun(LabelMatrix pred, const ReferenceStandard& ref,
                                    const GateThresholds& thresholds = {});

struct ValidationOptions {
  LabelOptions labeling;
  GateThresholds thresholds;
  // Labeling failures are recorded on the run; above this fraction of the
  // cohort the run is rejected with kTooManyFailures.
  double max_failure_fraction = 0.05;
  std::string cohort_tag = "development";
};

// Content-derived run id: equal inputs give equal ids. Parallelism,
// timeouts and backoff do not enter it.
std::string ValidationRunId(const PromptVersion& version, std::string_view backend_id,
                            const Corpus& cohort, const ReferenceStandard& reference,
                            const ValidationOptions& options);

// Labels the cohort and scores it against the reference. Throws
// kReportSetMismatch when the reference lacks a cohort report.
EvaluationRun ValidateLabeler(Backend& backend, const PromptVersion& version, const Corpus& cohort,
                              const ReferenceStandard& reference,
                              const ValidationOptions& options = {});

struct TriageResolution {
  RevisionKind kind = RevisionKind::kSynonymAdded;
  std::string note;
  VersionId resolved_in_version = 0;
};

struct TriageCase {
  std::string case_id;
  std::string report_id;
  LabelId label = 0;
  std::uint8_t predicted = 0;
  CellState reference = CellState::kNegative;
  std::string excerpt;
  std::optional<TriageResolution> resolution;
};

// Longest prefix of at most 240 characters (UTF-8 code points).
inline constexpr std::size_t kExcerptLength = 240;

// One case per resolved reference cell the run got wrong, ordered by label
// then report_id. The excerpt is the sentence with the first keyword hit
// for the label, else the start of the report. Case ids are
// "<run_id>-<position>".
std::vector<TriageCase> TriageQueue(const EvaluationRun& run, const ReferenceStandard& reference,
                                    const Corpus& corpus,
                                    const KeywordTable& keywords = DefaultKeywords());

nlohmann::ordered_json ToJson(const TriageCase& triage_case);
TriageCase TriageCaseFromJson(const nlohmann::json& doc);

// The human half of the loop. Called with a failing run and its triage
// queue; returns the revisions to apply, or nothing to pass on the round.
using RevisionProvider =
    std::function<std::vector<Revision>(const EvaluationRun&, const std::vector<TriageCase>&)>;

struct LoopOptions {
  ValidationOptions validation;
  std::size_t max_rounds = 5;
  // Called once per completed validation, e.g. to persist it.
  std::function<void(const EvaluationRun&, const std::vector<TriageCase>&)> on_run;
};

struct LoopResult {
  // Root first; one entry per version validated.
  std::vector<VersionId> lineage;
  std::vector<EvaluationRun> runs;
  // The passing run, or the best run when max_rounds ran out.
  EvaluationRun final_run;
  std::size_t rounds = 0;
  bool passed = false;
  bool max_rounds_exceeded = false;
};

// validate -> (gate failed) triage -> wait for revisions -> refine -> ...
// until every label passes or max_rounds validations have run. The loop
// never writes prompts itself. A round without revisions keeps the
// current version. When rounds run out the best run (most labels passed,
// then macro accuracy) is returned with max_rounds_exceeded set. Throws
// kConflict while another loop holds the lineage, kInvalidArgument for
// max_rounds == 0.
LoopResult OptimizationLoop(Backend& backend, PromptRegistry& registry, VersionId root,
                            const Corpus& cohort, const ReferenceStandard& reference,
                            const LoopOptions& options, const RevisionProvider& revisions);

struct BenchmarkOptions {
  LabelOptions labeling;
  std::string model;
  std::string cohort_tag = "test";
  double max_failure_fraction = 0.05;
};

std::string BenchmarkRunId(const PromptVersion& version, std::string_view backend_id,
                           const Corpus& model_outputs, const Corpus& reference_reports,
                           const BenchmarkOptions& options);

// Labels the generated reports and the original reports with the same
// backend and frozen prompt, then scores one against the other. Reports
// that fail on either side are dropped from both and recorded. Throws
// kReportSetMismatch and kFrozenVersionViolation.
EvaluationRun BenchmarkGeneration(Backend& backend, const PromptRegistry& registry,
                                  VersionId frozen_version, const Corpus& model_outputs,
                                  const Corpus& reference_reports,
                                  const BenchmarkOptions& options = {});

struct LabelComparison {
  double f1_a = 0;
  double f1_b = 0;
  double delta_f1 = 0;  // b - a
  McNemarResult test;
};

struct RunComparison {
  std::string run_a;
  std::string run_b;
  std::array<LabelComparison, kNumLabels> per_label{};
  double macro_f1_a = 0;
  double macro_f1_b = 0;
  double macro_delta = 0;
};

// Per-label F1 change from a to b with the exact McNemar p-value. Throws
// kCohortMismatch unless both runs cover the same reports of the same
// cohort and the reference covers them.
RunComparison CompareRuns(const EvaluationRun& a, const EvaluationRun& b,
                          const ReferenceStandard& reference);

nlohmann::ordered_json ToJson(const GateResult& gate);
nlohmann::ordered_json ToJson(const RunComparison& comparison);
// Summary for APIs: ids, metric report, gate, failures and warnings.
nlohmann::ordered_json ToJson(const EvaluationRun& run);

}  // namespace cxrlabel

#endif  // CXRLABEL_HARNESS_H_
