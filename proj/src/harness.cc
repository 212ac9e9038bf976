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

#include "harness.h"

#include <algorithm>
#include <set>
#include <sstream>

#include "digest.h"
#include "error.h"

namespace cxrlabel {
namespace {

ReferenceStandard RestrictTo(const ReferenceStandard& ref, std::span<const std::string> ids) {
  ReferenceStandard out(ref.quorum(), ref.readers());
  for (const auto& id : ids) {
    if (const ReferenceRow* row = ref.Find(id)) out.Add(id, *row);
  }
  return out;
}

std::vector<std::string> SortedIds(const LabelMatrix& m) {
  std::vector<std::string> ids = m.report_ids();
  std::sort(ids.begin(), ids.end());
  return ids;
}

std::string Utf8Prefix(std::string_view text, std::size_t max_chars) {
  std::size_t chars = 0;
  std::size_t i = 0;
  while (i < text.size() && chars < max_chars) {
    const auto lead = static_cast<unsigned char>(text[i]);
    std::size_t width = 1;
    if (lead >= 0xF0) {
      width = 4;
    } else if (lead >= 0xE0) {
      width = 3;
    } else if (lead >= 0xC0) {
      width = 2;
    }
    i = std::min(text.size(), i + width);
    ++chars;
  }
  return std::string(text.substr(0, i));
}

// Everything that determines the labels of a run, excluding knobs such as
// parallelism and timeouts that cannot change them.
nlohmann::ordered_json LabelingIdentity(const LabelOptions& options) {
  nlohmann::ordered_json doc;
  doc["kind"] = options.backend.kind;
  doc["endpoint"] = options.backend.endpoint;
  doc["model"] = options.backend.model;
  doc["max_retries"] = options.backend.max_retries;
  doc["temperature"] = options.backend.temperature;
  doc["max_tokens"] = options.backend.max_tokens;
  doc["scope"] = ToString(options.scope);
  return doc;
}

void AppendCorpus(std::ostringstream& material, const Corpus& corpus) {
  for (const Report& r : corpus.reports()) {
    material << r.report_id << '\x1f' << r.raw_text << '\x1e';
  }
}

std::string RunId(std::string_view prefix, const std::string& material) {
  return std::string(prefix) + "-" + Sha256Hex(material).substr(0, 16);
}

std::size_t BestRunIndex(const std::vector<EvaluationRun>& runs) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < runs.size(); ++i) {
    const std::size_t passed = runs[i].gate->PassedCount();
    const std::size_t best_passed = runs[best].gate->PassedCount();
    if (passed > best_passed ||
        (passed == best_passed &&
         runs[i].metric_report.macro.accuracy > runs[best].metric_report.macro.accuracy)) {
      best = i;
    }
  }
  return best;
}

}  // namespace

std::string_view ToString(RunKind kind) {
  return kind == RunKind::kLabelerValidation ? "LabelerValidation" : "GenerationBenchmark";
}

RunKind ParseRunKind(std::string_view text) {
  if (text == "LabelerValidation") return RunKind::kLabelerValidation;
  if (text == "GenerationBenchmark") return RunKind::kGenerationBenchmark;
  Fail(ErrorCode::kInvalidArgument, "unknown run kind '" + std::string(text) + "'");
}

std::size_t GateResult::PassedCount() const {
  return static_cast<std::size_t>(std::count_if(per_label.begin(), per_label.end(),
                                                [](const LabelGate& g) { return g.passed; }));
}

GateResult EvaluateGate(const LabelMatrix& pred, const ReferenceStandard& ref,
                        const MetricReport& report, const GateThresholds& thresholds) {
  GateResult gate;
  gate.thresholds = thresholds;
  gate.all_passed = true;
  for (LabelId label = 0; label < kNumLabels; ++label) {
    std::vector<int> a;
    std::vector<int> b;
    for (std::size_t i = 0; i < ref.size(); ++i) {
      const CellState cell = ref.row(i)[label];
      if (cell == CellState::kUnresolved) continue;
      const LabelValues* row = pred.Find(ref.report_ids()[i]);
      if (row == nullptr) continue;
      a.push_back((*row)[label]);
      b.push_back(cell == CellState::kPositive ? 1 : 0);
    }
    LabelGate& g = gate.per_label[label];
    g.resolved = a.size();
    g.accuracy = report.per_label[label].accuracy.point;
    if (!a.empty()) {
      g.kappa = CohenKappa(a, b).kappa;
      g.passed = g.accuracy >= thresholds.accuracy - kGateSlack &&
                 g.kappa >= thresholds.kappa - kGateSlack;
    }
    gate.all_passed = gate.all_passed && g.passed;
  }
  return gate;
}

EvaluationRun AssembleValidationRun(LabelMatrix pred, const ReferenceStandard& ref,
                                    const GateThresholds& thresholds) {
  EvaluationRun run;
  run.kind = RunKind::kLabelerValidation;
  run.reference = RestrictTo(ref, pred.report_ids());
  run.predictions = std::move(pred);
  run.metric_report = BuildMetricReport(run.predictions, run.reference);
  run.gate = EvaluateGate(run.predictions, run.reference, run.metric_report, thresholds);
  return run;
}

std::string ValidationRunId(const PromptVersion& version, std::string_view backend_id,
                            const Corpus& cohort, const ReferenceStandard& reference,
                            const ValidationOptions& options) {
  std::ostringstream material;
  material << ToString(RunKind::kLabelerValidation) << '\n'
           << ToJson(version).dump() << '\n'
           << backend_id << '\n'
           << LabelingIdentity(options.labeling).dump() << '\n'
           << options.thresholds.accuracy << ',' << options.thresholds.kappa << ','
           << options.max_failure_fraction << '\n'
           << options.cohort_tag << '\n';
  AppendCorpus(material, cohort);
  for (const Report& r : cohort.reports()) {
    const ReferenceRow* row = reference.Find(r.report_id);
    if (row == nullptr) continue;
    for (CellState cell : *row) material << CellSymbol(cell);
  }
  return RunId("val", material.str());
}

std::string BenchmarkRunId(const PromptVersion& version, std::string_view backend_id,
                           const Corpus& model_outputs, const Corpus& reference_reports,
                           const BenchmarkOptions& options) {
  std::ostringstream material;
  material << ToString(RunKind::kGenerationBenchmark) << '\n'
           << ToJson(version).dump() << '\n'
           << backend_id << '\n'
           << LabelingIdentity(options.labeling).dump() << '\n'
           << options.model << '\n'
           << options.cohort_tag << '\n'
           << options.max_failure_fraction << '\n';
  AppendCorpus(material, model_outputs);
  material << '\x1d';
  AppendCorpus(material, reference_reports);
  return RunId("bench", material.str());
}

EvaluationRun ValidateLabeler(Backend& backend, const PromptVersion& version, const Corpus& cohort,
                              const ReferenceStandard& reference,
                              const ValidationOptions& options) {
  for (const Report& r : cohort.reports()) {
    if (reference.Find(r.report_id) == nullptr) {
      Fail(ErrorCode::kReportSetMismatch,
           "reference standard has no row for report '" + r.report_id + "'");
    }
  }

  LabelingResult labeled = LabelCorpus(backend, version, cohort, options.labeling);
  if (!cohort.empty() &&
      static_cast<double>(labeled.failures.size()) >
          options.max_failure_fraction * static_cast<double>(cohort.size())) {
    Fail(ErrorCode::kTooManyFailures,
         std::to_string(labeled.failures.size()) + " of " + std::to_string(cohort.size()) +
             " reports could not be labeled");
  }

  EvaluationRun run = AssembleValidationRun(std::move(labeled.matrix), reference, options.thresholds);
  run.prompt_version = version.version_id;
  run.backend_id = backend.id();
  run.cohort_tag = options.cohort_tag;
  run.failures = std::move(labeled.failures);
  run.warnings = std::move(labeled.warnings);
  run.total_retries = labeled.total_retries;

  run.run_id = ValidationRunId(version, run.backend_id, cohort, reference, options);
  return run;
}

std::vector<TriageCase> TriageQueue(const EvaluationRun& run, const ReferenceStandard& reference,
                                    const Corpus& corpus, const KeywordTable& keywords) {
  if (run.kind != RunKind::kLabelerValidation) {
    Fail(ErrorCode::kInvalidArgument, "triage needs a labeler validation run");
  }
  std::vector<std::string> ids = SortedIds(run.predictions);
  std::vector<TriageCase> queue;
  for (LabelId label = 0; label < kNumLabels; ++label) {
    for (const auto& id : ids) {
      const ReferenceRow* ref_row = reference.Find(id);
      if (ref_row == nullptr) continue;
      const CellState cell = (*ref_row)[label];
      if (cell == CellState::kUnresolved) continue;
      const std::uint8_t predicted = (*run.predictions.Find(id))[label];
      if (predicted == (cell == CellState::kPositive ? 1 : 0)) continue;

      TriageCase c;
      c.report_id = id;
      c.label = label;
      c.predicted = predicted;
      c.reference = cell;
      const Report& report = corpus.at(id);
      auto sentence = KeywordSentence(report.raw_text, label, keywords);
      c.excerpt = sentence ? *sentence : Utf8Prefix(report.raw_text, kExcerptLength);
      queue.push_back(std::move(c));
    }
  }
  const int width = std::max<int>(4, static_cast<int>(std::to_string(queue.size()).size()));
  for (std::size_t i = 0; i < queue.size(); ++i) {
    std::string n = std::to_string(i + 1);
    queue[i].case_id = run.run_id + "-" + std::string(width - n.size(), '0') + n;
  }
  return queue;
}

nlohmann::ordered_json ToJson(const TriageCase& c) {
  nlohmann::ordered_json doc;
  doc["case_id"] = c.case_id;
  doc["report_id"] = c.report_id;
  doc["label"] = LabelName(c.label);
  doc["predicted"] = c.predicted;
  doc["reference"] = c.reference == CellState::kPositive ? "Positive" : "Negative";
  doc["excerpt"] = c.excerpt;
  if (c.resolution) {
    doc["resolution"] = {{"revision_kind", ToString(c.resolution->kind)},
                         {"note", c.resolution->note},
                         {"resolved_in_version", c.resolution->resolved_in_version}};
  } else {
    doc["resolution"] = nullptr;
  }
  return doc;
}

TriageCase TriageCaseFromJson(const nlohmann::json& doc) {
  TriageCase c;
  c.case_id = doc.at("case_id").get<std::string>();
  c.report_id = doc.at("report_id").get<std::string>();
  c.label = Taxonomy::Default().Resolve(doc.at("label").get<std::string>()).id;
  c.predicted = doc.at("predicted").get<std::uint8_t>();
  const std::string ref = doc.at("reference").get<std::string>();
  if (ref != "Positive" && ref != "Negative") {
    Fail(ErrorCode::kInvalidArgument, "triage reference must be Positive or Negative");
  }
  c.reference = ref == "Positive" ? CellState::kPositive : CellState::kNegative;
  c.excerpt = doc.value("excerpt", "");
  if (doc.contains("resolution") && !doc["resolution"].is_null()) {
    const auto& r = doc["resolution"];
    c.resolution = TriageResolution{ParseRevisionKind(r.at("revision_kind").get<std::string>()),
                                    r.value("note", ""),
                                    r.at("resolved_in_version").get<VersionId>()};
  }
  return c;
}

LoopResult OptimizationLoop(Backend& backend, PromptRegistry& registry, VersionId root,
                            const Corpus& cohort, const ReferenceStandard& reference,
                            const LoopOptions& options, const RevisionProvider& revisions) {
  if (options.max_rounds == 0) Fail(ErrorCode::kInvalidArgument, "max_rounds must be at least 1");
  if (!registry.TryClaimLineage(root)) {
    Fail(ErrorCode::kConflict, "an optimization loop already holds the lineage of version " +
                                   std::to_string(root));
  }
  struct Claim {
    PromptRegistry& registry;
    VersionId id;
    ~Claim() { registry.ReleaseLineage(id); }
  } claim{registry, root};

  LoopResult result;
  VersionId current = root;
  result.lineage.push_back(root);
  std::vector<TriageCase> triage;
  bool changed = true;
  for (std::size_t round = 1; round <= options.max_rounds; ++round) {
    result.rounds = round;
    if (changed) {
      auto version = registry.Get(current);
      EvaluationRun run = ValidateLabeler(backend, *version, cohort, reference, options.validation);
      triage = TriageQueue(run, reference, cohort, KeywordsFor(*version));
      if (options.on_run) options.on_run(run, triage);
      result.runs.push_back(std::move(run));
    }
    const EvaluationRun& latest = result.runs.back();
    if (latest.gate->all_passed) {
      result.passed = true;
      result.final_run = latest;
      return result;
    }
    if (round == options.max_rounds) break;

    std::vector<Revision> next = revisions(latest, triage);
    changed = !next.empty();
    if (changed) {
      current = registry.Refine(current, next)->version_id;
      result.lineage.push_back(current);
    }
  }
  result.max_rounds_exceeded = true;
  result.final_run = result.runs[BestRunIndex(result.runs)];
  return result;
}

EvaluationRun BenchmarkGeneration(Backend& backend, const PromptRegistry& registry,
                                  VersionId frozen_version, const Corpus& model_outputs,
                                  const Corpus& reference_reports,
                                  const BenchmarkOptions& options) {
  if (!registry.IsFrozen(frozen_version)) {
    Fail(ErrorCode::kFrozenVersionViolation,
         "prompt version " + std::to_string(frozen_version) + " must be frozen before benchmarking");
  }
  if (model_outputs.SortedIds() != reference_reports.SortedIds()) {
    Fail(ErrorCode::kReportSetMismatch,
         "generated and reference corpora must hold the same report ids");
  }
  auto version = registry.Get(frozen_version);

  LabelingResult generated = LabelCorpus(backend, *version, model_outputs, options.labeling);
  LabelingResult original = LabelCorpus(backend, *version, reference_reports, options.labeling);

  std::set<std::string> failed;
  EvaluationRun run;
  for (auto& f : generated.failures) {
    failed.insert(f.report_id);
    f.message = "generated report: " + f.message;
    run.failures.push_back(std::move(f));
  }
  for (auto& f : original.failures) {
    failed.insert(f.report_id);
    f.message = "reference report: " + f.message;
    run.failures.push_back(std::move(f));
  }
  if (!reference_reports.empty() &&
      static_cast<double>(failed.size()) >
          options.max_failure_fraction * static_cast<double>(reference_reports.size())) {
    Fail(ErrorCode::kTooManyFailures,
         std::to_string(failed.size()) + " of " + std::to_string(reference_reports.size()) +
             " report pairs could not be labeled");
  }

  LabelMatrix gen_labels;
  LabelMatrix ref_labels;
  for (const Report& r : reference_reports.reports()) {
    if (failed.count(r.report_id)) continue;
    gen_labels.Add(r.report_id, *generated.matrix.Find(r.report_id));
    ref_labels.Add(r.report_id, *original.matrix.Find(r.report_id));
  }
  RanScore score = ComputeRanScore(gen_labels, ref_labels);

  if (!registry.Children(frozen_version).empty()) {
    Fail(ErrorCode::kFrozenVersionViolation,
         "frozen prompt version " + std::to_string(frozen_version) + " acquired children");
  }

  run.kind = RunKind::kGenerationBenchmark;
  run.prompt_version = frozen_version;
  run.backend_id = backend.id();
  run.cohort_tag = options.cohort_tag;
  run.model = options.model;
  run.metric_report = std::move(score.report);
  run.predictions = std::move(gen_labels);
  run.reference = ReferenceStandard::FromLabelMatrix(ref_labels);
  run.warnings = std::move(generated.warnings);
  for (auto& w : original.warnings) run.warnings.push_back("reference report: " + w);
  run.total_retries = generated.total_retries + original.total_retries;

  run.run_id = BenchmarkRunId(*version, run.backend_id, model_outputs, reference_reports, options);
  return run;
}

RunComparison CompareRuns(const EvaluationRun& a, const EvaluationRun& b,
                          const ReferenceStandard& reference) {
  if (a.cohort_tag != b.cohort_tag) {
    Fail(ErrorCode::kCohortMismatch,
         "runs cover different cohorts ('" + a.cohort_tag + "' vs '" + b.cohort_tag + "')");
  }
  const std::vector<std::string> ids = SortedIds(a.predictions);
  if (ids != SortedIds(b.predictions)) {
    Fail(ErrorCode::kCohortMismatch, "runs labeled different report sets");
  }
  for (const auto& id : ids) {
    if (reference.Find(id) == nullptr) {
      Fail(ErrorCode::kCohortMismatch, "reference has no row for report '" + id + "'");
    }
  }
  if (a.reference.size() > 0 && b.reference.size() > 0) {
    bool same = a.reference.size() == b.reference.size();
    for (std::size_t i = 0; same && i < a.reference.size(); ++i) {
      const ReferenceRow* other = b.reference.Find(a.reference.report_ids()[i]);
      same = other != nullptr && *other == a.reference.row(i);
    }
    if (!same) Fail(ErrorCode::kCohortMismatch, "runs were scored against different references");
  }

  const ReferenceStandard ref = RestrictTo(reference, ids);
  const MetricReport report_a = BuildMetricReport(a.predictions, ref);
  const MetricReport report_b = BuildMetricReport(b.predictions, ref);

  RunComparison out;
  out.run_a = a.run_id;
  out.run_b = b.run_id;
  for (LabelId label = 0; label < kNumLabels; ++label) {
    LabelComparison& c = out.per_label[label];
    c.f1_a = report_a.per_label[label].scores.f1;
    c.f1_b = report_b.per_label[label].scores.f1;
    c.delta_f1 = c.f1_b - c.f1_a;
    c.test = PairedTest(a.predictions, b.predictions, ref, label);
  }
  out.macro_f1_a = report_a.macro.f1;
  out.macro_f1_b = report_b.macro.f1;
  out.macro_delta = out.macro_f1_b - out.macro_f1_a;
  return out;
}

nlohmann::ordered_json ToJson(const GateResult& gate) {
  nlohmann::ordered_json doc;
  doc["thresholds"] = {{"accuracy", gate.thresholds.accuracy}, {"kappa", gate.thresholds.kappa}};
  nlohmann::ordered_json labels = nlohmann::ordered_json::array();
  for (LabelId label = 0; label < kNumLabels; ++label) {
    const LabelGate& g = gate.per_label[label];
    labels.push_back({{"label", LabelName(label)},
                      {"accuracy", g.accuracy},
                      {"kappa_vs_reference", g.kappa},
                      {"resolved", g.resolved},
                      {"passed", g.passed}});
  }
  doc["per_label"] = std::move(labels);
  doc["all_passed"] = gate.all_passed;
  return doc;
}

nlohmann::ordered_json ToJson(const RunComparison& comparison) {
  nlohmann::ordered_json doc;
  doc["run_a"] = comparison.run_a;
  doc["run_b"] = comparison.run_b;
  nlohmann::ordered_json labels = nlohmann::ordered_json::array();
  for (LabelId label = 0; label < kNumLabels; ++label) {
    const LabelComparison& c = comparison.per_label[label];
    labels.push_back({{"label", LabelName(label)},
                      {"f1_a", c.f1_a},
                      {"f1_b", c.f1_b},
                      {"delta_f1", c.delta_f1},
                      {"discordant_a_only", c.test.b},
                      {"discordant_b_only", c.test.c},
                      {"p_value", c.test.p_value}});
  }
  doc["per_label"] = std::move(labels);
  doc["macro_f1_a"] = comparison.macro_f1_a;
  doc["macro_f1_b"] = comparison.macro_f1_b;
  doc["macro_delta"] = comparison.macro_delta;
  return doc;
}

nlohmann::ordered_json ToJson(const EvaluationRun& run) {
  nlohmann::ordered_json doc;
  doc["run_id"] = run.run_id;
  doc["kind"] = ToString(run.kind);
  doc["prompt_version"] = run.prompt_version;
  doc["backend_id"] = run.backend_id;
  doc["cohort_tag"] = run.cohort_tag;
  if (!run.created_at.empty()) doc["created_at"] = run.created_at;
  if (!run.model.empty()) doc["model"] = run.model;
  doc["metric_report"] = ToJson(run.metric_report);
  doc["gate_result"] = run.gate ? ToJson(*run.gate) : nlohmann::ordered_json(nullptr);
  nlohmann::ordered_json failures = nlohmann::ordered_json::array();
  for (const auto& f : run.failures) {
    failures.push_back({{"report_id", f.report_id},
                        {"error", ErrorCodeName(f.code)},
                        {"message", f.message},
                        {"last_response", f.last_response}});
  }
  doc["failures"] = std::move(failures);
  doc["warnings"] = run.warnings;
  doc["total_retries"] = run.total_retries;
  return doc;
}

}  // namespace cxrlabel
