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

#include "service/service.h"

#include <algorithm>
#include <fstream>
#include <sstream>

#include "httplib.h"

#include "backend.h"
#include "csv.h"
#include "error.h"
#include "tables.h"

namespace cxrlabel::service {
namespace {

using json = nlohmann::json;
using ordered_json = nlohmann::ordered_json;

int HttpStatusFor(ErrorCode code) {
  switch (code) {
    case ErrorCode::kNotFound:
      return 404;
    case ErrorCode::kFrozenVersionViolation:
    case ErrorCode::kConflict:
    case ErrorCode::kDuplicateReader:
      return 409;
    default:
      return 400;
  }
}

Response ErrorResponse(ErrorCode code, const std::string& message) {
  return {HttpStatusFor(code), {{"error", ErrorCodeName(code)}, {"message", message}}};
}

template <typename F>
Response Guarded(F&& body) {
  try {
    return body();
  } catch (const Error& e) {
    return ErrorResponse(e.code(), e.what());
  } catch (const json::exception& e) {
    return ErrorResponse(ErrorCode::kInvalidArgument, e.what());
  }
}

ReaderAnnotation AnnotationFromJson(const json& doc) {
  if (!doc.is_object()) Fail(ErrorCode::kInvalidArgument, "annotation must be a JSON object");
  ReaderAnnotation a;
  a.reader_id = doc.at("reader_id").get<std::string>();
  a.report_id = doc.at("report_id").get<std::string>();
  if (a.reader_id.empty() || a.report_id.empty()) {
    Fail(ErrorCode::kInvalidArgument, "reader_id and report_id must be non-empty");
  }
  const json& labels = doc.at("labels");
  if (!labels.is_object()) Fail(ErrorCode::kInvalidArgument, "labels must be an object");
  std::array<bool, kNumLabels> seen{};
  for (const auto& [name, value] : labels.items()) {
    const LabelId id = Taxonomy::Default().Resolve(name).id;
    if (seen[id]) {
      Fail(ErrorCode::kInvalidArgument, "label '" + std::string(LabelName(id)) + "' given twice");
    }
    seen[id] = true;
    if (!value.is_number_integer()) {
      Fail(ErrorCode::kBadVote, "vote for '" + name + "' must be 1, 0 or -1");
    }
    const auto v = value.get<std::int64_t>();
    if (v != 1 && v != 0 && v != -1) {
      Fail(ErrorCode::kBadVote, "vote for '" + name + "' must be 1, 0 or -1, got " + std::to_string(v));
    }
    a.values[id] = static_cast<std::int8_t>(v);
  }
  for (LabelId id = 0; id < kNumLabels; ++id) {
    if (!seen[id]) {
      Fail(ErrorCode::kMissingLabel, "annotation lacks label '" + std::string(LabelName(id)) + "'");
    }
  }
  return a;
}

ordered_json ToJson(const ReaderAnnotation& a) {
  ordered_json labels = ordered_json::object();
  for (LabelId id = 0; id < kNumLabels; ++id) labels[std::string(LabelName(id))] = a.values[id];
  return {{"reader_id", a.reader_id}, {"report_id", a.report_id}, {"labels", std::move(labels)}};
}

ordered_json ReferenceRows(const ReferenceStandard& ref) {
  ordered_json rows = ordered_json::array();
  for (std::size_t i = 0; i < ref.size(); ++i) {
    ordered_json labels = ordered_json::object();
    for (LabelId id = 0; id < kNumLabels; ++id) {
      labels[std::string(LabelName(id))] = std::string(1, CellSymbol(ref.row(i)[id]));
    }
    rows.push_back({{"report_id", ref.report_ids()[i]}, {"labels", std::move(labels)}});
  }
  return rows;
}

ReferenceStandard ReferenceFromRows(const json& rows) {
  if (!rows.is_array()) Fail(ErrorCode::kInvalidArgument, "reference must be an array of rows");
  ReferenceStandard ref;
  for (const auto& row : rows) {
    ReferenceRow cells{};
    std::array<bool, kNumLabels> seen{};
    for (const auto& [name, value] : row.at("labels").items()) {
      const LabelId id = Taxonomy::Default().Resolve(name).id;
      seen[id] = true;
      const std::string v = value.is_string() ? value.get<std::string>() : value.dump();
      if (v == "1") {
        cells[id] = CellState::kPositive;
      } else if (v == "0") {
        cells[id] = CellState::kNegative;
      } else if (v == "U" || v == "u") {
        cells[id] = CellState::kUnresolved;
      } else {
        Fail(ErrorCode::kIllegalValue, "reference cell must be 1, 0 or U, got '" + v + "'");
      }
    }
    for (LabelId id = 0; id < kNumLabels; ++id) {
      if (!seen[id]) {
        Fail(ErrorCode::kMissingLabel, "reference row lacks label '" + std::string(LabelName(id)) + "'");
      }
    }
    ref.Add(row.at("report_id").get<std::string>(), cells);
  }
  return ref;
}

std::vector<SourceRecord> RecordsFromJson(const json& list) {
  if (!list.is_array()) Fail(ErrorCode::kInvalidArgument, "reports must be an array");
  std::vector<SourceRecord> records;
  for (const auto& item : list) {
    SourceRecord r;
    r.report_id = item.at("report_id").get<std::string>();
    r.text = item.contains("text") ? item["text"].get<std::string>()
                                   : item.at("raw_text").get<std::string>();
    r.language = ParseLanguage(item.value("language", "EN"));
    records.push_back(std::move(r));
  }
  return records;
}

BackendConfig BackendFrom(const json& body) {
  return body.contains("backend") ? BackendConfigFromJson(body["backend"]) : BackendConfig{};
}

ordered_json AveragesJson(const Averages& a) {
  return {{"accuracy", a.accuracy}, {"precision", a.precision}, {"recall", a.recall}, {"f1", a.f1}};
}

std::string RunIdOfCase(const std::string& case_id) {
  const auto dash = case_id.rfind('-');
  if (dash == std::string::npos || dash == 0) {
    Fail(ErrorCode::kNotFound, "triage case '" + case_id + "' not found");
  }
  return case_id.substr(0, dash);
}

}  // namespace

Service::Service(ServiceOptions options)
    : options_(std::move(options)), store_(options_.data_dir) {
  std::filesystem::create_directories(options_.data_dir);
  Replay();
}

Service::~Service() { WaitForRuns(); }

void Service::WaitForRuns() {
  std::vector<std::jthread> workers;
  {
    std::lock_guard lock(workers_mu_);
    workers.swap(workers_);
  }
  for (auto& w : workers) {
    if (w.joinable()) w.join();
  }
}

void Service::Log(ordered_json event) { store_.AppendEvent(std::move(event)); }

void Service::Replay() {
  std::ifstream in(store_.EventLog());
  if (!in) return;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const json event = json::parse(line);
    const std::string kind = event.value("event", "");
    try {
      if (kind == "cohort_uploaded") {
        std::vector<Report> reports;
        for (const auto& r : event.at("reports")) reports.push_back(ReportFromJson(r));
        ApplyCohort(event.at("cohort").get<std::string>(), std::move(reports));
      } else if (kind == "annotation_added") {
        ApplyAnnotation(AnnotationFromJson(event.at("annotation")));
      } else if (kind == "prompt_refined") {
        const auto revisions = RevisionsFromJson(event.at("revisions"));
        auto child = registry_.Refine(event.at("parent").get<VersionId>(), revisions,
                                      event.value("note", ""));
        if (child->version_id != event.at("version_id").get<VersionId>()) {
          Fail(ErrorCode::kIoError, "replayed refinement produced a different version id");
        }
      } else if (kind == "prompt_frozen") {
        registry_.Freeze(event.at("version_id").get<VersionId>());
      } else if (kind == "run_started") {
        RunRecord record;
        record.kind = ParseRunKind(event.at("kind").get<std::string>());
        record.model = event.value("model", "");
        runs_[event.at("run_id").get<std::string>()] = record;
      } else if (kind == "run_completed") {
        RunRecord& record = runs_[event.at("run_id").get<std::string>()];
        record.status = RunStatus::kCompleted;
        record.kind = ParseRunKind(event.at("kind").get<std::string>());
        record.model = event.value("model", "");
      } else if (kind == "run_failed") {
        RunRecord& record = runs_[event.at("run_id").get<std::string>()];
        record.status = RunStatus::kFailed;
        record.error = event.value("error", "");
        record.message = event.value("message", "");
      } else if (kind == "triage_resolved") {
        const json& r = event.at("resolution");
        resolutions_[event.at("case_id").get<std::string>()] =
            TriageResolution{ParseRevisionKind(r.at("revision_kind").get<std::string>()),
                             r.value("note", ""), r.at("resolved_in_version").get<VersionId>()};
      }
    } catch (const Error& e) {
      Fail(ErrorCode::kIoError, store_.EventLog().string() + ":" + std::to_string(line_no) +
                                    ": cannot replay '" + kind + "': " + e.what());
    }
  }
  for (auto& [id, record] : runs_) {
    if (record.status == RunStatus::kRunning) {
      record.status = RunStatus::kFailed;
      record.error = "Interrupted";
      record.message = "the service stopped before the run finished";
    }
  }
}

void Service::ApplyCohort(const std::string& cohort, std::vector<Report> reports) {
  for (const auto& r : reports) {
    if (corpus_.Find(r.report_id) != nullptr) {
      Fail(ErrorCode::kDuplicateReportId, "report '" + r.report_id + "' was already uploaded");
    }
  }
  std::vector<Report> all(corpus_.reports().begin(), corpus_.reports().end());
  auto& ids = cohorts_[cohort];
  for (auto& r : reports) {
    ids.push_back(r.report_id);
    cohort_of_[r.report_id] = cohort;
    all.push_back(std::move(r));
  }
  corpus_ = Corpus::FromReports(std::move(all));
}

void Service::ApplyAnnotation(const ReaderAnnotation& annotation) {
  if (corpus_.Find(annotation.report_id) == nullptr) {
    Fail(ErrorCode::kNotFound, "report '" + annotation.report_id + "' not found");
  }
  if (!annotated_.emplace(annotation.reader_id, annotation.report_id).second) {
    Fail(ErrorCode::kDuplicateReader, "reader '" + annotation.reader_id +
                                          "' already annotated report '" + annotation.report_id + "'");
  }
  annotations_.push_back(annotation);
}

Corpus Service::CohortCorpus(const std::string& cohort) const {
  auto it = cohorts_.find(cohort);
  if (it == cohorts_.end()) Fail(ErrorCode::kNotFound, "cohort '" + cohort + "' not found");
  return corpus_.Subset(it->second);
}

ReferenceStandard Service::CohortReference(const std::string& cohort, std::size_t quorum) const {
  auto it = cohorts_.find(cohort);
  if (it == cohorts_.end()) Fail(ErrorCode::kNotFound, "cohort '" + cohort + "' not found");
  std::set<std::string> members(it->second.begin(), it->second.end());
  std::set<std::string> annotated;
  std::vector<ReaderAnnotation> selected;
  for (const auto& a : annotations_) {
    if (members.count(a.report_id)) {
      selected.push_back(a);
      annotated.insert(a.report_id);
    }
  }
  for (const auto& id : it->second) {
    if (!annotated.count(id)) {
      Fail(ErrorCode::kMissingReader, "report '" + id + "' has no annotations yet");
    }
  }
  return BuildReference(selected, quorum);
}

Response Service::PostCohort(const json& body) {
  return Guarded([&]() -> Response {
    const std::string cohort(ToString(ParseCohortTag(body.at("cohort").get<std::string>())));
    IngestOptions ingest;
    ingest.deidentify = body.value("deidentify", true);
    ingest.require_sections = body.value("require_sections", false);
    IngestSummary summary;
    Corpus uploaded = Corpus::Ingest(RecordsFromJson(body.at("reports")), ingest, &summary);
    std::vector<Report> reports(uploaded.reports().begin(), uploaded.reports().end());
    for (auto& r : reports) r.cohort = ParseCohortTag(cohort);

    std::unique_lock lock(mu_);
    ordered_json event = {{"event", "cohort_uploaded"}, {"cohort", cohort}};
    ordered_json stored = ordered_json::array();
    for (const auto& r : reports) stored.push_back(ToJson(r));
    event["reports"] = std::move(stored);
    ApplyCohort(cohort, std::move(reports));
    Log(std::move(event));
    return {201,
            {{"cohort", cohort},
             {"reports_added", summary.reports_kept},
             {"dropped_without_sections", summary.dropped_without_sections},
             {"phi_removals", summary.phi_removals},
             {"cohort_size", cohorts_[cohort].size()}}};
  });
}

Response Service::GetReport(const std::string& report_id) const {
  return Guarded([&]() -> Response {
    std::shared_lock lock(mu_);
    const Report* r = corpus_.Find(report_id);
    if (r == nullptr) Fail(ErrorCode::kNotFound, "report '" + report_id + "' not found");
    return {200, ToJson(*r)};
  });
}

Response Service::PostAnnotation(const json& body) {
  return Guarded([&]() -> Response {
    const ReaderAnnotation annotation = AnnotationFromJson(body);
    std::unique_lock lock(mu_);
    ApplyAnnotation(annotation);
    Log({{"event", "annotation_added"}, {"annotation", ToJson(annotation)}});
    return {201, ToJson(annotation)};
  });
}

Response Service::GetReference(const std::string& cohort, std::optional<std::size_t> quorum) const {
  return Guarded([&]() -> Response {
    std::shared_lock lock(mu_);
    const std::size_t q = quorum.value_or(options_.quorum);
    const ReferenceStandard ref = CohortReference(cohort, q);
    std::set<std::string> readers;
    for (const auto& a : annotations_) {
      if (cohort_of_.count(a.report_id) && cohort_of_.at(a.report_id) == cohort) {
        readers.insert(a.reader_id);
      }
    }
    return {200,
            {{"cohort", cohort},
             {"quorum", q},
             {"readers", readers.size()},
             {"rows", ReferenceRows(ref)}}};
  });
}

void Service::Launch(const std::string& run_id, RunKind kind, std::string model,
                     std::function<void()> work) {
  {
    std::unique_lock lock(mu_);
    RunRecord record;
    record.kind = kind;
    record.model = model;
    runs_[run_id] = record;
    ordered_json event = {{"event", "run_started"}, {"run_id", run_id}, {"kind", ToString(kind)}};
    if (!model.empty()) event["model"] = model;
    Log(std::move(event));
  }
  std::lock_guard lock(workers_mu_);
  workers_.emplace_back([this, run_id, work = std::move(work)] {
    std::string error;
    std::string message;
    try {
      work();
    } catch (const Error& e) {
      error = ErrorCodeName(e.code());
      message = e.what();
    } catch (const std::exception& e) {
      error = "Internal";
      message = e.what();
    }
    std::unique_lock state(mu_);
    RunRecord& record = runs_[run_id];
    if (error.empty()) {
      record.status = RunStatus::kCompleted;
    } else {
      record.status = RunStatus::kFailed;
      record.error = error;
      record.message = message;
      Log({{"event", "run_failed"}, {"run_id", run_id}, {"error", error}, {"message", message}});
    }
  });
}

Response Service::PostValidateRun(const json& body) {
  return Guarded([&]() -> Response {
    const std::string cohort(ToString(ParseCohortTag(body.at("cohort").get<std::string>())));
    const VersionId version = body.value("prompt_version", VersionId{1});

    ValidationOptions options;
    options.labeling.backend = BackendFrom(body);
    options.labeling.scope = ParseReportScope(body.value("scope", "full_text"));
    if (body.contains("thresholds")) {
      options.thresholds.accuracy = body["thresholds"].value("accuracy", options.thresholds.accuracy);
      options.thresholds.kappa = body["thresholds"].value("kappa", options.thresholds.kappa);
    }
    options.max_failure_fraction = body.value("max_failure_fraction", options.max_failure_fraction);
    options.cohort_tag = cohort;

    Corpus cohort_corpus;
    ReferenceStandard reference;
    {
      std::shared_lock lock(mu_);
      cohort_corpus = CohortCorpus(cohort);
      reference = body.contains("reference")
                      ? ReferenceFromRows(body["reference"])
                      : CohortReference(cohort, body.value("quorum", options_.quorum));
    }
    auto prompt = registry_.Get(version);
    std::shared_ptr<Backend> backend = MakeBackend(options.labeling.backend);
    const std::string run_id =
        ValidationRunId(*prompt, backend->id(), cohort_corpus, reference, options);
    const std::string poll = "/runs/" + run_id;
    {
      std::shared_lock lock(mu_);
      auto it = runs_.find(run_id);
      if (it != runs_.end() && it->second.status != RunStatus::kFailed) {
        const bool done = it->second.status == RunStatus::kCompleted;
        return {done ? 200 : 202,
                {{"run_id", run_id}, {"status", done ? "completed" : "running"}, {"poll", poll}}};
      }
    }
    if (!registry_.TryClaimLineage(version)) {
      Fail(ErrorCode::kConflict, "a validation run already holds the lineage of version " +
                                     std::to_string(version));
    }

    ordered_json config = body;
    config["command"] = "validate";
    config["backend"] = cxrlabel::ToJson(options.labeling.backend);
    Launch(run_id, RunKind::kLabelerValidation, "",
           [this, prompt, backend, cohort_corpus = std::move(cohort_corpus),
            reference = std::move(reference), options, config, version] {
             struct Release {
               PromptRegistry& registry;
               VersionId id;
               ~Release() { registry.ReleaseLineage(id); }
             } release{registry_, version};
             EvaluationRun run = ValidateLabeler(*backend, *prompt, cohort_corpus, reference, options);
             run.created_at = UtcTimestamp();
             run.config = config;
             const auto triage =
                 TriageQueue(run, run.reference, cohort_corpus, KeywordsFor(*prompt));
             store_.Save(run, triage);
           });
    return {202, {{"run_id", run_id}, {"status", "running"}, {"poll", poll}}};
  });
}

Response Service::PostBenchmarkRun(const json& body) {
  return Guarded([&]() -> Response {
    const VersionId version = body.at("frozen_version").get<VersionId>();
    BenchmarkOptions options;
    options.labeling.backend = BackendFrom(body);
    options.labeling.scope = ParseReportScope(body.value("scope", "full_text"));
    options.model = body.at("model").get<std::string>();
    options.max_failure_fraction = body.value("max_failure_fraction", options.max_failure_fraction);

    Corpus outputs = Corpus::Ingest(RecordsFromJson(body.at("model_outputs")));
    Corpus references;
    if (body.contains("reference_cohort")) {
      const std::string cohort(
          ToString(ParseCohortTag(body["reference_cohort"].get<std::string>())));
      options.cohort_tag = cohort;
      std::shared_lock lock(mu_);
      references = CohortCorpus(cohort);
    } else {
      references = Corpus::Ingest(RecordsFromJson(body.at("reference_reports")));
      options.cohort_tag = body.value("cohort_tag", options.cohort_tag);
    }
    if (!registry_.IsFrozen(version)) {
      Fail(ErrorCode::kFrozenVersionViolation,
           "prompt version " + std::to_string(version) + " must be frozen before benchmarking");
    }
    if (outputs.SortedIds() != references.SortedIds()) {
      Fail(ErrorCode::kReportSetMismatch,
           "generated and reference corpora must hold the same report ids");
    }
    auto prompt = registry_.Get(version);
    std::shared_ptr<Backend> backend = MakeBackend(options.labeling.backend);
    const std::string run_id = BenchmarkRunId(*prompt, backend->id(), outputs, references, options);
    const std::string poll = "/runs/" + run_id;
    {
      std::shared_lock lock(mu_);
      auto it = runs_.find(run_id);
      if (it != runs_.end() && it->second.status != RunStatus::kFailed) {
        const bool done = it->second.status == RunStatus::kCompleted;
        return {done ? 200 : 202,
                {{"run_id", run_id}, {"status", done ? "completed" : "running"}, {"poll", poll}}};
      }
    }

    ordered_json config = {{"command", "benchmark"},
                           {"model", options.model},
                           {"frozen_version", version},
                           {"scope", ToString(options.labeling.scope)},
                           {"backend", cxrlabel::ToJson(options.labeling.backend)}};
    Launch(run_id, RunKind::kGenerationBenchmark, options.model,
           [this, backend, outputs = std::move(outputs), references = std::move(references),
            options, config, version] {
             EvaluationRun run =
                 BenchmarkGeneration(*backend, registry_, version, outputs, references, options);
             run.created_at = UtcTimestamp();
             run.config = config;
             store_.Save(run, {});
           });
    return {202, {{"run_id", run_id}, {"status", "running"}, {"poll", poll}}};
  });
}

Response Service::GetRun(const std::string& run_id) const {
  return Guarded([&]() -> Response {
    RunRecord record;
    {
      std::shared_lock lock(mu_);
      auto it = runs_.find(run_id);
      if (it == runs_.end()) {
        if (!store_.Contains(run_id)) Fail(ErrorCode::kNotFound, "run '" + run_id + "' not found");
        record.status = RunStatus::kCompleted;
      } else {
        record = it->second;
      }
    }
    switch (record.status) {
      case RunStatus::kRunning:
        return {200, {{"run_id", run_id}, {"status", "running"}}};
      case RunStatus::kFailed:
        return {200,
                {{"run_id", run_id},
                 {"status", "failed"},
                 {"error", record.error},
                 {"message", record.message}}};
      case RunStatus::kCompleted:
        break;
    }
    ordered_json doc = {{"status", "completed"}};
    doc.update(cxrlabel::ToJson(store_.Load(run_id)));
    return {200, doc};
  });
}

Response Service::GetRunTriage(const std::string& run_id) const {
  return Guarded([&]() -> Response {
    if (!store_.Contains(run_id)) Fail(ErrorCode::kNotFound, "run '" + run_id + "' not found");
    auto cases = ReadTriage(store_.RunDir(run_id));
    std::shared_lock lock(mu_);
    ordered_json out = ordered_json::array();
    for (auto& c : cases) {
      auto it = resolutions_.find(c.case_id);
      if (it != resolutions_.end()) c.resolution = it->second;
      out.push_back(cxrlabel::ToJson(c));
    }
    return {200, out};
  });
}

Response Service::PostTriageResolve(const std::string& case_id, const json& body) {
  return Guarded([&]() -> Response {
    const std::string run_id = RunIdOfCase(case_id);
    if (!store_.Contains(run_id)) Fail(ErrorCode::kNotFound, "triage case '" + case_id + "' not found");
    auto cases = ReadTriage(store_.RunDir(run_id));
    auto it = std::find_if(cases.begin(), cases.end(),
                           [&](const TriageCase& c) { return c.case_id == case_id; });
    if (it == cases.end()) Fail(ErrorCode::kNotFound, "triage case '" + case_id + "' not found");

    TriageResolution resolution{ParseRevisionKind(body.at("revision_kind").get<std::string>()),
                                body.value("note", ""),
                                body.at("resolved_in_version").get<VersionId>()};
    if (!registry_.Contains(resolution.resolved_in_version)) {
      Fail(ErrorCode::kNotFound,
           "prompt version " + std::to_string(resolution.resolved_in_version) + " not found");
    }
    std::unique_lock lock(mu_);
    if (resolutions_.count(case_id)) {
      Fail(ErrorCode::kConflict, "triage case '" + case_id + "' is already resolved");
    }
    resolutions_[case_id] = resolution;
    Log({{"event", "triage_resolved"},
         {"case_id", case_id},
         {"resolution",
          {{"revision_kind", ToString(resolution.kind)},
           {"note", resolution.note},
           {"resolved_in_version", resolution.resolved_in_version}}}});
    it->resolution = resolution;
    return {200, cxrlabel::ToJson(*it)};
  });
}

Response Service::GetPrompts() const {
  return Guarded([&]() -> Response {
    ordered_json versions = ordered_json::array();
    for (VersionId id : registry_.Versions()) {
      auto v = registry_.Get(id);
      versions.push_back({{"version_id", id},
                          {"parent_version", v->parent_version ? ordered_json(*v->parent_version)
                                                               : ordered_json(nullptr)},
                          {"change_note", v->change_note},
                          {"frozen", registry_.IsFrozen(id)}});
    }
    return {200, {{"versions", std::move(versions)}}};
  });
}

Response Service::GetPrompt(VersionId version) const {
  return Guarded([&]() -> Response {
    ordered_json doc = cxrlabel::ToJson(*registry_.Get(version));
    doc["frozen"] = registry_.IsFrozen(version);
    doc["lineage"] = registry_.Lineage(version);
    return {200, doc};
  });
}

Response Service::PostRefine(VersionId version, const json& body) {
  return Guarded([&]() -> Response {
    const auto revisions = RevisionsFromJson(body);
    const std::string note = body.is_object() ? body.value("note", "") : "";
    std::unique_lock lock(mu_);
    auto child = registry_.Refine(version, revisions, note);
    ordered_json logged = ordered_json::array();
    for (const auto& r : revisions) logged.push_back(cxrlabel::ToJson(r));
    Log({{"event", "prompt_refined"},
         {"parent", version},
         {"version_id", child->version_id},
         {"revisions", std::move(logged)},
         {"note", note}});
    return {201,
            {{"version_id", child->version_id},
             {"parent_version", version},
             {"change_note", child->change_note}}};
  });
}

Response Service::PostFreeze(VersionId version) {
  return Guarded([&]() -> Response {
    std::unique_lock lock(mu_);
    if (!registry_.IsFrozen(version)) {
      registry_.Freeze(version);
      Log({{"event", "prompt_frozen"}, {"version_id", version}});
    }
    return {200, {{"version_id", version}, {"frozen", true}}};
  });
}

Response Service::GetLeaderboard() const {
  return Guarded([&]() -> Response {
    std::vector<std::pair<std::string, std::string>> completed;  // (model, run_id)
    {
      std::shared_lock lock(mu_);
      for (const auto& [id, record] : runs_) {
        if (record.status == RunStatus::kCompleted && record.kind == RunKind::kGenerationBenchmark) {
          completed.emplace_back(record.model, id);
        }
      }
    }
    std::sort(completed.begin(), completed.end());
    ordered_json rows = ordered_json::array();
    std::vector<LeaderboardEntry> entries;
    for (const auto& [model, id] : completed) {
      EvaluationRun run = store_.Load(id);
      rows.push_back({{"model", model},
                      {"run_id", id},
                      {"micro", AveragesJson(run.metric_report.micro)},
                      {"macro", AveragesJson(run.metric_report.macro)},
                      {"ran_score", run.metric_report.macro.f1}});
      entries.push_back({model, std::move(run.metric_report)});
    }
    std::ostringstream table;
    for (const auto& row : LeaderboardRows(entries)) csv::WriteRow(table, row);
    return {200, {{"rows", std::move(rows)}, {"csv", table.str()}}};
  });
}

void Service::Register(httplib::Server& server) {
  if (options_.bearer_token) {
    const std::string expected = "Bearer " + *options_.bearer_token;
    server.set_pre_routing_handler([expected](const httplib::Request& req, httplib::Response& res) {
      if (req.get_header_value("Authorization") == expected) {
        return httplib::Server::HandlerResponse::Unhandled;
      }
      res.status = 401;
      res.set_content(ordered_json{{"error", "Unauthorized"},
                                   {"message", "missing or wrong bearer token"}}
                          .dump(),
                      "application/json");
      return httplib::Server::HandlerResponse::Handled;
    });
  }

  auto send = [](httplib::Response& res, const Response& r) {
    res.status = r.status;
    res.set_content(r.body.dump(), "application/json");
  };
  // Parses the request body; a malformed body becomes a 400 response.
  auto with_body = [send](auto handler) {
    return [send, handler](const httplib::Request& req, httplib::Response& res) {
      json body;
      try {
        body = req.body.empty() ? json::object() : json::parse(req.body);
      } catch (const json::exception& e) {
        send(res, ErrorResponse(ErrorCode::kInvalidArgument, std::string("bad JSON: ") + e.what()));
        return;
      }
      send(res, handler(req, body));
    };
  };
  auto version_of = [](const httplib::Request& req) {
    return static_cast<VersionId>(std::stoull(req.matches[1].str()));
  };

  server.Post("/cohorts", with_body([this](const httplib::Request&, const json& body) {
                return PostCohort(body);
              }));
  server.Get(R"(/reports/([^/]+))", [this, send](const httplib::Request& req, httplib::Response& res) {
    send(res, GetReport(req.matches[1].str()));
  });
  server.Post("/annotations", with_body([this](const httplib::Request&, const json& body) {
                return PostAnnotation(body);
              }));
  server.Get("/reference", [this, send](const httplib::Request& req, httplib::Response& res) {
    std::optional<std::size_t> quorum;
    if (req.has_param("quorum")) {
      try {
        quorum = std::stoul(req.get_param_value("quorum"));
      } catch (const std::exception&) {
        send(res, ErrorResponse(ErrorCode::kInvalidArgument, "quorum must be a number"));
        return;
      }
    }
    send(res, GetReference(req.get_param_value("cohort"), quorum));
  });
  server.Post("/runs/validate", with_body([this](const httplib::Request&, const json& body) {
                return PostValidateRun(body);
              }));
  server.Post("/runs/benchmark", with_body([this](const httplib::Request&, const json& body) {
                return PostBenchmarkRun(body);
              }));
  server.Get(R"(/runs/([^/]+))", [this, send](const httplib::Request& req, httplib::Response& res) {
    send(res, GetRun(req.matches[1].str()));
  });
  server.Get(R"(/runs/([^/]+)/triage)",
             [this, send](const httplib::Request& req, httplib::Response& res) {
               send(res, GetRunTriage(req.matches[1].str()));
             });
  server.Post(R"(/triage/([^/]+)/resolve)",
              with_body([this](const httplib::Request& req, const json& body) {
                return PostTriageResolve(req.matches[1].str(), body);
              }));
  server.Get("/prompts", [this, send](const httplib::Request&, httplib::Response& res) {
    send(res, GetPrompts());
  });
  server.Get(R"(/prompts/(\d+))",
             [this, send, version_of](const httplib::Request& req, httplib::Response& res) {
               send(res, GetPrompt(version_of(req)));
             });
  server.Post(R"(/prompts/(\d+)/refine)",
              with_body([this, version_of](const httplib::Request& req, const json& body) {
                return PostRefine(version_of(req), body);
              }));
  server.Post(R"(/prompts/(\d+)/freeze)",
              [this, send, version_of](const httplib::Request& req, httplib::Response& res) {
                send(res, PostFreeze(version_of(req)));
              });
  server.Get("/leaderboard", [this, send](const httplib::Request& req, httplib::Response& res) {
    Response r = GetLeaderboard();
    if (r.status == 200 && req.get_param_value("format") == "csv") {
      res.status = 200;
      res.set_content(r.body["csv"].get<std::string>(), "text/csv");
      return;
    }
    send(res, r);
  });
}

}  // namespace cxrlabel::service
