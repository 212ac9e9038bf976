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

#include "cxrlabel/cxrlabel.h"

#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "json.hpp"

#include "backend.h"
#include "corpus.h"
#include "csv.h"
#include "error.h"
#include "harness.h"
#include "label_matrix.h"
#include "labeler.h"
#include "metrics.h"
#include "prompt.h"
#include "reference.h"
#include "registry.h"
#include "run_store.h"
#include "stats.h"
#include "tables.h"
#include "taxonomy.h"

struct cxr_corpus {
  cxrlabel::Corpus corpus;
};

struct cxr_registry {
  std::unique_ptr<cxrlabel::PromptRegistry> registry;
};

struct cxr_backend {
  cxrlabel::BackendConfig config;
  std::unique_ptr<cxrlabel::Backend> backend;
};

namespace {

using cxrlabel::ErrorCode;
using cxrlabel::Fail;
using json = nlohmann::json;
using ordered_json = nlohmann::ordered_json;
namespace fs = std::filesystem;

thread_local std::string g_last_error;

char* Dup(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (out == nullptr) throw std::bad_alloc();
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

void Emit(char** out, const ordered_json& doc) {
  if (out != nullptr) *out = Dup(doc.dump());
}

template <typename T>
T* Required(T* p, const char* what) {
  if (p == nullptr) Fail(ErrorCode::kInvalidArgument, std::string(what) + " must not be NULL");
  return p;
}

std::string RequiredText(const char* s, const char* what) {
  return std::string(Required(s, what));
}

json ParseOptions(const char* text) {
  if (text == nullptr || *text == '\0') return json::object();
  json doc = json::parse(text);
  if (!doc.is_object()) Fail(ErrorCode::kInvalidArgument, "options must be a JSON object");
  return doc;
}

template <typename F>
cxr_status Guard(F&& body) {
  try {
    body();
    g_last_error.clear();
    return CXR_OK;
  } catch (const cxrlabel::Error& e) {
    g_last_error = std::string(cxrlabel::ErrorCodeName(e.code())) + ": " + e.what();
    return static_cast<cxr_status>(e.code());
  } catch (const json::exception& e) {
    g_last_error = std::string("InvalidArgument: ") + e.what();
    return CXR_INVALID_ARGUMENT;
  } catch (const fs::filesystem_error& e) {
    g_last_error = std::string("IoError: ") + e.what();
    return CXR_IO_ERROR;
  } catch (const std::exception& e) {
    g_last_error = std::string("Internal: ") + e.what();
    return CXR_INTERNAL;
  }
}

cxrlabel::ReportScope ScopeOf(const json& options) {
  return cxrlabel::ParseReportScope(options.value("scope", "full_text"));
}

cxrlabel::ValidationOptions ValidationOptionsOf(const json& options, const cxr_backend& backend) {
  cxrlabel::ValidationOptions v;
  v.labeling.backend = backend.config;
  v.labeling.scope = ScopeOf(options);
  if (options.contains("thresholds")) {
    v.thresholds.accuracy = options["thresholds"].value("accuracy", v.thresholds.accuracy);
    v.thresholds.kappa = options["thresholds"].value("kappa", v.thresholds.kappa);
  }
  v.max_failure_fraction = options.value("max_failure_fraction", v.max_failure_fraction);
  v.cohort_tag = options.value("cohort_tag", v.cohort_tag);
  return v;
}

ordered_json EchoedConfig(const json& options, const cxrlabel::BackendConfig& backend,
                          const ordered_json& fallback) {
  if (options.contains("config")) return ordered_json(options["config"]);
  ordered_json doc = fallback;
  doc["backend"] = cxrlabel::ToJson(backend);
  return doc;
}

ordered_json LabelingJson(const cxrlabel::LabelingResult& result) {
  ordered_json failures = ordered_json::array();
  for (const auto& f : result.failures) {
    failures.push_back({{"report_id", f.report_id},
                        {"error", cxrlabel::ErrorCodeName(f.code)},
                        {"message", f.message},
                        {"last_response", f.last_response}});
  }
  return {{"labeled", result.matrix.size()},
          {"failures", std::move(failures)},
          {"warnings", result.warnings},
          {"total_retries", result.total_retries}};
}

}  // namespace

extern "C" {

const char* cxr_version(void) { return "1.0.0"; }

const char* cxr_status_name(cxr_status status) {
  if (status == CXR_INTERNAL) return "Internal";
  if (status < CXR_OK || status > CXR_TOO_MANY_FAILURES) return "Unknown";
  return cxrlabel::ErrorCodeName(static_cast<ErrorCode>(status)).data();
}

const char* cxr_last_error(void) { return g_last_error.c_str(); }

void cxr_string_free(char* s) { std::free(s); }

cxr_status cxr_taxonomy_json(char** out_json) {
  return Guard([&] {
    const auto& taxonomy = cxrlabel::Taxonomy::Default();
    ordered_json labels = ordered_json::array();
    for (const auto& l : taxonomy.labels()) {
      labels.push_back({{"id", l.id},
                        {"canonical_name", l.canonical_name},
                        {"aliases", l.aliases},
                        {"chexbert_comparable", l.chexbert_comparable}});
    }
    Emit(Required(out_json, "out_json"),
         {{"taxonomy_version", taxonomy.version()}, {"labels", std::move(labels)}});
  });
}

cxr_status cxr_taxonomy_resolve(const char* name, size_t* out_id) {
  return Guard([&] {
    *Required(out_id, "out_id") =
        cxrlabel::Taxonomy::Default().Resolve(RequiredText(name, "name")).id;
  });
}

cxr_status cxr_corpus_ingest(const char* path, const char* options_json, cxr_corpus** out,
                             char** summary_json) {
  return Guard([&] {
    Required(out, "out");
    const json options = ParseOptions(options_json);
    cxrlabel::IngestOptions ingest;
    ingest.deidentify = options.value("deidentify", true);
    ingest.require_sections = options.value("require_sections", false);
    if (options.contains("headers")) {
      for (const auto& [lang, spec] : options["headers"].items()) {
        cxrlabel::SectionHeaders headers;
        headers.findings = spec.value("findings", headers.findings);
        headers.impression = spec.value("impression", headers.impression);
        ingest.headers[cxrlabel::ParseLanguage(lang)] = headers;
      }
    }
    cxrlabel::IngestSummary summary;
    auto handle = std::make_unique<cxr_corpus>();
    handle->corpus = cxrlabel::Corpus::Ingest(
        cxrlabel::Corpus::ReadRecords(RequiredText(path, "path")), ingest, &summary);
    Emit(summary_json, {{"records_read", summary.records_read},
                        {"reports_kept", summary.reports_kept},
                        {"dropped_without_sections", summary.dropped_without_sections},
                        {"phi_removals", summary.phi_removals}});
    *out = handle.release();
  });
}

cxr_status cxr_corpus_load(const char* path, cxr_corpus** out) {
  return Guard([&] {
    Required(out, "out");
    auto handle = std::make_unique<cxr_corpus>();
    handle->corpus = cxrlabel::Corpus::Load(RequiredText(path, "path"));
    *out = handle.release();
  });
}

cxr_status cxr_corpus_write(const cxr_corpus* corpus, const char* path) {
  return Guard([&] { Required(corpus, "corpus")->corpus.WriteJsonl(RequiredText(path, "path")); });
}

void cxr_corpus_free(cxr_corpus* corpus) { delete corpus; }

size_t cxr_corpus_size(const cxr_corpus* corpus) {
  return corpus == nullptr ? 0 : corpus->corpus.size();
}

cxr_status cxr_corpus_report_json(const cxr_corpus* corpus, const char* report_id,
                                  char** out_json) {
  return Guard([&] {
    const cxrlabel::Report* r =
        Required(corpus, "corpus")->corpus.Find(RequiredText(report_id, "report_id"));
    if (r == nullptr) Fail(ErrorCode::kNotFound, std::string("no report '") + report_id + "'");
    Emit(Required(out_json, "out_json"), cxrlabel::ToJson(*r));
  });
}

cxr_status cxr_corpus_stats(const cxr_corpus* corpus, const char* labels_csv, char** out_json) {
  return Guard([&] {
    std::optional<cxrlabel::LabelMatrix> labels;
    if (labels_csv != nullptr) labels = cxrlabel::LabelMatrix::ReadCsv(labels_csv);
    const auto stats = cxrlabel::ComputeStats(Required(corpus, "corpus")->corpus,
                                              labels ? &*labels : nullptr);
    ordered_json doc;
    doc["n_reports"] = stats.n_reports;
    doc["median_word_count"] = stats.median_word_count;
    doc["iqr_word_count"] = {stats.iqr_word_count.first, stats.iqr_word_count.second};
    if (stats.per_label_prevalence) {
      ordered_json prevalence = ordered_json::object();
      for (cxrlabel::LabelId l = 0; l < cxrlabel::kNumLabels; ++l) {
        prevalence[std::string(cxrlabel::LabelName(l))] = (*stats.per_label_prevalence)[l];
      }
      doc["per_label_prevalence"] = std::move(prevalence);
    }
    Emit(Required(out_json, "out_json"), doc);
  });
}

cxr_status cxr_corpus_split(const cxr_corpus* corpus, const size_t* sizes,
                            const char* const* tags, size_t n_cohorts, uint64_t seed,
                            const char* assignment_csv) {
  return Guard([&] {
    Required(corpus, "corpus");
    if (n_cohorts > 0) {
      Required(sizes, "sizes");
      Required(tags, "tags");
    }
    std::vector<std::size_t> size_list(sizes, sizes + n_cohorts);
    std::vector<cxrlabel::CohortTag> tag_list;
    for (size_t i = 0; i < n_cohorts; ++i) {
      tag_list.push_back(cxrlabel::ParseCohortTag(RequiredText(tags[i], "tag")));
    }
    auto cohorts = cxrlabel::SplitCohorts(corpus->corpus, size_list, seed);
    cxrlabel::WriteCohortAssignment(RequiredText(assignment_csv, "assignment_csv"), cohorts,
                                    tag_list);
  });
}

cxr_status cxr_corpus_assign(cxr_corpus* corpus, const char* assignment_csv) {
  return Guard([&] {
    Required(corpus, "corpus")
        ->corpus.AssignCohorts(
            cxrlabel::ReadCohortAssignment(RequiredText(assignment_csv, "assignment_csv")));
  });
}

cxr_status cxr_corpus_cohort(const cxr_corpus* corpus, const char* tag, cxr_corpus** out) {
  return Guard([&] {
    Required(out, "out");
    auto handle = std::make_unique<cxr_corpus>();
    handle->corpus = Required(corpus, "corpus")
                         ->corpus.Cohort(cxrlabel::ParseCohortTag(RequiredText(tag, "tag")));
    *out = handle.release();
  });
}

cxr_status cxr_registry_open(const char* log_path, cxr_registry** out) {
  return Guard([&] {
    Required(out, "out");
    auto handle = std::make_unique<cxr_registry>();
    handle->registry = cxrlabel::PromptRegistry::Open(RequiredText(log_path, "log_path"));
    *out = handle.release();
  });
}

void cxr_registry_free(cxr_registry* registry) { delete registry; }

cxr_status cxr_registry_prompt_json(const cxr_registry* registry, uint64_t version,
                                    char** out_json) {
  return Guard([&] {
    Emit(Required(out_json, "out_json"),
         cxrlabel::ToJson(*Required(registry, "registry")->registry->Get(version)));
  });
}

cxr_status cxr_registry_list_json(const cxr_registry* registry, char** out_json) {
  return Guard([&] {
    const auto& reg = *Required(registry, "registry")->registry;
    ordered_json versions = ordered_json::array();
    for (auto id : reg.Versions()) {
      auto v = reg.Get(id);
      versions.push_back({{"version_id", id},
                          {"parent_version", v->parent_version ? ordered_json(*v->parent_version)
                                                               : ordered_json(nullptr)},
                          {"change_note", v->change_note},
                          {"frozen", reg.IsFrozen(id)}});
    }
    Emit(Required(out_json, "out_json"), {{"versions", std::move(versions)}});
  });
}

cxr_status cxr_registry_lineage_json(const cxr_registry* registry, uint64_t version,
                                     char** out_json) {
  return Guard([&] {
    Emit(Required(out_json, "out_json"),
         ordered_json(Required(registry, "registry")->registry->Lineage(version)));
  });
}

cxr_status cxr_registry_refine(cxr_registry* registry, uint64_t parent, const char* revisions_json,
                               const char* note, uint64_t* out_version) {
  return Guard([&] {
    const auto revisions =
        cxrlabel::RevisionsFromJson(json::parse(RequiredText(revisions_json, "revisions_json")));
    auto child = Required(registry, "registry")
                     ->registry->Refine(parent, revisions, note == nullptr ? "" : note);
    if (out_version != nullptr) *out_version = child->version_id;
  });
}

cxr_status cxr_registry_freeze(cxr_registry* registry, uint64_t version) {
  return Guard([&] { Required(registry, "registry")->registry->Freeze(version); });
}

cxr_status cxr_registry_is_frozen(const cxr_registry* registry, uint64_t version,
                                  int* out_frozen) {
  return Guard([&] {
    *Required(out_frozen, "out_frozen") =
        Required(registry, "registry")->registry->IsFrozen(version) ? 1 : 0;
  });
}

cxr_status cxr_backend_create(const char* config_json, cxr_backend** out) {
  return Guard([&] {
    Required(out, "out");
    auto handle = std::make_unique<cxr_backend>();
    handle->config = cxrlabel::BackendConfigFromJson(ParseOptions(config_json));
    handle->backend = cxrlabel::MakeBackend(handle->config);
    *out = handle.release();
  });
}

void cxr_backend_free(cxr_backend* backend) { delete backend; }

cxr_status cxr_backend_config_json(const cxr_backend* backend, char** out_json) {
  return Guard([&] {
    Emit(Required(out_json, "out_json"), cxrlabel::ToJson(Required(backend, "backend")->config));
  });
}

cxr_status cxr_label_corpus(cxr_backend* backend, const cxr_registry* registry, uint64_t version,
                            const cxr_corpus* corpus, const char* options_json,
                            const char* labels_csv, char** summary_json) {
  return Guard([&] {
    Required(backend, "backend");
    const json options = ParseOptions(options_json);
    cxrlabel::LabelOptions labeling;
    labeling.backend = backend->config;
    labeling.scope = ScopeOf(options);
    auto prompt = Required(registry, "registry")->registry->Get(version);
    auto result = cxrlabel::LabelCorpus(*backend->backend, *prompt,
                                        Required(corpus, "corpus")->corpus, labeling);
    result.matrix.WriteCsv(RequiredText(labels_csv, "labels_csv"));
    Emit(summary_json, LabelingJson(result));
  });
}

cxr_status cxr_validate(cxr_backend* backend, const cxr_registry* registry, uint64_t version,
                        const cxr_corpus* cohort, const char* reference_csv,
                        const char* options_json, const char* out_dir, char** result_json) {
  return Guard([&] {
    Required(backend, "backend");
    Required(cohort, "cohort");
    const json options = ParseOptions(options_json);
    const auto validation = ValidationOptionsOf(options, *backend);
    const auto reference =
        cxrlabel::ReferenceStandard::ReadCsv(RequiredText(reference_csv, "reference_csv"));
    auto prompt = Required(registry, "registry")->registry->Get(version);

    cxrlabel::EvaluationRun run =
        cxrlabel::ValidateLabeler(*backend->backend, *prompt, cohort->corpus, reference, validation);
    run.created_at = cxrlabel::UtcTimestamp();
    run.config = EchoedConfig(options, backend->config,
                              {{"command", "validate"}, {"prompt_version", version}});
    const auto triage = cxrlabel::TriageQueue(run, run.reference, cohort->corpus,
                                              cxrlabel::KeywordsFor(*prompt));
    cxrlabel::RunStore store(RequiredText(out_dir, "out_dir"));
    const fs::path dir = store.Save(run, triage);

    ordered_json doc = cxrlabel::ToJson(run);
    doc["run_dir"] = dir.string();
    doc["triage_cases"] = triage.size();
    Emit(result_json, doc);
  });
}

cxr_status cxr_triage(const char* run_dir, char** out_json) {
  return Guard([&] {
    ordered_json cases = ordered_json::array();
    for (const auto& c : cxrlabel::ReadTriage(RequiredText(run_dir, "run_dir"))) {
      cases.push_back(cxrlabel::ToJson(c));
    }
    Emit(Required(out_json, "out_json"), cases);
  });
}

cxr_status cxr_optimize(cxr_backend* backend, cxr_registry* registry, uint64_t root,
                        const cxr_corpus* cohort, const char* reference_csv,
                        const char* options_json, size_t max_rounds, const char* out_dir,
                        cxr_revision_provider provider, void* user_data, char** result_json) {
  bool exceeded = false;
  cxr_status status = Guard([&] {
    Required(backend, "backend");
    Required(cohort, "cohort");
    Required(registry, "registry");
    Required(provider, "provider");
    const json options = ParseOptions(options_json);
    const auto reference =
        cxrlabel::ReferenceStandard::ReadCsv(RequiredText(reference_csv, "reference_csv"));
    cxrlabel::RunStore store(RequiredText(out_dir, "out_dir"));

    cxrlabel::LoopOptions loop;
    loop.validation = ValidationOptionsOf(options, *backend);
    loop.max_rounds = max_rounds;
    loop.on_run = [&](const cxrlabel::EvaluationRun& run,
                      const std::vector<cxrlabel::TriageCase>& triage) {
      cxrlabel::EvaluationRun stored = run;
      stored.created_at = cxrlabel::UtcTimestamp();
      stored.config = EchoedConfig(options, backend->config,
                                   {{"command", "optimize"}, {"prompt_version", run.prompt_version}});
      store.Save(stored, triage);
    };
    auto ask = [&](const cxrlabel::EvaluationRun& run,
                   const std::vector<cxrlabel::TriageCase>& triage) {
      ordered_json cases = ordered_json::array();
      for (const auto& c : triage) cases.push_back(cxrlabel::ToJson(c));
      char* reply = provider(cxrlabel::ToJson(run).dump().c_str(), cases.dump().c_str(), user_data);
      if (reply == nullptr) return std::vector<cxrlabel::Revision>{};
      std::string text(reply);
      std::free(reply);
      if (text.empty()) return std::vector<cxrlabel::Revision>{};
      return cxrlabel::RevisionsFromJson(json::parse(text));
    };

    auto result = cxrlabel::OptimizationLoop(*backend->backend, *registry->registry, root,
                                             cohort->corpus, reference, loop, ask);
    exceeded = result.max_rounds_exceeded;
    ordered_json runs = ordered_json::array();
    for (const auto& r : result.runs) runs.push_back(r.run_id);
    Emit(result_json, {{"passed", result.passed},
                       {"max_rounds_exceeded", result.max_rounds_exceeded},
                       {"rounds", result.rounds},
                       {"lineage", result.lineage},
                       {"runs", std::move(runs)},
                       {"final_run", cxrlabel::ToJson(result.final_run)}});
  });
  if (status == CXR_OK && exceeded) {
    g_last_error = "MaxRoundsExceeded: gate not passed within the round limit";
    return CXR_MAX_ROUNDS_EXCEEDED;
  }
  return status;
}

cxr_status cxr_benchmark(cxr_backend* backend, const cxr_registry* registry,
                         uint64_t frozen_version, const cxr_corpus* model_outputs,
                         const cxr_corpus* reference_reports, const char* options_json,
                         const char* out_dir, char** result_json) {
  return Guard([&] {
    Required(backend, "backend");
    const json options = ParseOptions(options_json);
    cxrlabel::BenchmarkOptions bench;
    bench.labeling.backend = backend->config;
    bench.labeling.scope = ScopeOf(options);
    bench.model = options.value("model", "");
    bench.cohort_tag = options.value("cohort_tag", bench.cohort_tag);
    bench.max_failure_fraction = options.value("max_failure_fraction", bench.max_failure_fraction);

    cxrlabel::EvaluationRun run = cxrlabel::BenchmarkGeneration(
        *backend->backend, *Required(registry, "registry")->registry, frozen_version,
        Required(model_outputs, "model_outputs")->corpus,
        Required(reference_reports, "reference_reports")->corpus, bench);
    run.created_at = cxrlabel::UtcTimestamp();
    run.config = EchoedConfig(options, backend->config,
                              {{"command", "benchmark"}, {"frozen_version", frozen_version}});
    cxrlabel::RunStore store(RequiredText(out_dir, "out_dir"));
    const fs::path dir = store.Save(run, {});

    ordered_json doc = cxrlabel::ToJson(run);
    doc["run_dir"] = dir.string();
    doc["ran_score"] = run.metric_report.macro.f1;
    Emit(result_json, doc);
  });
}

cxr_status cxr_leaderboard(const char* entries_json, const char* out_dir) {
  return Guard([&] {
    const json entries = json::parse(RequiredText(entries_json, "entries_json"));
    if (!entries.is_array()) Fail(ErrorCode::kInvalidArgument, "entries must be an array");
    std::vector<cxrlabel::LeaderboardEntry> board;
    for (const auto& e : entries) {
      auto run = cxrlabel::ReadRunDirectory(e.at("run_dir").get<std::string>());
      if (run.kind != cxrlabel::RunKind::kGenerationBenchmark) {
        Fail(ErrorCode::kInvalidArgument, "leaderboard entries must be benchmark runs");
      }
      board.push_back({e.value("model", run.model), std::move(run.metric_report)});
    }
    cxrlabel::WriteLeaderboard(RequiredText(out_dir, "out_dir"), board);
  });
}

cxr_status cxr_compare_runs(const char* run_dir_a, const char* run_dir_b,
                            const char* reference_csv, char** out_json) {
  return Guard([&] {
    auto a = cxrlabel::ReadRunDirectory(RequiredText(run_dir_a, "run_dir_a"));
    auto b = cxrlabel::ReadRunDirectory(RequiredText(run_dir_b, "run_dir_b"));
    const auto reference = reference_csv != nullptr
                               ? cxrlabel::ReferenceStandard::ReadCsv(reference_csv)
                               : a.reference;
    Emit(Required(out_json, "out_json"), cxrlabel::ToJson(cxrlabel::CompareRuns(a, b, reference)));
  });
}

cxr_status cxr_aggregate(const char* annotations_csv, size_t quorum, const char* reference_csv,
                         char** summary_json) {
  return Guard([&] {
    const auto annotations =
        cxrlabel::ReadAnnotationsCsv(RequiredText(annotations_csv, "annotations_csv"));
    const auto reference = cxrlabel::BuildReference(annotations, quorum);
    reference.WriteCsv(RequiredText(reference_csv, "reference_csv"));

    std::set<std::string> readers;
    for (const auto& a : annotations) readers.insert(a.reader_id);
    ordered_json unresolved = ordered_json::object();
    std::size_t total = 0;
    for (cxrlabel::LabelId l = 0; l < cxrlabel::kNumLabels; ++l) {
      const std::size_t count = reference.size() - reference.ResolvedCount(l);
      unresolved[std::string(cxrlabel::LabelName(l))] = count;
      total += count;
    }
    Emit(summary_json, {{"reports", reference.size()},
                        {"readers", readers.size()},
                        {"quorum", quorum},
                        {"unresolved_cells", total},
                        {"unresolved_per_label", std::move(unresolved)}});
  });
}

cxr_status cxr_interrater(const char* annotations_csv, char** out_json) {
  return Guard([&] {
    const auto annotations =
        cxrlabel::ReadAnnotationsCsv(RequiredText(annotations_csv, "annotations_csv"));
    ordered_json labels = ordered_json::array();
    for (cxrlabel::LabelId l = 0; l < cxrlabel::kNumLabels; ++l) {
      const auto summary = cxrlabel::SummarizeInterrater(annotations, l);
      ordered_json pairs = ordered_json::array();
      for (const auto& p : summary.pairs) {
        pairs.push_back({{"reader_a", p.reader_a},
                         {"reader_b", p.reader_b},
                         {"kappa", p.result ? ordered_json(p.result->kappa) : ordered_json(nullptr)},
                         {"n", p.result ? p.result->n : 0}});
      }
      labels.push_back({{"label", cxrlabel::LabelName(l)},
                        {"mean_kappa", summary.mean_kappa},
                        {"computed_pairs", summary.computed_pairs},
                        {"pairs", std::move(pairs)},
                        {"warnings", summary.warnings}});
    }
    Emit(Required(out_json, "out_json"), {{"labels", std::move(labels)}});
  });
}

cxr_status cxr_score(const char* pred_csv, const char* reference_csv, double alpha,
                     const char* out_prefix, char** out_json) {
  return Guard([&] {
    const auto pred = cxrlabel::LabelMatrix::ReadCsv(RequiredText(pred_csv, "pred_csv"));
    const auto ref = cxrlabel::ReferenceStandard::ReadCsv(RequiredText(reference_csv, "reference_csv"));
    const auto report = cxrlabel::BuildMetricReport(pred, ref, alpha);
    if (out_prefix != nullptr) {
      cxrlabel::csv::WriteFile(std::string(out_prefix) + ".csv", cxrlabel::MetricsCsvRows(report));
      cxrlabel::WriteText(std::string(out_prefix) + ".md", cxrlabel::MetricsMarkdown(report));
    }
    Emit(out_json, cxrlabel::ToJson(report));
  });
}

cxr_status cxr_ran_score(const char* generated_csv, const char* reference_csv, char** out_json) {
  return Guard([&] {
    const auto gen = cxrlabel::LabelMatrix::ReadCsv(RequiredText(generated_csv, "generated_csv"));
    const auto ref = cxrlabel::LabelMatrix::ReadCsv(RequiredText(reference_csv, "reference_csv"));
    const auto score = cxrlabel::ComputeRanScore(gen, ref);
    Emit(Required(out_json, "out_json"),
         {{"ran_score", score.score}, {"metric_report", cxrlabel::ToJson(score.report)}});
  });
}

cxr_status cxr_accuracy_table(const char* columns_json, const char* out_prefix) {
  return Guard([&] {
    const json columns = json::parse(RequiredText(columns_json, "columns_json"));
    if (!columns.is_array()) Fail(ErrorCode::kInvalidArgument, "columns must be an array");
    std::vector<cxrlabel::EvaluationRun> runs;
    std::vector<std::string> names;
    for (const auto& c : columns) {
      runs.push_back(cxrlabel::ReadRunDirectory(c.at("run_dir").get<std::string>()));
      names.push_back(c.value("name", runs.back().run_id));
    }
    std::vector<cxrlabel::NamedReport> named;
    for (std::size_t i = 0; i < runs.size(); ++i) named.push_back({names[i], &runs[i].metric_report});
    const std::string prefix = RequiredText(out_prefix, "out_prefix");
    cxrlabel::csv::WriteFile(prefix + ".csv", cxrlabel::AccuracyTableRows(named));
    cxrlabel::WriteText(prefix + ".md", cxrlabel::AccuracyTableMarkdown(named));
  });
}

cxr_status cxr_comparison_table(const char* pre_run_dir, const char* post_run_dir,
                                const char* chexbert_csv, const char* out_prefix) {
  return Guard([&] {
    const auto pre = cxrlabel::ReadRunDirectory(RequiredText(pre_run_dir, "pre_run_dir"));
    const auto post = cxrlabel::ReadRunDirectory(RequiredText(post_run_dir, "post_run_dir"));
    std::map<cxrlabel::LabelId, double> chexbert;
    if (chexbert_csv != nullptr) chexbert = cxrlabel::ReadChexbertCsv(chexbert_csv);
    const auto rows = cxrlabel::BuildComparison(pre.metric_report, post.metric_report, chexbert);
    const std::string prefix = RequiredText(out_prefix, "out_prefix");
    cxrlabel::csv::WriteFile(prefix + ".csv", cxrlabel::ComparisonTableRows(rows));
    cxrlabel::WriteText(prefix + ".md", cxrlabel::ComparisonTableMarkdown(rows));
  });
}

cxr_status cxr_clopper_pearson(uint64_t x, uint64_t n, double alpha, double* lower,
                               double* upper) {
  return Guard([&] {
    const auto interval = cxrlabel::ClopperPearson(x, n, alpha);
    *Required(lower, "lower") = interval.lower;
    *Required(upper, "upper") = interval.upper;
  });
}

cxr_status cxr_mcnemar(uint64_t b, uint64_t c, double* p_value) {
  return Guard([&] { *Required(p_value, "p_value") = cxrlabel::McNemarExact(b, c).p_value; });
}

cxr_status cxr_cohen_kappa(const int* a, const int* b, size_t n, double* kappa) {
  return Guard([&] {
    if (n > 0) {
      Required(a, "a");
      Required(b, "b");
    }
    *Required(kappa, "kappa") =
        cxrlabel::CohenKappa(std::span<const int>(a, n), std::span<const int>(b, n)).kappa;
  });
}

cxr_status cxr_aggregate_votes(const int* votes, size_t n_votes, size_t quorum, int* out_state) {
  return Guard([&] {
    if (n_votes > 0) Required(votes, "votes");
    *Required(out_state, "out_state") = static_cast<int>(
        cxrlabel::Aggregate(std::span<const int>(votes, n_votes), quorum));
  });
}

}  // extern "C"
