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

/*
 * C interface to the cxrlabel library.
 *
 * Conventions:
 *   - Every function returns a cxr_status. On failure a message is
 *     available from cxr_last_error() on the calling thread until the next
 *     call on that thread.
 *   - Strings returned through `char**` are owned by the caller and must be
 *     released with cxr_string_free().
 *   - Structured results and options are exchanged as UTF-8 JSON text.
 *     NULL options select the defaults.
 *   - Handles are opaque. A handle may be used from several threads except
 *     while it is being freed.
 */

#ifndef CXRLABEL_CXRLABEL_H_
#define CXRLABEL_CXRLABEL_H_

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#define CXR_API __declspec(dllexport)
#else
#define CXR_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum cxr_status {
  CXR_OK = 0,
  CXR_INVALID_ARGUMENT = 1,
  CXR_IO_ERROR = 2,
  CXR_UNKNOWN_LABEL = 3,
  CXR_DUPLICATE_REPORT_ID = 4,
  CXR_EMPTY_TEXT = 5,
  CXR_INSUFFICIENT_REPORTS = 6,
  CXR_EMPTY_CORPUS = 7,
  CXR_MALFORMED_RESPONSE = 8,
  CXR_MISSING_LABEL = 9,
  CXR_ILLEGAL_VALUE = 10,
  CXR_BACKEND_UNAVAILABLE = 11,
  CXR_EXHAUSTED_RETRIES = 12,
  CXR_BAD_VOTE = 13,
  CXR_MISSING_READER = 14,
  CXR_DUPLICATE_READER = 15,
  CXR_NO_OVERLAP = 16,
  CXR_DOMAIN_ERROR = 17,
  CXR_MISSING_PREDICTION = 18,
  CXR_REPORT_SET_MISMATCH = 19,
  CXR_FROZEN_VERSION_VIOLATION = 20,
  CXR_COHORT_MISMATCH = 21,
  CXR_EMPTY_REVISION = 22,
  CXR_MAX_ROUNDS_EXCEEDED = 23,
  CXR_NOT_FOUND = 24,
  CXR_CONFLICT = 25,
  CXR_TOO_MANY_FAILURES = 26,
  CXR_INTERNAL = 100
} cxr_status;

typedef struct cxr_corpus cxr_corpus;
typedef struct cxr_registry cxr_registry;
typedef struct cxr_backend cxr_backend;

/* Library version, e.g. "1.0.0". Static storage. */
CXR_API const char* cxr_version(void);
/* Name of a status, e.g. "MissingLabel". Static storage. */
CXR_API const char* cxr_status_name(cxr_status status);
/* Message of the last failure on this thread, "" if none. */
CXR_API const char* cxr_last_error(void);
CXR_API void cxr_string_free(char* s);

/* ------------------------------------------------------------------ */
/* Taxonomy                                                             */

/* {"taxonomy_version", "labels": [{id, canonical_name, aliases, ...}]} */
CXR_API cxr_status cxr_taxonomy_json(char** out_json);
/* Canonical label id for a name or alias. */
CXR_API cxr_status cxr_taxonomy_resolve(const char* name, size_t* out_id);

/* ------------------------------------------------------------------ */
/* Corpus                                                               */

/*
 * Reads JSONL or CSV source records, extracts sections and de-identifies.
 * options_json: {"deidentify": true, "require_sections": false,
 *                "headers": {"CN": {"findings": [...], "impression": [...]}}}
 * summary_json receives the ingest counts (may be NULL).
 */
CXR_API cxr_status cxr_corpus_ingest(const char* path, const char* options_json,
                                     cxr_corpus** out, char** summary_json);
/* Loads a corpus written by cxr_corpus_write without re-processing it. */
CXR_API cxr_status cxr_corpus_load(const char* path, cxr_corpus** out);
CXR_API cxr_status cxr_corpus_write(const cxr_corpus* corpus, const char* path);
CXR_API void cxr_corpus_free(cxr_corpus* corpus);
CXR_API size_t cxr_corpus_size(const cxr_corpus* corpus);
/* Report as JSON, CXR_NOT_FOUND for an unknown id. */
CXR_API cxr_status cxr_corpus_report_json(const cxr_corpus* corpus, const char* report_id,
                                          char** out_json);
/* Word-count statistics; label prevalence too when labels_csv is given. */
CXR_API cxr_status cxr_corpus_stats(const cxr_corpus* corpus, const char* labels_csv,
                                    char** out_json);
/*
 * Seeded disjoint split. tags[i] names cohort i ("taxonomy", "development",
 * "test", "external"). The assignment is written to assignment_csv.
 */
CXR_API cxr_status cxr_corpus_split(const cxr_corpus* corpus, const size_t* sizes,
                                    const char* const* tags, size_t n_cohorts, uint64_t seed,
                                    const char* assignment_csv);
/* Applies a split written by cxr_corpus_split. */
CXR_API cxr_status cxr_corpus_assign(cxr_corpus* corpus, const char* assignment_csv);
/* New corpus holding the reports tagged `tag`. */
CXR_API cxr_status cxr_corpus_cohort(const cxr_corpus* corpus, const char* tag,
                                     cxr_corpus** out);

/* ------------------------------------------------------------------ */
/* Prompt registry                                                      */

/* Replays (or creates, seeded with the root prompt) an append-only log. */
CXR_API cxr_status cxr_registry_open(const char* log_path, cxr_registry** out);
CXR_API void cxr_registry_free(cxr_registry* registry);
CXR_API cxr_status cxr_registry_prompt_json(const cxr_registry* registry, uint64_t version,
                                            char** out_json);
/* {"versions": [{version_id, parent_version, change_note, frozen}]} */
CXR_API cxr_status cxr_registry_list_json(const cxr_registry* registry, char** out_json);
/* Ids from the root to `version`. */
CXR_API cxr_status cxr_registry_lineage_json(const cxr_registry* registry, uint64_t version,
                                             char** out_json);
/*
 * revisions_json: [{"label", "kind": "SynonymAdded" | "ClarificationAdded" |
 *                   "ExemplarAdded", "payload", "polarity", "target"}]
 */
CXR_API cxr_status cxr_registry_refine(cxr_registry* registry, uint64_t parent,
                                       const char* revisions_json, const char* note,
                                       uint64_t* out_version);
CXR_API cxr_status cxr_registry_freeze(cxr_registry* registry, uint64_t version);
CXR_API cxr_status cxr_registry_is_frozen(const cxr_registry* registry, uint64_t version,
                                          int* out_frozen);

/* ------------------------------------------------------------------ */
/* Backends                                                             */

/*
 * config_json: {"kind": "mock" | "http", "endpoint", "model", "max_retries",
 *               "backoff_ms": [...], "max_parallel", "timeout_ms",
 *               "temperature", "max_tokens", "api_key_env"}
 * The API key is read from the named environment variable at request time.
 */
CXR_API cxr_status cxr_backend_create(const char* config_json, cxr_backend** out);
CXR_API void cxr_backend_free(cxr_backend* backend);
/* Effective configuration (never contains a credential). */
CXR_API cxr_status cxr_backend_config_json(const cxr_backend* backend, char** out_json);

/* ------------------------------------------------------------------ */
/* Labeling and evaluation                                              */

/*
 * Labels every report; predictions go to labels_csv.
 * options_json: {"scope": "full_text" | "sections"}
 * summary_json: {"labeled", "failures": [...], "warnings", "total_retries"}
 */
CXR_API cxr_status cxr_label_corpus(cxr_backend* backend, const cxr_registry* registry,
                                    uint64_t version, const cxr_corpus* corpus,
                                    const char* options_json, const char* labels_csv,
                                    char** summary_json);

/*
 * Labeler validation against a reference CSV (1/0/U cells). The run is
 * stored under out_dir/runs/<run_id>/ together with its triage queue.
 * options_json: {"scope", "thresholds": {"accuracy", "kappa"},
 *                "max_failure_fraction", "cohort_tag", "config": {...}}
 * "config" is echoed verbatim into config.json.
 * result_json: run summary plus "run_dir" and "triage_cases".
 */
CXR_API cxr_status cxr_validate(cxr_backend* backend, const cxr_registry* registry,
                                uint64_t version, const cxr_corpus* cohort,
                                const char* reference_csv, const char* options_json,
                                const char* out_dir, char** result_json);

/* Triage queue stored with a validation run; JSON array of cases. */
CXR_API cxr_status cxr_triage(const char* run_dir, char** out_json);

/*
 * Human-gated optimization loop. `provider` receives the failing run and
 * its triage queue as JSON and returns revisions as a JSON array allocated
 * with malloc (or NULL / "[]" for none); the library frees it. Every
 * validation is stored under out_dir. Returns CXR_MAX_ROUNDS_EXCEEDED with
 * result_json still filled when the gate never passed.
 */
typedef char* (*cxr_revision_provider)(const char* run_json, const char* triage_json,
                                       void* user_data);
CXR_API cxr_status cxr_optimize(cxr_backend* backend, cxr_registry* registry, uint64_t root,
                                const cxr_corpus* cohort, const char* reference_csv,
                                const char* options_json, size_t max_rounds, const char* out_dir,
                                cxr_revision_provider provider, void* user_data,
                                char** result_json);

/*
 * Scores one model's generated reports against the original reports with
 * a frozen prompt version. options_json: {"scope", "model", "cohort_tag",
 * "max_failure_fraction", "config"}. The run is stored under out_dir.
 */
CXR_API cxr_status cxr_benchmark(cxr_backend* backend, const cxr_registry* registry,
                                 uint64_t frozen_version, const cxr_corpus* model_outputs,
                                 const cxr_corpus* reference_reports, const char* options_json,
                                 const char* out_dir, char** result_json);

/* leaderboard.csv/.md in out_dir from stored benchmark runs.
 * entries_json: [{"model", "run_dir"}] */
CXR_API cxr_status cxr_leaderboard(const char* entries_json, const char* out_dir);

/* Per-label ΔF1 (b - a) and exact McNemar p between two stored runs. */
CXR_API cxr_status cxr_compare_runs(const char* run_dir_a, const char* run_dir_b,
                                    const char* reference_csv, char** out_json);

/* ------------------------------------------------------------------ */
/* Reference standard                                                   */

/* Majority aggregation of reader annotations into a 1/0/U reference CSV.
 * summary_json: {"reports", "readers", "unresolved_cells", ...} */
CXR_API cxr_status cxr_aggregate(const char* annotations_csv, size_t quorum,
                                 const char* reference_csv, char** summary_json);
/* Pairwise Cohen's kappa per label with the mean over reader pairs. */
CXR_API cxr_status cxr_interrater(const char* annotations_csv, char** out_json);

/* ------------------------------------------------------------------ */
/* Metrics and tables                                                   */

/* Metric report of predictions against a reference CSV. When out_prefix
 * is non-NULL, <prefix>.csv and <prefix>.md are written. */
CXR_API cxr_status cxr_score(const char* pred_csv, const char* reference_csv, double alpha,
                             const char* out_prefix, char** out_json);
/* Ran Score of labels extracted from generated reports. */
CXR_API cxr_status cxr_ran_score(const char* generated_csv, const char* reference_csv,
                                 char** out_json);
/* Per-label accuracy with intervals, one column per stored run.
 * columns_json: [{"name", "run_dir"}]. Writes <prefix>.csv and .md. */
CXR_API cxr_status cxr_accuracy_table(const char* columns_json, const char* out_prefix);
/* Pre/post F1 comparison with optional CheXbert F1 (label,f1 CSV). */
CXR_API cxr_status cxr_comparison_table(const char* pre_run_dir, const char* post_run_dir,
                                        const char* chexbert_csv, const char* out_prefix);

/* ------------------------------------------------------------------ */
/* Statistics                                                           */

CXR_API cxr_status cxr_clopper_pearson(uint64_t x, uint64_t n, double alpha, double* lower,
                                       double* upper);
/* Two-sided exact McNemar p over b + c discordant pairs. */
CXR_API cxr_status cxr_mcnemar(uint64_t b, uint64_t c, double* p_value);
/* Ratings in {1, 0, -1}; pairs holding -1 are dropped. */
CXR_API cxr_status cxr_cohen_kappa(const int* a, const int* b, size_t n, double* kappa);
/* Votes in {1, 0, -1}. out_state: 0 negative, 1 positive, 2 unresolved. */
CXR_API cxr_status cxr_aggregate_votes(const int* votes, size_t n_votes, size_t quorum,
                                       int* out_state);

#ifdef __cplusplus
}  /* extern "C" */
#endif

#endif  /* CXRLABEL_CXRLABEL_H_ */
