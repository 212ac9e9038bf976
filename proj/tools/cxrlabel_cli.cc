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

// Command-line front end. Talks to the library only through the C API.

#include <algorithm>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "cxrlabel/cxrlabel.h"

namespace {

namespace fs = std::filesystem;
using json = nlohmann::json;
using ordered_json = nlohmann::ordered_json;

enum ExitCode {
  kExitOk = 0,
  kExitInternal = 1,
  kExitInput = 2,
  kExitBackend = 3,
  kExitGate = 4,
};

// Thrown to unwind with a status from the library.
struct StatusError {
  cxr_status status;
  std::string message;
};

// Thrown for problems detected by the CLI itself.
struct UsageError {
  std::string message;
};

int ExitCodeFor(cxr_status status) {
  switch (status) {
    case CXR_OK:
      return kExitOk;
    case CXR_BACKEND_UNAVAILABLE:
    case CXR_EXHAUSTED_RETRIES:
    case CXR_MALFORMED_RESPONSE:
    case CXR_TOO_MANY_FAILURES:
      return kExitBackend;
    case CXR_INTERNAL:
      return kExitInternal;
    default:
      return kExitInput;
  }
}

void Check(cxr_status status) {
  if (status != CXR_OK) throw StatusError{status, cxr_last_error()};
}

// Owns a string allocated by the library.
class LibString {
 public:
  LibString() = default;
  ~LibString() { cxr_string_free(ptr_); }
  LibString(const LibString&) = delete;
  LibString& operator=(const LibString&) = delete;

  char** out() { return &ptr_; }
  std::string str() const { return ptr_ == nullptr ? std::string() : std::string(ptr_); }
  json Json() const { return json::parse(str()); }

 private:
  char* ptr_ = nullptr;
};

struct CorpusDeleter {
  void operator()(cxr_corpus* c) const { cxr_corpus_free(c); }
};
struct RegistryDeleter {
  void operator()(cxr_registry* r) const { cxr_registry_free(r); }
};
struct BackendDeleter {
  void operator()(cxr_backend* b) const { cxr_backend_free(b); }
};
using CorpusPtr = std::unique_ptr<cxr_corpus, CorpusDeleter>;
using RegistryPtr = std::unique_ptr<cxr_registry, RegistryDeleter>;
using BackendPtr = std::unique_ptr<cxr_backend, BackendDeleter>;

CorpusPtr LoadCorpus(const std::string& path) {
  cxr_corpus* c = nullptr;
  Check(cxr_corpus_load(path.c_str(), &c));
  return CorpusPtr(c);
}

RegistryPtr OpenRegistry(const std::string& path) {
  cxr_registry* r = nullptr;
  Check(cxr_registry_open(path.c_str(), &r));
  return RegistryPtr(r);
}

std::string ReadFile(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw UsageError{"cannot open " + path};
  std::stringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

// Settings come from --config first; every flag given on the command line
// then overrides its key. The merged document is what runs echo.
class Settings {
 public:
  void Load(const std::string& path) {
    if (path.empty()) return;
    json doc = json::parse(ReadFile(path));
    if (!doc.is_object()) throw UsageError{"config file must hold a JSON object"};
    doc_ = std::move(doc);
  }

  template <typename T>
  void Override(const CLI::Option* flag, const std::string& key, const T& value) {
    if (flag->count() > 0) doc_[key] = value;
  }
  template <typename T>
  void OverrideBackend(const CLI::Option* flag, const std::string& key, const T& value) {
    if (flag->count() > 0) doc_["backend"][key] = value;
  }

  template <typename T>
  T Get(const std::string& key, const T& fallback) {
    if (!doc_.contains(key)) doc_[key] = fallback;
    return doc_[key].get<T>();
  }

  json Backend() {
    if (!doc_.contains("backend")) doc_["backend"] = json::object();
    if (!doc_["backend"].contains("kind")) doc_["backend"]["kind"] = "mock";
    return doc_["backend"];
  }

  const json& doc() const { return doc_; }

 private:
  json doc_ = json::object();
};

struct BackendFlags {
  std::string kind;
  std::string endpoint;
  std::string model;
  std::size_t parallel = 4;
  int max_retries = 2;
  int timeout_ms = 60000;
  CLI::Option* kind_opt = nullptr;
  CLI::Option* endpoint_opt = nullptr;
  CLI::Option* model_opt = nullptr;
  CLI::Option* parallel_opt = nullptr;
  CLI::Option* retries_opt = nullptr;
  CLI::Option* timeout_opt = nullptr;

  void Attach(CLI::App* cmd) {
    kind_opt = cmd->add_option("--backend", kind, "mock or http")
                   ->check(CLI::IsMember({"mock", "http"}));
    endpoint_opt = cmd->add_option("--endpoint", endpoint, "chat-completions URL (http backend)");
    model_opt = cmd->add_option("--model-name", model, "model name sent to the backend");
    parallel_opt = cmd->add_option("--parallel", parallel, "requests in flight")
                       ->check(CLI::PositiveNumber);
    retries_opt = cmd->add_option("--max-retries", max_retries, "re-requests after a bad response");
    timeout_opt = cmd->add_option("--timeout-ms", timeout_ms, "per-request timeout");
  }

  void Apply(Settings& s) const {
    s.OverrideBackend(kind_opt, "kind", kind);
    s.OverrideBackend(endpoint_opt, "endpoint", endpoint);
    s.OverrideBackend(model_opt, "model", model);
    s.OverrideBackend(parallel_opt, "max_parallel", parallel);
    s.OverrideBackend(retries_opt, "max_retries", max_retries);
    s.OverrideBackend(timeout_opt, "timeout_ms", timeout_ms);
  }
};

BackendPtr MakeBackend(Settings& s) {
  cxr_backend* b = nullptr;
  Check(cxr_backend_create(s.Backend().dump().c_str(), &b));
  return BackendPtr(b);
}

// Loads a corpus and narrows it to one cohort when asked.
CorpusPtr LoadCohort(const std::string& corpus_path, const std::string& assignment,
                     const std::string& cohort) {
  CorpusPtr corpus = LoadCorpus(corpus_path);
  if (!assignment.empty()) Check(cxr_corpus_assign(corpus.get(), assignment.c_str()));
  if (cohort.empty() || cohort == "all") return corpus;
  cxr_corpus* sub = nullptr;
  Check(cxr_corpus_cohort(corpus.get(), cohort.c_str(), &sub));
  return CorpusPtr(sub);
}

std::vector<std::string> SplitList(const std::string& text) {
  std::vector<std::string> out;
  std::stringstream in(text);
  std::string item;
  while (std::getline(in, item, ',')) {
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

std::string Fixed3(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.3f", v);
  return buf;
}

void PrintGate(const json& run) {
  const json& gate = run.at("gate_result");
  if (gate.is_null()) return;
  std::size_t passed = 0;
  for (const auto& g : gate["per_label"]) {
    if (g["passed"].get<bool>()) ++passed;
    std::cout << "  " << (g["passed"].get<bool>() ? "PASS " : "FAIL ") << g["label"].get<std::string>()
              << "  accuracy " << Fixed3(g["accuracy"].get<double>()) << "  kappa "
              << Fixed3(g["kappa_vs_reference"].get<double>()) << "\n";
  }
  std::cout << "gate: " << passed << "/" << gate["per_label"].size() << " labels passed"
            << (gate["all_passed"].get<bool>() ? " (all passed)" : "") << "\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Radiology report labeling and evaluation toolkit"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(cxr_version()));
  std::string config_path;
  app.add_option("--config", config_path, "JSON settings; command-line flags take precedence")
      ->check(CLI::ExistingFile);
  Settings settings;
  int exit_code = kExitOk;

  // ingest
  auto* ingest = app.add_subcommand("ingest", "Read, section and de-identify source reports");
  std::string ingest_in, ingest_out;
  bool require_sections = false, no_deid = false;
  ingest->add_option("input", ingest_in, "JSONL or CSV source records")->required();
  ingest->add_option("-o,--output", ingest_out, "corpus JSONL to write")->required();
  auto* require_opt = ingest->add_flag("--require-sections", require_sections,
                                       "drop reports lacking Findings or Impression");
  ingest->add_flag("--no-deidentify", no_deid, "keep text as given");
  ingest->callback([&] {
    settings.Override(require_opt, "require_sections", require_sections);
    ordered_json options = {{"deidentify", !no_deid},
                            {"require_sections", settings.Get("require_sections", false)}};
    if (settings.doc().contains("headers")) options["headers"] = settings.doc()["headers"];
    cxr_corpus* raw = nullptr;
    LibString summary;
    Check(cxr_corpus_ingest(ingest_in.c_str(), options.dump().c_str(), &raw, summary.out()));
    CorpusPtr corpus(raw);
    Check(cxr_corpus_write(corpus.get(), ingest_out.c_str()));
    const json s = summary.Json();
    std::cout << "records read: " << s["records_read"] << "\n"
              << "reports kept: " << s["reports_kept"] << "\n"
              << "dropped without sections: " << s["dropped_without_sections"] << "\n"
              << "PHI replacements: " << s["phi_removals"] << "\n";
    if (cxr_corpus_size(corpus.get()) > 0) {
      LibString stats;
      Check(cxr_corpus_stats(corpus.get(), nullptr, stats.out()));
      const json st = stats.Json();
      std::cout << "words per report: median " << Fixed3(st["median_word_count"].get<double>())
                << " (IQR " << Fixed3(st["iqr_word_count"][0].get<double>()) << "-"
                << Fixed3(st["iqr_word_count"][1].get<double>()) << ")\n";
    }
  });

  // stats
  auto* stats = app.add_subcommand("stats", "Corpus statistics");
  std::string stats_corpus, stats_labels, stats_assignment, stats_cohort;
  stats->add_option("--corpus", stats_corpus)->required();
  stats->add_option("--labels", stats_labels, "label CSV for per-label prevalence");
  stats->add_option("--assignment", stats_assignment, "cohort assignment CSV");
  stats->add_option("--cohort", stats_cohort, "restrict to one cohort");
  stats->callback([&] {
    CorpusPtr corpus = LoadCohort(stats_corpus, stats_assignment, stats_cohort);
    LibString out;
    Check(cxr_corpus_stats(corpus.get(), stats_labels.empty() ? nullptr : stats_labels.c_str(),
                           out.out()));
    std::cout << out.Json().dump(2) << "\n";
  });

  // split
  auto* split = app.add_subcommand("split", "Seeded disjoint cohort split");
  std::string split_corpus, split_sizes, split_tags = "taxonomy,development,test", split_out;
  std::uint64_t seed = 0;
  split->add_option("--corpus", split_corpus)->required();
  split->add_option("--sizes", split_sizes, "comma-separated cohort sizes")->required();
  split->add_option("--tags", split_tags, "comma-separated cohort tags")->capture_default_str();
  auto* seed_opt = split->add_option("--seed", seed);
  split->add_option("-o,--output", split_out, "assignment CSV")->required();
  split->callback([&] {
    settings.Override(seed_opt, "seed", seed);
    const auto seed_value = settings.Get<std::uint64_t>("seed", 0);
    std::vector<std::size_t> sizes;
    for (const auto& s : SplitList(split_sizes)) sizes.push_back(std::stoull(s));
    const auto tags = SplitList(split_tags);
    if (tags.size() != sizes.size()) throw UsageError{"--sizes and --tags differ in length"};
    std::vector<const char*> tag_ptrs;
    for (const auto& t : tags) tag_ptrs.push_back(t.c_str());
    CorpusPtr corpus = LoadCorpus(split_corpus);
    Check(cxr_corpus_split(corpus.get(), sizes.data(), tag_ptrs.data(), sizes.size(), seed_value,
                           split_out.c_str()));
    std::cout << "wrote " << split_out << "\n";
  });

  // prompts / refine / freeze
  auto* prompts = app.add_subcommand("prompts", "List prompt versions, or print one");
  std::string registry_path = "prompts.jsonl";
  std::uint64_t show_version = 0;
  prompts->add_option("--registry", registry_path, "prompt registry log")->capture_default_str();
  auto* show_opt = prompts->add_option("--show", show_version, "print this version");
  prompts->callback([&] {
    RegistryPtr reg = OpenRegistry(registry_path);
    LibString out;
    if (show_opt->count() > 0) {
      Check(cxr_registry_prompt_json(reg.get(), show_version, out.out()));
    } else {
      Check(cxr_registry_list_json(reg.get(), out.out()));
    }
    std::cout << out.Json().dump(2) << "\n";
  });

  auto* refine = app.add_subcommand("refine", "Create a child prompt version from revisions");
  std::uint64_t refine_parent = 0;
  std::string revisions_path, refine_note;
  refine->add_option("--registry", registry_path, "prompt registry log")->capture_default_str();
  refine->add_option("--version", refine_parent, "parent version")->required();
  refine->add_option("--revisions", revisions_path, "JSON array of revisions")
      ->required()
      ->check(CLI::ExistingFile);
  refine->add_option("--note", refine_note, "change note (default: summary of revisions)");
  refine->callback([&] {
    RegistryPtr reg = OpenRegistry(registry_path);
    std::uint64_t child = 0;
    Check(cxr_registry_refine(reg.get(), refine_parent, ReadFile(revisions_path).c_str(),
                              refine_note.c_str(), &child));
    std::cout << child << "\n";
  });

  auto* freeze = app.add_subcommand("freeze", "Freeze a prompt version");
  std::uint64_t freeze_version = 0;
  freeze->add_option("--registry", registry_path, "prompt registry log")->capture_default_str();
  freeze->add_option("--version", freeze_version)->required();
  freeze->callback([&] {
    RegistryPtr reg = OpenRegistry(registry_path);
    Check(cxr_registry_freeze(reg.get(), freeze_version));
    std::cout << "frozen " << freeze_version << "\n";
  });

  // label
  auto* label = app.add_subcommand("label", "Label a corpus with one prompt version");
  std::string label_corpus, label_assignment, label_cohort, label_out, scope = "full_text";
  std::uint64_t prompt_version = 1;
  BackendFlags label_backend;
  label->add_option("--corpus", label_corpus)->required();
  label->add_option("--assignment", label_assignment);
  label->add_option("--cohort", label_cohort);
  label->add_option("--registry", registry_path, "prompt registry log")->capture_default_str();
  label->add_option("--version", prompt_version, "prompt version")->capture_default_str();
  auto* label_scope = label->add_option("--scope", scope, "full_text or sections");
  label->add_option("-o,--output", label_out, "label CSV")->required();
  label_backend.Attach(label);
  label->callback([&] {
    label_backend.Apply(settings);
    settings.Override(label_scope, "scope", scope);
    BackendPtr backend = MakeBackend(settings);
    RegistryPtr reg = OpenRegistry(registry_path);
    CorpusPtr corpus = LoadCohort(label_corpus, label_assignment, label_cohort);
    ordered_json options = {{"scope", settings.Get<std::string>("scope", "full_text")}};
    LibString summary;
    Check(cxr_label_corpus(backend.get(), reg.get(), prompt_version, corpus.get(),
                           options.dump().c_str(), label_out.c_str(), summary.out()));
    const json s = summary.Json();
    std::cout << "labeled " << s["labeled"] << " reports, " << s["failures"].size()
              << " failures, " << s["total_retries"] << " retries\n";
    for (const auto& f : s["failures"]) {
      std::cerr << "failed " << f["report_id"].get<std::string>() << ": "
                << f["message"].get<std::string>() << "\n";
    }
  });

  // validate
  auto* validate = app.add_subcommand("validate", "Validate the labeler against a reference");
  std::string val_corpus, val_assignment, val_cohort = "development", val_reference, out_dir;
  double acc_threshold = 0.90, kappa_threshold = 0.90, max_failure_fraction = 0.05;
  bool strict = false;
  BackendFlags val_backend;
  validate->add_option("--corpus", val_corpus)->required();
  validate->add_option("--assignment", val_assignment);
  auto* cohort_opt = validate->add_option("--cohort", val_cohort, "cohort tag")->capture_default_str();
  validate->add_option("--reference", val_reference, "reference CSV (1/0/U)")->required();
  validate->add_option("--registry", registry_path, "prompt registry log")->capture_default_str();
  auto* val_version_opt = validate->add_option("--version", prompt_version, "prompt version")->capture_default_str();
  auto* val_scope = validate->add_option("--scope", scope, "full_text or sections");
  auto* acc_opt = validate->add_option("--accuracy-threshold", acc_threshold);
  auto* kappa_opt = validate->add_option("--kappa-threshold", kappa_threshold);
  auto* frac_opt = validate->add_option("--max-failure-fraction", max_failure_fraction);
  validate->add_option("--out", out_dir, "output root (runs/<run_id>/ is created)")->required();
  validate->add_flag("--strict", strict, "exit 4 when any label fails the gate");
  val_backend.Attach(validate);
  validate->callback([&] {
    val_backend.Apply(settings);
    settings.Override(val_scope, "scope", scope);
    settings.Override(cohort_opt, "cohort", val_cohort);
    settings.Override(val_version_opt, "prompt_version", prompt_version);
    settings.Override(acc_opt, "accuracy_threshold", acc_threshold);
    settings.Override(kappa_opt, "kappa_threshold", kappa_threshold);
    settings.Override(frac_opt, "max_failure_fraction", max_failure_fraction);
    const std::string cohort = settings.Get<std::string>("cohort", "development");
    const auto version = settings.Get<std::uint64_t>("prompt_version", 1);
    settings.Backend();
    ordered_json options = {
        {"scope", settings.Get<std::string>("scope", "full_text")},
        {"thresholds",
         {{"accuracy", settings.Get("accuracy_threshold", 0.90)},
          {"kappa", settings.Get("kappa_threshold", 0.90)}}},
        {"max_failure_fraction", settings.Get("max_failure_fraction", 0.05)},
        {"cohort_tag", cohort}};
    ordered_json echoed = settings.doc();
    echoed["command"] = "validate";
    options["config"] = echoed;

    BackendPtr backend = MakeBackend(settings);
    RegistryPtr reg = OpenRegistry(registry_path);
    CorpusPtr corpus = LoadCohort(val_corpus, val_assignment, cohort);
    LibString result;
    Check(cxr_validate(backend.get(), reg.get(), version, corpus.get(), val_reference.c_str(),
                       options.dump().c_str(), out_dir.c_str(), result.out()));
    const json run = result.Json();
    std::cout << "run " << run["run_id"].get<std::string>() << " -> "
              << run["run_dir"].get<std::string>() << "\n";
    PrintGate(run);
    std::cout << "triage cases: " << run["triage_cases"] << "\n";
    if (!run["failures"].empty()) std::cout << "labeling failures: " << run["failures"].size() << "\n";
    if (strict && !run["gate_result"]["all_passed"].get<bool>()) exit_code = kExitGate;
  });

  // triage
  auto* triage = app.add_subcommand("triage", "Print the triage queue of a validation run");
  std::string triage_run, triage_out;
  triage->add_option("--run", triage_run, "run directory")->required();
  triage->add_option("-o,--output", triage_out, "write JSONL here instead of stdout");
  triage->callback([&] {
    LibString out;
    Check(cxr_triage(triage_run.c_str(), out.out()));
    std::ostringstream lines;
    for (const auto& c : out.Json()) lines << c.dump() << "\n";
    if (triage_out.empty()) {
      std::cout << lines.str();
    } else {
      std::ofstream(triage_out, std::ios::binary) << lines.str();
    }
  });

  // optimize
  auto* optimize = app.add_subcommand(
      "optimize", "Validate/refine loop driven by pre-written revisions (one array per round)");
  std::string opt_revisions;
  std::size_t max_rounds = 5;
  BackendFlags opt_backend;
  optimize->add_option("--corpus", val_corpus)->required();
  optimize->add_option("--assignment", val_assignment);
  auto* opt_cohort = optimize->add_option("--cohort", val_cohort, "cohort tag")->capture_default_str();
  optimize->add_option("--reference", val_reference)->required();
  optimize->add_option("--registry", registry_path, "prompt registry log")->capture_default_str();
  optimize->add_option("--version", prompt_version, "root version")->capture_default_str();
  optimize->add_option("--revisions", opt_revisions, "JSON array of per-round revision arrays")
      ->check(CLI::ExistingFile);
  optimize->add_option("--max-rounds", max_rounds, "validation rounds")->capture_default_str();
  optimize->add_option("--out", out_dir)->required();
  optimize->add_flag("--strict", strict, "exit 4 when the gate is never passed");
  opt_backend.Attach(optimize);
  optimize->callback([&] {
    opt_backend.Apply(settings);
    settings.Override(opt_cohort, "cohort", val_cohort);
    const std::string cohort = settings.Get<std::string>("cohort", "development");
    settings.Backend();
    ordered_json echoed = settings.doc();
    echoed["command"] = "optimize";
    ordered_json options = {
        {"scope", settings.Get<std::string>("scope", "full_text")},
        {"thresholds",
         {{"accuracy", settings.Get("accuracy_threshold", 0.90)},
          {"kappa", settings.Get("kappa_threshold", 0.90)}}},
        {"max_failure_fraction", settings.Get("max_failure_fraction", 0.05)},
        {"cohort_tag", cohort},
        {"config", echoed}};
    struct Script {
      json rounds = json::array();
      std::size_t next = 0;
    } script;
    if (!opt_revisions.empty()) script.rounds = json::parse(ReadFile(opt_revisions));
    auto provider = [](const char*, const char*, void* user) -> char* {
      auto* s = static_cast<Script*>(user);
      if (s->next >= s->rounds.size()) return nullptr;
      const std::string text = s->rounds[s->next++].dump();
      char* out = static_cast<char*>(std::malloc(text.size() + 1));
      std::memcpy(out, text.c_str(), text.size() + 1);
      return out;
    };

    BackendPtr backend = MakeBackend(settings);
    RegistryPtr reg = OpenRegistry(registry_path);
    CorpusPtr corpus = LoadCohort(val_corpus, val_assignment, cohort);
    LibString result;
    const cxr_status status =
        cxr_optimize(backend.get(), reg.get(), prompt_version, corpus.get(), val_reference.c_str(),
                     options.dump().c_str(), max_rounds, out_dir.c_str(), provider, &script,
                     result.out());
    if (status != CXR_OK && status != CXR_MAX_ROUNDS_EXCEEDED) Check(status);
    const json r = result.Json();
    std::cout << "rounds: " << r["rounds"] << "  lineage: " << r["lineage"].dump() << "\n";
    PrintGate(r["final_run"]);
    if (status == CXR_MAX_ROUNDS_EXCEEDED) {
      std::cout << "max rounds exceeded; best run " << r["final_run"]["run_id"].get<std::string>()
                << "\n";
      if (strict) exit_code = kExitGate;
    }
  });

  // benchmark
  auto* benchmark = app.add_subcommand("benchmark", "Score generated reports (Ran Score)");
  std::string models_dir, bench_reference;
  std::uint64_t frozen_version = 0;
  BackendFlags bench_backend;
  benchmark->add_option("--models", models_dir,
                        "directory with one subdirectory per model holding reports.jsonl")
      ->required()
      ->check(CLI::ExistingDirectory);
  benchmark->add_option("--reference", bench_reference, "original reports (corpus JSONL)")
      ->required();
  benchmark->add_option("--registry", registry_path, "prompt registry log")->capture_default_str();
  benchmark->add_option("--frozen-version", frozen_version)->required();
  benchmark->add_option("--out", out_dir)->required();
  bench_backend.Attach(benchmark);
  benchmark->callback([&] {
    bench_backend.Apply(settings);
    settings.Backend();
    BackendPtr backend = MakeBackend(settings);
    RegistryPtr reg = OpenRegistry(registry_path);
    CorpusPtr reference = LoadCorpus(bench_reference);

    std::vector<fs::path> model_dirs;
    for (const auto& entry : fs::directory_iterator(models_dir)) {
      if (entry.is_directory()) model_dirs.push_back(entry.path());
    }
    std::sort(model_dirs.begin(), model_dirs.end());
    json entries = json::array();
    for (const auto& dir : model_dirs) {
      fs::path reports = dir / "reports.jsonl";
      if (!fs::exists(reports)) reports = dir / "reports.csv";
      if (!fs::exists(reports)) throw UsageError{"no reports.jsonl in " + dir.string()};
      const std::string model = dir.filename().string();
      CorpusPtr outputs = LoadCorpus(reports.string());
      ordered_json echoed = settings.doc();
      echoed["command"] = "benchmark";
      echoed["model"] = model;
      ordered_json options = {{"scope", settings.Get<std::string>("scope", "full_text")},
                              {"model", model},
                              {"config", echoed}};
      LibString result;
      Check(cxr_benchmark(backend.get(), reg.get(), frozen_version, outputs.get(), reference.get(),
                          options.dump().c_str(), out_dir.c_str(), result.out()));
      const json run = result.Json();
      std::cout << model << ": Ran Score " << Fixed3(run["ran_score"].get<double>()) << "  ("
                << run["run_id"].get<std::string>() << ")\n";
      entries.push_back({{"model", model}, {"run_dir", run["run_dir"]}});
    }
    Check(cxr_leaderboard(entries.dump().c_str(), out_dir.c_str()));
    std::cout << "wrote " << (fs::path(out_dir) / "leaderboard.csv").string() << "\n";
  });

  // aggregate / interrater
  auto* aggregate = app.add_subcommand("aggregate", "Majority-vote reference from reader CSV");
  std::string annotations_path, aggregate_out;
  std::size_t quorum = 4;
  aggregate->add_option("--annotations", annotations_path)->required();
  auto* quorum_opt = aggregate->add_option("--quorum", quorum, "votes needed on one side")->capture_default_str();
  aggregate->add_option("-o,--output", aggregate_out, "reference CSV")->required();
  aggregate->callback([&] {
    settings.Override(quorum_opt, "quorum", quorum);
    LibString summary;
    Check(cxr_aggregate(annotations_path.c_str(), settings.Get<std::size_t>("quorum", 4),
                        aggregate_out.c_str(), summary.out()));
    const json s = summary.Json();
    std::cout << "reports: " << s["reports"] << "  readers: " << s["readers"]
              << "  unresolved cells: " << s["unresolved_cells"] << "\n";
  });

  auto* interrater = app.add_subcommand("interrater", "Pairwise Cohen's kappa per label");
  interrater->add_option("--annotations", annotations_path)->required();
  interrater->callback([&] {
    LibString out;
    Check(cxr_interrater(annotations_path.c_str(), out.out()));
    const json doc = out.Json();
    for (const auto& l : doc["labels"]) {
      std::cout << l["label"].get<std::string>() << ": mean kappa "
                << Fixed3(l["mean_kappa"].get<double>()) << " over " << l["computed_pairs"]
                << " pairs\n";
      for (const auto& w : l["warnings"]) std::cerr << "warning: " << w.get<std::string>() << "\n";
    }
  });

  // score / ran-score / compare / tables
  auto* score = app.add_subcommand("score", "Metric report of predictions against a reference");
  std::string pred_path, ref_path, out_prefix;
  double alpha = 0.05;
  score->add_option("--pred", pred_path)->required();
  score->add_option("--reference", ref_path)->required();
  score->add_option("--alpha", alpha, "interval level")->capture_default_str();
  score->add_option("--out-prefix", out_prefix, "write <prefix>.csv and <prefix>.md");
  score->callback([&] {
    LibString out;
    Check(cxr_score(pred_path.c_str(), ref_path.c_str(), alpha,
                    out_prefix.empty() ? nullptr : out_prefix.c_str(), out.out()));
    std::cout << out.Json().dump(2) << "\n";
  });

  auto* ran = app.add_subcommand("ran-score", "Ran Score of generated-report labels");
  ran->add_option("--generated", pred_path)->required();
  ran->add_option("--reference", ref_path)->required();
  ran->callback([&] {
    LibString out;
    Check(cxr_ran_score(pred_path.c_str(), ref_path.c_str(), out.out()));
    std::cout << "ran_score " << Fixed3(out.Json()["ran_score"].get<double>()) << "\n";
  });

  auto* compare = app.add_subcommand("compare", "Per-label F1 change and McNemar p between runs");
  std::string run_a, run_b;
  compare->add_option("--run-a", run_a)->required();
  compare->add_option("--run-b", run_b)->required();
  compare->add_option("--reference", ref_path, "reference CSV (default: run a's)");
  compare->callback([&] {
    LibString out;
    Check(cxr_compare_runs(run_a.c_str(), run_b.c_str(), ref_path.empty() ? nullptr : ref_path.c_str(),
                           out.out()));
    std::cout << out.Json().dump(2) << "\n";
  });

  auto* accuracy_table = app.add_subcommand("accuracy-table", "Per-label accuracy table, one column per run");
  std::vector<std::string> columns;
  accuracy_table->add_option("--run", columns, "name=run_dir, repeatable")->required();
  accuracy_table->add_option("-o,--out-prefix", out_prefix)->required();
  accuracy_table->callback([&] {
    json columns_doc = json::array();
    for (const auto& c : columns) {
      const auto eq = c.find('=');
      if (eq == std::string::npos) throw UsageError{"--run expects name=run_dir"};
      columns_doc.push_back({{"name", c.substr(0, eq)}, {"run_dir", c.substr(eq + 1)}});
    }
    Check(cxr_accuracy_table(columns_doc.dump().c_str(), out_prefix.c_str()));
    std::cout << ReadFile(out_prefix + ".md");
  });

  auto* comparison_table = app.add_subcommand("comparison-table", "Pre/post comparison table");
  std::string pre_run, post_run, chexbert_csv;
  comparison_table->add_option("--pre", pre_run)->required();
  comparison_table->add_option("--post", post_run)->required();
  comparison_table->add_option("--chexbert", chexbert_csv, "label,f1 CSV");
  comparison_table->add_option("-o,--out-prefix", out_prefix)->required();
  comparison_table->callback([&] {
    Check(cxr_comparison_table(pre_run.c_str(), post_run.c_str(),
                               chexbert_csv.empty() ? nullptr : chexbert_csv.c_str(),
                               out_prefix.c_str()));
    std::cout << ReadFile(out_prefix + ".md");
  });

  // Settings must be loaded before any subcommand callback runs.
  app.parse_complete_callback([&] {
    try {
      settings.Load(config_path);
    } catch (const json::exception& e) {
      throw CLI::ValidationError("--config", e.what());
    } catch (const UsageError& e) {
      throw CLI::ValidationError("--config", e.message);
    }
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitInput;
  } catch (const StatusError& e) {
    std::cerr << "error: " << e.message << "\n";
    return ExitCodeFor(e.status);
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.message << "\n";
    return kExitInput;
  } catch (const json::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInput;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInternal;
  }
  return exit_code;
}
