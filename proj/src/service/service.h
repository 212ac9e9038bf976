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

#ifndef CXRLABEL_SERVICE_SERVICE_H_
#define CXRLABEL_SERVICE_SERVICE_H_

#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <set>
#include <shared_mutex>
#include <string>
#include <thread>
#include <vector>

#include "json.hpp"

#include "corpus.h"
#include "harness.h"
#include "reference.h"
#include "registry.h"
#include "run_store.h"

namespace httplib {
class Server;
}

namespace cxrlabel::service {

struct ServiceOptions {
  // Holds events.jsonl and runs/.
  std::filesystem::path data_dir;
  // When set, every request must carry "Authorization: Bearer <token>".
  std::optional<std::string> bearer_token;
  std::size_t quorum = kDefaultQuorum;
};

enum class RunStatus { kRunning, kCompleted, kFailed };

struct RunRecord {
  RunStatus status = RunStatus::kRunning;
  RunKind kind = RunKind::kLabelerValidation;
  std::string model;
  std::string error;
  std::string message;
};

// A JSON response: status code plus body.
struct Response {
  int status = 200;
  nlohmann::ordered_json body;
};

// Session state behind the HTTP API: reports and cohorts, reader
// annotations, prompt lineage, runs and triage resolutions.
//
// Every mutation is appended to data_dir/events.jsonl exactly once, and
// constructing a Service on an existing directory replays that log. Reads
// run concurrently; mutations are serialized. Runs execute on background
// threads through the harness and are stored with a RunStore in data_dir.
class Service {
 public:
  explicit Service(ServiceOptions options);
  ~Service();

  Service(const Service&) = delete;
  Service& operator=(const Service&) = delete;

  // Installs the routes (and the bearer check) on `server`.
  void Register(httplib::Server& server);

  // Blocks until no run is executing.
  void WaitForRuns();

  // Route handlers, callable without a socket. Bodies are parsed JSON.
  Response PostCohort(const nlohmann::json& body);
  Response GetReport(const std::string& report_id) const;
  Response PostAnnotation(const nlohmann::json& body);
  Response GetReference(const std::string& cohort, std::optional<std::size_t> quorum) const;
  Response PostValidateRun(const nlohmann::json& body);
  Response PostBenchmarkRun(const nlohmann::json& body);
  Response GetRun(const std::string& run_id) const;
  Response GetRunTriage(const std::string& run_id) const;
  Response PostTriageResolve(const std::string& case_id, const nlohmann::json& body);
  Response GetPrompts() const;
  Response GetPrompt(VersionId version) const;
  Response PostRefine(VersionId version, const nlohmann::json& body);
  Response PostFreeze(VersionId version);
  Response GetLeaderboard() const;

  const PromptRegistry& registry() const { return registry_; }
  const RunStore& store() const { return store_; }

 private:
  void Replay();
  void Log(nlohmann::ordered_json event);
  void ApplyCohort(const std::string& cohort, std::vector<Report> reports);
  void ApplyAnnotation(const ReaderAnnotation& annotation);

  // Reference over the cohort's reports; throws kMissingReader when some
  // report has no annotation yet.
  ReferenceStandard CohortReference(const std::string& cohort, std::size_t quorum) const;
  Corpus CohortCorpus(const std::string& cohort) const;
  std::string RunCohortOf(const std::string& run_id) const;

  // Starts `work` on a background thread and records the outcome.
  void Launch(const std::string& run_id, RunKind kind, std::string model,
              std::function<void()> work);

  ServiceOptions options_;
  RunStore store_;
  PromptRegistry registry_;

  mutable std::shared_mutex mu_;
  Corpus corpus_;
  std::map<std::string, std::vector<std::string>> cohorts_;
  std::map<std::string, std::string> cohort_of_;
  std::vector<ReaderAnnotation> annotations_;
  std::set<std::pair<std::string, std::string>> annotated_;  // (reader, report)
  std::map<std::string, RunRecord> runs_;
  std::map<std::string, TriageResolution> resolutions_;

  std::mutex workers_mu_;
  std::vector<std::jthread> workers_;
};

}  // namespace cxrlabel::service

#endif  // CXRLABEL_SERVICE_SERVICE_H_
