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

#ifndef CXRLABEL_RUN_STORE_H_
#define CXRLABEL_RUN_STORE_H_

#include <filesystem>
#include <mutex>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"

#include "harness.h"
#include "tables.h"

namespace cxrlabel {

// Writes the artifacts of one run into `dir`:
//   config.json      run identity and the effective configuration
//   labels_pred.csv  predictions
//   labels_ref.csv   reference (1/0/U cells)
//   metrics.csv/.md  per-label table with micro and macro rows
//   gate.json        gate result (null for benchmarks) and labeling failures
//   triage.jsonl     one triage case per line
// Nothing time-dependent is written, so equal runs give equal bytes.
void WriteRunDirectory(const std::filesystem::path& dir, const EvaluationRun& run,
                       std::span<const TriageCase> triage);

// Restores a run written by WriteRunDirectory. Metrics and gate are
// recomputed from the two label files.
EvaluationRun ReadRunDirectory(const std::filesystem::path& dir);
std::vector<TriageCase> ReadTriage(const std::filesystem::path& dir);

// ISO 8601 UTC, second resolution.
std::string UtcTimestamp();

// A directory of runs, root/runs/<run_id>/, with an append-only event log
// at root/events.jsonl. Run ids are content-derived, so saving a run again
// replaces its directory with the same bytes.
class RunStore {
 public:
  explicit RunStore(std::filesystem::path root);

  const std::filesystem::path& root() const { return root_; }
  std::filesystem::path RunDir(const std::string& run_id) const;
  std::filesystem::path EventLog() const { return root_ / "events.jsonl"; }

  // Writes the directory, then logs a "run_completed" event.
  std::filesystem::path Save(const EvaluationRun& run, std::span<const TriageCase> triage) const;
  EvaluationRun Load(const std::string& run_id) const;  // kNotFound
  bool Contains(const std::string& run_id) const;
  std::vector<std::string> RunIds() const;

  // Appends one JSON line; "at" is filled in when absent.
  void AppendEvent(nlohmann::ordered_json event) const;

 private:
  std::filesystem::path root_;
  mutable std::mutex mu_;
};

// leaderboard.csv and leaderboard.md in `dir`.
void WriteLeaderboard(const std::filesystem::path& dir, std::span<const LeaderboardEntry> entries);

}  // namespace cxrlabel

#endif  // CXRLABEL_RUN_STORE_H_
