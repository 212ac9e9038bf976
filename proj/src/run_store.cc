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

#include "run_store.h"

#include <algorithm>
#include <chrono>
#include <ctime>
#include <fstream>
#include <sstream>

#include "csv.h"
#include "error.h"

namespace cxrlabel {
namespace {

namespace fs = std::filesystem;

nlohmann::json ReadJsonFile(const fs::path& path) {
  std::ifstream in(path);
  if (!in) Fail(ErrorCode::kIoError, "cannot open " + path.string());
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    Fail(ErrorCode::kIoError, path.string() + ": " + e.what());
  }
}

std::optional<ErrorCode> CodeByName(std::string_view name) {
  for (int i = 0; i <= static_cast<int>(ErrorCode::kTooManyFailures); ++i) {
    if (ErrorCodeName(static_cast<ErrorCode>(i)) == name) return static_cast<ErrorCode>(i);
  }
  return std::nullopt;
}

}  // namespace

void WriteRunDirectory(const fs::path& dir, const EvaluationRun& run,
                       std::span<const TriageCase> triage) {
  fs::create_directories(dir);

  nlohmann::ordered_json config;
  config["run_id"] = run.run_id;
  config["kind"] = ToString(run.kind);
  config["prompt_version"] = run.prompt_version;
  config["backend_id"] = run.backend_id;
  config["cohort_tag"] = run.cohort_tag;
  if (!run.model.empty()) config["model"] = run.model;
  if (run.gate) {
    config["thresholds"] = {{"accuracy", run.gate->thresholds.accuracy},
                            {"kappa", run.gate->thresholds.kappa}};
  }
  config["settings"] = run.config;
  WriteText(dir / "config.json", config.dump(2) + "\n");

  run.predictions.WriteCsv(dir / "labels_pred.csv");
  run.reference.WriteCsv(dir / "labels_ref.csv");
  csv::WriteFile(dir / "metrics.csv", MetricsCsvRows(run.metric_report));
  WriteText(dir / "metrics.md", MetricsMarkdown(run.metric_report));

  nlohmann::ordered_json gate;
  gate["gate"] = run.gate ? ToJson(*run.gate) : nlohmann::ordered_json(nullptr);
  nlohmann::ordered_json failures = nlohmann::ordered_json::array();
  for (const auto& f : run.failures) {
    failures.push_back({{"report_id", f.report_id},
                        {"error", ErrorCodeName(f.code)},
                        {"message", f.message},
                        {"last_response", f.last_response}});
  }
  gate["labeling"] = {{"failures", std::move(failures)},
                      {"warnings", run.warnings},
                      {"total_retries", run.total_retries}};
  WriteText(dir / "gate.json", gate.dump(2) + "\n");

  std::ostringstream lines;
  for (const TriageCase& c : triage) lines << ToJson(c).dump() << '\n';
  WriteText(dir / "triage.jsonl", lines.str());
}

EvaluationRun ReadRunDirectory(const fs::path& dir) {
  if (!fs::is_directory(dir)) Fail(ErrorCode::kNotFound, "no run directory " + dir.string());
  const nlohmann::json config = ReadJsonFile(dir / "config.json");
  const RunKind kind = ParseRunKind(config.at("kind").get<std::string>());
  LabelMatrix pred = LabelMatrix::ReadCsv(dir / "labels_pred.csv");

  EvaluationRun run;
  if (kind == RunKind::kLabelerValidation) {
    GateThresholds thresholds;
    if (config.contains("thresholds")) {
      thresholds.accuracy = config["thresholds"].value("accuracy", thresholds.accuracy);
      thresholds.kappa = config["thresholds"].value("kappa", thresholds.kappa);
    }
    run = AssembleValidationRun(std::move(pred), ReferenceStandard::ReadCsv(dir / "labels_ref.csv"),
                                thresholds);
  } else {
    LabelMatrix ref = LabelMatrix::ReadCsv(dir / "labels_ref.csv");
    run.kind = kind;
    run.metric_report = ComputeRanScore(pred, ref).report;
    run.predictions = std::move(pred);
    run.reference = ReferenceStandard::FromLabelMatrix(ref);
  }
  run.run_id = config.at("run_id").get<std::string>();
  run.prompt_version = config.value("prompt_version", VersionId{0});
  run.backend_id = config.value("backend_id", "");
  run.cohort_tag = config.value("cohort_tag", "");
  run.model = config.value("model", "");
  if (config.contains("settings")) run.config = config["settings"];

  if (fs::exists(dir / "gate.json")) {
    const nlohmann::json gate = ReadJsonFile(dir / "gate.json");
    if (gate.contains("labeling")) {
      const auto& labeling = gate["labeling"];
      for (const auto& f : labeling.value("failures", nlohmann::json::array())) {
        run.failures.push_back(
            LabelFailure{f.value("report_id", ""),
                         CodeByName(f.value("error", "")).value_or(ErrorCode::kInvalidArgument),
                         f.value("message", ""), f.value("last_response", "")});
      }
      run.warnings = labeling.value("warnings", std::vector<std::string>{});
      run.total_retries = labeling.value("total_retries", std::size_t{0});
    }
  }
  return run;
}

std::vector<TriageCase> ReadTriage(const fs::path& dir) {
  std::ifstream in(dir / "triage.jsonl");
  if (!in) Fail(ErrorCode::kNotFound, "no triage queue in " + dir.string());
  std::vector<TriageCase> cases;
  std::string line;
  while (std::getline(in, line)) {
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    cases.push_back(TriageCaseFromJson(nlohmann::json::parse(line)));
  }
  return cases;
}

std::string UtcTimestamp() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

RunStore::RunStore(fs::path root) : root_(std::move(root)) {}

fs::path RunStore::RunDir(const std::string& run_id) const {
  if (run_id.empty() || run_id.find_first_of("/\\") != std::string::npos || run_id[0] == '.') {
    Fail(ErrorCode::kInvalidArgument, "invalid run id '" + run_id + "'");
  }
  return root_ / "runs" / run_id;
}

fs::path RunStore::Save(const EvaluationRun& run, std::span<const TriageCase> triage) const {
  const fs::path dir = RunDir(run.run_id);
  {
    std::lock_guard lock(mu_);
    const fs::path staging = root_ / "runs" / ("." + run.run_id + ".tmp");
    fs::remove_all(staging);
    WriteRunDirectory(staging, run, triage);
    fs::remove_all(dir);
    fs::rename(staging, dir);
  }
  nlohmann::ordered_json event;
  event["event"] = "run_completed";
  event["run_id"] = run.run_id;
  event["kind"] = ToString(run.kind);
  event["prompt_version"] = run.prompt_version;
  event["cohort_tag"] = run.cohort_tag;
  if (!run.model.empty()) event["model"] = run.model;
  if (!run.created_at.empty()) event["at"] = run.created_at;
  AppendEvent(std::move(event));
  return dir;
}

EvaluationRun RunStore::Load(const std::string& run_id) const {
  const fs::path dir = RunDir(run_id);
  if (!fs::is_directory(dir)) Fail(ErrorCode::kNotFound, "run '" + run_id + "' not found");
  return ReadRunDirectory(dir);
}

bool RunStore::Contains(const std::string& run_id) const {
  try {
    return fs::is_directory(RunDir(run_id));
  } catch (const Error&) {
    return false;
  }
}

std::vector<std::string> RunStore::RunIds() const {
  std::vector<std::string> ids;
  std::error_code ec;
  for (const auto& entry : fs::directory_iterator(root_ / "runs", ec)) {
    const std::string name = entry.path().filename().string();
    if (entry.is_directory() && !name.empty() && name[0] != '.') ids.push_back(name);
  }
  std::sort(ids.begin(), ids.end());
  return ids;
}

void RunStore::AppendEvent(nlohmann::ordered_json event) const {
  if (!event.contains("at")) event["at"] = UtcTimestamp();
  std::lock_guard lock(mu_);
  fs::create_directories(root_);
  std::ofstream out(EventLog(), std::ios::app);
  if (!out) Fail(ErrorCode::kIoError, "cannot append to " + EventLog().string());
  out << event.dump() << '\n';
}

void WriteLeaderboard(const fs::path& dir, std::span<const LeaderboardEntry> entries) {
  csv::WriteFile(dir / "leaderboard.csv", LeaderboardRows(entries));
  WriteText(dir / "leaderboard.md", LeaderboardMarkdown(entries));
}

}  // namespace cxrlabel
