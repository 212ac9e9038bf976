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

#include <gtest/gtest.h>

#include <array>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <string>
#include <sys/wait.h>
#include <vector>

#include "json.hpp"

#include "fixtures.h"
#include "reference.h"
#include "registry.h"

namespace {

namespace fs = std::filesystem;
using nlohmann::json;
using cxrlabel::testing::MakeFixture;
using cxrlabel::testing::ReadFile;
using cxrlabel::testing::TempDir;

struct Result {
  int code = -1;
  std::string out;
};

// Runs the CLI with stderr folded into the captured output.
Result Cli(const std::string& args) {
  const std::string command = std::string(CXRLABEL_CLI_PATH) + " " + args + " 2>&1";
  Result r;
  FILE* pipe = popen(command.c_str(), "r");
  if (pipe == nullptr) return r;
  std::array<char, 4096> buf{};
  std::size_t n = 0;
  while ((n = std::fread(buf.data(), 1, buf.size(), pipe)) > 0) r.out.append(buf.data(), n);
  const int status = pclose(pipe);
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return r;
}

std::string Q(const fs::path& p) { return "'" + p.string() + "'"; }

// The single run directory under <root>/runs.
fs::path OnlyRun(const fs::path& root) {
  std::vector<fs::path> dirs;
  for (const auto& e : fs::directory_iterator(root / "runs")) {
    if (e.is_directory()) dirs.push_back(e.path());
  }
  EXPECT_EQ(dirs.size(), 1u);
  return dirs.empty() ? fs::path() : dirs.front();
}

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    const auto fx = MakeFixture({.reports = 150, .seed = 21, .reader_noise = 0.02});
    cxrlabel::testing::WriteRecordsJsonl(dir_ / "source.jsonl", fx.records);
    cxrlabel::WriteAnnotationsCsv(dir_ / "ann.csv", fx.annotations);
    cxrlabel::BuildReference(fx.annotations).WriteCsv(dir_ / "ref.csv");
    std::ofstream(dir_ / "fast.json") << R"({"backend": {"kind": "mock", "backoff_ms": [1]}})";
    const Result r = Cli("ingest " + Q(dir_ / "source.jsonl") + " -o " + Q(dir_ / "corpus.jsonl"));
    ASSERT_EQ(r.code, 0) << r.out;
  }

  std::string Validate(const fs::path& out, const std::string& extra = "") {
    return "--config " + Q(dir_ / "fast.json") + " validate --corpus " + Q(dir_ / "corpus.jsonl") +
           " --cohort all --reference " + Q(dir_ / "ref.csv") + " --registry " +
           Q(dir_ / "prompts.jsonl") + " --out " + Q(out) + " " + extra;
  }

  TempDir dir_;
};

TEST_F(CliTest, ValidateTwiceIsByteIdentical) {
  const Result a = Cli(Validate(dir_ / "a"));
  const Result b = Cli(Validate(dir_ / "b"));
  ASSERT_EQ(a.code, 0) << a.out;
  ASSERT_EQ(b.code, 0) << b.out;
  const fs::path run_a = OnlyRun(dir_ / "a");
  const fs::path run_b = OnlyRun(dir_ / "b");
  EXPECT_EQ(run_a.filename(), run_b.filename());
  std::size_t files = 0;
  for (const auto& e : fs::directory_iterator(run_a)) {
    ++files;
    EXPECT_EQ(ReadFile(e.path()), ReadFile(run_b / e.path().filename())) << e.path().filename();
  }
  EXPECT_EQ(files, 7u);
  EXPECT_NE(a.out.find("gate: "), std::string::npos);
}

TEST_F(CliTest, ParallelismDoesNotChangeLabels) {
  const std::string base = "label --corpus " + Q(dir_ / "corpus.jsonl") + " --registry " +
                           Q(dir_ / "prompts.jsonl") + " --backend mock";
  ASSERT_EQ(Cli(base + " --parallel 1 -o " + Q(dir_ / "p1.csv")).code, 0);
  ASSERT_EQ(Cli(base + " --parallel 8 -o " + Q(dir_ / "p8.csv")).code, 0);
  const std::string p1 = ReadFile(dir_ / "p1.csv");
  EXPECT_FALSE(p1.empty());
  EXPECT_EQ(p1, ReadFile(dir_ / "p8.csv"));
}

TEST_F(CliTest, StrictGateFailureExitsFour) {
  const Result lax = Cli(Validate(dir_ / "lax", "--accuracy-threshold 1 --kappa-threshold 1"));
  EXPECT_EQ(lax.code, 0) << lax.out;
  const Result strict = Cli(Validate(dir_ / "strict", "--accuracy-threshold 1 --kappa-threshold 1 --strict"));
  EXPECT_EQ(strict.code, 4) << strict.out;
  EXPECT_NE(strict.out.find("FAIL "), std::string::npos);
}

TEST_F(CliTest, InputErrorsExitTwo) {
  EXPECT_EQ(Cli(Validate(dir_ / "x", "--reference " + Q(dir_ / "absent.csv"))).code, 2);
  EXPECT_EQ(Cli("validate --corpus").code, 2);
  EXPECT_EQ(Cli("no-such-command").code, 2);
  EXPECT_EQ(Cli(Validate(dir_ / "x", "--version 9")).code, 2);
}

TEST_F(CliTest, UnreachableBackendExitsThree) {
  std::ofstream(dir_ / "http.json")
      << R"({"backend": {"kind": "http", "endpoint": "http://127.0.0.1:9/v1/chat/completions",
             "backoff_ms": [1], "max_retries": 0, "timeout_ms": 200}})";
  const Result r =
      Cli("--config " + Q(dir_ / "http.json") + " validate --corpus " + Q(dir_ / "corpus.jsonl") +
          " --cohort all --reference " + Q(dir_ / "ref.csv") + " --registry " +
          Q(dir_ / "prompts.jsonl") + " --out " + Q(dir_ / "down"));
  EXPECT_EQ(r.code, 3) << r.out;
}

TEST_F(CliTest, CredentialNeverReachesArtifacts) {
  setenv("CXRLABEL_API_KEY", "sk-cli-canary-7731", 1);
  const Result r = Cli(Validate(dir_ / "k"));
  unsetenv("CXRLABEL_API_KEY");
  ASSERT_EQ(r.code, 0) << r.out;
  for (const auto& e : fs::recursive_directory_iterator(dir_ / "k")) {
    if (e.is_regular_file()) {
      EXPECT_EQ(ReadFile(e.path()).find("sk-cli-canary"), std::string::npos) << e.path();
    }
  }
}

TEST_F(CliTest, OptimizeWithScriptedRevisionsPassesTheGate) {
  std::vector<cxrlabel::LabelId> all;
  for (cxrlabel::LabelId id = 0; id < cxrlabel::kNumLabels; ++id) all.push_back(id);
  json round = json::array();
  for (const auto& r : cxrlabel::testing::ExpertRevisions(all, all)) {
    round.push_back(json::parse(cxrlabel::ToJson(r).dump()));
  }
  std::ofstream(dir_ / "rounds.json") << json::array({round}).dump();

  const std::string base = "--config " + Q(dir_ / "fast.json") + " optimize --corpus " +
                           Q(dir_ / "corpus.jsonl") + " --cohort all --reference " +
                           Q(dir_ / "ref.csv") + " --registry " + Q(dir_ / "prompts.jsonl");
  const Result ok = Cli(base + " --revisions " + Q(dir_ / "rounds.json") + " --out " + Q(dir_ / "opt"));
  EXPECT_EQ(ok.code, 0) << ok.out;
  EXPECT_NE(ok.out.find("rounds: 2"), std::string::npos) << ok.out;
  EXPECT_NE(ok.out.find("(all passed)"), std::string::npos) << ok.out;

  const Result listed = Cli("prompts --registry " + Q(dir_ / "prompts.jsonl"));
  EXPECT_EQ(listed.code, 0);
  EXPECT_NE(listed.out.find('2'), std::string::npos);

  // Comparing the two rounds and rendering both tables.
  std::vector<fs::path> runs;
  for (const auto& e : fs::directory_iterator(dir_ / "opt" / "runs")) runs.push_back(e.path());
  ASSERT_EQ(runs.size(), 2u);
  const json first = json::parse(ReadFile(runs[0] / "config.json"));
  const fs::path pre = first["prompt_version"] == 1 ? runs[0] : runs[1];
  const fs::path post = pre == runs[0] ? runs[1] : runs[0];
  const Result cmp = Cli("compare --run-a " + Q(pre) + " --run-b " + Q(post));
  ASSERT_EQ(cmp.code, 0) << cmp.out;
  EXPECT_NO_THROW(json::parse(cmp.out));
  EXPECT_EQ(Cli("accuracy-table --run pre=" + Q(pre) + " --run post=" + Q(post) + " -o " +
                Q(dir_ / "acc")).code, 0);
  EXPECT_TRUE(fs::exists(dir_ / "acc.md"));
  EXPECT_TRUE(fs::exists(dir_ / "acc.csv"));
  EXPECT_EQ(Cli("comparison-table --pre " + Q(pre) + " --post " + Q(post) + " -o " + Q(dir_ / "cmp")).code, 0);
  EXPECT_TRUE(fs::exists(dir_ / "cmp.md"));

  const Result triage = Cli("triage --run " + Q(pre));
  EXPECT_EQ(triage.code, 0);
  EXPECT_NE(triage.out.find("case_id"), std::string::npos);
}

TEST_F(CliTest, OptimizeWithoutRevisionsRunsOutOfRounds) {
  const std::string base = "--config " + Q(dir_ / "fast.json") + " optimize --corpus " +
                           Q(dir_ / "corpus.jsonl") + " --cohort all --reference " +
                           Q(dir_ / "ref.csv") + " --registry " + Q(dir_ / "prompts.jsonl") +
                           " --max-rounds 2 --out " + Q(dir_ / "none");
  const Result r = Cli(base);
  EXPECT_EQ(r.code, 0) << r.out;
  EXPECT_NE(r.out.find("max rounds exceeded"), std::string::npos);
  EXPECT_EQ(Cli(base + " --strict").code, 4);
}

TEST_F(CliTest, AggregateMatchesLibraryReference) {
  ASSERT_EQ(Cli("aggregate --annotations " + Q(dir_ / "ann.csv") + " -o " + Q(dir_ / "agg.csv")).code, 0);
  EXPECT_EQ(ReadFile(dir_ / "agg.csv"), ReadFile(dir_ / "ref.csv"));
  const Result ir = Cli("interrater --annotations " + Q(dir_ / "ann.csv"));
  EXPECT_EQ(ir.code, 0);
  EXPECT_NE(ir.out.find("Atelectasis: mean kappa"), std::string::npos) << ir.out;
}

TEST_F(CliTest, ScoreAndRanScoreOfLabelFiles) {
  ASSERT_EQ(Cli("label --backend mock --corpus " + Q(dir_ / "corpus.jsonl") + " --registry " +
                Q(dir_ / "prompts.jsonl") + " -o " + Q(dir_ / "pred.csv")).code, 0);
  const Result s = Cli("score --pred " + Q(dir_ / "pred.csv") + " --reference " + Q(dir_ / "ref.csv") +
                       " --out-prefix " + Q(dir_ / "score"));
  EXPECT_EQ(s.code, 0) << s.out;
  EXPECT_TRUE(fs::exists(dir_ / "score.csv"));
  EXPECT_TRUE(fs::exists(dir_ / "score.md"));
  const Result ran = Cli("ran-score --generated " + Q(dir_ / "pred.csv") + " --reference " + Q(dir_ / "pred.csv"));
  EXPECT_EQ(ran.code, 0) << ran.out;
  EXPECT_NE(ran.out.find("1.000"), std::string::npos) << ran.out;
  EXPECT_EQ(Cli("score --pred " + Q(dir_ / "ref.csv") + " --reference " + Q(dir_ / "ref.csv")).code, 2);
}

TEST_F(CliTest, BenchmarkRequiresFrozenVersionAndWritesLeaderboard) {
  fs::create_directories(dir_ / "models" / "copy");
  fs::copy_file(dir_ / "corpus.jsonl", dir_ / "models" / "copy" / "reports.jsonl");
  const std::string base = "--config " + Q(dir_ / "fast.json") + " benchmark --models " +
                           Q(dir_ / "models") + " --reference " + Q(dir_ / "corpus.jsonl") +
                           " --registry " + Q(dir_ / "prompts.jsonl") + " --frozen-version 1 --out " +
                           Q(dir_ / "bench");
  EXPECT_EQ(Cli(base).code, 2);
  ASSERT_EQ(Cli("freeze --registry " + Q(dir_ / "prompts.jsonl") + " --version 1").code, 0);
  const Result r = Cli(base);
  ASSERT_EQ(r.code, 0) << r.out;
  EXPECT_NE(r.out.find("copy: Ran Score 1.000"), std::string::npos) << r.out;
  EXPECT_NE(ReadFile(dir_ / "bench" / "leaderboard.csv").find("copy"), std::string::npos);
  EXPECT_EQ(Cli("refine --registry " + Q(dir_ / "prompts.jsonl") + " --version 1 --revisions " +
                Q(dir_ / "fast.json")).code, 2);
}

TEST_F(CliTest, SplitAndStats) {
  const Result split = Cli("split --corpus " + Q(dir_ / "corpus.jsonl") +
                           " --sizes 50,100 --tags development,test --seed 3 -o " + Q(dir_ / "assign.csv"));
  ASSERT_EQ(split.code, 0) << split.out;
  const Result stats = Cli("stats --corpus " + Q(dir_ / "corpus.jsonl") + " --assignment " +
                           Q(dir_ / "assign.csv") + " --cohort development");
  ASSERT_EQ(stats.code, 0) << stats.out;
  EXPECT_NE(stats.out.find("50"), std::string::npos) << stats.out;
  EXPECT_EQ(Cli("split --corpus " + Q(dir_ / "corpus.jsonl") + " --sizes 100,100 --tags development,test -o " +
                Q(dir_ / "too_many.csv")).code, 2);
}

}  // namespace
