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

#include <gtest/gtest.h>

#include <cmath>
#include <cstdlib>
#include <cstring>
#include <set>
#include <string>

#include "json.hpp"

#include "fixtures.h"
#include "registry.h"

namespace {

using nlohmann::json;
using cxrlabel::testing::MakeFixture;
using cxrlabel::testing::TempDir;

// Takes ownership of a library string.
std::string Take(char* s) {
  std::string out = s ? s : "";
  cxr_string_free(s);
  return out;
}

class CApiTest : public ::testing::Test {
 protected:
  void SetUp() override {
    const auto fx = MakeFixture({.reports = 120, .seed = 21, .reader_noise = 0.02});
    cxrlabel::testing::WriteRecordsJsonl(dir_ / "reports.jsonl", fx.records);
    cxrlabel::BuildReference(fx.annotations).WriteCsv(dir_ / "ref.csv");
    cxrlabel::WriteAnnotationsCsv(dir_ / "ann.csv", fx.annotations);
    char* summary = nullptr;
    ASSERT_EQ(cxr_corpus_ingest((dir_ / "reports.jsonl").c_str(), nullptr, &corpus_, &summary), CXR_OK);
    summary_ = json::parse(Take(summary));
    ASSERT_EQ(cxr_registry_open((dir_ / "prompts.jsonl").c_str(), &registry_), CXR_OK);
    ASSERT_EQ(cxr_backend_create(R"({"kind": "mock", "backoff_ms": [1]})", &backend_), CXR_OK);
  }
  void TearDown() override {
    cxr_backend_free(backend_);
    cxr_registry_free(registry_);
    cxr_corpus_free(corpus_);
  }

  std::string Path(const char* name) const { return (dir_ / name).string(); }

  TempDir dir_;
  cxr_corpus* corpus_ = nullptr;
  cxr_registry* registry_ = nullptr;
  cxr_backend* backend_ = nullptr;
  json summary_;
};

TEST(CApiBasicsTest, StatusesAndStatistics) {
  EXPECT_STRNE(cxr_version(), "");
  EXPECT_STREQ(cxr_status_name(CXR_MISSING_LABEL), "MissingLabel");
  EXPECT_STREQ(cxr_status_name(CXR_OK), "Ok");

  double lo = 0, hi = 0;
  ASSERT_EQ(cxr_clopper_pearson(296, 300, 0.05, &lo, &hi), CXR_OK);
  EXPECT_NEAR(lo, 0.966, 5e-4);
  EXPECT_NEAR(hi, 0.996, 5e-4);
  EXPECT_EQ(cxr_clopper_pearson(4, 3, 0.05, &lo, &hi), CXR_DOMAIN_ERROR);
  EXPECT_NE(std::string(cxr_last_error()).find("DomainError"), std::string::npos);
  EXPECT_EQ(cxr_clopper_pearson(1, 3, 0.05, nullptr, &hi), CXR_INVALID_ARGUMENT);

  double p = 0;
  ASSERT_EQ(cxr_mcnemar(10, 0, &p), CXR_OK);
  EXPECT_DOUBLE_EQ(p, 2 * std::pow(0.5, 10));

  const int a[] = {1, 0, 1, 0}, b[] = {1, 0, 1, 0};
  double kappa = 0;
  ASSERT_EQ(cxr_cohen_kappa(a, b, 4, &kappa), CXR_OK);
  EXPECT_DOUBLE_EQ(kappa, 1.0);

  const int votes[] = {1, 1, 1, 1, 0, -1};
  int state = -1;
  ASSERT_EQ(cxr_aggregate_votes(votes, 6, 4, &state), CXR_OK);
  EXPECT_EQ(state, 1);
  const int bad[] = {1, 1, 1, 1, 0, 7};
  EXPECT_EQ(cxr_aggregate_votes(bad, 6, 4, &state), CXR_BAD_VOTE);

  size_t id = 0;
  ASSERT_EQ(cxr_taxonomy_resolve("ptx", &id), CXR_OK);
  EXPECT_EQ(id, 12u);
  EXPECT_EQ(cxr_taxonomy_resolve("Scoliosis", &id), CXR_UNKNOWN_LABEL);
  char* tax = nullptr;
  ASSERT_EQ(cxr_taxonomy_json(&tax), CXR_OK);
  EXPECT_EQ(json::parse(Take(tax))["labels"].size(), 21u);
}

TEST_F(CApiTest, CorpusAccess) {
  EXPECT_EQ(cxr_corpus_size(corpus_), 120u);
  EXPECT_EQ(summary_["reports_kept"], 120);
  char* report = nullptr;
  ASSERT_EQ(cxr_corpus_report_json(corpus_, "R001", &report), CXR_OK);
  const json r = json::parse(Take(report));
  EXPECT_EQ(r["report_id"], "R001");
  EXPECT_FALSE(r["findings"].is_null());
  EXPECT_EQ(cxr_corpus_report_json(corpus_, "nope", &report), CXR_NOT_FOUND);

  const size_t sizes[] = {30, 40};
  const char* tags[] = {"development", "test"};
  ASSERT_EQ(cxr_corpus_split(corpus_, sizes, tags, 2, 7, Path("split.csv").c_str()), CXR_OK);
  ASSERT_EQ(cxr_corpus_assign(corpus_, Path("split.csv").c_str()), CXR_OK);
  cxr_corpus* dev = nullptr;
  ASSERT_EQ(cxr_corpus_cohort(corpus_, "development", &dev), CXR_OK);
  EXPECT_EQ(cxr_corpus_size(dev), 30u);
  cxr_corpus_free(dev);
  const size_t too_big[] = {200};
  EXPECT_EQ(cxr_corpus_split(corpus_, too_big, tags, 1, 7, Path("x.csv").c_str()),
            CXR_INSUFFICIENT_REPORTS);

  cxr_corpus* missing = nullptr;
  EXPECT_EQ(cxr_corpus_ingest(Path("absent.jsonl").c_str(), nullptr, &missing, nullptr), CXR_IO_ERROR);
  EXPECT_EQ(missing, nullptr);
}

TEST_F(CApiTest, RegistryThroughJson) {
  uint64_t v = 0;
  ASSERT_EQ(cxr_registry_refine(registry_, 1,
                                R"([{"label": "Edema", "kind": "SynonymAdded", "payload": "kerley b lines"}])",
                                "review", &v),
            CXR_OK);
  EXPECT_EQ(v, 2u);
  ASSERT_EQ(cxr_registry_freeze(registry_, 2), CXR_OK);
  int frozen = 0;
  ASSERT_EQ(cxr_registry_is_frozen(registry_, 2, &frozen), CXR_OK);
  EXPECT_EQ(frozen, 1);
  EXPECT_EQ(cxr_registry_refine(registry_, 2, R"([{"label": "Edema", "kind": "SynonymAdded",
      "payload": "x"}])", nullptr, &v), CXR_FROZEN_VERSION_VIOLATION);
  EXPECT_EQ(cxr_registry_refine(registry_, 1, "[]", nullptr, &v), CXR_EMPTY_REVISION);
  EXPECT_EQ(cxr_registry_refine(registry_, 1, "not json", nullptr, &v), CXR_INVALID_ARGUMENT);
  char* lineage = nullptr;
  ASSERT_EQ(cxr_registry_lineage_json(registry_, 2, &lineage), CXR_OK);
  EXPECT_EQ(json::parse(Take(lineage)), json::parse("[1, 2]"));
  cxr_registry* again = nullptr;
  ASSERT_EQ(cxr_registry_open(Path("prompts.jsonl").c_str(), &again), CXR_OK);
  ASSERT_EQ(cxr_registry_is_frozen(again, 2, &frozen), CXR_OK);
  EXPECT_EQ(frozen, 1);
  cxr_registry_free(again);
}

TEST_F(CApiTest, BackendNeverEchoesCredentials) {
  ::setenv("CXRLABEL_API_KEY", "sk-secret-value", 1);
  cxr_backend* http = nullptr;
  ASSERT_EQ(cxr_backend_create(R"({"kind": "http", "endpoint": "http://127.0.0.1:9/v1/chat/completions"})",
                               &http),
            CXR_OK);
  char* config = nullptr;
  ASSERT_EQ(cxr_backend_config_json(http, &config), CXR_OK);
  EXPECT_EQ(Take(config).find("sk-secret"), std::string::npos);
  cxr_backend_free(http);
  ::unsetenv("CXRLABEL_API_KEY");
  EXPECT_EQ(cxr_backend_create(R"({"kind": "carrier-pigeon"})", &http), CXR_INVALID_ARGUMENT);
}

TEST_F(CApiTest, ValidateStoresRunAndTriage) {
  char* result = nullptr;
  ASSERT_EQ(cxr_validate(backend_, registry_, 1, corpus_, Path("ref.csv").c_str(),
                         R"({"cohort_tag": "development"})", Path("out").c_str(), &result),
            CXR_OK)
      << cxr_last_error();
  const json r = json::parse(Take(result));
  const std::string run_dir = r["run_dir"];
  EXPECT_TRUE(std::filesystem::exists(std::filesystem::path(run_dir) / "gate.json"));
  EXPECT_EQ(r["gate_result"]["all_passed"], false);
  char* triage = nullptr;
  ASSERT_EQ(cxr_triage(run_dir.c_str(), &triage), CXR_OK);
  EXPECT_EQ(json::parse(Take(triage)).size(), r["triage_cases"].get<size_t>());
  EXPECT_GT(r["triage_cases"].get<size_t>(), 0u);

  EXPECT_EQ(cxr_validate(nullptr, registry_, 1, corpus_, Path("ref.csv").c_str(), nullptr,
                         Path("out").c_str(), &result),
            CXR_INVALID_ARGUMENT);
  EXPECT_EQ(cxr_validate(backend_, registry_, 42, corpus_, Path("ref.csv").c_str(), nullptr,
                         Path("out").c_str(), &result),
            CXR_NOT_FOUND);
}

char* ExpertProvider(const char*, const char* triage_json, void* calls) {
  ++*static_cast<int*>(calls);
  std::set<cxrlabel::LabelId> missed, overcalled;
  for (const auto& c : json::parse(triage_json)) {
    const auto label = cxrlabel::Taxonomy::Default().Resolve(c["label"].get<std::string>()).id;
    (c["predicted"].get<int>() ? overcalled : missed).insert(label);
  }
  const std::vector<cxrlabel::LabelId> m(missed.begin(), missed.end()), o(overcalled.begin(), overcalled.end());
  nlohmann::ordered_json out = nlohmann::ordered_json::array();
  for (const auto& r : cxrlabel::testing::ExpertRevisions(m, o)) out.push_back(cxrlabel::ToJson(r));
  const std::string text = out.dump();
  char* copy = static_cast<char*>(std::malloc(text.size() + 1));
  std::memcpy(copy, text.c_str(), text.size() + 1);
  return copy;
}

char* NoRevisions(const char*, const char*, void*) { return nullptr; }

TEST_F(CApiTest, OptimizeWithCallback) {
  int calls = 0;
  char* result = nullptr;
  ASSERT_EQ(cxr_optimize(backend_, registry_, 1, corpus_, Path("ref.csv").c_str(), nullptr, 5,
                         Path("loop").c_str(), ExpertProvider, &calls, &result),
            CXR_OK)
      << cxr_last_error();
  const json r = json::parse(Take(result));
  EXPECT_TRUE(r["passed"].get<bool>());
  EXPECT_GE(calls, 1);
  EXPECT_EQ(r["runs"].size(), static_cast<size_t>(calls) + 1);
  for (const auto& id : r["runs"]) {
    EXPECT_TRUE(std::filesystem::exists(dir_ / "loop" / "runs" / id.get<std::string>()));
  }

  cxr_registry* fresh = nullptr;
  ASSERT_EQ(cxr_registry_open(Path("fresh.jsonl").c_str(), &fresh), CXR_OK);
  ASSERT_EQ(cxr_optimize(backend_, fresh, 1, corpus_, Path("ref.csv").c_str(), nullptr, 2,
                         Path("loop2").c_str(), NoRevisions, nullptr, &result),
            CXR_MAX_ROUNDS_EXCEEDED);
  const json r2 = json::parse(Take(result));
  EXPECT_TRUE(r2["max_rounds_exceeded"].get<bool>());
  EXPECT_EQ(r2["runs"].size(), 1u);
  cxr_registry_free(fresh);
}

TEST_F(CApiTest, BenchmarkAndLeaderboard) {
  ASSERT_EQ(cxr_registry_freeze(registry_, 1), CXR_OK);
  char* result = nullptr;
  ASSERT_EQ(cxr_benchmark(backend_, registry_, 1, corpus_, corpus_, R"({"model": "echo"})",
                          Path("bench").c_str(), &result),
            CXR_OK)
      << cxr_last_error();
  const json r = json::parse(Take(result));
  EXPECT_DOUBLE_EQ(r["ran_score"].get<double>(), 1.0);
  const json entries = json::array({{{"model", "echo"}, {"run_dir", r["run_dir"]}}});
  ASSERT_EQ(cxr_leaderboard(entries.dump().c_str(), Path("board").c_str()), CXR_OK);
  EXPECT_TRUE(std::filesystem::exists(dir_ / "board" / "leaderboard.csv"));
  EXPECT_EQ(cxr_benchmark(backend_, registry_, 7, corpus_, corpus_, nullptr, Path("bench").c_str(), &result),
            CXR_NOT_FOUND);
}

TEST_F(CApiTest, AggregateScoreAndTables) {
  char* summary = nullptr;
  ASSERT_EQ(cxr_aggregate(Path("ann.csv").c_str(), 4, Path("agg.csv").c_str(), &summary), CXR_OK);
  Take(summary);
  EXPECT_EQ(cxrlabel::testing::ReadFile(dir_ / "agg.csv"), cxrlabel::testing::ReadFile(dir_ / "ref.csv"));
  char* kappa = nullptr;
  ASSERT_EQ(cxr_interrater(Path("ann.csv").c_str(), &kappa), CXR_OK);
  EXPECT_FALSE(Take(kappa).empty());

  char* labels = nullptr;
  ASSERT_EQ(cxr_label_corpus(backend_, registry_, 1, corpus_, nullptr, Path("pred.csv").c_str(), &labels),
            CXR_OK);
  EXPECT_EQ(json::parse(Take(labels))["labeled"], 120);
  char* score = nullptr;
  ASSERT_EQ(cxr_score(Path("pred.csv").c_str(), Path("ref.csv").c_str(), 0.05, Path("score").c_str(), &score),
            CXR_OK);
  EXPECT_TRUE(json::parse(Take(score)).contains("macro"));
  EXPECT_TRUE(std::filesystem::exists(dir_ / "score.csv"));
  EXPECT_TRUE(std::filesystem::exists(dir_ / "score.md"));
  char* ran = nullptr;
  ASSERT_EQ(cxr_ran_score(Path("pred.csv").c_str(), Path("pred.csv").c_str(), &ran), CXR_OK);
  EXPECT_DOUBLE_EQ(json::parse(Take(ran))["ran_score"].get<double>(), 1.0);
}

}  // namespace
