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

#ifndef CXRLABEL_TESTS_SUPPORT_FIXTURES_H_
#define CXRLABEL_TESTS_SUPPORT_FIXTURES_H_

#include <array>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "corpus.h"
#include "label_matrix.h"
#include "reference.h"
#include "registry.h"
#include "taxonomy.h"

namespace cxrlabel::testing {

struct FixtureOptions {
  std::size_t reports = 60;
  std::uint64_t seed = 7;
  std::string id_prefix = "R";
  // Positive rate per label; No Finding is derived from the others.
  std::array<double, kNumLabels> prevalence = DefaultPrevalence();
  // Chance that a positive finding is written with a phrase the default
  // keyword labeler does not know.
  double hidden_positive_rate = 0.2;
  // Chance that a negative label gets a "previously seen ... has resolved"
  // sentence, which the default keyword labeler reads as positive.
  double resolved_mention_rate = 0.02;
  // Chance that a negative label gets an explicitly negated mention.
  double negated_mention_rate = 0.15;
  std::size_t readers = kDefaultReaders;
  // Chance that one reader's vote departs from the truth (half flipped,
  // half marked uncertain).
  double reader_noise = 0.04;

  static std::array<double, kNumLabels> DefaultPrevalence();
};

struct Fixture {
  std::vector<SourceRecord> records;
  LabelMatrix truth;
  std::vector<ReaderAnnotation> annotations;
};

// Synthetic chest radiograph reports with skewed prevalence, negated
// distractors and a simulated reader panel.
Fixture MakeFixture(const FixtureOptions& options = {});

// The phrase used for a hidden positive, and the keyword a resolved mention
// is built from.
const std::string& HiddenPhrase(LabelId label);
std::string ResolvedMention(LabelId label);

// Revisions an expert would write after reading the triage queue: hidden
// phrases become synonyms and resolved mentions negative exemplars, for
// every label that has a misclassified case.
std::vector<Revision> ExpertRevisions(std::span<const LabelId> missed,
                                      std::span<const LabelId> overcalled);

void WriteRecordsJsonl(const std::filesystem::path& path, std::span<const SourceRecord> records);

// A scratch directory removed on destruction.
class TempDir {
 public:
  TempDir();
  ~TempDir();
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

std::string ReadFile(const std::filesystem::path& path);

}  // namespace cxrlabel::testing

#endif  // CXRLABEL_TESTS_SUPPORT_FIXTURES_H_
