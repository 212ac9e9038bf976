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

#include "fixtures.h"

#include <fstream>
#include <random>
#include <sstream>

#include "json.hpp"

#include "rule_labeler.h"

namespace cxrlabel::testing {
namespace {

const std::array<std::string, kNumLabels>& Hidden() {
  static const std::array<std::string, kNumLabels> phrases = {
      "subsegmental collapse at the left base",
      "cardiothoracic ratio exceeds one half",
      "dense airspace filling in the right lower lobe",
      "kerley b lines",
      "prominent mediastinal contour",
      "cortical break of the posterior seventh rib",
      "spiculated density in the right upper lobe",
      "",
      "blunting of the costophrenic angle",
      "apical pleural cap",
      "hazy increased density at the bases",
      "findings compatible with lobar infection",
      "visible visceral pleural line at the apex",
      "tip of the dobhoff projects over the stomach",
      "flattened hemidiaphragms with bullae",
      "peripheral interstitial markings",
      "granulomatous disease sequela",
      "airway dilatation",
      "air fluid level within the right upper lobe",
      "paratracheal stripe thickening",
      "cephalization of vessels",
  };
  return phrases;
}

std::string Capitalized(std::string text) {
  if (!text.empty() && text[0] >= 'a' && text[0] <= 'z') text[0] = static_cast<char>(text[0] - 32);
  return text;
}

std::string_view Keyword(LabelId label) { return DefaultKeywords()[label].front(); }

}  // namespace

std::array<double, kNumLabels> FixtureOptions::DefaultPrevalence() {
  return {0.20, 0.15, 0.08, 0.12, 0.06, 0.03, 0.08, 0.0, 0.20, 0.03, 0.25,
          0.10, 0.04, 0.30, 0.05, 0.04, 0.05, 0.03, 0.02, 0.04, 0.05};
}

const std::string& HiddenPhrase(LabelId label) { return Hidden().at(label); }

std::string ResolvedMention(LabelId label) {
  return "previously seen " + std::string(Keyword(label)) + " has resolved";
}

Fixture MakeFixture(const FixtureOptions& options) {
  std::mt19937_64 rng(options.seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  Fixture fixture;
  const int width = static_cast<int>(std::to_string(options.reports).size());
  for (std::size_t i = 0; i < options.reports; ++i) {
    std::ostringstream id;
    id << options.id_prefix << std::string(width - std::to_string(i + 1).size(), '0') << i + 1;

    LabelValues truth{};
    bool any = false;
    for (LabelId l = 0; l < kNumLabels; ++l) {
      if (l == kNoFindingLabel) continue;
      truth[l] = unit(rng) < options.prevalence[l] ? 1 : 0;
      any = any || truth[l];
    }
    truth[kNoFindingLabel] = any ? 0 : 1;

    std::vector<std::string> sentences;
    for (LabelId l = 0; l < kNumLabels; ++l) {
      if (l == kNoFindingLabel) continue;
      if (truth[l]) {
        if (unit(rng) < options.hidden_positive_rate) {
          sentences.push_back("There is " + HiddenPhrase(l) + ".");
        } else {
          sentences.push_back("There is " + std::string(Keyword(l)) + ".");
        }
      } else if (!any && unit(rng) < options.negated_mention_rate) {
        sentences.push_back("No " + std::string(Keyword(l)) + ".");
      } else if (unit(rng) < options.resolved_mention_rate) {
        sentences.push_back(Capitalized(ResolvedMention(l)) + ".");
      } else if (unit(rng) < options.negated_mention_rate) {
        sentences.push_back("No " + std::string(Keyword(l)) + ".");
      }
    }
    std::string findings;
    for (const auto& s : sentences) findings += (findings.empty() ? "" : " ") + s;
    if (findings.empty()) findings = "Lungs are clear.";
    const std::string impression = any ? "Abnormal chest radiograph as described."
                                       : "No acute cardiopulmonary process.";
    SourceRecord record;
    record.report_id = id.str();
    record.text = "FINDINGS: " + findings + "\nIMPRESSION: " + impression;
    fixture.records.push_back(record);
    fixture.truth.Add(record.report_id, truth);

    for (std::size_t r = 0; r < options.readers; ++r) {
      ReaderAnnotation a;
      a.reader_id = "reader" + std::to_string(r + 1);
      a.report_id = record.report_id;
      for (LabelId l = 0; l < kNumLabels; ++l) {
        int vote = truth[l];
        const double u = unit(rng);
        if (u < options.reader_noise / 2) {
          vote = 1 - vote;
        } else if (u < options.reader_noise) {
          vote = -1;
        }
        a.values[l] = static_cast<std::int8_t>(vote);
      }
      fixture.annotations.push_back(a);
    }
  }
  return fixture;
}

std::vector<Revision> ExpertRevisions(std::span<const LabelId> missed,
                                      std::span<const LabelId> overcalled) {
  std::vector<Revision> revisions;
  for (LabelId l : missed) {
    if (HiddenPhrase(l).empty()) continue;
    revisions.push_back({l, RevisionKind::kSynonymAdded, HiddenPhrase(l)});
  }
  for (LabelId l : overcalled) {
    if (l == kNoFindingLabel) continue;
    revisions.push_back({l, RevisionKind::kExemplarAdded, ResolvedMention(l), false, false});
  }
  return revisions;
}

void WriteRecordsJsonl(const std::filesystem::path& path, std::span<const SourceRecord> records) {
  std::ofstream out(path, std::ios::binary);
  for (const auto& r : records) {
    out << nlohmann::json{{"report_id", r.report_id}, {"text", r.text}, {"language", "EN"}}.dump()
        << "\n";
  }
}

TempDir::TempDir() {
  static std::mt19937_64 rng(std::random_device{}());
  for (;;) {
    std::ostringstream name;
    name << "cxrlabel-test-" << std::hex << rng();
    path_ = std::filesystem::temp_directory_path() / name.str();
    if (std::filesystem::create_directory(path_)) return;
  }
}

TempDir::~TempDir() {
  std::error_code ec;
  std::filesystem::remove_all(path_, ec);
}

std::string ReadFile(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::stringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

}  // namespace cxrlabel::testing
