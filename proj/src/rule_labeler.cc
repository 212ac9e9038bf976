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

#include "rule_labeler.h"

#include <algorithm>
#include <cctype>

#include "corpus.h"
#include "prompt.h"

namespace cxrlabel {
namespace {

struct Token {
  std::string text;
  std::size_t clause = 0;
  std::size_t begin = 0;  // byte offsets into the source text
  std::size_t end = 0;
};

bool IsWordChar(char ch) { return std::isalnum(static_cast<unsigned char>(ch)) != 0; }

bool IsClauseBreak(char ch) {
  return ch == '.' || ch == ';' || ch == ':' || ch == '!' || ch == '?' || ch == '\n';
}

std::vector<Token> Tokenize(std::string_view text) {
  std::vector<Token> tokens;
  std::size_t clause = 0;
  std::size_t i = 0;
  while (i < text.size()) {
    if (IsWordChar(text[i])) {
      std::size_t j = i;
      std::string word;
      while (j < text.size() && IsWordChar(text[j])) {
        word.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(text[j]))));
        ++j;
      }
      if (word == "but" || word == "however") {
        ++clause;
      } else {
        tokens.push_back({std::move(word), clause, i, j});
      }
      i = j;
      continue;
    }
    // A period between digits ("2.5 cm") does not end a clause.
    if (IsClauseBreak(text[i]) &&
        !(text[i] == '.' && i > 0 && i + 1 < text.size() && std::isdigit(static_cast<unsigned char>(text[i - 1])) &&
          std::isdigit(static_cast<unsigned char>(text[i + 1])))) {
      ++clause;
    }
    ++i;
  }
  return tokens;
}

std::vector<std::string> PhraseTokens(std::string_view phrase) {
  std::vector<std::string> out;
  for (auto& t : Tokenize(phrase)) out.push_back(std::move(t.text));
  return out;
}

bool TokenMatches(const std::string& token, const std::string& term) {
  if (token == term) return true;
  if (token.size() == term.size() + 1 && token.back() == 's') return token.compare(0, term.size(), term) == 0;
  if (token.size() == term.size() + 2 && token.ends_with("es")) return token.compare(0, term.size(), term) == 0;
  return false;
}

bool IsNegated(const std::vector<Token>& tokens, std::size_t match_start) {
  const std::size_t clause = tokens[match_start].clause;
  const std::size_t first = match_start >= kNegationWindow ? match_start - kNegationWindow : 0;
  for (std::size_t k = first; k < match_start; ++k) {
    if (tokens[k].clause != clause) continue;
    const auto& t = tokens[k].text;
    if (t == "no" || t == "not" || t == "without") return true;
    if (k + 1 < match_start && tokens[k + 1].clause == clause) {
      const auto& next = tokens[k + 1].text;
      if ((t == "negative" && next == "for") || (t == "free" && next == "of")) return true;
    }
  }
  return false;
}

// Calls fn(start_token, end_token) for every occurrence of `phrase`.
template <typename Fn>
void ForEachMatch(const std::vector<Token>& tokens, const std::vector<std::string>& phrase, Fn fn) {
  if (phrase.empty() || phrase.size() > tokens.size()) return;
  for (std::size_t i = 0; i + phrase.size() <= tokens.size(); ++i) {
    bool ok = true;
    for (std::size_t k = 0; k < phrase.size() && ok; ++k) {
      ok = TokenMatches(tokens[i + k].text, phrase[k]) && tokens[i + k].clause == tokens[i].clause;
    }
    if (ok) fn(i, i + phrase.size());
  }
}

std::string Lower(std::string_view text) {
  std::string out(text);
  for (auto& ch : out) ch = static_cast<char>(std::tolower(static_cast<unsigned char>(ch)));
  return out;
}

std::string CollapseSpaces(std::string_view text) {
  std::string out;
  bool space = false;
  for (char ch : text) {
    if (std::isspace(static_cast<unsigned char>(ch))) {
      space = !out.empty();
    } else {
      if (space) out.push_back(' ');
      space = false;
      out.push_back(ch);
    }
  }
  return out;
}

// Byte ranges (in `normalized`) covered by any of the exemplar texts.
std::vector<std::pair<std::size_t, std::size_t>> ExemplarSpans(
    const std::string& normalized, const std::vector<std::string>& exemplars) {
  std::vector<std::pair<std::size_t, std::size_t>> spans;
  for (const auto& ex : exemplars) {
    auto needle = CollapseSpaces(Lower(ex));
    if (needle.empty()) continue;
    for (auto pos = normalized.find(needle); pos != std::string::npos;
         pos = normalized.find(needle, pos + 1)) {
      spans.emplace_back(pos, pos + needle.size());
    }
  }
  return spans;
}

}  // namespace

const KeywordTable& DefaultKeywords() {
  static const KeywordTable table = {{
      {"atelectasis", "atelectatic"},
      {"cardiomegaly", "enlarged heart", "cardiac enlargement", "heart is enlarged",
       "enlarged cardiac silhouette", "heart size is enlarged"},
      {"consolidation", "consolidative"},
      {"edema", "interstitial edema"},
      {"widened mediastinum", "mediastinal widening", "enlarged cardiomediastinal silhouette",
       "cardiomediastinal enlargement", "mediastinum is widened"},
      {"fracture", "compression deformity"},
      {"nodule", "mass", "lung lesion", "pulmonary lesion"},
      {"no acute cardiopulmonary process", "no acute cardiopulmonary abnormality",
       "no acute findings", "no acute process", "no acute abnormality", "normal chest radiograph"},
      {"effusion", "pleural fluid"},
      {"pleural thickening", "pleural plaque"},
      {"opacity", "opacities", "opacification"},
      {"pneumonia", "infectious process"},
      {"pneumothorax", "pneumothoraces"},
      {"endotracheal tube", "enteric tube", "nasogastric tube", "picc", "central venous catheter",
       "central line", "pacemaker", "sternotomy wires", "chest tube", "catheter"},
      {"emphysema", "emphysematous", "hyperinflation", "hyperinflated"},
      {"interstitial lung disease", "fibrosis", "fibrotic", "honeycombing", "reticular"},
      {"calcification", "calcified"},
      {"bronchiectasis", "tracheal deviation", "bronchial wall thickening", "tracheal narrowing"},
      {"cavity", "cavities", "cavitary", "cyst", "cystic"},
      {"hiatal hernia", "lymphadenopathy", "pneumomediastinum"},
      {"vascular congestion", "pulmonary artery enlargement", "enlarged pulmonary artery",
       "pulmonary hypertension"},
  }};
  return table;
}

LabelValues RuleLabel(std::string_view text, const KeywordTable& keywords,
                      const ExemplarSet* exemplars) {
  const std::string normalized = CollapseSpaces(Lower(text));
  const auto tokens = Tokenize(normalized);
  LabelValues values{};
  for (LabelId id = 0; id < kNumLabels; ++id) {
    if (exemplars && !ExemplarSpans(normalized, exemplars->positive[id]).empty()) {
      values[id] = 1;
      continue;
    }
    std::vector<std::pair<std::size_t, std::size_t>> ignored;
    if (exemplars) ignored = ExemplarSpans(normalized, exemplars->negative[id]);
    auto inside_ignored = [&](std::size_t begin, std::size_t end) {
      return std::any_of(ignored.begin(), ignored.end(),
                         [&](const auto& s) { return begin >= s.first && end <= s.second; });
    };
    for (const auto& phrase : keywords[id]) {
      ForEachMatch(tokens, PhraseTokens(phrase), [&](std::size_t first, std::size_t last) {
        if (values[id]) return;
        if (inside_ignored(tokens[first].begin, tokens[last - 1].end)) return;
        if (!IsNegated(tokens, first)) values[id] = 1;
      });
      if (values[id]) break;
    }
  }
  return values;
}

LabelValues RuleLabel(const Report& report) { return RuleLabel(report.raw_text); }

KeywordTable KeywordsFor(const PromptVersion& version) {
  KeywordTable table = DefaultKeywords();
  for (LabelId id = 0; id < kNumLabels; ++id) {
    auto add = [&](const std::vector<std::string>& terms) {
      for (const auto& term : terms) {
        auto lower = CollapseSpaces(Lower(term));
        if (!lower.empty() && std::find(table[id].begin(), table[id].end(), lower) == table[id].end()) {
          table[id].push_back(std::move(lower));
        }
      }
    };
    add(version.blocks[id].core_terms);
    add(version.blocks[id].synonyms);
  }
  return table;
}

std::optional<std::string> KeywordSentence(std::string_view text, LabelId label,
                                           const KeywordTable& keywords) {
  const std::string lower = Lower(text);
  const auto tokens = Tokenize(lower);
  std::optional<std::size_t> first_offset;
  for (const auto& phrase : keywords[label]) {
    ForEachMatch(tokens, PhraseTokens(phrase), [&](std::size_t first, std::size_t) {
      if (!first_offset || tokens[first].begin < *first_offset) first_offset = tokens[first].begin;
    });
  }
  if (!first_offset) return std::nullopt;
  auto is_end = [](char ch) { return ch == '.' || ch == '!' || ch == '?' || ch == '\n'; };
  std::size_t begin = *first_offset;
  while (begin > 0 && !is_end(text[begin - 1])) --begin;
  std::size_t end = *first_offset;
  while (end < text.size() && !is_end(text[end])) ++end;
  if (end < text.size() && text[end] != '\n') ++end;
  std::string sentence(text.substr(begin, end - begin));
  auto b = sentence.find_first_not_of(" \t\r\n");
  auto e = sentence.find_last_not_of(" \t\r\n");
  return b == std::string::npos ? std::string() : sentence.substr(b, e - b + 1);
}

}  // namespace cxrlabel
