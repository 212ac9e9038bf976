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

#ifndef CXRLABEL_RULE_LABELER_H_
#define CXRLABEL_RULE_LABELER_H_

#include <array>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "label_matrix.h"

namespace cxrlabel {

struct Report;
struct PromptVersion;

// Trigger phrases per label, lowercase.
using KeywordTable = std::array<std::vector<std::string>, kNumLabels>;

const KeywordTable& DefaultKeywords();

// Tokens scanned backwards from a match for a negation cue.
inline constexpr std::size_t kNegationWindow = 5;

// Per-label exemplar overrides, taken from prompt blocks.
struct ExemplarSet {
  std::array<std::vector<std::string>, kNumLabels> positive;
  std::array<std::vector<std::string>, kNumLabels> negative;
};

// Deterministic keyword labeler.
//
// Text is lowercased and split into alphanumeric tokens; clause breaks are
// . ; : ! ? newlines and the words "but" and "however". A phrase matches a
// token run when every token is equal or differs only by a trailing "s" or
// "es". A match is negated when "no", "not", "without", "negative for" or
// "free of" occurs within kNegationWindow tokens before it in the same
// clause. A label is 1 when it has at least one non-negated match, else 0.
//
// Exemplars, when given, take precedence: text inside a negative exemplar
// is ignored for that label, and containing a positive exemplar sets it to 1.
LabelValues RuleLabel(std::string_view text, const KeywordTable& keywords = DefaultKeywords(),
                      const ExemplarSet* exemplars = nullptr);

LabelValues RuleLabel(const Report& report);

// Default keywords plus every core term and synonym of the prompt.
KeywordTable KeywordsFor(const PromptVersion& version);

// The sentence holding the first keyword occurrence for `label`, negated or
// not. Sentences end at . ! ? or a newline.
std::optional<std::string> KeywordSentence(std::string_view text, LabelId label,
                                           const KeywordTable& keywords = DefaultKeywords());

}  // namespace cxrlabel

#endif  // CXRLABEL_RULE_LABELER_H_
