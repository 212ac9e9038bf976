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

#ifndef CXRLABEL_LABELER_H_
#define CXRLABEL_LABELER_H_

#include <string>
#include <string_view>
#include <vector>

#include "backend.h"
#include "error.h"
#include "label_matrix.h"
#include "prompt.h"

namespace cxrlabel {

class Corpus;
struct Report;

struct LabelVector {
  std::string report_id;
  LabelValues values{};
  VersionId prompt_version = 0;
  std::string backend_id;
  int retries = 0;
  // e.g. "No Finding" asserted together with other findings.
  std::vector<std::string> warnings;
};

// Finds the first JSON object in `raw` and reads exactly the 21 labels from
// it (aliases allowed). Values must be 0 or 1, as numbers or the strings
// "0"/"1". Throws kMalformedResponse (no parseable object, unknown or
// repeated key), kMissingLabel or kIllegalValue.
LabelValues ParseLabelResponse(std::string_view raw);

// Inverse of ParseLabelResponse: a JSON object keyed by canonical name.
std::string SerializeLabelValues(const LabelValues& values);

struct LabelOptions {
  BackendConfig backend;
  ReportScope scope = ReportScope::kFullText;
};

// Render, request, parse. An unparseable response is retried up to
// max_retries times with a format reminder appended to the prompt; a
// transport failure is retried after the configured backoff. Throws
// kBackendUnavailable when the last attempt failed in transport, otherwise
// ExhaustedRetriesError carrying the last raw response.
LabelVector LabelReport(Backend& backend, const PromptVersion& version, const Report& report,
                        const LabelOptions& options = {});

struct LabelFailure {
  std::string report_id;
  ErrorCode code = ErrorCode::kOk;
  std::string message;
  std::string last_response;
};

struct LabelingResult {
  LabelMatrix matrix;  // corpus order, failed reports omitted
  std::vector<LabelFailure> failures;
  std::vector<std::string> warnings;
  std::size_t total_retries = 0;
};

// Labels every report with at most backend.max_parallel requests in flight.
// The result does not depend on completion order.
LabelingResult LabelCorpus(Backend& backend, const PromptVersion& version, const Corpus& corpus,
                           const LabelOptions& options = {});

}  // namespace cxrlabel

#endif  // CXRLABEL_LABELER_H_
