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

#include "error.h"

namespace cxrlabel {

std::string_view ErrorCodeName(ErrorCode code) {
  switch (code) {
    case ErrorCode::kOk: return "Ok";
    case ErrorCode::kInvalidArgument: return "InvalidArgument";
    case ErrorCode::kIoError: return "IoError";
    case ErrorCode::kUnknownLabel: return "UnknownLabel";
    case ErrorCode::kDuplicateReportId: return "DuplicateReportId";
    case ErrorCode::kEmptyText: return "EmptyText";
    case ErrorCode::kInsufficientReports: return "InsufficientReports";
    case ErrorCode::kEmptyCorpus: return "EmptyCorpus";
    case ErrorCode::kMalformedResponse: return "MalformedResponse";
    case ErrorCode::kMissingLabel: return "MissingLabel";
    case ErrorCode::kIllegalValue: return "IllegalValue";
    case ErrorCode::kBackendUnavailable: return "BackendUnavailable";
    case ErrorCode::kExhaustedRetries: return "ExhaustedRetries";
    case ErrorCode::kBadVote: return "BadVote";
    case ErrorCode::kMissingReader: return "MissingReader";
    case ErrorCode::kDuplicateReader: return "DuplicateReader";
    case ErrorCode::kNoOverlap: return "NoOverlap";
    case ErrorCode::kDomainError: return "DomainError";
    case ErrorCode::kMissingPrediction: return "MissingPrediction";
    case ErrorCode::kReportSetMismatch: return "ReportSetMismatch";
    case ErrorCode::kFrozenVersionViolation: return "FrozenVersionViolation";
    case ErrorCode::kCohortMismatch: return "CohortMismatch";
    case ErrorCode::kEmptyRevision: return "EmptyRevision";
    case ErrorCode::kMaxRoundsExceeded: return "MaxRoundsExceeded";
    case ErrorCode::kNotFound: return "NotFound";
    case ErrorCode::kConflict: return "Conflict";
    case ErrorCode::kTooManyFailures: return "TooManyFailures";
  }
  return "Unknown";
}

}  // namespace cxrlabel
