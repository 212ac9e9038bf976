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

#ifndef CXRLABEL_ERROR_H_
#define CXRLABEL_ERROR_H_

#include <stdexcept>
#include <string>
#include <string_view>

namespace cxrlabel {

// Every failure the library raises carries one of these codes. The C API
// surfaces them unchanged as cxr_status values, so the numbering is part of
// the ABI: append only.
enum class ErrorCode : int {
  kOk = 0,
  kInvalidArgument = 1,
  kIoError = 2,
  kUnknownLabel = 3,
  kDuplicateReportId = 4,
  kEmptyText = 5,
  kInsufficientReports = 6,
  kEmptyCorpus = 7,
  kMalformedResponse = 8,
  kMissingLabel = 9,
  kIllegalValue = 10,
  kBackendUnavailable = 11,
  kExhaustedRetries = 12,
  kBadVote = 13,
  kMissingReader = 14,
  kDuplicateReader = 15,
  kNoOverlap = 16,
  kDomainError = 17,
  kMissingPrediction = 18,
  kReportSetMismatch = 19,
  kFrozenVersionViolation = 20,
  kCohortMismatch = 21,
  kEmptyRevision = 22,
  kMaxRoundsExceeded = 23,
  kNotFound = 24,
  kConflict = 25,
  kTooManyFailures = 26,
};

std::string_view ErrorCodeName(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const { return code_; }

 private:
  ErrorCode code_;
};

// Raised by label_report when every attempt produced an unusable response.
// The last raw response is kept so it can be triaged by hand.
class ExhaustedRetriesError : public Error {
 public:
  ExhaustedRetriesError(const std::string& message, std::string last_response,
                        int attempts)
      : Error(ErrorCode::kExhaustedRetries, message),
        last_response_(std::move(last_response)),
        attempts_(attempts) {}

  const std::string& last_response() const { return last_response_; }
  int attempts() const { return attempts_; }

 private:
  std::string last_response_;
  int attempts_;
};

[[noreturn]] inline void Fail(ErrorCode code, const std::string& message) {
  throw Error(code, message);
}

}  // namespace cxrlabel

#endif  // CXRLABEL_ERROR_H_
