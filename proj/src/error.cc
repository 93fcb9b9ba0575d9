// Copyright 2026 The CNP Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "cnp/error.h"

namespace cnp {

std::string_view ErrorCodeName(ErrorCode code) {
  switch (code) {
    case ErrorCode::kMalformedTemplate: return "MalformedTemplate";
    case ErrorCode::kParseError: return "ParseError";
    case ErrorCode::kDuplicateId: return "DuplicateId";
    case ErrorCode::kUnknownReference: return "UnknownReference";
    case ErrorCode::kIoError: return "IoError";
    case ErrorCode::kUnknownLabel: return "UnknownLabel";
    case ErrorCode::kInvalidScheme: return "InvalidScheme";
    case ErrorCode::kSchemeMismatch: return "SchemeMismatch";
    case ErrorCode::kMissingPrediction: return "MissingPrediction";
    case ErrorCode::kServiceUnavailable: return "ServiceUnavailable";
    case ErrorCode::kMissingProbabilities: return "MissingProbabilities";
    case ErrorCode::kEmptySet: return "EmptySet";
    case ErrorCode::kMetricMismatch: return "MetricMismatch";
    case ErrorCode::kMissingTarget: return "MissingTarget";
    case ErrorCode::kCohortTooSmall: return "CohortTooSmall";
    case ErrorCode::kInvalidArgument: return "InvalidArgument";
  }
  return "Unknown";
}

}  // namespace cnp
