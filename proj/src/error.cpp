// Copyright 2026 The comfortsim Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "comfortsim/error.hpp"

namespace comfortsim {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::kMissingChannel: return "MissingChannel";
    case ErrorCode::kNonUniformSampling: return "NonUniformSampling";
    case ErrorCode::kNonFiniteSample: return "NonFiniteSample";
    case ErrorCode::kEmptyFile: return "EmptyFile";
    case ErrorCode::kMalformedInput: return "MalformedInput";
    case ErrorCode::kInvalidRate: return "InvalidRate";
    case ErrorCode::kSegmentTooLong: return "SegmentTooLong";
    case ErrorCode::kTooFewSegments: return "TooFewSegments";
    case ErrorCode::kInvalidArgument: return "InvalidArgument";
    case ErrorCode::kInvalidParameter: return "InvalidParameter";
    case ErrorCode::kUnstableConfiguration: return "UnstableConfiguration";
    case ErrorCode::kSingularMassMatrix: return "SingularMassMatrix";
    case ErrorCode::kNoEquilibrium: return "NoEquilibrium";
    case ErrorCode::kNonFiniteState: return "NonFiniteState";
    case ErrorCode::kUnstableStep: return "UnstableStep";
    case ErrorCode::kInvalidBand: return "InvalidBand";
    case ErrorCode::kGridMismatch: return "GridMismatch";
    case ErrorCode::kDegenerateInput: return "DegenerateInput";
    case ErrorCode::kUnsupportedRate: return "UnsupportedRate";
    case ErrorCode::kUnitMismatch: return "UnitMismatch";
    case ErrorCode::kRateMismatch: return "RateMismatch";
    case ErrorCode::kConfigError: return "ConfigError";
    case ErrorCode::kStageError: return "StageError";
    case ErrorCode::kIoError: return "IoError";
  }
  return "Unknown";
}

Error::Error(ErrorCode code, const std::string& message)
    : std::runtime_error(std::string(to_string(code)) + ": " + message),
      code_(code) {}

}  // namespace comfortsim
