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

#ifndef COMFORTSIM_ERROR_HPP_
#define COMFORTSIM_ERROR_HPP_

#include <stdexcept>
#include <string>
#include <string_view>

namespace comfortsim {

enum class ErrorCode {
  // signal-core
  kMissingChannel,
  kNonUniformSampling,
  kNonFiniteSample,
  kEmptyFile,
  kMalformedInput,
  kInvalidRate,
  kSegmentTooLong,
  kTooFewSegments,
  kInvalidArgument,
  // seat-body-model
  kInvalidParameter,
  kUnstableConfiguration,
  kSingularMassMatrix,
  kNoEquilibrium,
  kNonFiniteState,
  kUnstableStep,
  // stht-analysis
  kInvalidBand,
  kGridMismatch,
  // perception
  kDegenerateInput,
  // comfort-metrics
  kUnsupportedRate,
  kUnitMismatch,
  kRateMismatch,
  // pipeline
  kConfigError,
  kStageError,
  kIoError,
};

std::string_view to_string(ErrorCode code);

/// Exception carrying a machine-readable code. All library failures are
/// reported through this type.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message);

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace comfortsim

#endif  // COMFORTSIM_ERROR_HPP_
