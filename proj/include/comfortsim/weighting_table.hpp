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

// Analog section parameters of the ISO 2631-1 frequency weightings. Mirrored
// in data/iso2631_weightings_v1.json; a unit test keeps the two in sync.

#ifndef COMFORTSIM_WEIGHTING_TABLE_HPP_
#define COMFORTSIM_WEIGHTING_TABLE_HPP_

#include <array>
#include <limits>
#include <string_view>

namespace comfortsim {

inline constexpr int kWeightingTableVersion = 1;

enum class WeightingKind { kWf, kWk, kWd };

// Corner frequencies in Hz. An infinite f3 drops the transition zero; a
// zero f5/f6 drops the upward step.
struct WeightingParams {
  WeightingKind kind;
  std::string_view name;
  double f1, f2, f3, f4, q4, f5, q5, f6, q6;
  // Band over which the digital design is held to its analog prototype.
  double band_lo, band_hi;
};

inline constexpr double kNoZero = std::numeric_limits<double>::infinity();

inline constexpr std::array<WeightingParams, 3> kWeightingTable = {{
    {WeightingKind::kWf, "Wf", 0.08, 0.63, kNoZero, 0.25, 0.86, 0.0625, 0.80, 0.10, 0.80, 0.1,
     0.5},
    {WeightingKind::kWk, "Wk", 0.4, 100.0, 12.5, 12.5, 0.63, 2.37, 0.91, 3.35, 0.91, 0.5, 80.0},
    {WeightingKind::kWd, "Wd", 0.4, 100.0, 2.0, 2.0, 0.63, 0.0, 0.0, 0.0, 0.0, 0.5, 80.0},
}};

constexpr const WeightingParams& weighting_params(WeightingKind kind) {
  return kWeightingTable[static_cast<std::size_t>(kind)];
}

}  // namespace comfortsim

#endif  // COMFORTSIM_WEIGHTING_TABLE_HPP_
