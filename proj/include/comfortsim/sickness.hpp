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

#ifndef COMFORTSIM_SICKNESS_HPP_
#define COMFORTSIM_SICKNESS_HPP_

#include <optional>
#include <string>
#include <vector>

#include "comfortsim/timeseries.hpp"

namespace comfortsim {

struct AccumulatorParams {
  double half_saturation_m_per_s2 = 0.5;  // b
  double hill_exponent = 2.0;             // n
  double time_constant_s = 720.0;         // mu
  double scale_percent = 85.0;            // P
};

std::vector<std::string> validate_accumulator_params(const AccumulatorParams& p);

double hill(double conflict, const AccumulatorParams& p);

// Streaming form: Hill nonlinearity followed by two identical first-order
// lags, each advanced with its exact zero-order-hold update.
class SicknessAccumulator {
 public:
  SicknessAccumulator(const AccumulatorParams& p, double dt);

  // Consumes the conflict held over the next step; returns MSI [%] at the
  // end of that step.
  double step(double conflict);
  double msi() const { return scale_ * y2_; }

 private:
  AccumulatorParams p_;
  double decay_, feed_1_, cross_, feed_2_, scale_;
  double y1_ = 0.0, y2_ = 0.0;
};

// MSI trace, channel "msi_percent" [%], from a "conflict" series starting at
// zero state. Sample k holds the MSI after conflict samples 0..k-1 were
// applied, so MSI(0) = 0. Throws kInvalidArgument for negative conflict.
TimeSeries accumulate(const TimeSeries& conflict, const AccumulatorParams& p);

struct SicknessSummary {
  double final_percent = 0.0;
  double peak_percent = 0.0;
  double threshold_percent = 0.0;
  std::optional<double> time_to_threshold_s;
};

SicknessSummary summarize(const TimeSeries& trace, double threshold_percent);

std::string summary_to_json(const SicknessSummary& s);

}  // namespace comfortsim

#endif  // COMFORTSIM_SICKNESS_HPP_
