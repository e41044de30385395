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

#include "comfortsim/sickness.hpp"

#include <algorithm>
#include <cmath>

#include <json.hpp>

#include "comfortsim/error.hpp"

namespace comfortsim {

std::vector<std::string> validate_accumulator_params(const AccumulatorParams& p) {
  std::vector<std::string> errors;
  if (!(p.half_saturation_m_per_s2 > 0.0) || !std::isfinite(p.half_saturation_m_per_s2)) {
    errors.emplace_back("half_saturation_m_per_s2: must be > 0");
  }
  if (!(p.hill_exponent >= 1.0) || !std::isfinite(p.hill_exponent)) {
    errors.emplace_back("hill_exponent: must be >= 1");
  }
  if (!(p.time_constant_s > 0.0) || !std::isfinite(p.time_constant_s)) {
    errors.emplace_back("time_constant_s: must be > 0");
  }
  if (!(p.scale_percent > 0.0 && p.scale_percent <= 100.0)) {
    errors.emplace_back("scale_percent: must lie in (0, 100]");
  }
  return errors;
}

double hill(double conflict, const AccumulatorParams& p) {
  if (conflict <= 0.0) return 0.0;
  // Ratio form stays finite for very large conflicts.
  const double ratio = std::pow(p.half_saturation_m_per_s2 / conflict, p.hill_exponent);
  return 1.0 / (1.0 + ratio);
}

SicknessAccumulator::SicknessAccumulator(const AccumulatorParams& p, double dt) : p_(p) {
  if (auto errors = validate_accumulator_params(p); !errors.empty()) {
    throw Error(ErrorCode::kInvalidParameter, errors.front());
  }
  if (!(dt > 0.0)) throw Error(ErrorCode::kInvalidRate, "time step must be positive");
  const double r = dt / p.time_constant_s;
  decay_ = std::exp(-r);
  feed_1_ = -std::expm1(-r);
  cross_ = r * decay_;
  feed_2_ = feed_1_ - cross_;
  scale_ = p.scale_percent;
}

double SicknessAccumulator::step(double conflict) {
  const double h = hill(conflict, p_);
  const double y1 = decay_ * y1_ + feed_1_ * h;
  y2_ = decay_ * y2_ + cross_ * y1_ + feed_2_ * h;
  y1_ = y1;
  return msi();
}

TimeSeries accumulate(const TimeSeries& conflict, const AccumulatorParams& p) {
  const Eigen::VectorXd c = conflict.column("conflict");
  if ((c.array() < 0.0).any()) {
    throw Error(ErrorCode::kInvalidArgument, "conflict must be non-negative");
  }
  SicknessAccumulator acc(p, conflict.dt());
  Eigen::VectorXd msi(c.size());
  msi(0) = 0.0;
  for (Eigen::Index k = 1; k < c.size(); ++k) {
    msi(k) = std::clamp(acc.step(c(k - 1)), 0.0, 100.0);
  }
  return make_series(conflict.start_time(), conflict.dt(), {"msi_percent", "%"}, msi);
}

SicknessSummary summarize(const TimeSeries& trace, double threshold_percent) {
  const Eigen::VectorXd msi = trace.column("msi_percent");
  SicknessSummary s;
  s.threshold_percent = threshold_percent;
  s.final_percent = msi(msi.size() - 1);
  s.peak_percent = msi.maxCoeff();
  for (Eigen::Index k = 0; k < msi.size(); ++k) {
    if (msi(k) >= threshold_percent) {
      s.time_to_threshold_s = trace.time_at(k);
      break;
    }
  }
  return s;
}

std::string summary_to_json(const SicknessSummary& s) {
  nlohmann::ordered_json j;
  j["final_msi_percent"] = s.final_percent;
  j["peak_msi_percent"] = s.peak_percent;
  j["threshold_percent"] = s.threshold_percent;
  if (s.time_to_threshold_s) {
    j["time_to_threshold_s"] = *s.time_to_threshold_s;
  } else {
    j["time_to_threshold_s"] = nullptr;
  }
  return j.dump(2) + "\n";
}

}  // namespace comfortsim
