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

#include "comfortsim/resample.hpp"

#include <algorithm>
#include <cmath>

#include "comfortsim/error.hpp"
#include "comfortsim/filters.hpp"

namespace comfortsim {
namespace {

double catmull_rom(const Eigen::VectorXd& x, double pos) {
  const Eigen::Index n = x.size();
  if (n == 1) return x(0);
  auto at = [&](Eigen::Index i) { return x(std::clamp<Eigen::Index>(i, 0, n - 1)); };
  auto i1 = static_cast<Eigen::Index>(std::floor(pos));
  i1 = std::clamp<Eigen::Index>(i1, 0, n - 2);
  const double t = pos - static_cast<double>(i1);
  const double p0 = at(i1 - 1), p1 = at(i1), p2 = at(i1 + 1), p3 = at(i1 + 2);
  // Endpoint slopes fall back to one-sided differences.
  const double m1 = (i1 == 0) ? (p2 - p1) : 0.5 * (p2 - p0);
  const double m2 = (i1 + 2 > n - 1) ? (p2 - p1) : 0.5 * (p3 - p1);
  const double t2 = t * t, t3 = t2 * t;
  return (2 * t3 - 3 * t2 + 1) * p1 + (t3 - 2 * t2 + t) * m1 + (-2 * t3 + 3 * t2) * p2 +
         (t3 - t2) * m2;
}

}  // namespace

TimeSeries resample(const TimeSeries& ts, double new_dt) {
  if (!(new_dt > 0.0) || !std::isfinite(new_dt)) {
    throw Error(ErrorCode::kInvalidRate, "new time step must be positive");
  }
  if (new_dt == ts.dt()) return ts;

  const double ratio = new_dt / ts.dt();
  const auto new_n = static_cast<Eigen::Index>(std::floor(ts.duration() / new_dt + 1e-9)) + 1;

  Eigen::MatrixXd source = ts.samples();
  if (new_dt > ts.dt()) {
    const double fs = 1.0 / ts.dt();
    const double cutoff = 0.4 / new_dt;
    if (cutoff < 0.5 * fs) {
      const BiquadCascade aa = butterworth_lowpass(4, cutoff, fs);
      for (Eigen::Index c = 0; c < source.cols(); ++c) {
        source.col(c) = aa.filtfilt(source.col(c));
      }
    }
  }

  Eigen::MatrixXd out(new_n, source.cols());
  for (Eigen::Index c = 0; c < source.cols(); ++c) {
    const Eigen::VectorXd col = source.col(c);
    for (Eigen::Index r = 0; r < new_n; ++r) {
      const double pos = static_cast<double>(r) * ratio;
      const double nearest = std::round(pos);
      // Exact grid hits skip interpolation so identical samples stay identical.
      if (std::abs(pos - nearest) < 1e-9 && nearest < static_cast<double>(col.size())) {
        out(r, c) = col(static_cast<Eigen::Index>(nearest));
      } else {
        out(r, c) = catmull_rom(col, pos);
      }
    }
  }
  return TimeSeries(ts.start_time(), new_dt, ts.channels(), std::move(out));
}

}  // namespace comfortsim
