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

#ifndef COMFORTSIM_TIMESERIES_HPP_
#define COMFORTSIM_TIMESERIES_HPP_

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Core>

namespace comfortsim {

inline constexpr std::string_view kUnitAccel = "m/s^2";
inline constexpr std::string_view kUnitRotVel = "rad/s";
inline constexpr std::string_view kUnitAngle = "rad";

struct Channel {
  std::string name;
  std::string unit;

  bool operator==(const Channel&) const = default;
};

// Uniformly sampled multi-channel signal. Rows are time steps, columns are
// channels. Immutable once constructed; the constructor enforces dt > 0, at
// least one row, matching column count and finite samples.
class TimeSeries {
 public:
  TimeSeries(double start_time, double dt, std::vector<Channel> channels,
             Eigen::MatrixXd samples);

  double start_time() const { return start_time_; }
  double dt() const { return dt_; }
  Eigen::Index size() const { return samples_.rows(); }
  Eigen::Index channel_count() const { return samples_.cols(); }
  double duration() const { return static_cast<double>(size() - 1) * dt_; }
  double time_at(Eigen::Index row) const {
    return start_time_ + static_cast<double>(row) * dt_;
  }

  const std::vector<Channel>& channels() const { return channels_; }
  const Eigen::MatrixXd& samples() const { return samples_; }

  std::optional<Eigen::Index> find(std::string_view name) const;
  // Throws Error(kMissingChannel) when absent.
  Eigen::Index index_of(std::string_view name) const;
  const Channel& channel(std::string_view name) const;
  Eigen::VectorXd column(std::string_view name) const;
  Eigen::VectorXd column(Eigen::Index index) const { return samples_.col(index); }

  // Subset of channels in the requested order.
  TimeSeries select(const std::vector<std::string>& names) const;

 private:
  double start_time_;
  double dt_;
  std::vector<Channel> channels_;
  Eigen::MatrixXd samples_;
};

// Builds a single-channel series.
TimeSeries make_series(double start_time, double dt, Channel channel,
                       const Eigen::VectorXd& values);

// Concatenates the channels of series that share start time, dt and length.
TimeSeries hstack(const std::vector<TimeSeries>& parts);

double rms(const Eigen::Ref<const Eigen::VectorXd>& x);

}  // namespace comfortsim

#endif  // COMFORTSIM_TIMESERIES_HPP_
