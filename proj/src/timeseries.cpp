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

#include "comfortsim/timeseries.hpp"

#include <cmath>
#include <utility>

#include "comfortsim/error.hpp"

namespace comfortsim {

TimeSeries::TimeSeries(double start_time, double dt,
                       std::vector<Channel> channels, Eigen::MatrixXd samples)
    : start_time_(start_time),
      dt_(dt),
      channels_(std::move(channels)),
      samples_(std::move(samples)) {
  if (!(dt_ > 0.0) || !std::isfinite(dt_)) {
    throw Error(ErrorCode::kInvalidRate,
                "time step must be positive, got " + std::to_string(dt_));
  }
  if (!std::isfinite(start_time_)) {
    throw Error(ErrorCode::kInvalidArgument, "start time must be finite");
  }
  if (samples_.rows() < 1) {
    throw Error(ErrorCode::kEmptyFile, "time series has no samples");
  }
  if (static_cast<Eigen::Index>(channels_.size()) != samples_.cols()) {
    throw Error(ErrorCode::kInvalidArgument,
                "channel list size does not match sample columns");
  }
  for (Eigen::Index c = 0; c < samples_.cols(); ++c) {
    for (Eigen::Index r = 0; r < samples_.rows(); ++r) {
      if (!std::isfinite(samples_(r, c))) {
        throw Error(ErrorCode::kNonFiniteSample,
                    "channel '" + channels_[c].name + "' row " +
                        std::to_string(r));
      }
    }
  }
}

std::optional<Eigen::Index> TimeSeries::find(std::string_view name) const {
  for (std::size_t i = 0; i < channels_.size(); ++i) {
    if (channels_[i].name == name) return static_cast<Eigen::Index>(i);
  }
  return std::nullopt;
}

Eigen::Index TimeSeries::index_of(std::string_view name) const {
  auto idx = find(name);
  if (!idx) {
    throw Error(ErrorCode::kMissingChannel,
                "channel '" + std::string(name) + "' not present");
  }
  return *idx;
}

const Channel& TimeSeries::channel(std::string_view name) const {
  return channels_[static_cast<std::size_t>(index_of(name))];
}

Eigen::VectorXd TimeSeries::column(std::string_view name) const {
  return samples_.col(index_of(name));
}

TimeSeries TimeSeries::select(const std::vector<std::string>& names) const {
  std::vector<Channel> chans;
  Eigen::MatrixXd out(size(), static_cast<Eigen::Index>(names.size()));
  for (std::size_t i = 0; i < names.size(); ++i) {
    const auto idx = index_of(names[i]);
    chans.push_back(channels_[static_cast<std::size_t>(idx)]);
    out.col(static_cast<Eigen::Index>(i)) = samples_.col(idx);
  }
  return TimeSeries(start_time_, dt_, std::move(chans), std::move(out));
}

TimeSeries make_series(double start_time, double dt, Channel channel,
                       const Eigen::VectorXd& values) {
  return TimeSeries(start_time, dt, {std::move(channel)}, values);
}

TimeSeries hstack(const std::vector<TimeSeries>& parts) {
  if (parts.empty()) {
    throw Error(ErrorCode::kInvalidArgument, "hstack of zero series");
  }
  const auto& first = parts.front();
  Eigen::Index cols = 0;
  for (const auto& p : parts) {
    if (p.size() != first.size() || p.dt() != first.dt() ||
        p.start_time() != first.start_time()) {
      throw Error(ErrorCode::kInvalidArgument,
                  "hstack requires identical time grids");
    }
    cols += p.channel_count();
  }
  Eigen::MatrixXd out(first.size(), cols);
  std::vector<Channel> chans;
  Eigen::Index c = 0;
  for (const auto& p : parts) {
    out.middleCols(c, p.channel_count()) = p.samples();
    c += p.channel_count();
    chans.insert(chans.end(), p.channels().begin(), p.channels().end());
  }
  return TimeSeries(first.start_time(), first.dt(), std::move(chans),
                    std::move(out));
}

double rms(const Eigen::Ref<const Eigen::VectorXd>& x) {
  if (x.size() == 0) return 0.0;
  return std::sqrt(x.squaredNorm() / static_cast<double>(x.size()));
}

}  // namespace comfortsim
