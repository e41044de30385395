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

// ISO 2631-1 style frequency weighting, weighted RMS and motion sickness
// dose value.

#ifndef COMFORTSIM_COMFORT_HPP_
#define COMFORTSIM_COMFORT_HPP_

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "comfortsim/filters.hpp"
#include "comfortsim/timeseries.hpp"
#include "comfortsim/weighting_table.hpp"

namespace comfortsim {

std::string_view to_string(WeightingKind kind);
std::optional<WeightingKind> parse_weighting_kind(std::string_view s);

// Analog band-limiting, transition and upward-step sections of a weighting,
// in cascade order. The low-pass is omitted when `drop_lowpass` is set.
std::vector<AnalogSection> weighting_sections(WeightingKind kind, bool drop_lowpass = false);

class WeightingFilter {
 public:
  WeightingKind kind() const { return kind_; }
  double sample_rate() const { return sample_rate_; }
  const BiquadCascade& cascade() const { return cascade_; }
  const std::vector<AnalogSection>& analog() const { return analog_; }
  double dc_gain() const;
  // Digital magnitude at f.
  double magnitude(double freq_hz) const;
  // Time constant of the slowest section, 1 / (2 pi f_min).
  double settling_time_constant() const { return tau_; }

  Eigen::VectorXd filter(const Eigen::Ref<const Eigen::VectorXd>& x) const;

 private:
  friend WeightingFilter design_weighting(WeightingKind kind, double sample_rate);
  WeightingKind kind_ = WeightingKind::kWk;
  double sample_rate_ = 0.0;
  double tau_ = 0.0;
  BiquadCascade cascade_;
  std::vector<AnalogSection> analog_;
};

// Digital cascade by a prewarped bilinear transform of each section. The
// low-pass band limit is dropped when it lies at or above 0.45 of the
// sample rate. Throws kUnsupportedRate below 50 Hz (Wk, Wd) or 10 Hz (Wf).
WeightingFilter design_weighting(WeightingKind kind, double sample_rate);

struct RmsOptions {
  // Discards the first three settling time constants of filter output.
  bool trim_settling = false;
};

// RMS of the weighted channel. Throws kUnitMismatch unless the channel is
// in m/s^2 and kRateMismatch unless its rate equals the filter's.
double weighted_rms(const TimeSeries& ts, std::string_view channel, const WeightingFilter& w,
                    const RmsOptions& options = {});

struct Msdv {
  double msdv_m_per_s15 = 0.0;
  double iso_msi_percent = 0.0;
};

inline constexpr double kDefaultMsdvConstant = 1.0 / 3.0;

// sqrt(sum a_w^2 dt) of the Wf-weighted channel and km * MSDV clipped at 100.
Msdv msdv(const TimeSeries& ts, std::string_view channel, const WeightingFilter& wf,
          double km = kDefaultMsdvConstant);

struct MetricsOptions {
  double km = kDefaultMsdvConstant;
  bool trim_settling = false;
  // Horizontal channels use horizontal_weighting, vertical ones
  // vertical_weighting; msdv always uses Wf on the vertical channel.
  WeightingKind horizontal_weighting = WeightingKind::kWd;
  WeightingKind vertical_weighting = WeightingKind::kWk;
};

struct ChannelRms {
  std::string channel;
  WeightingKind weighting;
  double rms_m_per_s2;
};

struct ComfortReport {
  std::string location;
  std::vector<ChannelRms> weighted_rms;
  double msdv_m_per_s15 = 0.0;
  double iso_msi_percent = 0.0;
  double duration_s = 0.0;
};

// Weighted RMS of <prefix>_acc_x/y/z plus MSDV on <prefix>_acc_z.
ComfortReport comfort_report(const TimeSeries& ts, std::string_view prefix,
                             const MetricsOptions& options = {});

std::string comfort_report_to_json(const ComfortReport& report);

// `freq_hz,magnitude` for verification plots.
void write_weighting_curve(const std::filesystem::path& path, const WeightingFilter& w,
                           const Eigen::VectorXd& freqs);

}  // namespace comfortsim

#endif  // COMFORTSIM_COMFORT_HPP_
