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

// Vestibular sensing and subjective-vertical conflict.
//
// Frames: z up, specific force f = a - g_z e_z, so an upright stationary
// head senses (0, 0, -9.81). Head orientation enters as small roll/pitch
// angles; the vertical estimate v is the unit vector opposite to the
// sensed specific force, expressed in the head frame.

#ifndef COMFORTSIM_PERCEPTION_HPP_
#define COMFORTSIM_PERCEPTION_HPP_

#include <string>
#include <vector>

#include <Eigen/Core>

#include "comfortsim/filters.hpp"
#include "comfortsim/timeseries.hpp"

namespace comfortsim {

struct VestibularParams {
  double scc_tau1_s = 5.7;
  double scc_tau2_s = 0.005;
  double otolith_gain = 1.0;
  double sv_tau_s = 5.0;
  bool vision_enabled = false;
  // Weight of the visually driven expectation, clamped to [0, 1].
  double visual_gain = 1.0;
  double visual_delay_s = 0.15;
  // Blends the same internal model into the expectation without vision;
  // 0 disables it.
  double anticipation_gain = 0.0;
  double gravity_m_per_s2 = 9.81;
  // Specific-force magnitudes below this carry the previous estimate.
  double degenerate_force_m_per_s2 = 0.1;
  // Longest tolerated run of degenerate samples.
  double degenerate_window_s = 1.0;
};

// "key: reason" strings; empty when valid.
std::vector<std::string> validate_vestibular_params(const VestibularParams& p);

// Semicircular canal: tau1 s / ((1 + tau1 s)(1 + tau2 s)) per axis,
// Tustin-discretised, zero initial state.
class SccFilter {
 public:
  SccFilter(const VestibularParams& p, double dt);

  Eigen::Vector3d process(const Eigen::Vector3d& omega);
  const Biquad& section() const { return section_; }

 private:
  Biquad section_;
  std::array<BiquadState, 3> state_{};
};

// Low-pass of the specific-force direction with time constant tau, carried
// along by the angular velocity between samples.
class SubjectiveVerticalFilter {
 public:
  SubjectiveVerticalFilter(double tau_s, double dt, double degenerate_force);

  void reset(const Eigen::Vector3d& v) { v_ = v.normalized(); }
  // Advances one sample; returns false when the sample was degenerate and
  // the previous estimate was kept.
  bool update(const Eigen::Vector3d& specific_force, const Eigen::Vector3d& omega);
  const Eigen::Vector3d& vertical() const { return v_; }

 private:
  double alpha_;
  double dt_;
  double degenerate_force_;
  Eigen::Vector3d v_ = Eigen::Vector3d::UnitZ();
};

// Sensed angular velocity from head_rotvel_roll/pitch/yaw; channels
// scc_roll/pitch/yaw [rad/s].
TimeSeries scc_response(const TimeSeries& head_rotvel, const VestibularParams& p);

// Head-frame specific force from head_acc_x/y/z and head_angle_roll/pitch;
// channels oto_x/y/z [m/s^2], scaled by the otolith gain.
TimeSeries otolith_response(const TimeSeries& head_accel, const TimeSeries& head_orientation,
                            const VestibularParams& p);

struct VerticalEstimate {
  TimeSeries series;  // <prefix>_x/y/z, unit "1"
  Eigen::Index degenerate_samples = 0;
};

// Sensed vertical from oto_x/y/z and scc_roll/pitch/yaw, starting at
// (0, 0, 1). Throws kDegenerateInput when degenerate samples persist longer
// than degenerate_window_s.
VerticalEstimate subjective_vertical(const TimeSeries& specific_force,
                                     const TimeSeries& angular_velocity,
                                     const VestibularParams& p);

// Expected vertical ev_x/y/z from the head motion channels. The prior is
// the upright (0, 0, 1). With vision (or anticipation) the expectation is
// rotated toward an internal subjective-vertical estimate driven by the
// true head-frame specific force and true angular velocity, delayed by the
// visual delay and started from the first sample's direction; the rotation
// fraction is the visual gain. A static tilt is therefore fully compensated
// at gain 1 and half compensated at gain 0.5.
TimeSeries internal_expectation(const TimeSeries& head_motion, const VestibularParams& p);

// g * |sensed - expected| per sample, channel "conflict" [m/s^2].
TimeSeries conflict(const TimeSeries& sensed_vertical, const TimeSeries& expected_vertical,
                    double gravity = 9.81);

struct Perception {
  // scc_*, oto_*, sv_*, ev_* channels.
  TimeSeries perceived;
  TimeSeries conflict;
  Eigen::Index degenerate_samples = 0;
};

// Full chain on a body response containing head_acc_*, head_rotvel_* and
// head_angle_roll/pitch.
Perception perceive(const TimeSeries& head_motion, const VestibularParams& p);

// Conflict recomputed from a perceived-state series (sv_* and ev_*).
TimeSeries conflict_from_perceived(const TimeSeries& perceived, double gravity = 9.81);

}  // namespace comfortsim

#endif  // COMFORTSIM_PERCEPTION_HPP_
