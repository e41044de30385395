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

// Seat + pelvis/trunk/head model linearised about its nominal posture.
//
// Generalised coordinates (all relative to the seat base, which translates
// but does not rotate):
//
//   0 seat_pelvis_x   1 seat_pelvis_y   2 seat_pelvis_z      [m]
//   3 pelvis_roll     4 pelvis_pitch                          [rad]
//   5 trunk_roll      6 trunk_pitch     7 trunk_yaw           [rad]
//   8 head_roll       9 head_pitch                            [rad]
//
// Angles are absolute (segment in space). The neck has no yaw freedom, so
// the head follows trunk yaw. The seat acts at the pelvis centre of mass;
// the optional backrest is a horizontal spring on the trunk.
//
// Equations of motion:
//
//   M q'' + C q' + K q = f_g + B a_seat - sum_i t_i u_i(t - d_i)
//   u_i = p_i . q + v_i . q'
//
// K includes the gravity (geometric) stiffness; each feedback channel i
// senses a linear combination u_i of the state and applies generalised
// force t_i after delay d_i.

#ifndef COMFORTSIM_BODY_MODEL_HPP_
#define COMFORTSIM_BODY_MODEL_HPP_

#include <complex>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "comfortsim/body_params.hpp"
#include "comfortsim/timeseries.hpp"

namespace comfortsim {

inline constexpr int kFullCoordinateCount = 10;
const std::vector<std::string>& full_coordinate_names();

struct FeedbackChannel {
  std::string name;
  Eigen::VectorXd position_gain;
  Eigen::VectorXd velocity_gain;
  Eigen::VectorXd torque_map;
  double delay_s = 0.0;
};

// y = Cq (q - q_eq) + Cv q' + Ca q'' + Db a_seat
struct OutputMap {
  std::vector<Channel> channels;
  Eigen::MatrixXd position;
  Eigen::MatrixXd velocity;
  Eigen::MatrixXd acceleration;
  Eigen::MatrixXd base;  // rows x 3
};

struct LinearizeOptions {
  int pade_order = 2;
  // Each delay is split into ceil(delay / max_section_delay_s) cascaded
  // Pade sections of `pade_order`.
  double max_section_delay_s = 0.02;
  // When > 0, delays are rounded to whole steps the way the simulator does.
  double dt = 0.0;
};

struct BuildOptions {
  bool check_stability = true;
  LinearizeOptions stability_check;
};

class ModelRealization;
namespace detail {
class Integrator;
}

ModelRealization build_model(const BodyParams& params, const PostureConfig& posture,
                             const BuildOptions& options = {});

// Immutable realisation; safe to share between threads.
class ModelRealization {
 public:
  Eigen::Index dof() const { return mass_.rows(); }
  const std::vector<std::string>& coordinates() const { return coordinates_; }
  Eigen::Index coordinate_index(std::string_view name) const;

  const Eigen::MatrixXd& mass() const { return mass_; }
  const Eigen::MatrixXd& damping() const { return damping_; }
  const Eigen::MatrixXd& stiffness() const { return stiffness_; }
  // K plus the proportional part of every feedback channel.
  const Eigen::MatrixXd& static_stiffness() const { return static_stiffness_; }
  const Eigen::MatrixXd& input_map() const { return input_map_; }
  const Eigen::VectorXd& gravity_load() const { return gravity_load_; }
  const std::vector<FeedbackChannel>& feedback() const { return feedback_; }
  const OutputMap& outputs() const { return outputs_; }
  const Eigen::VectorXd& equilibrium() const { return equilibrium_; }
  // Closed-loop eigenvalues of the Pade-approximated linearisation (empty
  // when the stability check was skipped).
  const Eigen::VectorXcd& eigenvalues() const { return eigenvalues_; }
  // Largest eigenvalue magnitude of the delay-free mechanical system [1/s];
  // bounds the usable explicit step.
  double max_rate() const { return max_rate_; }
  const BodyParams& params() const { return params_; }
  const PostureConfig& posture() const { return posture_; }

  // Human-readable coordinate table.
  std::string describe_layout() const;

  // Generalised acceleration for a given state, seat input and channel
  // signals (one per feedback channel, already delayed).
  Eigen::VectorXd acceleration(const Eigen::VectorXd& q, const Eigen::VectorXd& qd,
                               const Eigen::Vector3d& seat_accel,
                               const Eigen::VectorXd& channel_signals) const;

  // Kinetic + elastic + gravitational energy relative to equilibrium.
  double mechanical_energy(const Eigen::VectorXd& q, const Eigen::VectorXd& qd) const;

 private:
  friend ModelRealization build_model(const BodyParams&, const PostureConfig&,
                                      const BuildOptions&);
  friend class detail::Integrator;
  ModelRealization() = default;

  BodyParams params_;
  PostureConfig posture_;
  std::vector<std::string> coordinates_;
  Eigen::MatrixXd mass_, damping_, stiffness_, static_stiffness_, input_map_;
  Eigen::VectorXd gravity_load_, equilibrium_;
  std::vector<FeedbackChannel> feedback_;
  OutputMap outputs_;
  Eigen::VectorXcd eigenvalues_;
  double max_rate_ = 0.0;

  // Feedback signals stacked as u = P q + V q'; u_eq at equilibrium.
  Eigen::MatrixXd fb_position_, fb_velocity_;
  Eigen::VectorXd fb_equilibrium_;

  // Cached products with M^-1.
  Eigen::MatrixXd minv_k_, minv_c_, minv_b_, minv_t_;
};

// Static equilibrium of the loaded model: static_stiffness * q = f_g.
// Throws kNoEquilibrium when the load has a component the stiffness cannot
// balance.
Eigen::VectorXd static_equilibrium(const ModelRealization& model);

// Fixed-length history of one feedback signal.
class DelayLine {
 public:
  DelayLine() = default;
  DelayLine(int delay_steps, double fill);

  int delay_steps() const { return delay_steps_; }
  void push(double value);
  // Value pushed `lag` pushes ago (0 = most recent), lag <= delay_steps.
  double at_lag(int lag) const;
  // Delayed signal at fraction `c` in [0, 1] of the step that follows the
  // most recent push, linearly interpolated between stored samples.
  double delayed(double c) const;

 private:
  int delay_steps_ = 0;
  std::vector<double> ring_;
  std::size_t head_ = 0;
};

// Delays are quantised to whole steps: ceil(delay / dt) with a 1e-9
// tolerance so exact multiples are not rounded up.
int delay_steps(double delay_s, double dt);

struct BodyState {
  Eigen::VectorXd q;
  Eigen::VectorXd qd;
  std::vector<DelayLine> delay_lines;
  double time = 0.0;
  double dt = 0.0;
};

// Equilibrium state with delay lines filled with the equilibrium signals.
BodyState initial_state(const ModelRealization& model, double dt, double time = 0.0);

// One explicit 4th-order Runge-Kutta step. The seat acceleration is
// interpolated linearly from `seat_accel` at the step start to
// `seat_accel_next` at its end; delayed channel signals are interpolated
// from the delay lines. Throws kNonFiniteState on divergence.
BodyState step(const ModelRealization& model, const BodyState& state,
               const Eigen::Vector3d& seat_accel, const Eigen::Vector3d& seat_accel_next,
               double dt);
// Zero-order-hold variant.
BodyState step(const ModelRealization& model, const BodyState& state,
               const Eigen::Vector3d& seat_accel, double dt);

struct BodyResponse {
  TimeSeries series;
  double wall_clock_s = 0.0;

  double realtime_factor() const;
};

// Runs the model over seat_acc_x/y/z [m/s^2] from equilibrium. Output rows
// align with input rows; see OutputMap for channel definitions. Throws
// kUnstableStep when dt is too large for the explicit integrator.
BodyResponse simulate(const ModelRealization& model, const TimeSeries& seat_motion);

// Continuous-time state space of the linearised model with delays replaced
// by Pade sections. Inputs are seat accelerations x/y/z, outputs follow
// ModelRealization::outputs().
struct StateSpace {
  Eigen::MatrixXd a, b, c, d;
  std::vector<Channel> outputs;

  Eigen::VectorXcd eigenvalues() const;
  // outputs x 3 complex gains at one frequency.
  Eigen::MatrixXcd frequency_response(double freq_hz) const;
};

StateSpace linearize(const ModelRealization& model, const LinearizeOptions& options = {});

// Pade approximant of exp(-s * delay) realised as a SISO state space.
struct SisoStateSpace {
  Eigen::MatrixXd a;
  Eigen::VectorXd b, c;
  double d = 1.0;

  std::complex<double> response(double freq_hz) const;
};
SisoStateSpace pade_delay(double delay_s, int order, int sections = 1);

}  // namespace comfortsim

#endif  // COMFORTSIM_BODY_MODEL_HPP_
