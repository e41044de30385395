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

#include "comfortsim/perception.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/Geometry>

#include "comfortsim/body_model.hpp"
#include "comfortsim/error.hpp"

namespace comfortsim {
namespace {

using Eigen::Vector3d;

constexpr std::string_view kUnitless = "1";

std::vector<Channel> triple(const std::string& prefix, std::array<const char*, 3> suffix,
                            std::string_view unit) {
  std::vector<Channel> out;
  for (const char* s : suffix) out.push_back({prefix + "_" + s, std::string(unit)});
  return out;
}

const std::array<const char*, 3> kXyz = {"x", "y", "z"};
const std::array<const char*, 3> kRpy = {"roll", "pitch", "yaw"};

Eigen::Matrix<double, Eigen::Dynamic, 3> columns3(const TimeSeries& ts, const std::string& prefix,
                                                  std::array<const char*, 3> suffix) {
  Eigen::Matrix<double, Eigen::Dynamic, 3> out(ts.size(), 3);
  for (int a = 0; a < 3; ++a) out.col(a) = ts.column(ts.index_of(prefix + "_" + suffix[a]));
  return out;
}

void require_same_grid(const TimeSeries& a, const TimeSeries& b) {
  if (a.size() != b.size() || std::abs(a.dt() - b.dt()) > 1e-12 * a.dt()) {
    throw Error(ErrorCode::kRateMismatch, "inputs do not share one time grid");
  }
}

// Head-frame specific force for lab-frame acceleration and small roll/pitch.
Vector3d head_frame_force(const Vector3d& accel, double roll, double pitch, double g) {
  const Vector3d f = accel - g * Vector3d::UnitZ();
  const Vector3d phi(roll, pitch, 0.0);
  return f - phi.cross(f);
}

Vector3d rotate_toward(const Vector3d& from, const Vector3d& to, double fraction) {
  const double angle = std::acos(std::clamp(from.dot(to), -1.0, 1.0));
  if (angle < 1e-15 || fraction <= 0.0) return from;
  if (fraction >= 1.0) return to;
  Vector3d axis = from.cross(to);
  if (axis.norm() < 1e-15) {
    // Antipodal: any perpendicular axis works.
    axis = from.unitOrthogonal();
  }
  return (Eigen::AngleAxisd(fraction * angle, axis.normalized()) * from).normalized();
}

void check_degenerate_run(Eigen::Index run, double dt, const VestibularParams& p, double time) {
  if (static_cast<double>(run) * dt > p.degenerate_window_s) {
    throw Error(ErrorCode::kDegenerateInput,
                "specific force below " + std::to_string(p.degenerate_force_m_per_s2) +
                    " m/s^2 for more than " + std::to_string(p.degenerate_window_s) +
                    " s ending at t = " + std::to_string(time) + " s");
  }
}

}  // namespace

std::vector<std::string> validate_vestibular_params(const VestibularParams& p) {
  std::vector<std::string> errors;
  auto positive = [&](const char* key, double v) {
    if (!(v > 0.0) || !std::isfinite(v)) errors.push_back(std::string(key) + ": must be > 0");
  };
  auto non_negative = [&](const char* key, double v) {
    if (!(v >= 0.0) || !std::isfinite(v)) errors.push_back(std::string(key) + ": must be >= 0");
  };
  positive("scc_tau1_s", p.scc_tau1_s);
  positive("scc_tau2_s", p.scc_tau2_s);
  positive("sv_tau_s", p.sv_tau_s);
  non_negative("otolith_gain", p.otolith_gain);
  non_negative("visual_gain", p.visual_gain);
  non_negative("visual_delay_s", p.visual_delay_s);
  non_negative("anticipation_gain", p.anticipation_gain);
  non_negative("gravity_m_per_s2", p.gravity_m_per_s2);
  non_negative("degenerate_force_m_per_s2", p.degenerate_force_m_per_s2);
  positive("degenerate_window_s", p.degenerate_window_s);
  return errors;
}

SccFilter::SccFilter(const VestibularParams& p, double dt) {
  AnalogSection s;
  s.b0 = 0.0;
  s.b1 = p.scc_tau1_s;
  s.b2 = 0.0;
  s.a0 = 1.0;
  s.a1 = p.scc_tau1_s + p.scc_tau2_s;
  s.a2 = p.scc_tau1_s * p.scc_tau2_s;
  section_ = bilinear(s, 1.0 / dt);
}

Vector3d SccFilter::process(const Vector3d& omega) {
  return {state_[0].process(section_, omega.x()), state_[1].process(section_, omega.y()),
          state_[2].process(section_, omega.z())};
}

SubjectiveVerticalFilter::SubjectiveVerticalFilter(double tau_s, double dt,
                                                   double degenerate_force)
    : alpha_(1.0 - std::exp(-dt / tau_s)), dt_(dt), degenerate_force_(degenerate_force) {}

bool SubjectiveVerticalFilter::update(const Vector3d& specific_force, const Vector3d& omega) {
  const double magnitude = specific_force.norm();
  if (!(magnitude >= degenerate_force_) || magnitude == 0.0) return false;
  // A space-fixed direction turns by -omega in the head frame.
  const double angle = omega.norm() * dt_;
  Vector3d v = v_;
  if (angle > 0.0) v = Eigen::AngleAxisd(-angle, omega.normalized()) * v;
  const Vector3d target = -specific_force / magnitude;
  v += alpha_ * (target - v);
  const double norm = v.norm();
  // Exactly opposite target and estimate: keep the rotated estimate.
  v_ = norm > 1e-12 ? Vector3d(v / norm) : v_;
  return true;
}

TimeSeries scc_response(const TimeSeries& head_rotvel, const VestibularParams& p) {
  if (auto errors = validate_vestibular_params(p); !errors.empty()) {
    throw Error(ErrorCode::kInvalidParameter, errors.front());
  }
  const auto omega = columns3(head_rotvel, "head_rotvel", kRpy);
  SccFilter filter(p, head_rotvel.dt());
  Eigen::MatrixXd out(head_rotvel.size(), 3);
  for (Eigen::Index r = 0; r < out.rows(); ++r) {
    out.row(r) = filter.process(omega.row(r).transpose()).transpose();
  }
  return TimeSeries(head_rotvel.start_time(), head_rotvel.dt(),
                    triple("scc", kRpy, kUnitRotVel), std::move(out));
}

TimeSeries otolith_response(const TimeSeries& head_accel, const TimeSeries& head_orientation,
                            const VestibularParams& p) {
  require_same_grid(head_accel, head_orientation);
  const auto acc = columns3(head_accel, "head_acc", kXyz);
  const Eigen::VectorXd roll = head_orientation.column("head_angle_roll");
  const Eigen::VectorXd pitch = head_orientation.column("head_angle_pitch");
  Eigen::MatrixXd out(head_accel.size(), 3);
  for (Eigen::Index r = 0; r < out.rows(); ++r) {
    const Vector3d f =
        head_frame_force(acc.row(r).transpose(), roll(r), pitch(r), p.gravity_m_per_s2);
    out.row(r) = p.otolith_gain * f.transpose();
  }
  return TimeSeries(head_accel.start_time(), head_accel.dt(), triple("oto", kXyz, kUnitAccel),
                    std::move(out));
}

VerticalEstimate subjective_vertical(const TimeSeries& specific_force,
                                     const TimeSeries& angular_velocity,
                                     const VestibularParams& p) {
  require_same_grid(specific_force, angular_velocity);
  const auto f = columns3(specific_force, "oto", kXyz);
  const auto w = columns3(angular_velocity, "scc", kRpy);
  const double dt = specific_force.dt();
  SubjectiveVerticalFilter filter(p.sv_tau_s, dt, p.degenerate_force_m_per_s2);
  Eigen::MatrixXd out(specific_force.size(), 3);
  VerticalEstimate est{TimeSeries(0.0, 1.0, {{"_", ""}}, Eigen::MatrixXd::Zero(1, 1)), 0};
  Eigen::Index run = 0;
  out.row(0) = filter.vertical().transpose();
  for (Eigen::Index r = 1; r < out.rows(); ++r) {
    // Rotation over the interval uses its mean rate.
    const Vector3d omega = 0.5 * (w.row(r - 1) + w.row(r)).transpose();
    if (filter.update(f.row(r).transpose(), omega)) {
      run = 0;
    } else {
      ++est.degenerate_samples;
      check_degenerate_run(++run, dt, p, specific_force.time_at(r));
    }
    out.row(r) = filter.vertical().transpose();
  }
  est.series = TimeSeries(specific_force.start_time(), dt, triple("sv", kXyz, kUnitless),
                          std::move(out));
  return est;
}

TimeSeries internal_expectation(const TimeSeries& head_motion, const VestibularParams& p) {
  const Eigen::Index n = head_motion.size();
  const double dt = head_motion.dt();
  Eigen::MatrixXd out(n, 3);
  const double visual = p.vision_enabled ? std::clamp(p.visual_gain, 0.0, 1.0) : 0.0;
  const double anticipation = std::clamp(p.anticipation_gain, 0.0, 1.0);
  const double weight = 1.0 - (1.0 - visual) * (1.0 - anticipation);
  if (weight == 0.0) {
    out.rowwise() = Vector3d::UnitZ().transpose();
    return TimeSeries(head_motion.start_time(), dt, triple("ev", kXyz, kUnitless),
                      std::move(out));
  }

  const auto acc = columns3(head_motion, "head_acc", kXyz);
  const auto w = columns3(head_motion, "head_rotvel", kRpy);
  const Eigen::VectorXd roll = head_motion.column("head_angle_roll");
  const Eigen::VectorXd pitch = head_motion.column("head_angle_pitch");
  auto force = [&](Eigen::Index r) {
    return head_frame_force(acc.row(r).transpose(), roll(r), pitch(r), p.gravity_m_per_s2);
  };
  const Eigen::Index lag = p.vision_enabled ? delay_steps(p.visual_delay_s, dt) : 0;
  auto delayed = [&](Eigen::Index r) { return std::max<Eigen::Index>(0, r - lag); };

  SubjectiveVerticalFilter model(p.sv_tau_s, dt, p.degenerate_force_m_per_s2);
  const Vector3d f0 = force(0);
  if (f0.norm() >= p.degenerate_force_m_per_s2 && f0.norm() > 0.0) model.reset(-f0);
  for (Eigen::Index r = 0; r < n; ++r) {
    if (r > 0) {
      const Eigen::Index k = delayed(r);
      const Eigen::Index km = delayed(r - 1);
      model.update(force(k), 0.5 * (w.row(km) + w.row(k)).transpose());
    }
    out.row(r) = rotate_toward(Vector3d::UnitZ(), model.vertical(), weight).transpose();
  }
  return TimeSeries(head_motion.start_time(), dt, triple("ev", kXyz, kUnitless), std::move(out));
}

TimeSeries conflict(const TimeSeries& sensed_vertical, const TimeSeries& expected_vertical,
                    double gravity) {
  require_same_grid(sensed_vertical, expected_vertical);
  const auto s = columns3(sensed_vertical, "sv", kXyz);
  const auto e = columns3(expected_vertical, "ev", kXyz);
  Eigen::VectorXd c = gravity * (s - e).rowwise().norm();
  return make_series(sensed_vertical.start_time(), sensed_vertical.dt(),
                     {"conflict", std::string(kUnitAccel)}, c);
}

Perception perceive(const TimeSeries& head_motion, const VestibularParams& p) {
  if (auto errors = validate_vestibular_params(p); !errors.empty()) {
    throw Error(ErrorCode::kInvalidParameter, errors.front());
  }
  const TimeSeries scc = scc_response(head_motion, p);
  const TimeSeries oto = otolith_response(head_motion, head_motion, p);
  VerticalEstimate sv = subjective_vertical(oto, scc, p);
  const TimeSeries ev = internal_expectation(head_motion, p);
  Perception out{hstack({scc, oto, sv.series, ev}), conflict(sv.series, ev, p.gravity_m_per_s2),
                 sv.degenerate_samples};
  return out;
}

TimeSeries conflict_from_perceived(const TimeSeries& perceived, double gravity) {
  return conflict(perceived.select({"sv_x", "sv_y", "sv_z"}),
                  perceived.select({"ev_x", "ev_y", "ev_z"}), gravity);
}

}  // namespace comfortsim
