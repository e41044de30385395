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

#include "comfortsim/body_model.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <iomanip>
#include <sstream>

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>
#include <Eigen/QR>

#include "comfortsim/error.hpp"

namespace comfortsim {
namespace {

constexpr int kN = kFullCoordinateCount;
using Sel = Eigen::Matrix<double, 3, kN>;
using Eigen::Matrix3d;
using Eigen::MatrixXd;
using Eigen::Vector3d;
using Eigen::VectorXd;

// Largest |lambda| * dt an explicit RK4 step tolerates on oscillatory modes.
constexpr double kRk4StabilityLimit = 2.75;
constexpr double kMaxEquilibriumAngle = 0.35;

Matrix3d skew(const Vector3d& r) {
  Matrix3d s;
  s << 0.0, -r.z(), r.y(), r.z(), 0.0, -r.x(), -r.y(), r.x(), 0.0;
  return s;
}

Vector3d axis(double pitch) { return {std::sin(pitch), 0.0, std::cos(pitch)}; }

// Kinematics of the full 10-coordinate layout.
struct Geometry {
  Sel t = Sel::Zero();
  Sel sp = Sel::Zero(), st = Sel::Zero(), sh = Sel::Zero();
  Sel jp, jl, jt, jc, jh, jb;
  Vector3d r_pl, r_lt, r_lc, r_ch;
  bool has_backrest = false;
};

Geometry make_geometry(const BodyParams& p, const PostureConfig& posture) {
  Geometry g;
  g.t.block<3, 3>(0, 0).setIdentity();
  g.sp(0, 3) = 1.0;
  g.sp(1, 4) = 1.0;
  g.st(0, 5) = 1.0;
  g.st(1, 6) = 1.0;
  g.st(2, 7) = 1.0;
  g.sh(0, 8) = 1.0;
  g.sh(1, 9) = 1.0;
  g.sh(2, 7) = 1.0;  // head yaw follows the trunk

  g.r_pl = p.pelvis_to_l5s1_m * axis(posture.pelvis_pitch_rad);
  g.r_lt = p.l5s1_to_trunk_com_m * axis(posture.trunk_pitch_rad);
  g.r_lc = p.l5s1_to_c7t1_m * axis(posture.trunk_pitch_rad);
  g.r_ch = p.c7t1_to_head_com_m * axis(posture.head_pitch_rad);

  g.jp = g.t;
  g.jl = g.t - skew(g.r_pl) * g.sp;
  g.jt = g.jl - skew(g.r_lt) * g.st;
  g.jc = g.jl - skew(g.r_lc) * g.st;
  g.jh = g.jc - skew(g.r_ch) * g.sh;

  if (posture.backrest != BackrestContact::kNone) {
    const double height = posture.backrest == BackrestContact::kLow ? p.backrest_low_height_m
                                                                    : p.backrest_high_height_m;
    const double along = (height - g.r_pl.z()) / std::cos(posture.trunk_pitch_rad);
    if (!(along > 0.0) || along > p.l5s1_to_c7t1_m) {
      throw Error(ErrorCode::kInvalidParameter,
                  "backrest height " + std::to_string(height) +
                      " m does not meet the trunk between L5S1 and C7T1");
    }
    g.jb = g.jl - skew(along * axis(posture.trunk_pitch_rad)) * g.st;
    g.has_backrest = true;
  }
  return g;
}

// Second derivative of the gravitational potential of a point mass carried
// at offset r by a small rotation selected by s.
MatrixXd geometric_stiffness(const Vector3d& r, const Sel& s, double weight) {
  const Vector3d ez = Vector3d::UnitZ();
  const Matrix3d outer = ez * r.transpose();
  const Matrix3d h = 0.5 * (outer + outer.transpose()) - r.z() * Matrix3d::Identity();
  return weight * s.transpose() * h * s;
}

// Adds k * a^T a for each row a of `rows` scaled by the matching gain.
void add_row_springs(MatrixXd& target, const Sel& rows, const Vector3d& gains) {
  for (int i = 0; i < 3; ++i) {
    if (gains(i) != 0.0) {
      target += gains(i) * rows.row(i).transpose() * rows.row(i);
    }
  }
}

struct FullChannel {
  std::string name;
  Eigen::Matrix<double, kN, 1> position, velocity, torque;
  double delay = 0.0;
};

std::vector<FullChannel> full_feedback(const BodyParams& p, const Geometry& g) {
  const Sel lumbar = g.st - g.sp;
  const Sel neck = g.sh - g.st;
  std::vector<FullChannel> out;
  auto add = [&](std::string name, const Sel& sensed, const Sel& actuated, int row, double kp,
                 double kd, double delay) {
    if (kp == 0.0 && kd == 0.0) return;
    FullChannel c;
    c.name = std::move(name);
    c.position = kp * sensed.row(row).transpose();
    c.velocity = kd * sensed.row(row).transpose();
    c.torque = actuated.row(row).transpose();
    c.delay = delay;
    out.push_back(std::move(c));
  };
  const double dp = p.proprioceptive_delay_s;
  const double dv = p.vestibular_delay_s;
  add("proprio_lumbar_roll", lumbar, lumbar, 0, p.proprio_lumbar_kp_roll_Nm_per_rad,
      p.proprio_lumbar_kd_roll_Nms_per_rad, dp);
  add("proprio_lumbar_pitch", lumbar, lumbar, 1, p.proprio_lumbar_kp_pitch_Nm_per_rad,
      p.proprio_lumbar_kd_pitch_Nms_per_rad, dp);
  add("proprio_lumbar_yaw", lumbar, lumbar, 2, p.proprio_lumbar_kp_yaw_Nm_per_rad,
      p.proprio_lumbar_kd_yaw_Nms_per_rad, dp);
  add("proprio_neck_roll", neck, neck, 0, p.proprio_neck_kp_roll_Nm_per_rad,
      p.proprio_neck_kd_roll_Nms_per_rad, dp);
  add("proprio_neck_pitch", neck, neck, 1, p.proprio_neck_kp_pitch_Nm_per_rad,
      p.proprio_neck_kd_pitch_Nms_per_rad, dp);
  add("vestibular_lumbar_roll", g.st, lumbar, 0, p.vestibular_lumbar_kp_roll_Nm_per_rad,
      p.vestibular_lumbar_kd_roll_Nms_per_rad, dv);
  add("vestibular_lumbar_pitch", g.st, lumbar, 1, p.vestibular_lumbar_kp_pitch_Nm_per_rad,
      p.vestibular_lumbar_kd_pitch_Nms_per_rad, dv);
  add("vestibular_neck_roll", g.sh, neck, 0, p.vestibular_neck_kp_roll_Nm_per_rad,
      p.vestibular_neck_kd_roll_Nms_per_rad, dv);
  add("vestibular_neck_pitch", g.sh, neck, 1, p.vestibular_neck_kp_pitch_Nm_per_rad,
      p.vestibular_neck_kd_pitch_Nms_per_rad, dv);
  if (p.vision_feedback_enabled) {
    add("visual_neck_roll", g.sh, neck, 0, p.visual_neck_kp_roll_Nm_per_rad, 0.0,
        p.visual_delay_s);
    add("visual_neck_pitch", g.sh, neck, 1, p.visual_neck_kp_pitch_Nm_per_rad, 0.0,
        p.visual_delay_s);
  }
  return out;
}

OutputMap full_outputs(const Geometry& g) {
  OutputMap o;
  const std::array<std::pair<const char*, const Sel*>, 3> points = {
      {{"pelvis", &g.jp}, {"trunk", &g.jt}, {"head", &g.jh}}};
  const std::array<const char*, 3> xyz = {"x", "y", "z"};
  const std::array<const char*, 3> rpy = {"roll", "pitch", "yaw"};
  constexpr int rows = 22;
  o.position = MatrixXd::Zero(rows, kN);
  o.velocity = MatrixXd::Zero(rows, kN);
  o.acceleration = MatrixXd::Zero(rows, kN);
  o.base = MatrixXd::Zero(rows, 3);
  int r = 0;
  for (const auto& [name, jac] : points) {
    for (int a = 0; a < 3; ++a, ++r) {
      o.channels.push_back({std::string(name) + "_acc_" + xyz[a], std::string(kUnitAccel)});
      o.acceleration.row(r) = jac->row(a);
      o.base(r, a) = 1.0;
    }
  }
  for (const auto& [name, sel] : {std::pair{"trunk", &g.st}, std::pair{"head", &g.sh}}) {
    for (int a = 0; a < 3; ++a, ++r) {
      o.channels.push_back({std::string(name) + "_rotvel_" + rpy[a], std::string(kUnitRotVel)});
      o.velocity.row(r) = sel->row(a);
    }
  }
  const Sel lumbar = g.st - g.sp;
  const Sel neck = g.sh - g.st;
  auto angle = [&](const std::string& name, const Sel& sel, int a) {
    o.channels.push_back({name + "_angle_" + rpy[a], std::string(kUnitAngle)});
    o.position.row(r++) = sel.row(a);
  };
  angle("head", g.sh, 0);
  angle("head", g.sh, 1);
  angle("lumbar", lumbar, 0);
  angle("lumbar", lumbar, 1);
  angle("lumbar", lumbar, 2);
  angle("neck", neck, 0);
  angle("neck", neck, 1);
  return o;
}

std::string join(const std::vector<std::string>& items, std::string_view sep) {
  std::string out;
  for (std::size_t i = 0; i < items.size(); ++i) {
    if (i) out += sep;
    out += items[i];
  }
  return out;
}

std::string format_mode(const Eigen::VectorXcd& vec, const std::vector<std::string>& names) {
  const Eigen::Index n = static_cast<Eigen::Index>(names.size());
  const double peak = vec.head(n).cwiseAbs().maxCoeff();
  std::vector<std::pair<double, Eigen::Index>> parts;
  for (Eigen::Index i = 0; i < n; ++i) parts.emplace_back(std::abs(vec(i)) / peak, i);
  std::sort(parts.begin(), parts.end(), [](auto a, auto b) { return a.first > b.first; });
  std::ostringstream os;
  os << std::setprecision(3);
  for (std::size_t k = 0; k < parts.size() && k < 4; ++k) {
    if (parts[k].first < 0.05) break;
    if (k) os << ", ";
    os << names[static_cast<std::size_t>(parts[k].second)] << " " << parts[k].first;
  }
  return os.str();
}

}  // namespace

const std::vector<std::string>& full_coordinate_names() {
  static const std::vector<std::string> names = {
      "seat_pelvis_x", "seat_pelvis_y", "seat_pelvis_z", "pelvis_roll", "pelvis_pitch",
      "trunk_roll",    "trunk_pitch",   "trunk_yaw",     "head_roll",   "head_pitch"};
  return names;
}

ModelRealization build_model(const BodyParams& params, const PostureConfig& posture,
                             const BuildOptions& options) {
  if (auto errors = validate_body_params(params); !errors.empty()) {
    throw Error(ErrorCode::kInvalidParameter, join(errors, "; "));
  }
  const auto& all_names = full_coordinate_names();
  std::vector<bool> locked(kN, false);
  for (const auto& name : params.locked_coordinates) {
    auto it = std::find(all_names.begin(), all_names.end(), name);
    if (it == all_names.end()) {
      throw Error(ErrorCode::kInvalidParameter, "unknown locked coordinate '" + name + "'");
    }
    locked[static_cast<std::size_t>(it - all_names.begin())] = true;
  }

  const BodyParams& p = params;
  const Geometry g = make_geometry(p, posture);
  const double grav = p.gravity_m_per_s2;
  const double mp = p.pelvis_mass_kg, mt = p.trunk_mass_kg, mh = p.head_mass_kg;

  MatrixXd mass = MatrixXd::Zero(kN, kN);
  mass += mp * g.jp.transpose() * g.jp;
  mass += mt * g.jt.transpose() * g.jt;
  mass += mh * g.jh.transpose() * g.jh;
  const Matrix3d ip = Vector3d(p.pelvis_inertia_roll_kgm2, p.pelvis_inertia_pitch_kgm2, 0.0)
                          .asDiagonal();
  const Matrix3d it = Vector3d(p.trunk_inertia_roll_kgm2, p.trunk_inertia_pitch_kgm2,
                               p.trunk_inertia_yaw_kgm2)
                          .asDiagonal();
  const Matrix3d ih = Vector3d(p.head_inertia_roll_kgm2, p.head_inertia_pitch_kgm2,
                               p.head_inertia_yaw_kgm2)
                          .asDiagonal();
  mass += g.sp.transpose() * ip * g.sp;
  mass += g.st.transpose() * it * g.st;
  mass += g.sh.transpose() * ih * g.sh;

  MatrixXd input = -(mp * g.jp.transpose() + mt * g.jt.transpose() + mh * g.jh.transpose());
  VectorXd gravity = grav * input.col(2);

  MatrixXd stiff = MatrixXd::Zero(kN, kN);
  MatrixXd damp = MatrixXd::Zero(kN, kN);
  const Sel lumbar = g.st - g.sp;
  const Sel neck = g.sh - g.st;
  add_row_springs(stiff, g.t,
                  {p.seat_stiffness_x_N_per_m, p.seat_stiffness_y_N_per_m,
                   p.seat_stiffness_z_N_per_m});
  add_row_springs(damp, g.t,
                  {p.seat_damping_x_Ns_per_m, p.seat_damping_y_Ns_per_m,
                   p.seat_damping_z_Ns_per_m});
  add_row_springs(stiff, g.sp,
                  {p.seat_pelvis_stiffness_roll_Nm_per_rad,
                   p.seat_pelvis_stiffness_pitch_Nm_per_rad, 0.0});
  add_row_springs(damp, g.sp,
                  {p.seat_pelvis_damping_roll_Nms_per_rad, p.seat_pelvis_damping_pitch_Nms_per_rad,
                   0.0});
  add_row_springs(stiff, lumbar,
                  {p.lumbar_stiffness_roll_Nm_per_rad, p.lumbar_stiffness_pitch_Nm_per_rad,
                   p.lumbar_stiffness_yaw_Nm_per_rad});
  add_row_springs(damp, lumbar,
                  {p.lumbar_damping_roll_Nms_per_rad, p.lumbar_damping_pitch_Nms_per_rad,
                   p.lumbar_damping_yaw_Nms_per_rad});
  add_row_springs(stiff, neck,
                  {p.neck_stiffness_roll_Nm_per_rad, p.neck_stiffness_pitch_Nm_per_rad, 0.0});
  add_row_springs(damp, neck,
                  {p.neck_damping_roll_Nms_per_rad, p.neck_damping_pitch_Nms_per_rad, 0.0});
  if (g.has_backrest) {
    add_row_springs(stiff, g.jb, {p.backrest_stiffness_N_per_m, p.backrest_stiffness_N_per_m, 0.0});
    add_row_springs(damp, g.jb, {p.backrest_damping_Ns_per_m, p.backrest_damping_Ns_per_m, 0.0});
  }
  if (grav != 0.0) {
    stiff += geometric_stiffness(g.r_pl, g.sp, grav * (mt + mh));
    stiff += geometric_stiffness(g.r_lt, g.st, grav * mt);
    stiff += geometric_stiffness(g.r_lc, g.st, grav * mh);
    stiff += geometric_stiffness(g.r_ch, g.sh, grav * mh);
  }

  // Reduce to the free coordinates: q_full = sel * q.
  std::vector<int> free_idx;
  for (int i = 0; i < kN; ++i) {
    if (!locked[static_cast<std::size_t>(i)]) free_idx.push_back(i);
  }
  if (free_idx.empty()) {
    throw Error(ErrorCode::kInvalidParameter, "every coordinate is locked");
  }
  const auto n = static_cast<Eigen::Index>(free_idx.size());
  MatrixXd sel = MatrixXd::Zero(kN, n);
  for (Eigen::Index j = 0; j < n; ++j) sel(free_idx[static_cast<std::size_t>(j)], j) = 1.0;

  ModelRealization m;
  m.params_ = params;
  m.posture_ = posture;
  for (int i : free_idx) m.coordinates_.push_back(all_names[static_cast<std::size_t>(i)]);
  m.mass_ = sel.transpose() * mass * sel;
  m.damping_ = sel.transpose() * damp * sel;
  m.stiffness_ = sel.transpose() * stiff * sel;
  m.input_map_ = sel.transpose() * input;
  m.gravity_load_ = sel.transpose() * gravity;

  for (const auto& fc : full_feedback(p, g)) {
    FeedbackChannel c;
    c.name = fc.name;
    c.position_gain = sel.transpose() * fc.position;
    c.velocity_gain = sel.transpose() * fc.velocity;
    c.torque_map = sel.transpose() * fc.torque;
    c.delay_s = fc.delay;
    const bool senses = c.position_gain.any() || c.velocity_gain.any();
    if (senses && c.torque_map.any()) m.feedback_.push_back(std::move(c));
  }
  const auto nch = static_cast<Eigen::Index>(m.feedback_.size());
  m.fb_position_.resize(nch, n);
  m.fb_velocity_.resize(nch, n);
  MatrixXd torque(n, nch);
  m.static_stiffness_ = m.stiffness_;
  for (Eigen::Index i = 0; i < nch; ++i) {
    const auto& c = m.feedback_[static_cast<std::size_t>(i)];
    m.fb_position_.row(i) = c.position_gain.transpose();
    m.fb_velocity_.row(i) = c.velocity_gain.transpose();
    torque.col(i) = c.torque_map;
    m.static_stiffness_ += c.torque_map * c.position_gain.transpose();
  }

  OutputMap full = full_outputs(g);
  m.outputs_.channels = full.channels;
  m.outputs_.position = full.position * sel;
  m.outputs_.velocity = full.velocity * sel;
  m.outputs_.acceleration = full.acceleration * sel;
  m.outputs_.base = full.base;

  const Eigen::LLT<MatrixXd> llt(m.mass_);
  if (llt.info() != Eigen::Success) {
    throw Error(ErrorCode::kSingularMassMatrix, "mass matrix is not positive definite");
  }
  m.minv_k_ = llt.solve(m.stiffness_);
  m.minv_c_ = llt.solve(m.damping_);
  m.minv_b_ = llt.solve(m.input_map_);
  m.minv_t_ = llt.solve(torque);

  m.equilibrium_ = static_equilibrium(m);
  m.fb_equilibrium_ = m.fb_position_ * m.equilibrium_;

  // Instantaneous part of the dynamics bounds the explicit step.
  MatrixXd k_inst = m.stiffness_, c_inst = m.damping_;
  for (const auto& c : m.feedback_) {
    if (c.delay_s == 0.0) {
      k_inst += c.torque_map * c.position_gain.transpose();
      c_inst += c.torque_map * c.velocity_gain.transpose();
    }
  }
  MatrixXd a0 = MatrixXd::Zero(2 * n, 2 * n);
  a0.topRightCorner(n, n).setIdentity();
  a0.bottomLeftCorner(n, n) = -llt.solve(k_inst);
  a0.bottomRightCorner(n, n) = -llt.solve(c_inst);
  m.max_rate_ = Eigen::EigenSolver<MatrixXd>(a0, false).eigenvalues().cwiseAbs().maxCoeff();

  if (options.check_stability) {
    const StateSpace ss = linearize(m, options.stability_check);
    Eigen::EigenSolver<MatrixXd> es(ss.a, true);
    m.eigenvalues_ = es.eigenvalues();
    Eigen::Index worst = 0;
    m.eigenvalues_.real().maxCoeff(&worst);
    const std::complex<double> lambda = m.eigenvalues_(worst);
    if (lambda.real() >= 0.0) {
      std::ostringstream os;
      os << "closed-loop eigenvalue " << lambda.real() << (lambda.imag() < 0 ? " - " : " + ")
         << std::abs(lambda.imag()) << "i has non-negative real part; mode shape: "
         << format_mode(es.eigenvectors().col(worst), m.coordinates_);
      throw Error(ErrorCode::kUnstableConfiguration, os.str());
    }
  }
  return m;
}

Eigen::Index ModelRealization::coordinate_index(std::string_view name) const {
  for (std::size_t i = 0; i < coordinates_.size(); ++i) {
    if (coordinates_[i] == name) return static_cast<Eigen::Index>(i);
  }
  throw Error(ErrorCode::kInvalidArgument, "no free coordinate named '" + std::string(name) + "'");
}

std::string ModelRealization::describe_layout() const {
  std::ostringstream os;
  os << "index  coordinate       unit\n";
  for (std::size_t i = 0; i < coordinates_.size(); ++i) {
    const bool linear = coordinates_[i].rfind("seat_pelvis_", 0) == 0;
    os << std::setw(5) << i << "  " << std::left << std::setw(15) << coordinates_[i] << "  "
       << (linear ? "m" : "rad") << std::right << "\n";
  }
  if (!params_.locked_coordinates.empty()) {
    os << "locked: " << join(params_.locked_coordinates, ", ") << "\n";
  }
  os << "feedback channels:\n";
  for (const auto& c : feedback_) {
    os << "  " << c.name << " (delay " << c.delay_s << " s)\n";
  }
  return os.str();
}

VectorXd ModelRealization::acceleration(const VectorXd& q, const VectorXd& qd,
                                        const Vector3d& seat_accel,
                                        const VectorXd& channel_signals) const {
  return minv_b_ * seat_accel - minv_k_ * (q - equilibrium_) - minv_c_ * qd -
         minv_t_ * (channel_signals - fb_equilibrium_);
}

double ModelRealization::mechanical_energy(const VectorXd& q, const VectorXd& qd) const {
  const VectorXd dq = q - equilibrium_;
  return 0.5 * qd.dot(mass_ * qd) + 0.5 * dq.dot(stiffness_ * dq);
}

VectorXd static_equilibrium(const ModelRealization& model) {
  const VectorXd& load = model.gravity_load();
  const double load_norm = load.norm();
  if (load_norm == 0.0) return VectorXd::Zero(model.dof());
  const MatrixXd& ks = model.static_stiffness();
  const VectorXd q = ks.completeOrthogonalDecomposition().solve(load);
  const double residual = (ks * q - load).norm();
  if (!q.allFinite() || residual > 1e-9 * load_norm) {
    throw Error(ErrorCode::kNoEquilibrium,
                "stiffness cannot balance the gravity load (residual " +
                    std::to_string(residual) + " of " + std::to_string(load_norm) + ")");
  }
  for (Eigen::Index i = 0; i < q.size(); ++i) {
    const auto& name = model.coordinates()[static_cast<std::size_t>(i)];
    if (name.rfind("seat_pelvis_", 0) != 0 && std::abs(q(i)) > kMaxEquilibriumAngle) {
      throw Error(ErrorCode::kNoEquilibrium,
                  "equilibrium " + name + " of " + std::to_string(q(i)) +
                      " rad leaves the small-angle range");
    }
  }
  return q;
}

DelayLine::DelayLine(int delay_steps, double fill)
    : delay_steps_(delay_steps), ring_(static_cast<std::size_t>(delay_steps) + 1, fill) {
  if (delay_steps < 0) throw Error(ErrorCode::kInvalidArgument, "negative delay");
}

void DelayLine::push(double value) {
  head_ = (head_ + 1) % ring_.size();
  ring_[head_] = value;
}

double DelayLine::at_lag(int lag) const {
  const std::size_t size = ring_.size();
  return ring_[(head_ + size - static_cast<std::size_t>(lag) % size) % size];
}

double DelayLine::delayed(double c) const {
  if (delay_steps_ == 0) return ring_[head_];
  return (1.0 - c) * at_lag(delay_steps_) + c * at_lag(delay_steps_ - 1);
}

int delay_steps(double delay_s, double dt) {
  return static_cast<int>(std::ceil(delay_s / dt - 1e-9));
}

namespace detail {

// Allocation-free RK4 stepper over a preallocated workspace.
class Integrator {
 public:
  Integrator(const ModelRealization& m, double dt) : m_(m), dt_(dt) {
    const Eigen::Index n = m.dof();
    const auto nch = static_cast<Eigen::Index>(m.feedback_.size());
    for (auto* v : {&qs_, &qds_, &dq_, &acc1_, &acc2_, &acc3_, &acc4_, &qd2_, &qd3_, &qd4_}) {
      v->resize(n);
    }
    u_.resize(nch);
    for (const auto& c : m.feedback_) lags_.push_back(delay_steps(c.delay_s, dt));
  }

  const std::vector<int>& lags() const { return lags_; }
  const VectorXd& start_acceleration() const { return acc1_; }

  void advance(BodyState& s, const Vector3d& a0, const Vector3d& a1) {
    const double h = dt_;
    u_.noalias() = m_.fb_position_ * s.q;
    u_.noalias() += m_.fb_velocity_ * s.qd;
    for (std::size_t i = 0; i < lags_.size(); ++i) {
      if (lags_[i] > 0) s.delay_lines[i].push(u_(static_cast<Eigen::Index>(i)));
    }
    const Vector3d amid = 0.5 * (a0 + a1);

    eval(s, s.q, s.qd, a0, 0.0, acc1_);
    qs_ = s.q + 0.5 * h * s.qd;
    qd2_ = s.qd + 0.5 * h * acc1_;
    eval(s, qs_, qd2_, amid, 0.5, acc2_);
    qs_ = s.q + 0.5 * h * qd2_;
    qd3_ = s.qd + 0.5 * h * acc2_;
    eval(s, qs_, qd3_, amid, 0.5, acc3_);
    qs_ = s.q + h * qd3_;
    qd4_ = s.qd + h * acc3_;
    eval(s, qs_, qd4_, a1, 1.0, acc4_);

    s.q += (h / 6.0) * (s.qd + 2.0 * qd2_ + 2.0 * qd3_ + qd4_);
    s.qd += (h / 6.0) * (acc1_ + 2.0 * acc2_ + 2.0 * acc3_ + acc4_);
    s.time += h;
    check_finite(s);
  }

 private:
  void eval(const BodyState& s, const VectorXd& q, const VectorXd& qd, const Vector3d& a,
            double frac, VectorXd& out) {
    for (std::size_t i = 0; i < lags_.size(); ++i) {
      const auto r = static_cast<Eigen::Index>(i);
      if (lags_[i] == 0) {
        u_(r) = m_.fb_position_.row(r).dot(q) + m_.fb_velocity_.row(r).dot(qd);
      } else {
        u_(r) = s.delay_lines[i].delayed(frac);
      }
    }
    u_ -= m_.fb_equilibrium_;
    dq_ = q - m_.equilibrium_;
    out.noalias() = m_.minv_b_ * a;
    out.noalias() -= m_.minv_k_ * dq_;
    out.noalias() -= m_.minv_c_ * qd;
    out.noalias() -= m_.minv_t_ * u_;
  }

  void check_finite(const BodyState& s) const {
    for (Eigen::Index i = 0; i < s.q.size(); ++i) {
      if (!std::isfinite(s.q(i)) || !std::isfinite(s.qd(i))) {
        std::ostringstream os;
        os << "state diverged at t = " << s.time << " s in coordinate "
           << m_.coordinates()[static_cast<std::size_t>(i)];
        throw Error(ErrorCode::kNonFiniteState, os.str());
      }
    }
  }

  const ModelRealization& m_;
  double dt_;
  std::vector<int> lags_;
  VectorXd qs_, qds_, dq_, acc1_, acc2_, acc3_, acc4_, qd2_, qd3_, qd4_, u_;
};

}  // namespace detail

BodyState initial_state(const ModelRealization& model, double dt, double time) {
  if (!(dt > 0.0) || !std::isfinite(dt)) {
    throw Error(ErrorCode::kInvalidRate, "time step must be positive");
  }
  if (model.max_rate() * dt > kRk4StabilityLimit) {
    std::ostringstream os;
    os << "dt = " << dt << " s exceeds the explicit stability limit "
       << kRk4StabilityLimit / model.max_rate() << " s of this model";
    throw Error(ErrorCode::kUnstableStep, os.str());
  }
  BodyState s;
  s.q = model.equilibrium();
  s.qd = VectorXd::Zero(model.dof());
  s.time = time;
  s.dt = dt;
  const VectorXd u_eq = [&] {
    VectorXd u(static_cast<Eigen::Index>(model.feedback().size()));
    for (std::size_t i = 0; i < model.feedback().size(); ++i) {
      u(static_cast<Eigen::Index>(i)) = model.feedback()[i].position_gain.dot(s.q);
    }
    return u;
  }();
  for (std::size_t i = 0; i < model.feedback().size(); ++i) {
    s.delay_lines.emplace_back(delay_steps(model.feedback()[i].delay_s, dt),
                               u_eq(static_cast<Eigen::Index>(i)));
  }
  return s;
}

BodyState step(const ModelRealization& model, const BodyState& state, const Vector3d& seat_accel,
               const Vector3d& seat_accel_next, double dt) {
  if (std::abs(dt - state.dt) > 1e-12 * state.dt) {
    throw Error(ErrorCode::kInvalidArgument, "dt differs from the one used to size delay buffers");
  }
  detail::Integrator integrator(model, dt);
  BodyState next = state;
  integrator.advance(next, seat_accel, seat_accel_next);
  return next;
}

BodyState step(const ModelRealization& model, const BodyState& state, const Vector3d& seat_accel,
               double dt) {
  return step(model, state, seat_accel, seat_accel, dt);
}

double BodyResponse::realtime_factor() const {
  const double simulated = series.duration() + series.dt();
  return wall_clock_s > 0.0 ? simulated / wall_clock_s
                            : std::numeric_limits<double>::infinity();
}

BodyResponse simulate(const ModelRealization& model, const TimeSeries& seat_motion) {
  const auto clock_start = std::chrono::steady_clock::now();
  const std::array<Eigen::Index, 3> cols = {seat_motion.index_of("seat_acc_x"),
                                            seat_motion.index_of("seat_acc_y"),
                                            seat_motion.index_of("seat_acc_z")};
  for (Eigen::Index c : cols) {
    const auto& ch = seat_motion.channels()[static_cast<std::size_t>(c)];
    if (ch.unit != kUnitAccel) {
      throw Error(ErrorCode::kUnitMismatch,
                  ch.name + " has unit '" + ch.unit + "', expected m/s^2");
    }
  }
  const double dt = seat_motion.dt();
  const Eigen::Index rows = seat_motion.size();
  const OutputMap& out = model.outputs();
  MatrixXd samples(rows, static_cast<Eigen::Index>(out.channels.size()));

  BodyState state = initial_state(model, dt, seat_motion.start_time());
  detail::Integrator integrator(model, dt);
  const MatrixXd& in = seat_motion.samples();
  auto input_at = [&](Eigen::Index r) {
    return Vector3d(in(r, cols[0]), in(r, cols[1]), in(r, cols[2]));
  };
  VectorXd dq(model.dof());
  VectorXd row(samples.cols());
  Vector3d a0 = input_at(0);
  for (Eigen::Index r = 0; r < rows; ++r) {
    const Vector3d a1 = r + 1 < rows ? input_at(r + 1) : a0;
    dq = state.q - model.equilibrium();
    row.noalias() = out.position * dq;
    row.noalias() += out.velocity * state.qd;
    row.noalias() += out.base * a0;
    // Integrating the last row only supplies its start-of-step acceleration.
    integrator.advance(state, a0, a1);
    row.noalias() += out.acceleration * integrator.start_acceleration();
    samples.row(r) = row.transpose();
    a0 = a1;
  }
  BodyResponse response{TimeSeries(seat_motion.start_time(), dt, out.channels, std::move(samples)),
                        0.0};
  response.wall_clock_s =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - clock_start).count();
  return response;
}

}  // namespace comfortsim
