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

#include <doctest.h>

#include <cmath>

#include <Eigen/Geometry>

#include "comfortsim/error.hpp"
#include "comfortsim/perception.hpp"
#include "oracles.hpp"

using namespace comfortsim;
using Eigen::Vector3d;

namespace {

constexpr double kDeg = oracle::kPi / 180.0;

// Head-motion series; unspecified channels are zero.
struct HeadMotion {
  Eigen::Index n;
  double dt;
  Eigen::MatrixXd m;

  HeadMotion(Eigen::Index n_, double dt_) : n(n_), dt(dt_), m(Eigen::MatrixXd::Zero(n_, 8)) {}
  Eigen::Ref<Eigen::VectorXd> acc(int axis) { return m.col(axis); }
  Eigen::Ref<Eigen::VectorXd> rotvel(int axis) { return m.col(3 + axis); }
  Eigen::Ref<Eigen::VectorXd> roll() { return m.col(6); }
  Eigen::Ref<Eigen::VectorXd> pitch() { return m.col(7); }

  TimeSeries series() const {
    const std::string a(kUnitAccel), w(kUnitRotVel);
    return TimeSeries(0.0, dt,
                      {{"head_acc_x", a}, {"head_acc_y", a}, {"head_acc_z", a},
                       {"head_rotvel_roll", w}, {"head_rotvel_pitch", w}, {"head_rotvel_yaw", w},
                       {"head_angle_roll", "rad"}, {"head_angle_pitch", "rad"}},
                      m);
  }
};

TimeSeries vectors(const std::string& prefix, const Eigen::MatrixXd& rows, double dt = 0.01) {
  return TimeSeries(0.0, dt, {{prefix + "_x", "1"}, {prefix + "_y", "1"}, {prefix + "_z", "1"}}, rows);
}

TimeSeries triple(const std::string& prefix, std::array<const char*, 3> names, const std::string& unit,
                  const Eigen::MatrixXd& rows, double dt) {
  return TimeSeries(0.0, dt,
                    {{prefix + "_" + names[0], unit}, {prefix + "_" + names[1], unit}, {prefix + "_" + names[2], unit}},
                    rows);
}

double angle_between(const Vector3d& a, const Vector3d& b) {
  return std::atan2(a.cross(b).norm(), a.dot(b));
}

Vector3d row3(const TimeSeries& ts, const std::string& prefix, Eigen::Index r) {
  return {ts.column(prefix + "_x")(r), ts.column(prefix + "_y")(r), ts.column(prefix + "_z")(r)};
}

}  // namespace

TEST_SUITE("canal") {
  TEST_CASE("zero rotation gives zero output") {
    HeadMotion h(1000, 0.001);
    CHECK(scc_response(h.series(), {}).samples().cwiseAbs().maxCoeff() == 0.0);
  }

  TEST_CASE("constant rotation decays with the long time constant") {
    const VestibularParams p;
    const double dt = 0.001;
    HeadMotion h(static_cast<Eigen::Index>(2.0 * p.scc_tau1_s / dt) + 1, dt);
    h.rotvel(2).setConstant(0.5);
    const TimeSeries s = scc_response(h.series(), p);
    const Eigen::VectorXd yaw = s.column("scc_yaw");
    const auto at = static_cast<Eigen::Index>(std::lround(p.scc_tau1_s / dt));
    CHECK(yaw(at) / 0.5 >= 0.36);
    CHECK(yaw(at) / 0.5 <= 0.38);
    for (Eigen::Index i = 50; i < yaw.size(); i += 97) {
      const double ref = 0.5 * oracle::canal_step(static_cast<double>(i) * dt, p.scc_tau1_s, p.scc_tau2_s);
      REQUIRE(std::abs(yaw(i) - ref) < 0.01 * 0.5);
    }
  }

  TEST_CASE("sinusoidal gain and phase follow the analytic canal") {
    const VestibularParams p;
    const double dt = 0.001;
    const Eigen::Index n = 80001, tail = 20000;
    for (int k = 0; k < 10; ++k) {
      const double f = 0.1 * std::pow(100.0, k / 9.0);  // 0.1 .. 10 Hz
      HeadMotion h(n, dt);
      h.rotvel(1) = oracle::sine(n, dt, f, 0.3);
      const TimeSeries s = scc_response(h.series(), p);
      const auto out = oracle::phasor(s.column("scc_pitch").tail(tail), dt, f, dt * static_cast<double>(n - tail));
      const auto measured = out / 0.3;
      const auto ref = oracle::canal(f, p.scc_tau1_s, p.scc_tau2_s);
      CHECK_MESSAGE(std::abs(std::abs(measured) / std::abs(ref) - 1.0) < 0.02, f);
      CHECK_MESSAGE(std::abs(std::arg(measured / ref)) / kDeg < 2.0, f);
    }
  }

  TEST_CASE("doubling the input doubles the output exactly") {
    HeadMotion a(5000, 0.001);
    a.rotvel(0) = oracle::white_noise(5000, 3, 0.4);
    a.rotvel(1) = oracle::white_noise(5000, 4, 0.4);
    HeadMotion b = a;
    b.m *= 2.0;
    CHECK(scc_response(b.series(), {}).samples() == 2.0 * scc_response(a.series(), {}).samples());
  }

  TEST_CASE("invalid time constants are rejected") {
    VestibularParams p;
    p.scc_tau2_s = -1.0;
    CHECK_FALSE(validate_vestibular_params(p).empty());
    HeadMotion h(10, 0.001);
    CHECK_THROWS_AS(scc_response(h.series(), p), Error);
  }
}

TEST_SUITE("otolith") {
  TEST_CASE("upright stationary head senses the gravity reaction") {
    HeadMotion h(10, 0.01);
    const TimeSeries o = otolith_response(h.series(), h.series(), {});
    CHECK(o.column("oto_x").cwiseAbs().maxCoeff() == 0.0);
    CHECK(o.column("oto_y").cwiseAbs().maxCoeff() == 0.0);
    CHECK(o.column("oto_z")(5) == doctest::Approx(-9.81));
  }

  TEST_CASE("small pitch puts g theta on the fore-aft axis") {
    for (double theta : {0.01, 0.05, -0.03}) {
      HeadMotion h(4, 0.01);
      h.pitch().setConstant(theta);
      const TimeSeries o = otolith_response(h.series(), h.series(), {});
      CHECK(o.column("oto_x")(2) == doctest::Approx(9.81 * theta).epsilon(1e-9));
    }
  }

  TEST_CASE("horizontal acceleration is indistinguishable from tilt") {
    HeadMotion h(4, 0.01);
    h.acc(0).setConstant(1.7);
    VestibularParams p;
    const TimeSeries o = otolith_response(h.series(), h.series(), p);
    CHECK(o.column("oto_x")(1) == doctest::Approx(1.7));
    p.otolith_gain = 0.5;
    CHECK(otolith_response(h.series(), h.series(), p).column("oto_x")(1) == doctest::Approx(0.85));
  }
}

TEST_SUITE("subjective vertical") {
  TEST_CASE("static upright stays at the fixed point") {
    HeadMotion h(6001, 0.01);
    const Perception p = perceive(h.series(), {});
    for (Eigen::Index r = 0; r < h.n; r += 100) {
      CHECK(row3(p.perceived, "sv", r) == Vector3d::UnitZ());
    }
  }

  TEST_CASE("a tilt step decays exponentially with the vertical time constant") {
    const VestibularParams p;
    const double dt = 0.01, alpha = 10.0 * kDeg;
    const Eigen::Index n = 2001;
    Eigen::MatrixXd f(n, 3);
    f.rowwise() = Eigen::RowVector3d(-9.81 * std::sin(alpha), 0.0, -9.81 * std::cos(alpha));
    const TimeSeries oto = triple("oto", {"x", "y", "z"}, std::string(kUnitAccel), f, dt);
    const TimeSeries scc = triple("scc", {"roll", "pitch", "yaw"}, std::string(kUnitRotVel), Eigen::MatrixXd::Zero(n, 3), dt);
    const VerticalEstimate est = subjective_vertical(oto, scc, p);
    const Vector3d target(std::sin(alpha), 0.0, std::cos(alpha));
    for (Eigen::Index r = 0; r < n; r += 50) {
      const double t = static_cast<double>(r) * dt;
      const double expected = alpha * std::exp(-t / p.sv_tau_s);
      CHECK_MESSAGE(std::abs(angle_between(row3(est.series, "sv", r), target) - expected) <= 0.05 * expected, t);
    }
  }

  TEST_CASE("sustained fore-aft acceleration tilts the vertical") {
    HeadMotion h(12001, 0.01);
    h.acc(0).setConstant(2.0);
    const Perception p = perceive(h.series(), {});
    const double tilt = angle_between(row3(p.perceived, "sv", h.n - 1), Vector3d::UnitZ());
    CHECK(std::abs(tilt - std::atan(2.0 / 9.81)) < 0.5 * kDeg);
    // With the prior fixed, the steady conflict is the chord of that tilt.
    CHECK(p.conflict.column("conflict")(h.n - 1) ==
          doctest::Approx(oracle::chord_conflict(std::atan(2.0 / 9.81))).epsilon(1e-3));
  }

  TEST_CASE("vertical estimates stay unit norm for arbitrary motion") {
    const Eigen::Index n = 20000;
    HeadMotion h(n, 0.001);
    for (int a = 0; a < 3; ++a) {
      h.acc(a) = oracle::white_noise(n, 10 + a, 6.0);
      h.rotvel(a) = oracle::white_noise(n, 20 + a, 3.0);
    }
    h.roll() = oracle::white_noise(n, 30, 0.1);
    h.pitch() = oracle::white_noise(n, 31, 0.1);
    VestibularParams p;
    p.vision_enabled = true;
    p.visual_gain = 0.7;
    const Perception out = perceive(h.series(), p);
    for (Eigen::Index r = 0; r < n; ++r) {
      REQUIRE(std::abs(row3(out.perceived, "sv", r).norm() - 1.0) < 1e-6);
      REQUIRE(std::abs(row3(out.perceived, "ev", r).norm() - 1.0) < 1e-6);
    }
    CHECK(out.conflict.column("conflict").minCoeff() >= 0.0);
  }

  TEST_CASE("a short free fall is carried, a long one is an error") {
    const VestibularParams p;
    const double dt = 0.01;
    const Eigen::Index n = 500;
    Eigen::MatrixXd f = Eigen::MatrixXd::Zero(n, 3);
    f.col(2).setConstant(-9.81);
    f.block(100, 0, 50, 3).setZero();  // 0.5 s
    const TimeSeries scc = triple("scc", {"roll", "pitch", "yaw"}, std::string(kUnitRotVel), Eigen::MatrixXd::Zero(n, 3), dt);
    const VerticalEstimate est = subjective_vertical(triple("oto", {"x", "y", "z"}, "m/s^2", f, dt), scc, p);
    CHECK(est.degenerate_samples == 50);
    CHECK(row3(est.series, "sv", 120) == Vector3d::UnitZ());
    f.block(100, 0, 150, 3).setZero();  // 1.5 s
    try {
      subjective_vertical(triple("oto", {"x", "y", "z"}, "m/s^2", f, dt), scc, p);
      FAIL("expected DegenerateInput");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::kDegenerateInput);
    }
  }
}

TEST_SUITE("expectation") {
  TEST_CASE("without vision the prior is the upright") {
    HeadMotion h(3000, 0.01);
    h.acc(0) = oracle::white_noise(3000, 5, 2.0);
    h.pitch().setConstant(0.1);
    const TimeSeries ev = internal_expectation(h.series(), {});
    for (Eigen::Index r = 0; r < h.n; ++r) REQUIRE(row3(ev, "ev", r) == Vector3d::UnitZ());
  }

  TEST_CASE("full visual correction tracks the true vertical") {
    const double theta = 0.08;
    HeadMotion h(2000, 0.01);
    h.pitch().setConstant(theta);
    VestibularParams p;
    p.vision_enabled = true;
    p.visual_delay_s = 0.0;
    const TimeSeries ev = internal_expectation(h.series(), p);
    const Vector3d truth = Vector3d(-theta, 0.0, 1.0).normalized();
    for (Eigen::Index r = 0; r < h.n; r += 100) CHECK((row3(ev, "ev", r) - truth).norm() < 1e-9);
    // Sensed vertical starts upright and settles onto the same direction.
    HeadMotion longer(6001, 0.01);
    longer.pitch().setConstant(theta);
    const Eigen::VectorXd c = perceive(longer.series(), p).conflict.column("conflict");
    CHECK(c(0) == doctest::Approx(oracle::chord_conflict(std::atan(theta))));
    CHECK(c(longer.n - 1) < 1e-4);
  }

  TEST_CASE("half visual gain leaves half the tilt") {
    const double theta = 0.08;
    HeadMotion h(2000, 0.01);
    h.pitch().setConstant(theta);
    VestibularParams p;
    p.vision_enabled = true;
    p.visual_gain = 0.5;
    p.visual_delay_s = 0.0;
    const TimeSeries ev = internal_expectation(h.series(), p);
    const Vector3d truth = Vector3d(-theta, 0.0, 1.0).normalized();
    const double full = angle_between(truth, Vector3d::UnitZ());
    const Vector3d e = row3(ev, "ev", h.n - 1);
    CHECK(angle_between(e, Vector3d::UnitZ()) == doctest::Approx(0.5 * full).epsilon(1e-9));
    CHECK(angle_between(e, truth) == doctest::Approx(0.5 * full).epsilon(1e-9));
  }

  TEST_CASE("zero head motion gives zero conflict with or without vision") {
    HeadMotion h(6000, 0.001);
    for (bool vision : {false, true}) {
      VestibularParams p;
      p.vision_enabled = vision;
      CHECK(perceive(h.series(), p).conflict.column("conflict").cwiseAbs().maxCoeff() == 0.0);
    }
  }
}

TEST_SUITE("conflict") {
  TEST_CASE("chord examples") {
    const Eigen::Index n = 5;
    Eigen::MatrixXd up(n, 3), tilted(n, 3), down(n, 3);
    up.rowwise() = Eigen::RowVector3d(0, 0, 1);
    tilted.rowwise() = Eigen::RowVector3d(std::sin(10 * kDeg), 0, std::cos(10 * kDeg));
    down.rowwise() = Eigen::RowVector3d(0, 0, -1);
    CHECK(conflict(vectors("sv", up), vectors("ev", up)).samples().cwiseAbs().maxCoeff() == 0.0);
    const TimeSeries c10 = conflict(vectors("sv", tilted), vectors("ev", up));
    CHECK(c10.column("conflict")(3) == doctest::Approx(oracle::chord_conflict(10 * kDeg)).epsilon(1e-12));
    CHECK(c10.column("conflict")(3) == doctest::Approx(1.710).epsilon(1e-3));
    CHECK(conflict(vectors("sv", down), vectors("ev", up)).column("conflict")(0) == doctest::Approx(19.62));
    CHECK(c10.channel("conflict").unit == kUnitAccel);
  }

  TEST_CASE("a common rotation leaves conflict unchanged") {
    const Eigen::Index n = 200;
    Eigen::MatrixXd s(n, 3), e(n, 3);
    for (Eigen::Index r = 0; r < n; ++r) {
      s.row(r) = Vector3d::Random().normalized().transpose();
      e.row(r) = Vector3d::Random().normalized().transpose();
    }
    const Eigen::Matrix3d rot =
        Eigen::AngleAxisd(0.7, Vector3d(1.0, -2.0, 0.5).normalized()).toRotationMatrix();
    const TimeSeries a = conflict(vectors("sv", s), vectors("ev", e));
    const TimeSeries b = conflict(vectors("sv", s * rot.transpose()), vectors("ev", e * rot.transpose()));
    CHECK((a.samples() - b.samples()).cwiseAbs().maxCoeff() < 1e-12);
  }

  TEST_CASE("perceived series recomputes the same conflict") {
    HeadMotion h(3000, 0.01);
    h.acc(1) = oracle::white_noise(3000, 8, 1.0);
    const Perception p = perceive(h.series(), {});
    CHECK(conflict_from_perceived(p.perceived).samples() == p.conflict.samples());
    CHECK(p.perceived.channel_count() == 12);
  }
}
