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
#include <fstream>

#include "comfortsim/body_model.hpp"
#include "comfortsim/body_params.hpp"
#include "comfortsim/error.hpp"
#include "comfortsim/stht.hpp"
#include "oracles.hpp"

using namespace comfortsim;

namespace {

const PostureConfig kPosture = PostureConfig::preset(Posture::kErect, BackrestContact::kHigh);

const ModelRealization& default_model() {
  static const ModelRealization m = build_model(BodyParams{}, kPosture);
  return m;
}

ExcitationSpec spec(Axis axis, double duration = 180.0) {
  ExcitationSpec s;
  s.axis = axis;
  s.duration_s = duration;
  return s;
}

ErrorCode code_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected an Error");
  return ErrorCode::kInvalidArgument;
}

// One-sided power per DFT bin by direct summation.
Eigen::VectorXd dft_power(const Eigen::VectorXd& x) {
  const Eigen::Index n = x.size();
  Eigen::VectorXd p(n / 2 + 1);
  for (Eigen::Index k = 0; k <= n / 2; ++k) {
    std::complex<double> acc = 0.0;
    const double w = -2.0 * oracle::kPi * static_cast<double>(k) / static_cast<double>(n);
    for (Eigen::Index i = 0; i < n; ++i) acc += x(i) * std::polar(1.0, w * static_cast<double>(i));
    p(k) = std::norm(acc);
  }
  return p;
}

ReferenceCurve synthetic(std::string channel, double peak_hz, double scale = 1.0) {
  ReferenceCurve c;
  c.channel = std::move(channel);
  const int n = 400;
  c.freqs.resize(n);
  c.gain.resize(n);
  c.phase_deg.resize(n);
  for (int i = 0; i < n; ++i) {
    const double f = 0.2 * std::pow(100.0, i / double(n - 1));  // 0.2 .. 20 Hz
    const auto h = oracle::second_order_lowpass(f, peak_hz, 0.2);
    c.freqs(i) = f;
    c.gain(i) = scale * std::abs(h);
    c.phase_deg(i) = std::arg(h) * 180.0 / oracle::kPi;
  }
  return c;
}

}  // namespace

TEST_SUITE("excitation") {
  TEST_CASE("fixed seed gives bit-identical samples") {
    const TimeSeries a = generate_excitation(spec(Axis::kZ, 30.0));
    const TimeSeries b = generate_excitation(spec(Axis::kZ, 30.0));
    CHECK(a.samples() == b.samples());
    ExcitationSpec other = spec(Axis::kZ, 30.0);
    other.seed = 43;
    CHECK(generate_excitation(other).samples() != a.samples());
  }

  TEST_CASE("requested RMS is met and only the chosen axis moves") {
    for (Axis axis : {Axis::kX, Axis::kY, Axis::kZ}) {
      for (ExcitationKind kind : {ExcitationKind::kNoise, ExcitationKind::kSweep}) {
        ExcitationSpec s = spec(axis, 60.0);
        s.kind = kind;
        const TimeSeries ts = generate_excitation(s);
        const double r = rms(ts.column(seat_channel(axis)));
        CHECK(r >= 0.98);
        CHECK(r <= 1.02);
        for (Axis other : {Axis::kX, Axis::kY, Axis::kZ}) {
          if (other != axis) CHECK(ts.column(seat_channel(other)).cwiseAbs().maxCoeff() == 0.0);
        }
        CHECK(ts.channel(seat_channel(axis)).unit == kUnitAccel);
      }
    }
  }

  TEST_CASE("spectral content stays inside the band") {
    for (ExcitationKind kind : {ExcitationKind::kNoise, ExcitationKind::kSweep}) {
      ExcitationSpec s = spec(Axis::kZ, 40.0);
      s.kind = kind;
      s.dt_s = 0.01;
      const Eigen::VectorXd x = generate_excitation(s).column("seat_acc_z");
      const Eigen::VectorXd p = dft_power(x);
      const double df = 1.0 / (static_cast<double>(x.size()) * s.dt_s);
      double in = 0.0, above = 0.0, outside = 0.0;
      for (Eigen::Index k = 0; k < p.size(); ++k) {
        const double f = static_cast<double>(k) * df;
        if (f >= s.f_lo_hz && f <= s.f_hi_hz) in += p(k);
        else outside += p(k);
        if (f > 24.0) above += p(k);
      }
      CHECK(above <= 0.01 * in);
      CHECK(outside <= 0.01 * in);  // 20 dB
    }
  }

  TEST_CASE("invalid bands are rejected") {
    auto bad = [](auto edit) {
      ExcitationSpec s = spec(Axis::kZ, 60.0);
      edit(s);
      return code_of([&] { generate_excitation(s); });
    };
    CHECK(bad([](ExcitationSpec& s) { s.f_lo_hz = 0.0; }) == ErrorCode::kInvalidBand);
    CHECK(bad([](ExcitationSpec& s) { s.f_hi_hz = 0.4; }) == ErrorCode::kInvalidBand);
    CHECK(bad([](ExcitationSpec& s) { s.f_hi_hz = 600.0; }) == ErrorCode::kInvalidBand);
    CHECK(bad([](ExcitationSpec& s) { s.duration_s = 19.0; }) == ErrorCode::kInvalidBand);
    CHECK(bad([](ExcitationSpec& s) { s.rms_m_per_s2 = -1.0; }) == ErrorCode::kInvalidArgument);
  }
}

TEST_SUITE("run_stht") {
  TEST_CASE("a rigid body follows the seat") {
    BodyParams p;
    for (const auto& key : body_param_keys()) {
      if (key.find("_kp_") != std::string::npos || key.find("_kd_") != std::string::npos) {
        set_body_param(p, key, 0.0);
      } else if (key.find("stiffness") != std::string::npos) {
        set_body_param(p, key, *get_body_param(p, key) * 1e6);
      }
    }
    const ModelRealization m = build_model(p, kPosture);
    ExcitationSpec s = spec(Axis::kZ, 20.0);
    s.dt_s = 2.5e-5;
    SthtOptions o;
    o.analysis_dt_s = 0.005;
    o.welch.segment_length = 1024;
    const SthtResult r = run_stht(m, s, o);
    const auto& frf = r.frf("head_acc_z");
    const Eigen::VectorXd gain = frf.gain(), phase = frf.phase_deg();
    int checked = 0;
    for (Eigen::Index i = 0; i < frf.freqs.size(); ++i) {
      if (frf.freqs(i) < 0.5 || frf.freqs(i) > 8.0) continue;
      CHECK(gain(i) >= 0.99);
      CHECK(gain(i) <= 1.01);
      CHECK(std::abs(phase(i)) < 2.0);
      ++checked;
    }
    CHECK(checked > 30);
  }

  TEST_CASE("shared grid, high coherence, in-band resonances") {
    const SthtResult r = run_stht(default_model(), spec(Axis::kZ));
    REQUIRE(r.frfs.size() == stht_channels().size());
    REQUIRE(r.resonances.size() == r.frfs.size());
    for (const auto& f : r.frfs) {
      CHECK(f.freqs == r.frfs.front().freqs);
      CHECK(f.input_channel == "seat_acc_z");
    }
    for (const char* ch : {"head_acc_z", "trunk_acc_z", "head_acc_x", "head_rotvel_pitch"}) {
      const auto& f = r.frf(ch);
      for (Eigen::Index i = 0; i < f.freqs.size(); ++i) {
        if (f.freqs(i) >= 0.5 && f.freqs(i) <= 12.0) REQUIRE(f.coherence(i) >= 0.95);
      }
    }
    for (const auto& peaks : r.resonances) {
      for (const auto& pk : peaks) {
        CHECK(pk.gain > 1.0);
        CHECK(pk.freq_hz >= 0.5);
        CHECK(pk.freq_hz <= 12.0);
      }
    }
    CHECK(r.preset_id == "default_uncalibrated");
    CHECK(r.wall_clock_s > 0.0);
    CHECK(r.body_wall_clock_s > 0.0);
    CHECK(code_of([&] { r.frf("nope"); }) == ErrorCode::kMissingChannel);
  }

  TEST_CASE("lateral excitation is mirror symmetric and decoupled") {
    const ModelRealization& m = default_model();
    const TimeSeries u = generate_excitation(spec(Axis::kY, 60.0));
    const TimeSeries v(u.start_time(), u.dt(), u.channels(), -u.samples());
    const TimeSeries a = simulate(m, u).series;
    const TimeSeries b = simulate(m, v).series;
    const double scale = a.samples().cwiseAbs().maxCoeff();
    CHECK((a.samples() + b.samples()).cwiseAbs().maxCoeff() <= 1e-9 * scale);
    for (const char* ch : {"head_acc_x", "head_acc_z", "head_rotvel_pitch", "trunk_acc_z"}) {
      CHECK(a.column(ch).cwiseAbs().maxCoeff() <= 1e-9 * scale);
    }
    const WelchParams w{8192, 0.5, Window::kHann};
    const Eigen::VectorXd ga = estimate_frf(hstack({u, a}), "seat_acc_y", "head_acc_y", w).gain();
    const Eigen::VectorXd gb = estimate_frf(hstack({v, b}), "seat_acc_y", "head_acc_y", w).gain();
    CHECK((ga - gb).cwiseAbs().maxCoeff() <= 1e-6 * ga.maxCoeff());
  }

  TEST_CASE("batch results come back in input order and match serial runs") {
    const ModelRealization& m = default_model();
    const std::vector<ExcitationSpec> specs{spec(Axis::kZ, 40.0), spec(Axis::kX, 40.0), spec(Axis::kY, 40.0)};
    SthtOptions o;
    o.welch.segment_length = 4096;
    const auto batch = run_stht_batch(m, specs, o, 3);
    REQUIRE(batch.size() == 3);
    for (std::size_t i = 0; i < specs.size(); ++i) {
      CHECK(batch[i].axis == specs[i].axis);
      const SthtResult serial = run_stht(m, specs[i], o);
      for (std::size_t c = 0; c < serial.frfs.size(); ++c) {
        CHECK(serial.frfs[c].response == batch[i].frfs[c].response);
      }
    }
  }

  TEST_CASE("files round-trip through the reference reader") {
    SthtOptions o;
    o.welch.segment_length = 4096;
    const SthtResult r = run_stht(default_model(), spec(Axis::kZ, 40.0), o);
    const auto dir = oracle::scratch_dir("stht_files");
    const auto paths = write_stht(dir, r);
    CHECK(paths.size() == stht_channels().size() + 1);
    for (const auto& p : paths) CHECK(std::filesystem::exists(p));
    CHECK(std::filesystem::exists(dir / "stht_z_resonances.json"));
    const ReferenceCurve back = read_reference_csv(dir / "stht_z_head_acc_z.csv", "head_acc_z");
    const CurveError e = compare_curves(back, to_curve(r.frf("head_acc_z")));
    CHECK(e.rms_gain_error_db < 1e-9);
    CHECK(e.rms_phase_error_deg < 1e-9);
    CHECK(e.peak_freq_error_hz == 0.0);
    std::ifstream header(dir / "stht_z_head_acc_z.csv");
    std::string line;
    std::getline(header, line);
    CHECK(line == "freq_hz,gain,phase_deg,coherence");
    const auto errs = compare_to_reference(r, {back});
    REQUIRE(errs.size() == 1);
    CHECK(errs.front().channel == "head_acc_z");
    ReferenceCurve missing = back;
    missing.channel = "elbow_acc_z";
    CHECK(code_of([&] { compare_to_reference(r, {missing}); }) == ErrorCode::kMissingChannel);
  }
}

TEST_SUITE("compare_curves") {
  TEST_CASE("identical curves give zero error") {
    const auto a = synthetic("head_acc_z", 4.0);
    const CurveError e = compare_curves(a, a);
    CHECK(e.rms_gain_error_db == 0.0);
    CHECK(e.rms_phase_error_deg == 0.0);
    CHECK(e.peak_freq_error_hz == 0.0);
  }

  TEST_CASE("doubling the gain is 6.02 dB") {
    const CurveError e = compare_curves(synthetic("c", 4.0), synthetic("c", 4.0, 2.0));
    CHECK(e.rms_gain_error_db == doctest::Approx(20.0 * std::log10(2.0)).epsilon(1e-9));
    CHECK(e.rms_phase_error_deg == doctest::Approx(0.0));
  }

  TEST_CASE("shifted peak is reported and the report is symmetric") {
    const auto a = synthetic("c", 4.0);
    const auto b = synthetic("c", 4.5);
    const CurveError ab = compare_curves(a, b);
    const CurveError ba = compare_curves(b, a);
    // Peak location from the dense grid is exact to the grid spacing.
    CHECK(ab.peak_freq_error_hz == doctest::Approx(0.5).epsilon(0.03));
    CHECK(ab.peak_freq_error_hz == ba.peak_freq_error_hz);
    CHECK(ab.rms_gain_error_db == doctest::Approx(ba.rms_gain_error_db));
    CHECK(ab.rms_phase_error_deg == doctest::Approx(ba.rms_phase_error_deg));
  }

  TEST_CASE("less than a decade of overlap is a grid mismatch") {
    auto a = synthetic("c", 4.0);
    auto b = synthetic("c", 4.0);
    b.freqs *= 20.0;  // overlap 4 .. 20 Hz
    CHECK(code_of([&] { compare_curves(a, b); }) == ErrorCode::kGridMismatch);
  }
}
