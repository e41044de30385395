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

#include <json.hpp>

#include "comfortsim/comfort.hpp"
#include "comfortsim/error.hpp"
#include "oracles.hpp"

using namespace comfortsim;

namespace {

const std::array<WeightingKind, 3> kKinds = {WeightingKind::kWf, WeightingKind::kWk, WeightingKind::kWd};

oracle::IsoWeighting prototype(WeightingKind kind) {
  switch (kind) {
    case WeightingKind::kWf: return oracle::iso_wf();
    case WeightingKind::kWk: return oracle::iso_wk();
    case WeightingKind::kWd: return oracle::iso_wd();
  }
  return oracle::iso_wk();
}

TimeSeries accel(const Eigen::VectorXd& x, double dt, const std::string& name = "head_acc_z") {
  return make_series(0.0, dt, {name, std::string(kUnitAccel)}, x);
}

// Frequency in [lo, hi] where the analog magnitude is closest to one.
double unit_gain_frequency(const oracle::IsoWeighting& w, double lo, double hi) {
  double best = lo, err = 1e9;
  for (int i = 0; i <= 4000; ++i) {
    const double f = lo * std::pow(hi / lo, i / 4000.0);
    if (std::abs(w.magnitude(f) - 1.0) < err) {
      err = std::abs(w.magnitude(f) - 1.0);
      best = f;
    }
  }
  return best;
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

}  // namespace

TEST_SUITE("weighting design") {
  TEST_CASE("Wf at 100 Hz peaks between 0.125 and 0.25 Hz") {
    const WeightingFilter wf = design_weighting(WeightingKind::kWf, 100.0);
    double peak_f = 0.0, peak = 0.0;
    for (int i = 0; i <= 2000; ++i) {
      const double f = 0.02 * std::pow(100.0, i / 2000.0);
      if (wf.magnitude(f) > peak) {
        peak = wf.magnitude(f);
        peak_f = f;
      }
    }
    CHECK(peak_f >= 0.125);
    CHECK(peak_f <= 0.25);
    CHECK(peak >= 0.9);
    CHECK(peak <= 1.1);
    CHECK(wf.magnitude(1.0) < 0.15);
  }

  TEST_CASE("Wk at 1000 Hz is near one on the 4 to 8 Hz plateau") {
    const WeightingFilter wk = design_weighting(WeightingKind::kWk, 1000.0);
    for (double f = 4.0; f <= 8.0; f += 0.25) {
      CHECK(wk.magnitude(f) == doctest::Approx(1.0).epsilon(0.10));
    }
  }

  TEST_CASE("digital magnitude tracks the analog prototype over the nominal band") {
    for (WeightingKind kind : kKinds) {
      const auto& params = weighting_params(kind);
      const auto proto = prototype(kind);
      for (double rate_factor : {10.0, 25.0}) {
        const double fs = std::max(rate_factor * params.band_hi, kind == WeightingKind::kWf ? 10.0 : 50.0);
        const WeightingFilter w = design_weighting(kind, fs);
        for (int i = 0; i <= 200; ++i) {
          const double f = params.band_lo * std::pow(params.band_hi / params.band_lo, i / 200.0);
          REQUIRE_MESSAGE(std::abs(w.magnitude(f) / proto.magnitude(f) - 1.0) <= 0.03, to_string(kind), " f=", f);
        }
      }
    }
  }

  TEST_CASE("cascades are stable at every supported rate") {
    for (WeightingKind kind : kKinds) {
      for (double fs : {10.0, 20.0, 50.0, 100.0, 200.0, 256.0, 500.0, 1000.0, 2000.0, 10000.0, 48000.0}) {
        if (kind != WeightingKind::kWf && fs < 50.0) continue;
        const WeightingFilter w = design_weighting(kind, fs);
        for (const auto& s : w.cascade().sections()) REQUIRE(s.pole_radius() < 1.0);
        for (int i = 0; i <= 100; ++i) REQUIRE(std::isfinite(w.magnitude(0.5 * fs * i / 100.0)));
      }
    }
  }

  TEST_CASE("rates below the minimum are unsupported") {
    CHECK(code_of([] { design_weighting(WeightingKind::kWk, 40.0); }) == ErrorCode::kUnsupportedRate);
    CHECK(code_of([] { design_weighting(WeightingKind::kWd, 49.0); }) == ErrorCode::kUnsupportedRate);
    CHECK(code_of([] { design_weighting(WeightingKind::kWf, 5.0); }) == ErrorCode::kUnsupportedRate);
    CHECK_NOTHROW(design_weighting(WeightingKind::kWf, 10.0));
  }

  TEST_CASE("filtered white noise obeys Parseval") {
    for (WeightingKind kind : kKinds) {
      const double fs = kind == WeightingKind::kWf ? 20.0 : 400.0;
      const WeightingFilter w = design_weighting(kind, fs);
      const Eigen::Index n = 400000;
      const Eigen::VectorXd y = w.filter(oracle::white_noise(n, 17, 1.0));
      const Eigen::Index skip = static_cast<Eigen::Index>(10.0 * w.settling_time_constant() * fs);
      const double measured = y.tail(n - skip).squaredNorm() / static_cast<double>(n - skip);
      // Unit-variance white noise spreads 2 / fs per Hz over [0, fs / 2].
      const int bins = 200000;
      double integral = 0.0;
      for (int i = 0; i < bins; ++i) {
        const double f = (i + 0.5) * 0.5 * fs / bins;
        integral += std::pow(w.magnitude(f), 2) * 0.5 * fs / bins;
      }
      CHECK_MESSAGE(measured == doctest::Approx(2.0 / fs * integral).epsilon(0.05), to_string(kind));
    }
  }

  TEST_CASE("shipped data file matches the compiled table") {
    std::ifstream f(oracle::source_dir() / "data" / "iso2631_weightings_v1.json");
    REQUIRE(f.good());
    const auto j = nlohmann::json::parse(f);
    CHECK(j["version"] == kWeightingTableVersion);
    for (const auto& p : kWeightingTable) {
      const auto& e = j["weightings"][std::string(p.name)];
      auto same = [&](const char* key, double value) {
        if (e[key].is_null()) return value == 0.0 || std::isinf(value);
        return e[key].get<double>() == value;
      };
      CHECK(same("f1", p.f1));
      CHECK(same("f2", p.f2));
      CHECK(same("f3", p.f3));
      CHECK(same("f4", p.f4));
      CHECK(same("q4", p.q4));
      CHECK(same("f5", p.f5));
      CHECK(same("q5", p.q5));
      CHECK(same("f6", p.f6));
      CHECK(same("q6", p.q6));
      CHECK(e["band_hz"][0].get<double>() == p.band_lo);
      CHECK(e["band_hz"][1].get<double>() == p.band_hi);
    }
  }

  TEST_CASE("magnitude curve export") {
    const auto dir = oracle::scratch_dir("weighting_curve");
    const WeightingFilter w = design_weighting(WeightingKind::kWk, 1000.0);
    write_weighting_curve(dir / "wk.csv", w, Eigen::VectorXd::LinSpaced(5, 1.0, 5.0));
    std::ifstream f(dir / "wk.csv");
    std::string line;
    std::getline(f, line);
    CHECK(line == "freq_hz,magnitude");
    int rows = 0;
    while (std::getline(f, line)) ++rows;
    CHECK(rows == 5);
  }
}

TEST_SUITE("weighted rms") {
  TEST_CASE("zero signal") {
    const WeightingFilter w = design_weighting(WeightingKind::kWk, 1000.0);
    CHECK(weighted_rms(accel(Eigen::VectorXd::Zero(5000), 0.001), "head_acc_z", w) == 0.0);
  }

  TEST_CASE("sine at the unit-gain frequency gives A over root two") {
    struct Case {
      WeightingKind kind;
      double fs, lo, hi, duration;
    };
    for (const Case c : {Case{WeightingKind::kWk, 1000.0, 4.0, 8.0, 30.0},
                         Case{WeightingKind::kWd, 1000.0, 0.5, 2.0, 60.0},
                         Case{WeightingKind::kWf, 50.0, 0.1, 0.3, 600.0}}) {
      const double f = unit_gain_frequency(prototype(c.kind), c.lo, c.hi);
      const double dt = 1.0 / c.fs;
      const auto n = static_cast<Eigen::Index>(c.duration * c.fs);
      const WeightingFilter w = design_weighting(c.kind, c.fs);
      const double r = weighted_rms(accel(oracle::sine(n, dt, f, 1.5), dt), "head_acc_z", w, {true});
      CHECK_MESSAGE(r == doctest::Approx(1.5 / std::sqrt(2.0)).epsilon(0.03), to_string(c.kind));
    }
  }

  TEST_CASE("weighting is linear in amplitude") {
    const WeightingFilter w = design_weighting(WeightingKind::kWk, 500.0);
    const Eigen::VectorXd x = oracle::white_noise(20000, 1, 1.0);
    const double base = weighted_rms(accel(x, 0.002), "head_acc_z", w);
    CHECK(weighted_rms(accel(2.0 * x, 0.002), "head_acc_z", w) == 2.0 * base);
    CHECK(weighted_rms(accel(0.3 * x, 0.002), "head_acc_z", w) == doctest::Approx(0.3 * base).epsilon(1e-12));
  }

  TEST_CASE("unit and rate must match") {
    const WeightingFilter w = design_weighting(WeightingKind::kWk, 1000.0);
    const TimeSeries g = make_series(0.0, 0.001, {"a", "g"}, Eigen::VectorXd::Zero(10));
    CHECK(code_of([&] { weighted_rms(g, "a", w); }) == ErrorCode::kUnitMismatch);
    const TimeSeries slow = accel(Eigen::VectorXd::Zero(10), 0.002);
    CHECK(code_of([&] { weighted_rms(slow, "head_acc_z", w); }) == ErrorCode::kRateMismatch);
    const WeightingFilter wf = design_weighting(WeightingKind::kWf, 1000.0);
    CHECK(code_of([&] { msdv(g, "a", wf); }) == ErrorCode::kUnitMismatch);
  }
}

TEST_SUITE("msdv") {
  // Sine whose Wf-weighted RMS is one.
  Eigen::VectorXd unit_weighted_sine(double duration, double fs, double* f_out = nullptr) {
    const double f = 0.16;
    const WeightingFilter wf = design_weighting(WeightingKind::kWf, fs);
    if (f_out) *f_out = f;
    const auto n = static_cast<Eigen::Index>(std::lround(duration * fs));
    return oracle::sine(n, 1.0 / fs, f, std::sqrt(2.0) / wf.magnitude(f));
  }

  TEST_CASE("zero signal") {
    const WeightingFilter wf = design_weighting(WeightingKind::kWf, 50.0);
    const Msdv m = msdv(accel(Eigen::VectorXd::Zero(50000), 0.02), "head_acc_z", wf);
    CHECK(m.msdv_m_per_s15 == 0.0);
    CHECK(m.iso_msi_percent == 0.0);
  }

  TEST_CASE("unit weighted RMS over 900 s gives 30 and 10 percent") {
    const double fs = 50.0;
    const WeightingFilter wf = design_weighting(WeightingKind::kWf, fs);
    const Msdv m = msdv(accel(unit_weighted_sine(900.0, fs), 1.0 / fs), "head_acc_z", wf);
    CHECK(m.msdv_m_per_s15 == doctest::Approx(30.0).epsilon(0.02));
    CHECK(std::abs(m.iso_msi_percent - 10.0) <= 0.2);
  }

  TEST_CASE("quadrupling the duration doubles the dose") {
    const double fs = 50.0;
    const WeightingFilter wf = design_weighting(WeightingKind::kWf, fs);
    for (double T : {100.0, 225.0, 400.0}) {
      const Msdv a = msdv(accel(unit_weighted_sine(T, fs), 1.0 / fs), "head_acc_z", wf);
      const Msdv b = msdv(accel(unit_weighted_sine(4.0 * T, fs), 1.0 / fs), "head_acc_z", wf);
      CHECK(b.msdv_m_per_s15 / a.msdv_m_per_s15 == doctest::Approx(2.0).epsilon(0.02));
    }
  }

  TEST_CASE("iso MSI scales with km and clips at 100") {
    const double fs = 50.0;
    const WeightingFilter wf = design_weighting(WeightingKind::kWf, fs);
    const TimeSeries ts = accel(unit_weighted_sine(900.0, fs), 1.0 / fs);
    const Msdv m = msdv(ts, "head_acc_z", wf, 0.5);
    CHECK(m.iso_msi_percent == doctest::Approx(0.5 * m.msdv_m_per_s15));
    const TimeSeries big = accel(100.0 * unit_weighted_sine(900.0, fs), 1.0 / fs);
    CHECK(msdv(big, "head_acc_z", wf).iso_msi_percent == 100.0);
  }
}

TEST_SUITE("comfort report") {
  TEST_CASE("three weighted channels plus dose, non-negative, stable JSON") {
    const double dt = 0.001;
    const Eigen::Index n = 30000;
    Eigen::MatrixXd m(n, 3);
    m << oracle::white_noise(n, 1, 0.3), oracle::white_noise(n, 2, 0.3), oracle::white_noise(n, 3, 1.0);
    const std::string a(kUnitAccel);
    const TimeSeries ts(0.0, dt, {{"seat_acc_x", a}, {"seat_acc_y", a}, {"seat_acc_z", a}}, m);
    const ComfortReport r = comfort_report(ts, "seat");
    CHECK(r.location == "seat");
    REQUIRE(r.weighted_rms.size() == 3);
    CHECK(r.weighted_rms[0].weighting == WeightingKind::kWd);
    CHECK(r.weighted_rms[1].weighting == WeightingKind::kWd);
    CHECK(r.weighted_rms[2].weighting == WeightingKind::kWk);
    for (const auto& c : r.weighted_rms) CHECK(c.rms_m_per_s2 > 0.0);
    CHECK(r.msdv_m_per_s15 > 0.0);
    CHECK(r.iso_msi_percent == doctest::Approx(r.msdv_m_per_s15 / 3.0));
    CHECK(r.duration_s == doctest::Approx(static_cast<double>(n) * dt));  // integration span of the dose
    CHECK(r.weighted_rms[2].rms_m_per_s2 == weighted_rms(ts, "seat_acc_z", design_weighting(WeightingKind::kWk, 1000.0)));

    const auto j = nlohmann::ordered_json::parse(comfort_report_to_json(r));
    std::vector<std::string> keys;
    for (auto it = j.begin(); it != j.end(); ++it) keys.push_back(it.key());
    CHECK(keys == std::vector<std::string>{"location", "duration_s", "weighted_rms", "msdv_m_per_s1_5",
                                           "iso_msi_percent", "weighting_table_version"});
    CHECK(j["weighted_rms"][2]["weighting"] == "Wk");
  }
}
