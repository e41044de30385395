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

#include <algorithm>
#include <fstream>
#include <map>
#include <sstream>

#include <json.hpp>

#include "comfortsim/config.hpp"
#include "comfortsim/csv.hpp"
#include "comfortsim/error.hpp"
#include "comfortsim/pipeline.hpp"
#include "oracles.hpp"

using namespace comfortsim;
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

json base_config(const fs::path& out) {
  return json{{"schema_version", 1},
              {"seed", 7},
              {"input",
               {{"excitation",
                 {{"axis", "z"}, {"kind", "noise"}, {"f_lo_hz", 0.5}, {"f_hi_hz", 12.0},
                  {"rms_m_per_s2", 1.0}, {"duration_s", 20.0}}}}},
              {"model", {{"preset", "default"}}},
              {"output", {{"dir", out.string()}}}};
}

std::vector<FieldError> errors_of(const json& doc, const fs::path& dir) {
  const fs::path path = dir / "scenario.json";
  std::ofstream(path) << doc.dump(2);
  return validate_config(path);
}

bool names_field(const std::vector<FieldError>& errors, const std::string& path) {
  return std::any_of(errors.begin(), errors.end(), [&](const FieldError& e) { return e.path == path; });
}

std::map<std::string, std::string> read_tree(const fs::path& root) {
  std::map<std::string, std::string> out;
  for (const auto& entry : fs::recursive_directory_iterator(root)) {
    if (!entry.is_regular_file()) continue;
    std::ifstream f(entry.path(), std::ios::binary);
    std::ostringstream s;
    s << f.rdbuf();
    out[fs::relative(entry.path(), root).generic_string()] = s.str();
  }
  return out;
}

json read_json(const fs::path& p) {
  std::ifstream f(p);
  return json::parse(f);
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

// Lateral curves of +-2 m/s^2 with raised-cosine ramps, at 100 Hz.
fs::path write_curve_fixture(const fs::path& dir) {
  const double dt = 0.01;
  const Eigen::Index n = 6001;
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(n, 3);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double t = static_cast<double>(i) * dt;
    const double phase = std::fmod(t, 20.0);
    const double sign = std::fmod(std::floor(t / 20.0), 2.0) == 0.0 ? 1.0 : -1.0;
    double level = 0.0;
    if (phase >= 2.0 && phase < 4.0) level = 0.5 - 0.5 * std::cos(oracle::kPi * (phase - 2.0) / 2.0);
    else if (phase >= 4.0 && phase < 12.0) level = 1.0;
    else if (phase >= 12.0 && phase < 14.0) level = 0.5 + 0.5 * std::cos(oracle::kPi * (phase - 12.0) / 2.0);
    m(i, 1) = 2.0 * sign * level;
  }
  const std::string a(kUnitAccel);
  const fs::path path = dir / "curves.csv";
  write_timeseries(path, TimeSeries(0.0, dt, {{"seat_acc_x", a}, {"seat_acc_y", a}, {"seat_acc_z", a}}, m));
  return path;
}

}  // namespace

TEST_SUITE("config") {
  TEST_CASE("shipped configs validate") {
    for (const auto& entry : fs::directory_iterator(oracle::source_dir() / "configs")) {
      if (entry.path().extension() != ".json") continue;
      const auto errors = validate_config(entry.path());
      CHECK_MESSAGE(errors.empty(), entry.path().string(), "\n", format_field_errors(errors));
    }
  }

  TEST_CASE("negative mass override names the override") {
    const auto dir = oracle::scratch_dir("cfg_mass");
    json doc = base_config(dir / "out");
    doc["model"]["overrides"] = {{"head_mass_kg", -4.0}};
    CHECK(names_field(errors_of(doc, dir), "model.overrides.head_mass_kg"));
  }

  TEST_CASE("missing input names input.path") {
    const auto dir = oracle::scratch_dir("cfg_input");
    json doc = base_config(dir / "out");
    doc.erase("input");
    CHECK(names_field(errors_of(doc, dir), "input.path"));
    doc["input"] = {{"path", "absent.csv"}};
    const auto errors = errors_of(doc, dir);
    REQUIRE(names_field(errors, "input.path"));
    CHECK(format_field_errors(errors).find("file not found") != std::string::npos);
  }

  TEST_CASE("every error is reported, not only the first") {
    const auto dir = oracle::scratch_dir("cfg_many");
    json doc = base_config(dir / "out");
    doc.erase("seed");
    doc["colour"] = "blue";
    doc["model"]["overrides"] = {{"trunk_mass_kg", -1.0}, {"nonsense_gain", 3.0}};
    doc["accumulator"] = {{"hill_exponent", 0.5}};
    doc["schema_version"] = 2;
    const auto errors = errors_of(doc, dir);
    CHECK(names_field(errors, "seed"));
    CHECK(names_field(errors, "colour"));
    CHECK(names_field(errors, "model.overrides.trunk_mass_kg"));
    CHECK(names_field(errors, "model.overrides.nonsense_gain"));
    CHECK(names_field(errors, "accumulator.hill_exponent"));
    CHECK(names_field(errors, "schema_version"));
  }

  TEST_CASE("seed may come from the command line") {
    const auto dir = oracle::scratch_dir("cfg_seed");
    json doc = base_config(dir / "out");
    doc.erase("seed");
    std::ofstream(dir / "s.json") << doc.dump();
    ConfigOverrides ov;
    ov.seed = 99;
    CHECK(validate_config(dir / "s.json", ov).empty());
    CHECK(load_config(dir / "s.json", ov).seed == 99u);
    CHECK(code_of([&] { load_config(dir / "s.json"); }) == ErrorCode::kConfigError);
    CHECK(code_of([&] { load_config(dir / "missing.json"); }) == ErrorCode::kIoError);
  }

  TEST_CASE("presets resolve against the config directory") {
    const ScenarioConfig cfg = load_config(oracle::source_dir() / "configs" / "default_noise.json");
    CHECK(cfg.model.preset_id == "default_uncalibrated");
    CHECK(cfg.seed == 42u);
    REQUIRE(cfg.input.excitation.has_value());
    CHECK(cfg.input.excitation->seed == 42u);
    CHECK(cfg.model.params.head_mass_kg == BodyParams{}.head_mass_kg);
  }

  TEST_CASE("vision override reaches perception and body feedback") {
    const auto dir = oracle::scratch_dir("cfg_vision");
    ConfigOverrides ov;
    ov.vision = true;
    const ScenarioConfig cfg = parse_config(base_config(dir / "out").dump(), dir, ov);
    CHECK(cfg.perception.vision_enabled);
    CHECK(cfg.model.params.vision_feedback_enabled);
  }
}

TEST_SUITE("pipeline") {
  TEST_CASE("zero motion propagates to zero everywhere") {
    const auto dir = oracle::scratch_dir("pipe_zero");
    const std::string a(kUnitAccel);
    write_timeseries(dir / "still.csv", TimeSeries(0.0, 0.001, {{"seat_acc_x", a}, {"seat_acc_y", a}, {"seat_acc_z", a}},
                                                   Eigen::MatrixXd::Zero(60001, 3)));
    json doc = base_config(dir / "out");
    doc["input"] = {{"path", "still.csv"}};
    const ScenarioConfig cfg = parse_config(doc.dump(), dir);
    const RunReport r = run_pipeline(cfg);
    for (const auto& [name, value] : r.head_rms) CHECK_MESSAGE(value == 0.0, name);
    CHECK(r.sickness.final_percent == 0.0);
    CHECK(r.sickness.peak_percent == 0.0);
    CHECK(r.resonances.empty());
    CHECK(r.body_realtime_factor() > 1.0);
    for (const char* loc : {"comfort_seat.json", "comfort_head.json"}) {
      const json c = read_json(dir / "out" / loc);
      for (const auto& ch : c["weighted_rms"]) CHECK(ch["weighted_rms_m_per_s2"] == 0.0);
      CHECK(c["msdv_m_per_s1_5"] == 0.0);
      CHECK(c["iso_msi_percent"] == 0.0);
    }
    const json report = read_json(dir / "out" / "report.json");
    CHECK(report["performance"]["body_faster_than_realtime"] == true);
    CHECK(report["summary"]["resonances"].empty());
    CHECK(report["simulated_duration_s"].get<double>() == doctest::Approx(60.0).epsilon(1e-4));
    for (const auto& p : r.manifest()) CHECK_MESSAGE(fs::exists(dir / "out" / p), p.string());
  }

  TEST_CASE("same config twice gives byte-identical trees") {
    const auto dir = oracle::scratch_dir("pipe_determinism");
    const ScenarioConfig a = parse_config(base_config(dir / "a").dump(), dir);
    const ScenarioConfig b = parse_config(base_config(dir / "b").dump(), dir);
    run_pipeline(a);
    run_pipeline(b);
    const auto ta = read_tree(dir / "a");
    const auto tb = read_tree(dir / "b");
    CHECK(ta.size() >= 9);
    CHECK(ta == tb);
  }

  TEST_CASE("stages run one by one reproduce the pipeline files") {
    const auto dir = oracle::scratch_dir("pipe_isolation");
    const ScenarioConfig whole = parse_config(base_config(dir / "whole").dump(), dir);
    const ScenarioConfig parts = parse_config(base_config(dir / "parts").dump(), dir);
    run_pipeline(whole);
    run_simulate_stage(parts);
    run_perceive_stage(parts, dir / "parts" / files::kBodyResponse);
    run_sickness_stage(parts, dir / "parts" / files::kConflict);
    run_metrics_stage(parts, {dir / "parts" / files::kSeatMotion, dir / "parts" / files::kBodyResponse});
    auto tw = read_tree(dir / "whole");
    tw.erase(std::string(files::kReport));
    CHECK(tw == read_tree(dir / "parts"));
  }

  TEST_CASE("metrics run on a provided head-motion file alone") {
    const auto dir = oracle::scratch_dir("pipe_metrics");
    const std::string a(kUnitAccel);
    Eigen::MatrixXd m(20000, 3);
    m << oracle::white_noise(20000, 1, 0.2), oracle::white_noise(20000, 2, 0.2), oracle::white_noise(20000, 3, 0.5);
    write_timeseries(dir / "head.csv", TimeSeries(0.0, 0.001, {{"head_acc_x", a}, {"head_acc_y", a}, {"head_acc_z", a}}, m));
    ScenarioConfig cfg;
    cfg.output_dir = dir / "out";
    const StageOutput out = run_metrics_stage(cfg, {dir / "head.csv"});
    REQUIRE(out.files.size() == 1);
    CHECK(out.files.front() == fs::path(files::kComfortHead));
    CHECK(read_json(dir / "out" / files::kComfortHead)["msdv_m_per_s1_5"].get<double>() > 0.0);
    CHECK_FALSE(fs::exists(dir / "out" / files::kBodyResponse));
    CHECK(code_of([&] { run_metrics_stage(cfg, {dir / "nothing.csv"}); }) == ErrorCode::kIoError);
  }

  TEST_CASE("stage failures name the stage") {
    const auto dir = oracle::scratch_dir("pipe_stage_error");
    write_timeseries(dir / "bad.csv", make_series(0.0, 0.001, {"head_acc_x", std::string(kUnitAccel)},
                                                  Eigen::VectorXd::Zero(100)));
    ScenarioConfig cfg;
    cfg.output_dir = dir / "out";
    try {
      run_perceive_stage(cfg, dir / "bad.csv");
      FAIL("expected StageError");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::kStageError);
      CHECK(std::string(e.what()).find("perceive") != std::string::npos);
    }
    CHECK(code_of([&] { run_stht_stage(cfg); }) == ErrorCode::kConfigError);
  }

  TEST_CASE("vision lowers accumulated sickness on a curved drive") {
    const auto dir = oracle::scratch_dir("pipe_vision");
    write_curve_fixture(dir);
    json doc = base_config(dir / "off");
    doc["input"] = {{"path", "curves.csv"}};
    doc["accumulator"] = {{"time_constant_s", 60.0}};
    const RunReport off = run_pipeline(parse_config(doc.dump(), dir));
    doc["output"]["dir"] = (dir / "on").string();
    doc["perception"] = {{"vision", true}};
    const RunReport on = run_pipeline(parse_config(doc.dump(), dir));
    MESSAGE("final MSI off ", off.sickness.final_percent, " on ", on.sickness.final_percent);
    CHECK(off.sickness.final_percent > 0.0);
    CHECK(off.sickness.final_percent >= on.sickness.final_percent);
  }

  TEST_CASE("batch runs keep input order and isolate failures") {
    const auto dir = oracle::scratch_dir("pipe_batch");
    std::vector<ScenarioConfig> configs;
    for (int i = 0; i < 3; ++i) {
      json doc = base_config(dir / ("s" + std::to_string(i)));
      doc["seed"] = 100 + i;
      configs.push_back(parse_config(doc.dump(), dir));
    }
    configs[1].input.excitation.reset();
    configs[1].input.path = dir / "does_not_exist.csv";
    const auto outcomes = run_batch(configs, 2);
    REQUIRE(outcomes.size() == 3);
    CHECK(outcomes[0].report.has_value());
    CHECK_FALSE(outcomes[1].report.has_value());
    CHECK(outcomes[1].error_code.has_value());
    CHECK(outcomes[2].report.has_value());
    CHECK(outcomes[0].report->output_dir == dir / "s0");
    CHECK(outcomes[2].report->output_dir == dir / "s2");
    // Parallel and serial execution give the same files.
    const auto serial_dir = dir / "serial";
    ScenarioConfig again = configs[2];
    again.output_dir = serial_dir;
    run_pipeline(again);
    CHECK(read_tree(serial_dir) == read_tree(dir / "s2"));
  }
}

TEST_SUITE("stht stage") {
  TEST_CASE("writes per-channel curves and a resonance summary for the chosen axis") {
    const auto dir = oracle::scratch_dir("pipe_stht");
    json doc = base_config(dir / "out");
    doc["stht"] = {{"duration_s", 40.0}, {"segment_length", 4096}};
    const ScenarioConfig cfg = parse_config(doc.dump(), dir);
    const StageOutput out = run_stht_stage(cfg, {Axis::kZ});
    CHECK(fs::exists(dir / "out" / files::kSthtDir / "stht_z_resonances.json"));
    CHECK(fs::exists(dir / "out" / files::kSthtDir / "stht_z_head_acc_z.csv"));
    CHECK_FALSE(fs::exists(dir / "out" / files::kSthtDir / "stht_x_resonances.json"));
    CHECK(out.files.size() == stht_channels().size() + 1);
  }
}
