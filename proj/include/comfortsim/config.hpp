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

// Scenario configuration: a JSON document with a versioned schema. Unknown
// keys are errors. Relative input and preset paths resolve against the
// config file's directory; the output directory resolves against the
// working directory.

#ifndef COMFORTSIM_CONFIG_HPP_
#define COMFORTSIM_CONFIG_HPP_

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "comfortsim/body_params.hpp"
#include "comfortsim/comfort.hpp"
#include "comfortsim/perception.hpp"
#include "comfortsim/sickness.hpp"
#include "comfortsim/spectral.hpp"
#include "comfortsim/stht.hpp"

namespace comfortsim {

inline constexpr int kConfigSchemaVersion = 1;
inline constexpr std::string_view kBuiltinPresetId = "default_uncalibrated";

struct InputConfig {
  std::optional<std::filesystem::path> path;
  std::optional<ExcitationSpec> excitation;
};

struct ModelConfig {
  // "default" / "default_uncalibrated" select the built-in preset; anything
  // else is a preset file.
  std::string preset = "default";
  std::string preset_id = std::string(kBuiltinPresetId);
  std::vector<std::pair<std::string, double>> overrides;
  BodyParams params;  // preset with overrides and vision applied
};

struct MetricsConfig {
  bool seat = true;
  bool head = true;
  MetricsOptions options;
};

struct SthtConfig {
  std::vector<Axis> axes = {Axis::kX, Axis::kY, Axis::kZ};
  ExcitationKind kind = ExcitationKind::kNoise;
  double f_lo_hz = 0.5;
  double f_hi_hz = 12.0;
  double rms_m_per_s2 = 1.0;
  double duration_s = 180.0;
  WelchParams welch{16384, 0.5, Window::kHann};
};

struct ScenarioConfig {
  int schema_version = kConfigSchemaVersion;
  std::filesystem::path source;  // config file, empty when built in code
  std::optional<std::uint64_t> seed;
  InputConfig input;
  ModelConfig model;
  PostureConfig posture;
  VestibularParams perception;
  AccumulatorParams accumulator;
  double threshold_percent = 10.0;
  MetricsConfig metrics;
  double dt_s = 0.001;
  SthtConfig stht;
  std::filesystem::path output_dir;
};

struct FieldError {
  std::string path;  // dotted field path, e.g. "model.overrides.head_mass_kg"
  std::string message;
};

std::string format_field_errors(const std::vector<FieldError>& errors);

// Values from the command line that replace config fields before
// validation.
struct ConfigOverrides {
  std::optional<std::filesystem::path> output_dir;
  std::optional<std::uint64_t> seed;
  std::optional<bool> vision;
  std::optional<std::filesystem::path> input_path;
};

// Every problem in the file, never executing anything. Empty means valid.
std::vector<FieldError> validate_config(const std::filesystem::path& path,
                                        const ConfigOverrides& overrides = {});

// Parsed, validated scenario. Throws kConfigError listing all field errors,
// kIoError when the file cannot be read.
ScenarioConfig load_config(const std::filesystem::path& path,
                           const ConfigOverrides& overrides = {});

// Same from in-memory JSON text; `base_dir` anchors relative paths.
ScenarioConfig parse_config(std::string_view json_text, const std::filesystem::path& base_dir,
                            const ConfigOverrides& overrides = {});

}  // namespace comfortsim

#endif  // COMFORTSIM_CONFIG_HPP_
