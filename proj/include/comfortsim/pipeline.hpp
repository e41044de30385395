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

// Stage runners and the end-to-end pipeline. Every stage reads its inputs
// from files and persists its outputs to the scenario's output directory,
// so running the stages one by one yields the same files as run_pipeline.

#ifndef COMFORTSIM_PIPELINE_HPP_
#define COMFORTSIM_PIPELINE_HPP_

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "comfortsim/config.hpp"
#include "comfortsim/error.hpp"
#include "comfortsim/sickness.hpp"
#include "comfortsim/spectral.hpp"
#include "comfortsim/stht.hpp"
#include "comfortsim/timeseries.hpp"

namespace comfortsim {

enum class Stage { kSimulate, kPerceive, kSickness, kMetrics, kStht };

std::string_view to_string(Stage stage);

namespace files {
inline constexpr std::string_view kSeatMotion = "seat_motion.csv";
inline constexpr std::string_view kBodyResponse = "body_response.csv";
inline constexpr std::string_view kPerceived = "perceived.csv";
inline constexpr std::string_view kConflict = "conflict.csv";
inline constexpr std::string_view kMsi = "msi.csv";
inline constexpr std::string_view kSicknessSummary = "sickness_summary.json";
inline constexpr std::string_view kComfortSeat = "comfort_seat.json";
inline constexpr std::string_view kComfortHead = "comfort_head.json";
inline constexpr std::string_view kSthtDir = "stht";
inline constexpr std::string_view kReport = "report.json";
}  // namespace files

struct StageOutput {
  Stage stage = Stage::kSimulate;
  // Written files, relative to the output directory.
  std::vector<std::filesystem::path> files;
  double wall_clock_s = 0.0;
  // Body-model time spent inside this stage (simulate and stht only).
  double body_wall_clock_s = 0.0;
  double simulated_duration_s = 0.0;
};

// Seat motion for the scenario: the input file resampled to the simulation
// step when the rates differ, or the generated excitation.
TimeSeries scenario_seat_motion(const ScenarioConfig& config);

// Each runner wraps module failures in kStageError naming the stage; IO
// failures surface as kIoError. An empty input path selects the previous
// stage's file in the output directory.
StageOutput run_simulate_stage(const ScenarioConfig& config);
StageOutput run_perceive_stage(const ScenarioConfig& config,
                               const std::filesystem::path& body_response = {});
StageOutput run_sickness_stage(const ScenarioConfig& config,
                               const std::filesystem::path& conflict = {});
// Comfort reports for every configured location whose <loc>_acc_x/y/z
// channels appear in one of the inputs. Defaults to the seat motion and
// body response of the output directory.
StageOutput run_metrics_stage(const ScenarioConfig& config,
                              const std::vector<std::filesystem::path>& inputs = {});
// Synthetic STHT experiments on the configured axes (or `axes` when
// given), up to `jobs` in parallel. Requires a seed.
StageOutput run_stht_stage(const ScenarioConfig& config, const std::vector<Axis>& axes = {},
                           int jobs = 1);

struct AxisResonances {
  Axis axis = Axis::kZ;
  std::string input_channel;
  std::string output_channel;
  std::vector<Peak> peaks;
};

struct RunReport {
  std::filesystem::path output_dir;
  std::vector<StageOutput> stages;
  // Unweighted RMS of the head acceleration and rotation channels.
  std::vector<std::pair<std::string, double>> head_rms;
  // Seat-to-head vertical-direction transmissibility peaks (gain > 1) for
  // every excited seat axis, estimated from the run itself.
  std::vector<AxisResonances> resonances;
  SicknessSummary sickness;
  double simulated_duration_s = 0.0;
  double total_wall_clock_s = 0.0;

  double body_wall_clock_s() const;
  // Simulated duration over body-model wall clock.
  double body_realtime_factor() const;
  // Simulated duration over the wall clock of the whole pipeline.
  double pipeline_realtime_factor() const;
  std::vector<std::filesystem::path> manifest() const;
};

// simulate -> perceive -> sickness -> metrics, then report.json. The
// artifact tree is deterministic for a fixed config; timing lives only in
// the returned report.
RunReport run_pipeline(const ScenarioConfig& config);

// report.json content: manifest, input description, summary and the
// realtime assertion. Stable key order; no timing values or absolute paths.
std::string report_to_json(const RunReport& report, const ScenarioConfig& config);

// Per-stage wall clock and realtime factors.
std::string timing_to_json(const RunReport& report);

struct BatchOutcome {
  std::optional<RunReport> report;
  std::optional<ErrorCode> error_code;
  std::string error_message;
};

// Independent scenarios on up to `jobs` threads, results in input order.
// Scenarios must not share an output directory.
std::vector<BatchOutcome> run_batch(const std::vector<ScenarioConfig>& configs, int jobs);

}  // namespace comfortsim

#endif  // COMFORTSIM_PIPELINE_HPP_
