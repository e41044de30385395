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

#include "comfortsim/pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <fstream>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "comfortsim/body_model.hpp"
#include "comfortsim/comfort.hpp"
#include "comfortsim/csv.hpp"
#include "comfortsim/perception.hpp"
#include "comfortsim/resample.hpp"

namespace comfortsim {
namespace {

namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;
using ordered_json = nlohmann::ordered_json;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

const fs::path& output_dir(const ScenarioConfig& config) {
  if (config.output_dir.empty()) {
    throw Error(ErrorCode::kConfigError, "output.dir: required");
  }
  return config.output_dir;
}

void ensure_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw Error(ErrorCode::kIoError, "cannot create '" + dir.string() + "': " + ec.message());
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out || !(out << text)) {
    throw Error(ErrorCode::kIoError, "cannot write '" + path.string() + "'");
  }
}

std::string read_text(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIoError, "cannot read '" + path.string() + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

// Runs `body` with module errors rewrapped as stage errors. Config and IO
// errors keep their codes.
template <typename F>
StageOutput guarded(Stage stage, F&& body) {
  const auto start = Clock::now();
  StageOutput out;
  try {
    out = body();
  } catch (const Error& e) {
    if (e.code() == ErrorCode::kIoError || e.code() == ErrorCode::kConfigError ||
        e.code() == ErrorCode::kStageError) {
      throw;
    }
    throw Error(ErrorCode::kStageError,
                "stage '" + std::string(to_string(stage)) + "': " + e.what());
  } catch (const std::exception& e) {
    throw Error(ErrorCode::kStageError,
                "stage '" + std::string(to_string(stage)) + "': " + e.what());
  }
  out.stage = stage;
  out.wall_clock_s = seconds_since(start);
  return out;
}

fs::path input_or_default(const fs::path& given, const ScenarioConfig& config,
                          std::string_view fallback) {
  return given.empty() ? output_dir(config) / fallback : given;
}

const std::vector<ChannelSpec>& seat_schema() {
  static const std::vector<ChannelSpec> schema = {
      {"seat_acc_x", std::string(kUnitAccel)},
      {"seat_acc_y", std::string(kUnitAccel)},
      {"seat_acc_z", std::string(kUnitAccel)}};
  return schema;
}

bool has_location(const TimeSeries& ts, std::string_view prefix) {
  for (const char* axis : {"_acc_x", "_acc_y", "_acc_z"}) {
    if (!ts.find(std::string(prefix) + axis)) return false;
  }
  return true;
}

// Largest power of two giving at least two half-overlapped averages.
Eigen::Index fitting_segment(Eigen::Index samples, Eigen::Index preferred) {
  Eigen::Index seg = 1;
  while (seg * 2 <= samples / 2) seg *= 2;
  return std::min(seg, preferred);
}

std::vector<AxisResonances> estimate_resonances(const TimeSeries& seat, const TimeSeries& body,
                                                const ScenarioConfig& config) {
  constexpr double kMinCoherence = 0.8;
  constexpr Eigen::Index kMinSegment = 256;
  std::vector<AxisResonances> out;
  const Eigen::Index seg = fitting_segment(seat.size(), config.stht.welch.segment_length);
  if (seg < kMinSegment) return out;
  const WelchParams welch{seg, config.stht.welch.overlap, config.stht.welch.window};
  const double nyquist = 0.5 / seat.dt();
  for (Axis axis : {Axis::kX, Axis::kY, Axis::kZ}) {
    const std::string in = seat_channel(axis);
    if (!(rms(seat.column(in)) > 0.0)) continue;
    const std::string outp = "head_acc_" + std::string(to_string(axis));
    const TimeSeries pair = hstack({seat.select({in}), body.select({outp})});
    FrequencyResponseFunction frf = estimate_frf(pair, in, outp, welch);
    for (Eigen::Index k = 0; k < frf.coherence.size(); ++k) {
      if (frf.coherence(k) < kMinCoherence) frf.valid[static_cast<std::size_t>(k)] = false;
    }
    AxisResonances r{axis, in, outp, {}};
    r.peaks = detect_peaks(frf, config.stht.f_lo_hz, std::min(config.stht.f_hi_hz, 0.5 * nyquist),
                           0.02);
    std::erase_if(r.peaks, [](const Peak& p) { return !(p.gain > 1.0); });
    out.push_back(std::move(r));
  }
  return out;
}

ordered_json input_json(const ScenarioConfig& config) {
  ordered_json j;
  if (config.input.excitation) {
    const ExcitationSpec& s = *config.input.excitation;
    j["kind"] = "excitation";
    j["axis"] = std::string(to_string(s.axis));
    j["signal"] = std::string(to_string(s.kind));
    j["f_lo_hz"] = s.f_lo_hz;
    j["f_hi_hz"] = s.f_hi_hz;
    j["rms_m_per_s2"] = s.rms_m_per_s2;
    j["duration_s"] = s.duration_s;
    j["seed"] = s.seed;
  } else {
    j["kind"] = "file";
    j["file"] = config.input.path ? config.input.path->filename().string() : std::string();
  }
  j["dt_s"] = config.dt_s;
  return j;
}

}  // namespace

std::string_view to_string(Stage stage) {
  switch (stage) {
    case Stage::kSimulate: return "simulate";
    case Stage::kPerceive: return "perceive";
    case Stage::kSickness: return "sickness";
    case Stage::kMetrics: return "metrics";
    case Stage::kStht: return "stht";
  }
  return "unknown";
}

TimeSeries scenario_seat_motion(const ScenarioConfig& config) {
  if (config.input.excitation) {
    ExcitationSpec spec = *config.input.excitation;
    spec.dt_s = config.dt_s;
    return generate_excitation(spec);
  }
  if (!config.input.path) throw Error(ErrorCode::kConfigError, "input.path: required");
  TimeSeries ts = load_timeseries(*config.input.path, seat_schema());
  if (std::abs(ts.dt() - config.dt_s) > 1e-9 * config.dt_s) ts = resample(ts, config.dt_s);
  return ts;
}

StageOutput run_simulate_stage(const ScenarioConfig& config) {
  const fs::path& dir = output_dir(config);
  return guarded(Stage::kSimulate, [&] {
    const TimeSeries seat = scenario_seat_motion(config);
    const ModelRealization model = build_model(config.model.params, config.posture);
    const BodyResponse body = simulate(model, seat);
    ensure_dir(dir);
    write_timeseries(dir / files::kSeatMotion, seat);
    write_timeseries(dir / files::kBodyResponse, body.series);
    StageOutput out;
    out.files = {fs::path(files::kSeatMotion), fs::path(files::kBodyResponse)};
    out.body_wall_clock_s = body.wall_clock_s;
    out.simulated_duration_s = static_cast<double>(seat.size()) * seat.dt();
    return out;
  });
}

StageOutput run_perceive_stage(const ScenarioConfig& config, const fs::path& body_response) {
  const fs::path& dir = output_dir(config);
  const fs::path in = input_or_default(body_response, config, files::kBodyResponse);
  return guarded(Stage::kPerceive, [&] {
    const Perception p = perceive(load_timeseries(in), config.perception);
    ensure_dir(dir);
    write_timeseries(dir / files::kPerceived, p.perceived);
    write_timeseries(dir / files::kConflict, p.conflict);
    StageOutput out;
    out.files = {fs::path(files::kPerceived), fs::path(files::kConflict)};
    return out;
  });
}

StageOutput run_sickness_stage(const ScenarioConfig& config, const fs::path& conflict) {
  const fs::path& dir = output_dir(config);
  const fs::path in = input_or_default(conflict, config, files::kConflict);
  return guarded(Stage::kSickness, [&] {
    const TimeSeries trace =
        accumulate(load_timeseries(in, {{"conflict", std::string(kUnitAccel)}}), config.accumulator);
    ensure_dir(dir);
    write_timeseries(dir / files::kMsi, trace);
    write_text(dir / files::kSicknessSummary,
               summary_to_json(summarize(trace, config.threshold_percent)));
    StageOutput out;
    out.files = {fs::path(files::kMsi), fs::path(files::kSicknessSummary)};
    return out;
  });
}

StageOutput run_metrics_stage(const ScenarioConfig& config, const std::vector<fs::path>& inputs) {
  const fs::path& dir = output_dir(config);
  std::vector<fs::path> paths = inputs;
  if (paths.empty()) paths = {dir / files::kSeatMotion, dir / files::kBodyResponse};
  return guarded(Stage::kMetrics, [&] {
    std::vector<TimeSeries> series;
    for (const auto& p : paths) series.push_back(load_timeseries(p));
    StageOutput out;
    ensure_dir(dir);
    const std::pair<bool, std::string_view> locations[] = {
        {config.metrics.seat, "seat"}, {config.metrics.head, "head"}};
    for (const auto& [enabled, prefix] : locations) {
      if (!enabled) continue;
      auto it = std::find_if(series.begin(), series.end(),
                             [&](const TimeSeries& ts) { return has_location(ts, prefix); });
      if (it == series.end()) continue;
      const fs::path name = prefix == "seat" ? files::kComfortSeat : files::kComfortHead;
      write_text(dir / name, comfort_report_to_json(comfort_report(*it, prefix, config.metrics.options)));
      out.files.push_back(name);
    }
    if (out.files.empty()) {
      throw Error(ErrorCode::kMissingChannel,
                  "no input holds <location>_acc_x/y/z for a configured location");
    }
    return out;
  });
}

StageOutput run_stht_stage(const ScenarioConfig& config, const std::vector<Axis>& axes, int jobs) {
  const fs::path& dir = output_dir(config);
  if (!config.seed) throw Error(ErrorCode::kConfigError, "seed: required for synthetic excitation");
  return guarded(Stage::kStht, [&] {
    const ModelRealization model = build_model(config.model.params, config.posture);
    std::vector<ExcitationSpec> specs;
    for (Axis axis : axes.empty() ? config.stht.axes : axes) {
      ExcitationSpec spec;
      spec.axis = axis;
      spec.kind = config.stht.kind;
      spec.f_lo_hz = config.stht.f_lo_hz;
      spec.f_hi_hz = config.stht.f_hi_hz;
      spec.rms_m_per_s2 = config.stht.rms_m_per_s2;
      spec.duration_s = config.stht.duration_s;
      spec.seed = *config.seed;
      spec.dt_s = config.dt_s;
      specs.push_back(spec);
    }
    SthtOptions options;
    options.welch = config.stht.welch;
    options.preset_id = config.model.preset_id;
    const auto results = run_stht_batch(model, specs, options, jobs);
    StageOutput out;
    const fs::path sub(files::kSthtDir);
    for (const auto& r : results) {
      for (const auto& p : write_stht(dir / sub, r)) out.files.push_back(sub / p.filename());
      out.body_wall_clock_s += r.body_wall_clock_s;
      out.simulated_duration_s += r.spec.duration_s;
    }
    return out;
  });
}

double RunReport::body_wall_clock_s() const {
  double total = 0.0;
  for (const auto& s : stages) total += s.body_wall_clock_s;
  return total;
}

double RunReport::body_realtime_factor() const {
  const double wall = body_wall_clock_s();
  return wall > 0.0 ? simulated_duration_s / wall : 0.0;
}

double RunReport::pipeline_realtime_factor() const {
  return total_wall_clock_s > 0.0 ? simulated_duration_s / total_wall_clock_s : 0.0;
}

std::vector<fs::path> RunReport::manifest() const {
  std::vector<fs::path> all;
  for (const auto& s : stages) all.insert(all.end(), s.files.begin(), s.files.end());
  all.emplace_back(files::kReport);
  return all;
}

RunReport run_pipeline(const ScenarioConfig& config) {
  const auto start = Clock::now();
  const fs::path& dir = output_dir(config);
  RunReport report;
  report.output_dir = dir;
  report.stages.push_back(run_simulate_stage(config));
  report.simulated_duration_s = report.stages.back().simulated_duration_s;
  report.stages.push_back(run_perceive_stage(config));
  report.stages.push_back(run_sickness_stage(config));
  report.stages.push_back(run_metrics_stage(config));

  // Summary from the persisted traces.
  const TimeSeries seat = load_timeseries(dir / files::kSeatMotion);
  const TimeSeries body = load_timeseries(dir / files::kBodyResponse);
  for (const char* name : {"head_acc_x", "head_acc_y", "head_acc_z", "head_rotvel_roll",
                           "head_rotvel_pitch", "head_rotvel_yaw"}) {
    report.head_rms.emplace_back(name, rms(body.column(name)));
  }
  try {
    report.resonances = estimate_resonances(seat, body, config);
  } catch (const Error& e) {
    throw Error(ErrorCode::kStageError, std::string("stage 'report': ") + e.what());
  }
  report.sickness = summarize(load_timeseries(dir / files::kMsi), config.threshold_percent);
  report.total_wall_clock_s = seconds_since(start);
  write_text(dir / files::kReport, report_to_json(report, config));
  return report;
}

std::string report_to_json(const RunReport& report, const ScenarioConfig& config) {
  ordered_json j;
  j["schema_version"] = kConfigSchemaVersion;
  j["preset_id"] = config.model.preset_id;
  j["posture"] = std::string(to_string(config.posture.posture));
  j["backrest"] = std::string(to_string(config.posture.backrest));
  j["vision"] = config.perception.vision_enabled;
  j["input"] = input_json(config);
  j["simulated_duration_s"] = report.simulated_duration_s;

  ordered_json manifest = ordered_json::object();
  for (const auto& s : report.stages) {
    ordered_json list = ordered_json::array();
    for (const auto& f : s.files) list.push_back(f.generic_string());
    manifest[std::string(to_string(s.stage))] = list;
  }
  manifest["report"] = ordered_json::array({std::string(files::kReport)});
  j["manifest"] = manifest;

  ordered_json summary;
  ordered_json head = ordered_json::object();
  for (const auto& [name, value] : report.head_rms) head[name] = value;
  summary["head_rms"] = head;
  ordered_json res = ordered_json::array();
  for (const auto& r : report.resonances) {
    for (const auto& p : r.peaks) {
      ordered_json e;
      e["axis"] = std::string(to_string(r.axis));
      e["input_channel"] = r.input_channel;
      e["output_channel"] = r.output_channel;
      e["freq_hz"] = p.freq_hz;
      e["gain"] = p.gain;
      res.push_back(e);
    }
  }
  summary["resonances"] = res;
  summary["sickness"] = ordered_json::parse(summary_to_json(report.sickness));
  ordered_json comfort = ordered_json::object();
  const fs::path dir = report.output_dir;
  for (const auto& [name, key] : {std::pair{files::kComfortSeat, "seat"},
                                  std::pair{files::kComfortHead, "head"}}) {
    const fs::path p = dir / name;
    if (fs::exists(p)) comfort[key] = ordered_json::parse(read_text(p));
  }
  summary["comfort"] = comfort;
  j["summary"] = summary;

  ordered_json perf;
  perf["body_faster_than_realtime"] = report.body_realtime_factor() > 1.0;
  j["performance"] = perf;
  return j.dump(2) + "\n";
}

std::string timing_to_json(const RunReport& report) {
  ordered_json j;
  ordered_json stages = ordered_json::object();
  for (const auto& s : report.stages) {
    ordered_json e;
    e["wall_clock_s"] = s.wall_clock_s;
    if (s.body_wall_clock_s > 0.0) e["body_wall_clock_s"] = s.body_wall_clock_s;
    stages[std::string(to_string(s.stage))] = e;
  }
  j["stages"] = stages;
  j["simulated_duration_s"] = report.simulated_duration_s;
  j["total_wall_clock_s"] = report.total_wall_clock_s;
  j["body_realtime_factor"] = report.body_realtime_factor();
  j["pipeline_realtime_factor"] = report.pipeline_realtime_factor();
  return j.dump(2) + "\n";
}

std::vector<BatchOutcome> run_batch(const std::vector<ScenarioConfig>& configs, int jobs) {
  std::vector<BatchOutcome> outcomes(configs.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < configs.size(); i = next++) {
      try {
        outcomes[i].report = run_pipeline(configs[i]);
      } catch (const Error& e) {
        outcomes[i].error_code = e.code();
        outcomes[i].error_message = e.what();
      } catch (const std::exception& e) {
        outcomes[i].error_code = ErrorCode::kStageError;
        outcomes[i].error_message = e.what();
      }
    }
  };
  const auto n = static_cast<std::size_t>(std::max(1, jobs));
  {
    std::vector<std::jthread> pool;
    for (std::size_t t = 1; t < std::min(n, configs.size()); ++t) pool.emplace_back(worker);
    worker();
  }
  return outcomes;
}

}  // namespace comfortsim
