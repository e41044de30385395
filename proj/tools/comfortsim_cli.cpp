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

// comfortsim command-line front end.
//
// Exit codes: 0 success, 1 invalid configuration or arguments, 2 stage or
// IO failure.

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "comfortsim/config.hpp"
#include "comfortsim/error.hpp"
#include "comfortsim/pipeline.hpp"

namespace {

namespace fs = std::filesystem;
using namespace comfortsim;

constexpr int kExitOk = 0;
constexpr int kExitInvalid = 1;
constexpr int kExitStage = 2;

struct Options {
  std::vector<std::string> configs;
  std::string out;
  std::optional<std::uint64_t> seed;
  std::string vision;
  std::vector<std::string> inputs;
  std::vector<std::string> axes;
  int jobs = 1;
  std::string timing_out;
};

ConfigOverrides overrides_from(const Options& o, bool input_is_scenario) {
  ConfigOverrides ov;
  if (!o.out.empty()) ov.output_dir = o.out;
  ov.seed = o.seed;
  if (!o.vision.empty()) ov.vision = o.vision == "on";
  if (input_is_scenario && !o.inputs.empty()) ov.input_path = o.inputs.front();
  return ov;
}

// Scenario from --config, or built-in defaults for stages that do not need
// a seat-motion input.
ScenarioConfig scenario(const Options& o, const std::string& config_path, bool input_is_scenario) {
  const ConfigOverrides ov = overrides_from(o, input_is_scenario);
  if (!config_path.empty()) return load_config(config_path, ov);
  ScenarioConfig cfg;
  if (!ov.output_dir) throw Error(ErrorCode::kConfigError, "output.dir: required (--out or --config)");
  cfg.output_dir = *ov.output_dir;
  cfg.seed = ov.seed;
  if (ov.vision) {
    cfg.perception.vision_enabled = *ov.vision;
    cfg.model.params.vision_feedback_enabled = *ov.vision;
  }
  return cfg;
}

void print_files(const StageOutput& out, const fs::path& dir) {
  for (const auto& f : out.files) std::cout << (dir / f).string() << "\n";
}

void write_timing(const std::string& path, const RunReport& report) {
  if (path.empty()) return;
  std::ofstream f(path, std::ios::binary);
  if (!f || !(f << timing_to_json(report))) {
    throw Error(ErrorCode::kIoError, "cannot write '" + path + "'");
  }
}

int exit_code_for(ErrorCode code) {
  return code == ErrorCode::kConfigError ? kExitInvalid : kExitStage;
}

int run_validate(const Options& o) {
  if (o.configs.empty()) {
    std::cerr << "validate: --config is required\n";
    return kExitInvalid;
  }
  int status = kExitOk;
  for (const auto& path : o.configs) {
    const auto errors = validate_config(path, overrides_from(o, true));
    if (errors.empty()) {
      std::cout << path << ": ok\n";
    } else {
      std::cout << path << ": " << errors.size() << " error(s)\n"
                << format_field_errors(errors) << "\n";
      status = kExitInvalid;
    }
  }
  return status;
}

int run_pipeline_command(const Options& o) {
  if (o.configs.empty()) {
    std::cerr << "pipeline: --config is required\n";
    return kExitInvalid;
  }
  std::vector<ScenarioConfig> configs;
  for (const auto& path : o.configs) {
    ScenarioConfig cfg = scenario(o, path, true);
    // Separate output trees when one --out serves several scenarios.
    if (o.configs.size() > 1 && !o.out.empty()) cfg.output_dir = fs::path(o.out) / fs::path(path).stem();
    configs.push_back(std::move(cfg));
  }
  const auto outcomes = run_batch(configs, o.jobs);
  int status = kExitOk;
  for (std::size_t i = 0; i < outcomes.size(); ++i) {
    const auto& r = outcomes[i];
    if (!r.report) {
      std::cerr << o.configs[i] << ": " << r.error_message << "\n";
      status = std::max(status, exit_code_for(*r.error_code));
      continue;
    }
    std::cout << o.configs[i] << ": " << configs[i].output_dir.string() << "\n"
              << "  final MSI " << r.report->sickness.final_percent << " %, body realtime factor "
              << r.report->body_realtime_factor() << ", pipeline realtime factor "
              << r.report->pipeline_realtime_factor() << "\n";
    if (outcomes.size() == 1) write_timing(o.timing_out, *r.report);
  }
  return status;
}

int run_stage(const std::string& name, const Options& o) {
  const std::string config_path = o.configs.empty() ? std::string() : o.configs.front();
  std::vector<fs::path> inputs(o.inputs.begin(), o.inputs.end());
  StageOutput out;
  ScenarioConfig cfg;
  if (name == "simulate") {
    if (config_path.empty()) throw Error(ErrorCode::kConfigError, "simulate: --config is required");
    cfg = scenario(o, config_path, true);
    out = run_simulate_stage(cfg);
    std::cout << "body realtime factor " << out.simulated_duration_s / out.body_wall_clock_s << "\n";
  } else if (name == "perceive") {
    cfg = scenario(o, config_path, false);
    out = run_perceive_stage(cfg, inputs.empty() ? fs::path() : inputs.front());
  } else if (name == "sickness") {
    cfg = scenario(o, config_path, false);
    out = run_sickness_stage(cfg, inputs.empty() ? fs::path() : inputs.front());
  } else if (name == "metrics") {
    cfg = scenario(o, config_path, false);
    out = run_metrics_stage(cfg, inputs);
  } else {
    cfg = scenario(o, config_path, false);
    std::vector<Axis> axes;
    for (const auto& a : o.axes) axes.push_back(*parse_axis(a));
    out = run_stht_stage(cfg, axes, o.jobs);
  }
  print_files(out, cfg.output_dir);
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Seat-to-head vibration, motion perception and sickness simulation"};
  app.require_subcommand(1);
  Options o;

  auto add_common = [&](CLI::App* sub, bool many_configs) {
    auto* cfg = sub->add_option("--config", o.configs, "Scenario config JSON");
    if (!many_configs) cfg->expected(1);
    sub->add_option("--out", o.out, "Output directory (overrides output.dir)");
    sub->add_option("--seed", o.seed, "RNG seed for synthetic excitation");
    sub->add_option("--vision", o.vision, "Visual feedback")
        ->check(CLI::IsMember({"on", "off"}));
  };

  auto* simulate = app.add_subcommand("simulate", "Body response to the scenario's seat motion");
  add_common(simulate, false);
  simulate->add_option("--input", o.inputs, "Seat-motion CSV (overrides input)")->expected(1);

  auto* perceive = app.add_subcommand("perceive", "Perceived motion and conflict from a body response");
  add_common(perceive, false);
  perceive->add_option("--input", o.inputs, "Body-response CSV")->expected(1);

  auto* sickness = app.add_subcommand("sickness", "MSI trace from a conflict trace");
  add_common(sickness, false);
  sickness->add_option("--input", o.inputs, "Conflict CSV")->expected(1);

  auto* metrics = app.add_subcommand("metrics", "Weighted comfort metrics of seat and head motion");
  add_common(metrics, false);
  metrics->add_option("--input", o.inputs, "Motion CSV(s) holding seat_acc_* or head_acc_*");

  auto* stht = app.add_subcommand("stht", "Synthetic seat-to-head transmissibility experiment");
  add_common(stht, false);
  stht->add_option("--axis", o.axes, "Excitation axis (repeatable)")
      ->check(CLI::IsMember({"x", "y", "z"}));
  stht->add_option("--jobs", o.jobs, "Parallel experiments")->check(CLI::PositiveNumber);

  auto* pipeline = app.add_subcommand("pipeline", "All stages plus report.json");
  add_common(pipeline, true);
  pipeline->add_option("--input", o.inputs, "Seat-motion CSV (overrides input)")->expected(1);
  pipeline->add_option("--jobs", o.jobs, "Parallel scenarios")->check(CLI::PositiveNumber);
  pipeline->add_option("--timing-out", o.timing_out, "Write wall-clock timing JSON here");

  auto* validate = app.add_subcommand("validate", "Check config files without running anything");
  add_common(validate, true);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitInvalid;
  }

  try {
    CLI::App* sub = app.get_subcommands().front();
    const std::string name = sub->get_name();
    if (name == "validate") return run_validate(o);
    if (name == "pipeline") return run_pipeline_command(o);
    return run_stage(name, o);
  } catch (const Error& e) {
    std::cerr << e.what() << "\n";
    return exit_code_for(e.code());
  } catch (const std::exception& e) {
    std::cerr << e.what() << "\n";
    return kExitStage;
  }
}
