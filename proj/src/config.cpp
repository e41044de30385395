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

#include "comfortsim/config.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "comfortsim/error.hpp"

namespace comfortsim {
namespace {

using nlohmann::json;
namespace fs = std::filesystem;

enum class Range { kAny, kPositive, kNonNegative };

// Walks one JSON object, recording type errors and unknown keys with their
// dotted paths.
class ObjectReader {
 public:
  ObjectReader(const json* obj, std::string path, std::vector<FieldError>& errors)
      : obj_(obj), path_(std::move(path)), errors_(errors) {
    if (obj_ && !obj_->is_object()) {
      error("", "expected an object");
      obj_ = nullptr;
    }
  }

  bool present() const { return obj_ != nullptr; }
  std::string field(std::string_view key) const {
    return path_.empty() ? std::string(key) : path_ + "." + std::string(key);
  }
  void error(std::string_view key, std::string message) {
    errors_.push_back({key.empty() ? path_ : field(key), std::move(message)});
  }

  const json* get(std::string_view key) {
    seen_.insert(std::string(key));
    if (!obj_) return nullptr;
    auto it = obj_->find(std::string(key));
    return it == obj_->end() ? nullptr : &*it;
  }

  bool number(std::string_view key, double& out, Range range = Range::kAny) {
    const json* v = get(key);
    if (!v) return false;
    if (!v->is_number()) {
      error(key, "expected a number");
      return false;
    }
    const double x = v->get<double>();
    if (!std::isfinite(x)) {
      error(key, "must be finite");
    } else if (range == Range::kPositive && !(x > 0.0)) {
      error(key, "must be > 0");
    } else if (range == Range::kNonNegative && x < 0.0) {
      error(key, "must be >= 0");
    } else {
      out = x;
      return true;
    }
    return false;
  }

  bool boolean(std::string_view key, bool& out) {
    const json* v = get(key);
    if (!v) return false;
    if (!v->is_boolean()) {
      error(key, "expected true or false");
      return false;
    }
    out = v->get<bool>();
    return true;
  }

  bool string(std::string_view key, std::string& out) {
    const json* v = get(key);
    if (!v) return false;
    if (!v->is_string()) {
      error(key, "expected a string");
      return false;
    }
    out = v->get<std::string>();
    return true;
  }

  bool integer(std::string_view key, std::int64_t& out) {
    const json* v = get(key);
    if (!v) return false;
    if (!v->is_number_integer()) {
      error(key, "expected an integer");
      return false;
    }
    out = v->get<std::int64_t>();
    return true;
  }

  ObjectReader child(std::string_view key) { return ObjectReader(get(key), field(key), errors_); }

  void finish() {
    if (!obj_) return;
    for (auto it = obj_->begin(); it != obj_->end(); ++it) {
      if (!seen_.count(it.key())) error(it.key(), "unknown key");
    }
  }

  std::vector<FieldError>& errors() { return errors_; }

 private:
  const json* obj_;
  std::string path_;
  std::vector<FieldError>& errors_;
  std::set<std::string> seen_;
};

fs::path resolve(const fs::path& base, const fs::path& p) {
  return p.is_absolute() || base.empty() ? p : base / p;
}

void read_excitation(ObjectReader& r, ExcitationSpec& spec) {
  std::string s;
  if (r.string("axis", s)) {
    if (auto a = parse_axis(s)) {
      spec.axis = *a;
    } else {
      r.error("axis", "expected x, y or z");
    }
  }
  if (r.string("kind", s)) {
    if (auto k = parse_excitation_kind(s)) {
      spec.kind = *k;
    } else {
      r.error("kind", "expected noise or sweep");
    }
  }
  r.number("f_lo_hz", spec.f_lo_hz);
  r.number("f_hi_hz", spec.f_hi_hz);
  r.number("rms_m_per_s2", spec.rms_m_per_s2, Range::kNonNegative);
  r.number("duration_s", spec.duration_s, Range::kPositive);
  r.finish();
}

void read_model(ObjectReader r, const fs::path& base, ModelConfig& model) {
  r.string("preset", model.preset);
  bool builtin = model.preset == "default" || model.preset == kBuiltinPresetId;
  if (builtin) {
    model.params = BodyParams{};
    model.preset_id = std::string(kBuiltinPresetId);
  } else {
    const fs::path path = resolve(base, model.preset);
    try {
      model.params = load_body_params(path);
      model.preset_id = path.stem().string();
    } catch (const Error& e) {
      r.error("preset", e.what());
    }
  }
  ObjectReader ov = r.child("overrides");
  if (ov.present()) {
    for (const auto& key : body_param_keys()) {
      double v = 0.0;
      if (ov.number(key, v)) {
        set_body_param(model.params, key, v);
        model.overrides.emplace_back(key, v);
      }
    }
    ov.finish();
  }
  if (const json* locked = r.get("locked_coordinates")) {
    const auto& names = full_coordinate_names();
    if (!locked->is_array()) {
      r.error("locked_coordinates", "expected an array of coordinate names");
    } else {
      model.params.locked_coordinates.clear();
      for (const auto& item : *locked) {
        if (!item.is_string() ||
            std::find(names.begin(), names.end(), item.get<std::string>()) == names.end()) {
          r.error("locked_coordinates", "unknown coordinate " + item.dump());
        } else {
          model.params.locked_coordinates.push_back(item.get<std::string>());
        }
      }
    }
  }
  r.finish();
  // Range checks on the merged parameter set, attributed to the override
  // when one set the offending value.
  for (const auto& msg : validate_body_params(model.params)) {
    const std::string key = msg.substr(0, msg.find(':'));
    const bool overridden = std::any_of(model.overrides.begin(), model.overrides.end(),
                                        [&](const auto& o) { return o.first == key; });
    r.errors().push_back({overridden ? r.field("overrides") + "." + key : r.field("preset"),
                          overridden ? msg.substr(msg.find(':') + 2) : msg});
  }
}

void read_posture(ObjectReader r, PostureConfig& posture) {
  std::string s;
  Posture p = posture.posture;
  BackrestContact b = posture.backrest;
  if (r.string("posture", s)) {
    if (auto v = parse_posture(s)) {
      p = *v;
    } else {
      r.error("posture", "expected erect or slouched");
    }
  }
  if (r.string("backrest", s)) {
    if (auto v = parse_backrest(s)) {
      b = *v;
    } else {
      r.error("backrest", "expected none, low or high");
    }
  }
  posture = PostureConfig::preset(p, b);
  r.number("pelvis_pitch_rad", posture.pelvis_pitch_rad);
  r.number("trunk_pitch_rad", posture.trunk_pitch_rad);
  r.number("head_pitch_rad", posture.head_pitch_rad);
  r.finish();
}

void read_perception(ObjectReader r, VestibularParams& p) {
  r.boolean("vision", p.vision_enabled);
  r.number("visual_gain", p.visual_gain, Range::kNonNegative);
  r.number("visual_delay_s", p.visual_delay_s, Range::kNonNegative);
  r.number("anticipation_gain", p.anticipation_gain, Range::kNonNegative);
  r.number("scc_tau1_s", p.scc_tau1_s, Range::kPositive);
  r.number("scc_tau2_s", p.scc_tau2_s, Range::kPositive);
  r.number("otolith_gain", p.otolith_gain, Range::kNonNegative);
  r.number("sv_tau_s", p.sv_tau_s, Range::kPositive);
  r.finish();
}

void read_accumulator(ObjectReader r, AccumulatorParams& p, double& threshold) {
  r.number("half_saturation_m_per_s2", p.half_saturation_m_per_s2, Range::kPositive);
  if (r.number("hill_exponent", p.hill_exponent) && p.hill_exponent < 1.0) {
    r.error("hill_exponent", "must be >= 1");
  }
  r.number("time_constant_s", p.time_constant_s, Range::kPositive);
  if (r.number("scale_percent", p.scale_percent) &&
      !(p.scale_percent > 0.0 && p.scale_percent <= 100.0)) {
    r.error("scale_percent", "must lie in (0, 100]");
  }
  if (r.number("threshold_percent", threshold) && !(threshold >= 0.0 && threshold <= 100.0)) {
    r.error("threshold_percent", "must lie in [0, 100]");
  }
  r.finish();
}

void read_metrics(ObjectReader r, MetricsConfig& m) {
  if (const json* loc = r.get("locations")) {
    if (!loc->is_array()) {
      r.error("locations", "expected an array");
    } else {
      m.seat = m.head = false;
      for (const auto& item : *loc) {
        if (item == "seat") {
          m.seat = true;
        } else if (item == "head") {
          m.head = true;
        } else {
          r.error("locations", "unknown location " + item.dump());
        }
      }
    }
  }
  r.number("km", m.options.km, Range::kNonNegative);
  r.boolean("trim_settling", m.options.trim_settling);
  r.finish();
}

void read_stht(ObjectReader r, SthtConfig& s) {
  if (const json* axes = r.get("axes")) {
    if (!axes->is_array() || axes->empty()) {
      r.error("axes", "expected a non-empty array of x, y, z");
    } else {
      s.axes.clear();
      for (const auto& item : *axes) {
        std::optional<Axis> a;
        if (item.is_string()) a = parse_axis(item.get<std::string>());
        if (a) {
          s.axes.push_back(*a);
        } else {
          r.error("axes", "unknown axis " + item.dump());
        }
      }
    }
  }
  std::string kind;
  if (r.string("kind", kind)) {
    if (auto k = parse_excitation_kind(kind)) {
      s.kind = *k;
    } else {
      r.error("kind", "expected noise or sweep");
    }
  }
  r.number("f_lo_hz", s.f_lo_hz);
  r.number("f_hi_hz", s.f_hi_hz);
  r.number("rms_m_per_s2", s.rms_m_per_s2, Range::kNonNegative);
  r.number("duration_s", s.duration_s, Range::kPositive);
  std::int64_t seg = 0;
  if (r.integer("segment_length", seg)) {
    if (seg < 16) {
      r.error("segment_length", "must be >= 16");
    } else {
      s.welch.segment_length = seg;
    }
  }
  if (r.number("overlap", s.welch.overlap) && !(s.welch.overlap >= 0.0 && s.welch.overlap <= 0.95)) {
    r.error("overlap", "must lie in [0, 0.95]");
  }
  r.finish();
}

ScenarioConfig parse_document(const json& doc, const fs::path& base,
                              std::vector<FieldError>& errors) {
  ScenarioConfig cfg;
  ObjectReader root(&doc, "", errors);
  if (!root.present()) return cfg;

  std::int64_t version = 0;
  if (!root.integer("schema_version", version)) {
    if (!doc.contains("schema_version")) root.error("schema_version", "required");
  } else if (version != kConfigSchemaVersion) {
    root.error("schema_version", "unsupported version " + std::to_string(version) +
                                     " (expected " + std::to_string(kConfigSchemaVersion) + ")");
  }
  cfg.schema_version = static_cast<int>(version);

  if (const json* seed = root.get("seed")) {
    if (!seed->is_number_unsigned()) {
      root.error("seed", "expected a non-negative integer");
    } else {
      cfg.seed = seed->get<std::uint64_t>();
    }
  }

  ObjectReader sim = root.child("simulation");
  sim.number("dt_s", cfg.dt_s, Range::kPositive);
  sim.finish();

  ObjectReader in = root.child("input");
  {
    std::string path;
    const bool has_path = in.string("path", path);
    ObjectReader ex = in.child("excitation");
    if (has_path) {
      cfg.input.path = resolve(base, path);
      if (!fs::is_regular_file(*cfg.input.path)) {
        in.error("path", "file not found: " + cfg.input.path->string());
      }
    }
    if (ex.present()) {
      ExcitationSpec spec;
      read_excitation(ex, spec);
      spec.dt_s = cfg.dt_s;
      spec.seed = cfg.seed.value_or(0);
      cfg.input.excitation = spec;
      if (!cfg.seed) root.error("seed", "required when input.excitation is used");
      try {
        validate_excitation(spec);
      } catch (const Error& e) {
        in.error("excitation", e.what());
      }
    }
    if (has_path && ex.present()) {
      in.error("", "give either path or excitation, not both");
    } else if (!has_path && !ex.present()) {
      in.error("path", "required (or give input.excitation)");
    }
    in.finish();
  }

  read_model(root.child("model"), base, cfg.model);
  read_posture(root.child("posture"), cfg.posture);
  read_perception(root.child("perception"), cfg.perception);
  read_accumulator(root.child("accumulator"), cfg.accumulator, cfg.threshold_percent);
  read_metrics(root.child("metrics"), cfg.metrics);
  read_stht(root.child("stht"), cfg.stht);

  ObjectReader out = root.child("output");
  std::string dir;
  if (out.string("dir", dir)) {
    cfg.output_dir = dir;
  } else if (!doc.contains("output") || !doc["output"].is_object() ||
             !doc["output"].contains("dir")) {
    out.error("dir", "required");
  }
  out.finish();
  root.finish();

  cfg.model.params.vision_feedback_enabled = cfg.perception.vision_enabled;
  cfg.perception.gravity_m_per_s2 = cfg.model.params.gravity_m_per_s2;
  return cfg;
}

void apply_overrides(json& doc, const ConfigOverrides& o) {
  if (!doc.is_object()) return;
  auto section = [&](const char* key) -> json& {
    if (!doc.contains(key) || !doc[key].is_object()) doc[key] = json::object();
    return doc[key];
  };
  if (o.output_dir) section("output")["dir"] = o.output_dir->string();
  if (o.seed) doc["seed"] = *o.seed;
  if (o.vision) section("perception")["vision"] = *o.vision;
  if (o.input_path) {
    json& in = section("input");
    in.erase("excitation");
    in["path"] = fs::absolute(*o.input_path).string();
  }
}

json read_json_file(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIoError, "cannot open config '" + path.string() + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  return json::parse(buf.str(), nullptr, false);
}

ScenarioConfig parse_or_throw(json doc, const fs::path& base, const fs::path& source,
                              const ConfigOverrides& overrides) {
  if (doc.is_discarded()) {
    throw Error(ErrorCode::kConfigError, "(root): not valid JSON");
  }
  apply_overrides(doc, overrides);
  std::vector<FieldError> errors;
  ScenarioConfig cfg = parse_document(doc, base, errors);
  if (!errors.empty()) throw Error(ErrorCode::kConfigError, format_field_errors(errors));
  cfg.source = source;
  return cfg;
}

}  // namespace

std::string format_field_errors(const std::vector<FieldError>& errors) {
  std::string out;
  for (const auto& e : errors) {
    if (!out.empty()) out += "\n";
    out += (e.path.empty() ? std::string("(root)") : e.path) + ": " + e.message;
  }
  return out;
}

std::vector<FieldError> validate_config(const fs::path& path, const ConfigOverrides& overrides) {
  json doc;
  try {
    doc = read_json_file(path);
  } catch (const Error& e) {
    return {{"", e.what()}};
  }
  if (doc.is_discarded()) return {{"", "not valid JSON"}};
  apply_overrides(doc, overrides);
  std::vector<FieldError> errors;
  parse_document(doc, path.parent_path(), errors);
  return errors;
}

ScenarioConfig load_config(const fs::path& path, const ConfigOverrides& overrides) {
  return parse_or_throw(read_json_file(path), path.parent_path(), path, overrides);
}

ScenarioConfig parse_config(std::string_view json_text, const fs::path& base_dir,
                            const ConfigOverrides& overrides) {
  return parse_or_throw(json::parse(json_text, nullptr, false), base_dir, {}, overrides);
}

}  // namespace comfortsim
