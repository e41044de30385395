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

#include "comfortsim/body_params.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "comfortsim/error.hpp"

namespace comfortsim {
namespace {

enum class Bound { kPositive, kNonNegative };

struct Entry {
  const char* key;
  double BodyParams::*member;
  Bound bound;
};

#define COMFORTSIM_P(name, bound) Entry{#name, &BodyParams::name, Bound::bound}

const std::vector<Entry>& table() {
  static const std::vector<Entry> entries = {
      COMFORTSIM_P(pelvis_mass_kg, kPositive),
      COMFORTSIM_P(trunk_mass_kg, kPositive),
      COMFORTSIM_P(head_mass_kg, kPositive),
      COMFORTSIM_P(pelvis_inertia_roll_kgm2, kPositive),
      COMFORTSIM_P(pelvis_inertia_pitch_kgm2, kPositive),
      COMFORTSIM_P(trunk_inertia_roll_kgm2, kPositive),
      COMFORTSIM_P(trunk_inertia_pitch_kgm2, kPositive),
      COMFORTSIM_P(trunk_inertia_yaw_kgm2, kPositive),
      COMFORTSIM_P(head_inertia_roll_kgm2, kPositive),
      COMFORTSIM_P(head_inertia_pitch_kgm2, kPositive),
      COMFORTSIM_P(head_inertia_yaw_kgm2, kPositive),
      COMFORTSIM_P(pelvis_to_l5s1_m, kPositive),
      COMFORTSIM_P(l5s1_to_c7t1_m, kPositive),
      COMFORTSIM_P(l5s1_to_trunk_com_m, kPositive),
      COMFORTSIM_P(c7t1_to_head_com_m, kPositive),
      COMFORTSIM_P(seat_stiffness_x_N_per_m, kNonNegative),
      COMFORTSIM_P(seat_stiffness_y_N_per_m, kNonNegative),
      COMFORTSIM_P(seat_stiffness_z_N_per_m, kNonNegative),
      COMFORTSIM_P(seat_damping_x_Ns_per_m, kNonNegative),
      COMFORTSIM_P(seat_damping_y_Ns_per_m, kNonNegative),
      COMFORTSIM_P(seat_damping_z_Ns_per_m, kNonNegative),
      COMFORTSIM_P(seat_pelvis_stiffness_roll_Nm_per_rad, kNonNegative),
      COMFORTSIM_P(seat_pelvis_stiffness_pitch_Nm_per_rad, kNonNegative),
      COMFORTSIM_P(seat_pelvis_damping_roll_Nms_per_rad, kNonNegative),
      COMFORTSIM_P(seat_pelvis_damping_pitch_Nms_per_rad, kNonNegative),
      COMFORTSIM_P(lumbar_stiffness_roll_Nm_per_rad, kNonNegative),
      COMFORTSIM_P(lumbar_stiffness_pitch_Nm_per_rad, kNonNegative),
      COMFORTSIM_P(lumbar_stiffness_yaw_Nm_per_rad, kNonNegative),
      COMFORTSIM_P(lumbar_damping_roll_Nms_per_rad, kNonNegative),
      COMFORTSIM_P(lumbar_damping_pitch_Nms_per_rad, kNonNegative),
      COMFORTSIM_P(lumbar_damping_yaw_Nms_per_rad, kNonNegative),
      COMFORTSIM_P(neck_stiffness_roll_Nm_per_rad, kNonNegative),
      COMFORTSIM_P(neck_stiffness_pitch_Nm_per_rad, kNonNegative),
      COMFORTSIM_P(neck_damping_roll_Nms_per_rad, kNonNegative),
      COMFORTSIM_P(neck_damping_pitch_Nms_per_rad, kNonNegative),
      COMFORTSIM_P(backrest_stiffness_N_per_m, kNonNegative),
      COMFORTSIM_P(backrest_damping_Ns_per_m, kNonNegative),
      COMFORTSIM_P(backrest_low_height_m, kPositive),
      COMFORTSIM_P(backrest_high_height_m, kPositive),
      COMFORTSIM_P(proprio_lumbar_kp_roll_Nm_per_rad, kNonNegative),
      COMFORTSIM_P(proprio_lumbar_kp_pitch_Nm_per_rad, kNonNegative),
      COMFORTSIM_P(proprio_lumbar_kp_yaw_Nm_per_rad, kNonNegative),
      COMFORTSIM_P(proprio_lumbar_kd_roll_Nms_per_rad, kNonNegative),
      COMFORTSIM_P(proprio_lumbar_kd_pitch_Nms_per_rad, kNonNegative),
      COMFORTSIM_P(proprio_lumbar_kd_yaw_Nms_per_rad, kNonNegative),
      COMFORTSIM_P(proprio_neck_kp_roll_Nm_per_rad, kNonNegative),
      COMFORTSIM_P(proprio_neck_kp_pitch_Nm_per_rad, kNonNegative),
      COMFORTSIM_P(proprio_neck_kd_roll_Nms_per_rad, kNonNegative),
      COMFORTSIM_P(proprio_neck_kd_pitch_Nms_per_rad, kNonNegative),
      COMFORTSIM_P(vestibular_lumbar_kp_roll_Nm_per_rad, kNonNegative),
      COMFORTSIM_P(vestibular_lumbar_kp_pitch_Nm_per_rad, kNonNegative),
      COMFORTSIM_P(vestibular_lumbar_kd_roll_Nms_per_rad, kNonNegative),
      COMFORTSIM_P(vestibular_lumbar_kd_pitch_Nms_per_rad, kNonNegative),
      COMFORTSIM_P(vestibular_neck_kp_roll_Nm_per_rad, kNonNegative),
      COMFORTSIM_P(vestibular_neck_kp_pitch_Nm_per_rad, kNonNegative),
      COMFORTSIM_P(vestibular_neck_kd_roll_Nms_per_rad, kNonNegative),
      COMFORTSIM_P(vestibular_neck_kd_pitch_Nms_per_rad, kNonNegative),
      COMFORTSIM_P(visual_neck_kp_roll_Nm_per_rad, kNonNegative),
      COMFORTSIM_P(visual_neck_kp_pitch_Nm_per_rad, kNonNegative),
      COMFORTSIM_P(proprioceptive_delay_s, kNonNegative),
      COMFORTSIM_P(vestibular_delay_s, kNonNegative),
      COMFORTSIM_P(visual_delay_s, kNonNegative),
      COMFORTSIM_P(gravity_m_per_s2, kNonNegative),
  };
  return entries;
}

#undef COMFORTSIM_P

const Entry* lookup(std::string_view key) {
  for (const auto& e : table()) {
    if (key == e.key) return &e;
  }
  return nullptr;
}

}  // namespace

const std::vector<std::string>& body_param_keys() {
  static const std::vector<std::string> keys = [] {
    std::vector<std::string> k;
    for (const auto& e : table()) k.emplace_back(e.key);
    return k;
  }();
  return keys;
}

std::optional<double> get_body_param(const BodyParams& p, std::string_view key) {
  if (const Entry* e = lookup(key)) return p.*(e->member);
  return std::nullopt;
}

bool set_body_param(BodyParams& p, std::string_view key, double value) {
  if (const Entry* e = lookup(key)) {
    p.*(e->member) = value;
    return true;
  }
  return false;
}

std::vector<std::string> validate_body_params(const BodyParams& p) {
  std::vector<std::string> errors;
  for (const auto& e : table()) {
    const double v = p.*(e.member);
    if (!std::isfinite(v)) {
      errors.push_back(std::string(e.key) + ": must be finite");
    } else if (e.bound == Bound::kPositive && !(v > 0.0)) {
      errors.push_back(std::string(e.key) + ": must be > 0");
    } else if (e.bound == Bound::kNonNegative && v < 0.0) {
      errors.push_back(std::string(e.key) + ": must be >= 0");
    }
  }
  if (p.l5s1_to_trunk_com_m > p.l5s1_to_c7t1_m) {
    errors.push_back("l5s1_to_trunk_com_m: must not exceed l5s1_to_c7t1_m");
  }
  return errors;
}

BodyParams body_params_from_json(std::string_view text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& ex) {
    throw Error(ErrorCode::kInvalidParameter, std::string("preset is not valid JSON: ") + ex.what());
  }
  if (!j.is_object()) {
    throw Error(ErrorCode::kInvalidParameter, "preset must be a JSON object");
  }
  BodyParams p;
  for (auto it = j.begin(); it != j.end(); ++it) {
    const std::string& key = it.key();
    if (key == "preset_id" || key == "note") continue;
    if (key == "vision_feedback_enabled") {
      if (!it->is_boolean()) {
        throw Error(ErrorCode::kInvalidParameter, key + ": expected a boolean");
      }
      p.vision_feedback_enabled = it->get<bool>();
      continue;
    }
    if (key == "locked_coordinates") {
      if (!it->is_array()) {
        throw Error(ErrorCode::kInvalidParameter, key + ": expected an array of names");
      }
      for (const auto& name : *it) {
        if (!name.is_string()) {
          throw Error(ErrorCode::kInvalidParameter, key + ": expected an array of names");
        }
        p.locked_coordinates.push_back(name.get<std::string>());
      }
      continue;
    }
    if (!lookup(key)) {
      throw Error(ErrorCode::kInvalidParameter, "unknown preset key '" + key + "'");
    }
    if (!it->is_number()) {
      throw Error(ErrorCode::kInvalidParameter, key + ": expected a number");
    }
    set_body_param(p, key, it->get<double>());
  }
  return p;
}

BodyParams load_body_params(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw Error(ErrorCode::kIoError, "cannot open preset '" + path.string() + "'");
  }
  std::stringstream buf;
  buf << in.rdbuf();
  return body_params_from_json(buf.str());
}

std::string body_params_to_json(const BodyParams& p, std::string_view preset_id) {
  nlohmann::ordered_json j;
  if (!preset_id.empty()) j["preset_id"] = std::string(preset_id);
  for (const auto& e : table()) j[e.key] = p.*(e.member);
  j["vision_feedback_enabled"] = p.vision_feedback_enabled;
  j["locked_coordinates"] = p.locked_coordinates;
  return j.dump(2) + "\n";
}

PostureConfig PostureConfig::preset(Posture posture, BackrestContact backrest) {
  PostureConfig c;
  c.posture = posture;
  c.backrest = backrest;
  if (posture == Posture::kSlouched) {
    c.pelvis_pitch_rad = -0.30;
    c.trunk_pitch_rad = 0.22;
    c.head_pitch_rad = 0.15;
  }
  return c;
}

std::string_view to_string(Posture p) {
  return p == Posture::kErect ? "erect" : "slouched";
}

std::string_view to_string(BackrestContact b) {
  switch (b) {
    case BackrestContact::kNone: return "none";
    case BackrestContact::kLow: return "low";
    case BackrestContact::kHigh: return "high";
  }
  return "none";
}

std::optional<Posture> parse_posture(std::string_view s) {
  if (s == "erect") return Posture::kErect;
  if (s == "slouched") return Posture::kSlouched;
  return std::nullopt;
}

std::optional<BackrestContact> parse_backrest(std::string_view s) {
  if (s == "none") return BackrestContact::kNone;
  if (s == "low") return BackrestContact::kLow;
  if (s == "high") return BackrestContact::kHigh;
  return std::nullopt;
}

}  // namespace comfortsim
