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

#ifndef COMFORTSIM_BODY_PARAMS_HPP_
#define COMFORTSIM_BODY_PARAMS_HPP_

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace comfortsim {

// Lumped seat + pelvis/trunk/head parameters. Inertias are centroidal and
// expressed about lab-aligned axes. Lengths are measured along each
// segment's axis. All "kp"/"kd" terms are feedback gains acting through a
// neural delay.
struct BodyParams {
  double pelvis_mass_kg = 14.0;
  double trunk_mass_kg = 36.0;
  double head_mass_kg = 5.0;

  double pelvis_inertia_roll_kgm2 = 0.15;
  double pelvis_inertia_pitch_kgm2 = 0.12;
  double trunk_inertia_roll_kgm2 = 1.1;
  double trunk_inertia_pitch_kgm2 = 1.0;
  double trunk_inertia_yaw_kgm2 = 0.4;
  double head_inertia_roll_kgm2 = 0.025;
  double head_inertia_pitch_kgm2 = 0.022;
  double head_inertia_yaw_kgm2 = 0.015;

  double pelvis_to_l5s1_m = 0.12;
  double l5s1_to_c7t1_m = 0.45;
  double l5s1_to_trunk_com_m = 0.22;
  double c7t1_to_head_com_m = 0.15;

  double seat_stiffness_x_N_per_m = 22000.0;
  double seat_stiffness_y_N_per_m = 22000.0;
  double seat_stiffness_z_N_per_m = 45000.0;
  double seat_damping_x_Ns_per_m = 900.0;
  double seat_damping_y_Ns_per_m = 900.0;
  double seat_damping_z_Ns_per_m = 1300.0;

  double seat_pelvis_stiffness_roll_Nm_per_rad = 1500.0;
  double seat_pelvis_stiffness_pitch_Nm_per_rad = 1200.0;
  double seat_pelvis_damping_roll_Nms_per_rad = 40.0;
  double seat_pelvis_damping_pitch_Nms_per_rad = 30.0;

  double lumbar_stiffness_roll_Nm_per_rad = 800.0;
  double lumbar_stiffness_pitch_Nm_per_rad = 600.0;
  double lumbar_stiffness_yaw_Nm_per_rad = 300.0;
  double lumbar_damping_roll_Nms_per_rad = 30.0;
  double lumbar_damping_pitch_Nms_per_rad = 25.0;
  double lumbar_damping_yaw_Nms_per_rad = 10.0;

  double neck_stiffness_roll_Nm_per_rad = 40.0;
  double neck_stiffness_pitch_Nm_per_rad = 30.0;
  double neck_damping_roll_Nms_per_rad = 2.5;
  double neck_damping_pitch_Nms_per_rad = 2.0;

  double backrest_stiffness_N_per_m = 8000.0;
  double backrest_damping_Ns_per_m = 300.0;
  double backrest_low_height_m = 0.25;
  double backrest_high_height_m = 0.55;

  // Proprioceptive PD on joint angle / rate.
  double proprio_lumbar_kp_roll_Nm_per_rad = 200.0;
  double proprio_lumbar_kp_pitch_Nm_per_rad = 200.0;
  double proprio_lumbar_kp_yaw_Nm_per_rad = 100.0;
  double proprio_lumbar_kd_roll_Nms_per_rad = 15.0;
  double proprio_lumbar_kd_pitch_Nms_per_rad = 15.0;
  double proprio_lumbar_kd_yaw_Nms_per_rad = 5.0;
  double proprio_neck_kp_roll_Nm_per_rad = 10.0;
  double proprio_neck_kp_pitch_Nm_per_rad = 10.0;
  double proprio_neck_kd_roll_Nms_per_rad = 0.8;
  double proprio_neck_kd_pitch_Nms_per_rad = 0.8;

  // Vestibular PD on segment-in-space orientation / angular velocity.
  double vestibular_lumbar_kp_roll_Nm_per_rad = 60.0;
  double vestibular_lumbar_kp_pitch_Nm_per_rad = 60.0;
  double vestibular_lumbar_kd_roll_Nms_per_rad = 8.0;
  double vestibular_lumbar_kd_pitch_Nms_per_rad = 8.0;
  double vestibular_neck_kp_roll_Nm_per_rad = 8.0;
  double vestibular_neck_kp_pitch_Nm_per_rad = 8.0;
  double vestibular_neck_kd_roll_Nms_per_rad = 1.0;
  double vestibular_neck_kd_pitch_Nms_per_rad = 1.0;

  // Extra head-in-space stiffness from vision, used when enabled.
  bool vision_feedback_enabled = false;
  double visual_neck_kp_roll_Nm_per_rad = 5.0;
  double visual_neck_kp_pitch_Nm_per_rad = 5.0;

  double proprioceptive_delay_s = 0.025;
  double vestibular_delay_s = 0.1;
  double visual_delay_s = 0.15;

  double gravity_m_per_s2 = 9.81;

  // Generalised coordinates held at zero (see body_model.hpp for names).
  std::vector<std::string> locked_coordinates;
};

// Keys of all numeric parameters, in declaration order. The JSON preset
// format uses exactly these keys plus "vision_feedback_enabled",
// "locked_coordinates" and the optional metadata keys "preset_id" and
// "note".
const std::vector<std::string>& body_param_keys();
std::optional<double> get_body_param(const BodyParams& p, std::string_view key);
// Returns false for an unknown key.
bool set_body_param(BodyParams& p, std::string_view key, double value);

// Invariant violations as "key: reason" strings; empty when valid.
std::vector<std::string> validate_body_params(const BodyParams& p);

// Preset JSON with unit-suffixed keys. Unknown keys are rejected with
// kInvalidParameter.
BodyParams body_params_from_json(std::string_view text);
BodyParams load_body_params(const std::filesystem::path& path);
std::string body_params_to_json(const BodyParams& p, std::string_view preset_id = "");

enum class Posture { kErect, kSlouched };
enum class BackrestContact { kNone, kLow, kHigh };

// Nominal absolute pitch inclination of each segment (positive leans the
// segment axis forward) and the backrest selection.
struct PostureConfig {
  Posture posture = Posture::kErect;
  BackrestContact backrest = BackrestContact::kHigh;
  double pelvis_pitch_rad = -0.05;
  double trunk_pitch_rad = 0.08;
  double head_pitch_rad = 0.05;

  static PostureConfig preset(Posture posture, BackrestContact backrest);
};

std::string_view to_string(Posture p);
std::string_view to_string(BackrestContact b);
std::optional<Posture> parse_posture(std::string_view s);
std::optional<BackrestContact> parse_backrest(std::string_view s);

}  // namespace comfortsim

#endif  // COMFORTSIM_BODY_PARAMS_HPP_
