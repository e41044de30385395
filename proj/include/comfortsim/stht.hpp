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

// Seat-to-head transmissibility (STHT) experiments: single-axis excitation,
// simulation, H1 frequency-response estimation and resonance detection.

#ifndef COMFORTSIM_STHT_HPP_
#define COMFORTSIM_STHT_HPP_

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "comfortsim/body_model.hpp"
#include "comfortsim/spectral.hpp"
#include "comfortsim/timeseries.hpp"

namespace comfortsim {

enum class Axis { kX, kY, kZ };
enum class ExcitationKind { kNoise, kSweep };

std::string_view to_string(Axis axis);
std::string_view to_string(ExcitationKind kind);
std::optional<Axis> parse_axis(std::string_view s);
std::optional<ExcitationKind> parse_excitation_kind(std::string_view s);

// Seat input channel driven for an axis ("seat_acc_x", ...).
std::string seat_channel(Axis axis);

struct ExcitationSpec {
  Axis axis = Axis::kZ;
  ExcitationKind kind = ExcitationKind::kNoise;
  double f_lo_hz = 0.5;
  double f_hi_hz = 12.0;
  double rms_m_per_s2 = 1.0;
  double duration_s = 180.0;
  std::uint64_t seed = 42;
  double dt_s = 0.001;
};

// Throws kInvalidBand unless 0 < f_lo < f_hi < Nyquist and
// duration * f_lo >= 10; kInvalidArgument for other bad fields.
void validate_excitation(const ExcitationSpec& spec);

// seat_acc_x/y/z series with only the requested axis excited. Noise is a
// random-phase flat-spectrum multisine over the band; sweeps are
// logarithmic. Both are faded in and out with half-cosine ramps and scaled
// to the exact requested RMS. Bit-identical for a fixed seed.
TimeSeries generate_excitation(const ExcitationSpec& spec);

// Output channels analysed by run_stht.
const std::vector<std::string>& stht_channels();

struct SthtOptions {
  WelchParams welch{16384, 0.5, Window::kHann};
  // Spectral analysis step; 0 analyses at the excitation step, larger
  // values resample the simulated traces first.
  double analysis_dt_s = 0.0;
  double min_prominence = 0.02;
  std::string preset_id = "default_uncalibrated";
};

struct SthtResult {
  Axis axis = Axis::kZ;
  ExcitationSpec spec;
  std::string preset_id;
  std::vector<FrequencyResponseFunction> frfs;  // order of stht_channels()
  // Local maxima with gain > 1 inside the excitation band, per channel.
  std::vector<std::vector<Peak>> resonances;
  double wall_clock_s = 0.0;
  double body_wall_clock_s = 0.0;

  const FrequencyResponseFunction& frf(std::string_view output) const;
};

SthtResult run_stht(const ModelRealization& model, const ExcitationSpec& spec,
                    const SthtOptions& options = {});

// Runs several experiments on up to `jobs` threads; results come back in
// input order regardless of completion order.
std::vector<SthtResult> run_stht_batch(const ModelRealization& model,
                                       const std::vector<ExcitationSpec>& specs,
                                       const SthtOptions& options, int jobs);

// Transmissibility curve used for comparisons.
struct ReferenceCurve {
  std::string channel;
  Eigen::VectorXd freqs;
  Eigen::VectorXd gain;
  Eigen::VectorXd phase_deg;
};

ReferenceCurve to_curve(const FrequencyResponseFunction& frf);

struct CurveError {
  std::string channel;
  double rms_gain_error_db = 0.0;
  double rms_phase_error_deg = 0.0;
  double peak_freq_error_hz = 0.0;
};

// Compares two curves on the union of their grids inside the common range,
// interpolating log-gain and phase linearly in log-frequency. Symmetric in
// its arguments. Throws kGridMismatch when the overlap spans less than one
// decade.
CurveError compare_curves(const ReferenceCurve& a, const ReferenceCurve& b);

// Per-channel errors for every reference curve; throws kMissingChannel for
// a reference channel absent from the result.
std::vector<CurveError> compare_to_reference(const SthtResult& result,
                                             const std::vector<ReferenceCurve>& reference);

// `freq_hz,gain,phase_deg,coherence`; invalid bins are written as nan.
void write_frf_csv(const std::filesystem::path& path, const FrequencyResponseFunction& frf);
ReferenceCurve read_reference_csv(const std::filesystem::path& path, std::string channel);

// Resonance summary and run metadata as JSON with stable key order.
std::string resonances_to_json(const SthtResult& result);

// Writes stht_<axis>_<channel>.csv for every channel plus
// stht_<axis>_resonances.json; returns the written paths.
std::vector<std::filesystem::path> write_stht(const std::filesystem::path& dir,
                                              const SthtResult& result);

}  // namespace comfortsim

#endif  // COMFORTSIM_STHT_HPP_
