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

#ifndef COMFORTSIM_SPECTRAL_HPP_
#define COMFORTSIM_SPECTRAL_HPP_

#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Core>

#include "comfortsim/timeseries.hpp"

namespace comfortsim {

enum class Window { kHann, kRectangular };
enum class SpectrumKind { kAuto, kCross };

struct WelchParams {
  Eigen::Index segment_length = 4096;
  double overlap = 0.5;  // fraction in [0, 0.95]
  Window window = Window::kHann;
};

// One-sided (cross-)power spectral density on k * fs / L, k = 0..L/2.
// Cross spectra follow Sxy = conj(X) Y so the phase of Sxy/Sxx is positive
// when y leads x.
struct Spectrum {
  Eigen::VectorXd freqs;
  Eigen::VectorXcd values;
  SpectrumKind kind = SpectrumKind::kCross;
  double resolution = 0.0;
  Eigen::Index averages = 0;

  // Sum of values * resolution; equals the signal variance for an auto
  // spectrum (Parseval).
  double integrated_power() const;
};

Eigen::VectorXd make_window(Window window, Eigen::Index length);

// Welch averaged spectrum of two equally long signals. Each segment is mean
// detrended and tapered. Throws kSegmentTooLong when the segment exceeds the
// record and kTooFewSegments when fewer than two averages fit. Passing the
// same data for x and y yields an auto spectrum with exactly zero imaginary
// part.
Spectrum welch_spectrum(const Eigen::Ref<const Eigen::VectorXd>& x,
                        const Eigen::Ref<const Eigen::VectorXd>& y,
                        double sample_rate, const WelchParams& params = {});

Spectrum welch_spectrum(const TimeSeries& ts, std::string_view x,
                        std::string_view y, const WelchParams& params = {});

struct FrequencyResponseFunction {
  Eigen::VectorXd freqs;
  Eigen::VectorXcd response;
  Eigen::VectorXd coherence;
  // Bins without usable input power are kept on the grid but flagged.
  std::vector<bool> valid;
  std::string input_channel;
  std::string output_channel;

  Eigen::VectorXd gain() const;
  // Unwrapped phase in degrees across valid bins; NaN at invalid bins.
  Eigen::VectorXd phase_deg() const;
};

// H1 estimates (Sxy / Sxx) of every output against one input, sharing the
// input's segment transforms.
std::vector<FrequencyResponseFunction> estimate_frfs(
    const TimeSeries& ts, std::string_view input,
    const std::vector<std::string>& outputs, const WelchParams& params = {});

FrequencyResponseFunction estimate_frf(const TimeSeries& ts,
                                       std::string_view input,
                                       std::string_view output,
                                       const WelchParams& params = {});

// Unwraps a radian phase sequence in place, ignoring NaN entries.
void unwrap_phase(Eigen::Ref<Eigen::VectorXd> phase_rad);

struct Peak {
  double freq_hz = 0.0;
  double gain = 0.0;
  double prominence = 0.0;
};

// Local gain maxima inside [f_lo, f_hi] (clipped to the grid) whose
// topographic prominence is at least `min_prominence`, sorted by descending
// gain. Invalid bins split the curve into independent runs.
std::vector<Peak> detect_peaks(const FrequencyResponseFunction& frf,
                               double f_lo, double f_hi, double min_prominence);

// Same search on bare arrays.
std::vector<Peak> detect_peaks(const Eigen::Ref<const Eigen::VectorXd>& freqs,
                               const Eigen::Ref<const Eigen::VectorXd>& gain,
                               const std::vector<bool>& valid, double f_lo,
                               double f_hi, double min_prominence);

}  // namespace comfortsim

#endif  // COMFORTSIM_SPECTRAL_HPP_
