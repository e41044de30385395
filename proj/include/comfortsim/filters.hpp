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

#ifndef COMFORTSIM_FILTERS_HPP_
#define COMFORTSIM_FILTERS_HPP_

#include <complex>
#include <vector>

#include <Eigen/Core>

namespace comfortsim {

// Analog second-order section (b0 + b1 s + b2 s^2) / (a0 + a1 s + a2 s^2).
struct AnalogSection {
  double b0 = 1.0, b1 = 0.0, b2 = 0.0;
  double a0 = 1.0, a1 = 0.0, a2 = 0.0;

  std::complex<double> response(double freq_hz) const;
};

// Digital biquad in transposed direct form II, a0 normalised to 1.
struct Biquad {
  double b0 = 1.0, b1 = 0.0, b2 = 0.0;
  double a1 = 0.0, a2 = 0.0;

  std::complex<double> response(double freq_hz, double sample_rate) const;
  // Largest pole magnitude.
  double pole_radius() const;
  double dc_gain() const { return (b0 + b1 + b2) / (1.0 + a1 + a2); }
};

// Bilinear transform of an analog section. When `prewarp_hz` > 0 the
// digital response matches the analog one exactly at that frequency.
Biquad bilinear(const AnalogSection& section, double sample_rate,
                double prewarp_hz = 0.0);

// Streaming state of one biquad.
struct BiquadState {
  double s1 = 0.0, s2 = 0.0;

  double process(const Biquad& q, double x) {
    const double y = q.b0 * x + s1;
    s1 = q.b1 * x - q.a1 * y + s2;
    s2 = q.b2 * x - q.a2 * y;
    return y;
  }
  // State that keeps the output at dc_gain * x for a constant input x.
  static BiquadState steady(const Biquad& q, double x);
};

class BiquadCascade {
 public:
  BiquadCascade() = default;
  explicit BiquadCascade(std::vector<Biquad> sections)
      : sections_(std::move(sections)) {}

  const std::vector<Biquad>& sections() const { return sections_; }
  std::complex<double> response(double freq_hz, double sample_rate) const;
  double max_pole_radius() const;

  // Causal filtering from zero initial state.
  Eigen::VectorXd filter(const Eigen::Ref<const Eigen::VectorXd>& x) const;
  // Zero-phase forward-backward filtering over an odd-reflected extension
  // of the signal; each pass starts in the steady state of its first sample
  // so constants pass through unchanged.
  Eigen::VectorXd filtfilt(const Eigen::Ref<const Eigen::VectorXd>& x) const;

 private:
  std::vector<Biquad> sections_;
};

// Even-order Butterworth low-pass as a cascade of order/2 biquads.
BiquadCascade butterworth_lowpass(int order, double cutoff_hz,
                                  double sample_rate);

}  // namespace comfortsim

#endif  // COMFORTSIM_FILTERS_HPP_
