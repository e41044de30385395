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

#include "comfortsim/filters.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "comfortsim/error.hpp"

namespace comfortsim {

using cplx = std::complex<double>;

cplx AnalogSection::response(double freq_hz) const {
  const cplx s(0.0, 2.0 * std::numbers::pi * freq_hz);
  return (b0 + s * (b1 + s * b2)) / (a0 + s * (a1 + s * a2));
}

cplx Biquad::response(double freq_hz, double sample_rate) const {
  const cplx z1 = std::polar(1.0, -2.0 * std::numbers::pi * freq_hz / sample_rate);
  return (b0 + z1 * (b1 + z1 * b2)) / (1.0 + z1 * (a1 + z1 * a2));
}

double Biquad::pole_radius() const {
  // Roots of z^2 + a1 z + a2.
  const cplx disc = std::sqrt(cplx(a1 * a1 - 4.0 * a2, 0.0));
  const cplx p1 = (-a1 + disc) / 2.0;
  const cplx p2 = (-a1 - disc) / 2.0;
  return std::max(std::abs(p1), std::abs(p2));
}

Biquad bilinear(const AnalogSection& s, double sample_rate, double prewarp_hz) {
  double k = 2.0 * sample_rate;
  if (prewarp_hz > 0.0) {
    const double w = 2.0 * std::numbers::pi * prewarp_hz;
    k = w / std::tan(w / (2.0 * sample_rate));
  }
  const double k2 = k * k;
  const double nb0 = s.b0 + s.b1 * k + s.b2 * k2;
  const double nb1 = 2.0 * (s.b0 - s.b2 * k2);
  const double nb2 = s.b0 - s.b1 * k + s.b2 * k2;
  const double na0 = s.a0 + s.a1 * k + s.a2 * k2;
  const double na1 = 2.0 * (s.a0 - s.a2 * k2);
  const double na2 = s.a0 - s.a1 * k + s.a2 * k2;
  return Biquad{nb0 / na0, nb1 / na0, nb2 / na0, na1 / na0, na2 / na0};
}

BiquadState BiquadState::steady(const Biquad& q, double x) {
  const double y = q.dc_gain() * x;
  BiquadState st;
  st.s2 = q.b2 * x - q.a2 * y;
  st.s1 = q.b1 * x - q.a1 * y + st.s2;
  return st;
}

cplx BiquadCascade::response(double freq_hz, double sample_rate) const {
  cplx h(1.0, 0.0);
  for (const auto& q : sections_) h *= q.response(freq_hz, sample_rate);
  return h;
}

double BiquadCascade::max_pole_radius() const {
  double r = 0.0;
  for (const auto& q : sections_) r = std::max(r, q.pole_radius());
  return r;
}

Eigen::VectorXd BiquadCascade::filter(const Eigen::Ref<const Eigen::VectorXd>& x) const {
  Eigen::VectorXd y = x;
  for (const auto& q : sections_) {
    BiquadState st;
    for (Eigen::Index i = 0; i < y.size(); ++i) y(i) = st.process(q, y(i));
  }
  return y;
}

Eigen::VectorXd BiquadCascade::filtfilt(const Eigen::Ref<const Eigen::VectorXd>& x) const {
  const Eigen::Index n = x.size();
  if (n < 2 || sections_.empty()) return x;
  // Odd reflection about each end point, long enough for the slowest pole
  // to decay by 1e-6, keeps edge slopes from launching transients.
  const double r = max_pole_radius();
  Eigen::Index pad = 6 * static_cast<Eigen::Index>(sections_.size()) + 3;
  if (r > 0.0 && r < 1.0) {
    pad = std::max(pad, static_cast<Eigen::Index>(std::ceil(std::log(1e-6) / std::log(r))));
  }
  pad = std::min(pad, n - 1);
  Eigen::VectorXd y(n + 2 * pad);
  for (Eigen::Index i = 0; i < pad; ++i) {
    y(i) = 2.0 * x(0) - x(pad - i);
    y(n + pad + i) = 2.0 * x(n - 1) - x(n - 2 - i);
  }
  y.segment(pad, n) = x;
  auto pass = [this](Eigen::VectorXd& v) {
    for (const auto& q : sections_) {
      BiquadState st = BiquadState::steady(q, v(0));
      for (Eigen::Index i = 0; i < v.size(); ++i) v(i) = st.process(q, v(i));
    }
  };
  pass(y);
  y.reverseInPlace();
  pass(y);
  y.reverseInPlace();
  return y.segment(pad, n);
}

BiquadCascade butterworth_lowpass(int order, double cutoff_hz, double sample_rate) {
  if (order < 2 || order % 2 != 0) {
    throw Error(ErrorCode::kInvalidArgument, "Butterworth order must be even and >= 2");
  }
  if (!(cutoff_hz > 0.0) || cutoff_hz >= 0.5 * sample_rate) {
    throw Error(ErrorCode::kInvalidArgument, "cutoff must lie in (0, Nyquist)");
  }
  const double wc = 2.0 * std::numbers::pi * cutoff_hz;
  std::vector<Biquad> sections;
  for (int k = 0; k < order / 2; ++k) {
    const double theta = std::numbers::pi * (2.0 * k + 1.0) / (2.0 * order);
    // s^2 + 2 sin(theta) wc s + wc^2 per conjugate pole pair.
    AnalogSection s{wc * wc, 0.0, 0.0, wc * wc, 2.0 * std::sin(theta) * wc, 1.0};
    sections.push_back(bilinear(s, sample_rate, cutoff_hz));
  }
  return BiquadCascade(std::move(sections));
}

}  // namespace comfortsim
