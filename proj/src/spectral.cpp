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

#include "comfortsim/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <numbers>

#include <unsupported/Eigen/FFT>

#include "comfortsim/error.hpp"

namespace comfortsim {
namespace {

using cplx = std::complex<double>;

// Segment layout shared by all Welch estimates.
struct Segmentation {
  Eigen::Index length = 0;
  Eigen::Index step = 0;
  Eigen::Index count = 0;
  Eigen::Index bins = 0;
};

Segmentation plan_segments(Eigen::Index n, const WelchParams& p) {
  if (p.segment_length < 2) {
    throw Error(ErrorCode::kInvalidArgument, "segment length must be >= 2");
  }
  if (!(p.overlap >= 0.0 && p.overlap <= 0.95)) {
    throw Error(ErrorCode::kInvalidArgument, "overlap must lie in [0, 0.95]");
  }
  if (p.segment_length > n) {
    throw Error(ErrorCode::kSegmentTooLong,
                "segment length " + std::to_string(p.segment_length) +
                    " exceeds record length " + std::to_string(n));
  }
  Segmentation s;
  s.length = p.segment_length;
  const auto overlap_samples =
      static_cast<Eigen::Index>(std::llround(p.overlap * static_cast<double>(s.length)));
  s.step = std::max<Eigen::Index>(1, s.length - overlap_samples);
  s.count = 1 + (n - s.length) / s.step;
  s.bins = s.length / 2 + 1;
  if (s.count < 2) {
    throw Error(ErrorCode::kTooFewSegments,
                "only " + std::to_string(s.count) + " segment fits the record");
  }
  return s;
}

// Windowed, detrended transforms of every segment of one signal.
class SegmentTransforms {
 public:
  SegmentTransforms(const Eigen::Ref<const Eigen::VectorXd>& x,
                    const Segmentation& seg, const Eigen::VectorXd& window) {
    Eigen::FFT<double> fft;
    std::vector<double> buf(static_cast<std::size_t>(seg.length));
    std::vector<cplx> out;
    spectra_.reserve(static_cast<std::size_t>(seg.count));
    for (Eigen::Index k = 0; k < seg.count; ++k) {
      const auto block = x.segment(k * seg.step, seg.length);
      const double mean = block.mean();
      for (Eigen::Index i = 0; i < seg.length; ++i) {
        buf[static_cast<std::size_t>(i)] = (block(i) - mean) * window(i);
      }
      fft.fwd(out, buf);
      spectra_.emplace_back(out.begin(), out.begin() + seg.bins);
    }
  }

  const std::vector<cplx>& segment(Eigen::Index k) const {
    return spectra_[static_cast<std::size_t>(k)];
  }

 private:
  std::vector<std::vector<cplx>> spectra_;
};

// Averages conj(X) Y over segments and applies one-sided density scaling.
Eigen::VectorXcd average_cross(const SegmentTransforms& x, const SegmentTransforms& y,
                               const Segmentation& seg, double scale) {
  Eigen::VectorXcd acc = Eigen::VectorXcd::Zero(seg.bins);
  for (Eigen::Index k = 0; k < seg.count; ++k) {
    const auto& xs = x.segment(k);
    const auto& ys = y.segment(k);
    for (Eigen::Index b = 0; b < seg.bins; ++b) {
      acc(b) += std::conj(xs[static_cast<std::size_t>(b)]) * ys[static_cast<std::size_t>(b)];
    }
  }
  acc *= scale / static_cast<double>(seg.count);
  // One-sided: double everything except DC and (for even L) Nyquist.
  const Eigen::Index last_doubled = (seg.length % 2 == 0) ? seg.bins - 2 : seg.bins - 1;
  for (Eigen::Index b = 1; b <= last_doubled; ++b) acc(b) *= 2.0;
  return acc;
}

Eigen::VectorXd auto_part(const Eigen::VectorXcd& s) { return s.real(); }

Eigen::VectorXd frequency_grid(const Segmentation& seg, double fs) {
  Eigen::VectorXd f(seg.bins);
  for (Eigen::Index b = 0; b < seg.bins; ++b) {
    f(b) = static_cast<double>(b) * fs / static_cast<double>(seg.length);
  }
  return f;
}

}  // namespace

double Spectrum::integrated_power() const {
  return values.real().sum() * resolution;
}

Eigen::VectorXd make_window(Window window, Eigen::Index length) {
  Eigen::VectorXd w(length);
  for (Eigen::Index i = 0; i < length; ++i) {
    switch (window) {
      case Window::kHann:
        // Periodic Hann, the usual choice for spectral averaging.
        w(i) = 0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * static_cast<double>(i) /
                                    static_cast<double>(length));
        break;
      case Window::kRectangular:
        w(i) = 1.0;
        break;
    }
  }
  return w;
}

Spectrum welch_spectrum(const Eigen::Ref<const Eigen::VectorXd>& x,
                        const Eigen::Ref<const Eigen::VectorXd>& y,
                        double sample_rate, const WelchParams& params) {
  if (x.size() != y.size()) {
    throw Error(ErrorCode::kInvalidArgument, "signals differ in length");
  }
  if (!(sample_rate > 0.0)) {
    throw Error(ErrorCode::kInvalidRate, "sample rate must be positive");
  }
  const Segmentation seg = plan_segments(x.size(), params);
  const Eigen::VectorXd window = make_window(params.window, seg.length);
  const double scale = 1.0 / (sample_rate * window.squaredNorm());

  const bool same = (x.data() == y.data()) || (x.array() == y.array()).all();
  SegmentTransforms tx(x, seg, window);
  Spectrum out;
  out.freqs = frequency_grid(seg, sample_rate);
  out.resolution = sample_rate / static_cast<double>(seg.length);
  out.averages = seg.count;
  if (same) {
    out.kind = SpectrumKind::kAuto;
    out.values = average_cross(tx, tx, seg, scale);
    out.values.imag().setZero();
  } else {
    SegmentTransforms ty(y, seg, window);
    out.kind = SpectrumKind::kCross;
    out.values = average_cross(tx, ty, seg, scale);
  }
  return out;
}

Spectrum welch_spectrum(const TimeSeries& ts, std::string_view x, std::string_view y,
                        const WelchParams& params) {
  const Eigen::VectorXd xv = ts.column(x);
  if (x == y) return welch_spectrum(xv, xv, 1.0 / ts.dt(), params);
  const Eigen::VectorXd yv = ts.column(y);
  return welch_spectrum(xv, yv, 1.0 / ts.dt(), params);
}

Eigen::VectorXd FrequencyResponseFunction::gain() const { return response.cwiseAbs(); }

Eigen::VectorXd FrequencyResponseFunction::phase_deg() const {
  Eigen::VectorXd ph(response.size());
  for (Eigen::Index i = 0; i < response.size(); ++i) {
    ph(i) = valid[static_cast<std::size_t>(i)] ? std::arg(response(i))
                                               : std::numeric_limits<double>::quiet_NaN();
  }
  unwrap_phase(ph);
  return ph * (180.0 / std::numbers::pi);
}

void unwrap_phase(Eigen::Ref<Eigen::VectorXd> phase) {
  double prev = std::numeric_limits<double>::quiet_NaN();
  double offset = 0.0;
  for (Eigen::Index i = 0; i < phase.size(); ++i) {
    if (std::isnan(phase(i))) continue;
    double v = phase(i) + offset;
    if (!std::isnan(prev)) {
      while (v - prev > std::numbers::pi) {
        v -= 2.0 * std::numbers::pi;
        offset -= 2.0 * std::numbers::pi;
      }
      while (v - prev < -std::numbers::pi) {
        v += 2.0 * std::numbers::pi;
        offset += 2.0 * std::numbers::pi;
      }
    }
    phase(i) = v;
    prev = v;
  }
}

std::vector<FrequencyResponseFunction> estimate_frfs(
    const TimeSeries& ts, std::string_view input,
    const std::vector<std::string>& outputs, const WelchParams& params) {
  const double fs = 1.0 / ts.dt();
  const Eigen::VectorXd x = ts.column(input);
  const Segmentation seg = plan_segments(x.size(), params);
  const Eigen::VectorXd window = make_window(params.window, seg.length);
  const double scale = 1.0 / (fs * window.squaredNorm());

  SegmentTransforms tx(x, seg, window);
  const Eigen::VectorXd sxx = auto_part(average_cross(tx, tx, seg, scale));
  const double sxx_max = sxx.maxCoeff();
  const Eigen::VectorXd freqs = frequency_grid(seg, fs);

  std::vector<FrequencyResponseFunction> result;
  result.reserve(outputs.size());
  for (const auto& name : outputs) {
    const Eigen::VectorXd y = ts.column(name);
    SegmentTransforms ty(y, seg, window);
    const Eigen::VectorXcd sxy = average_cross(tx, ty, seg, scale);
    const Eigen::VectorXd syy = auto_part(average_cross(ty, ty, seg, scale));

    FrequencyResponseFunction frf;
    frf.freqs = freqs;
    frf.input_channel = std::string(input);
    frf.output_channel = name;
    frf.response = Eigen::VectorXcd::Zero(seg.bins);
    frf.coherence = Eigen::VectorXd::Zero(seg.bins);
    frf.valid.assign(static_cast<std::size_t>(seg.bins), false);
    for (Eigen::Index b = 0; b < seg.bins; ++b) {
      // Bins with input power below 1e-12 of the peak carry no information.
      if (!(sxx(b) > 1e-12 * sxx_max) || sxx_max <= 0.0) continue;
      frf.valid[static_cast<std::size_t>(b)] = true;
      frf.response(b) = sxy(b) / sxx(b);
      if (syy(b) > 0.0) {
        frf.coherence(b) = std::clamp(std::norm(sxy(b)) / (sxx(b) * syy(b)), 0.0, 1.0);
      }
    }
    result.push_back(std::move(frf));
  }
  return result;
}

FrequencyResponseFunction estimate_frf(const TimeSeries& ts, std::string_view input,
                                       std::string_view output, const WelchParams& params) {
  return std::move(estimate_frfs(ts, input, {std::string(output)}, params).front());
}

std::vector<Peak> detect_peaks(const Eigen::Ref<const Eigen::VectorXd>& freqs,
                               const Eigen::Ref<const Eigen::VectorXd>& gain,
                               const std::vector<bool>& valid, double f_lo, double f_hi,
                               double min_prominence) {
  std::vector<Peak> peaks;
  const Eigen::Index n = freqs.size();
  Eigen::Index i = 0;
  while (i < n) {
    // Next run of valid in-band bins [start, end).
    while (i < n && !(valid[static_cast<std::size_t>(i)] && freqs(i) >= f_lo && freqs(i) <= f_hi)) ++i;
    const Eigen::Index start = i;
    while (i < n && valid[static_cast<std::size_t>(i)] && freqs(i) >= f_lo && freqs(i) <= f_hi) ++i;
    const Eigen::Index end = i;
    for (Eigen::Index k = start + 1; k + 1 < end; ++k) {
      if (!(gain(k) > gain(k - 1))) continue;
      // Walk across a plateau.
      Eigen::Index right = k;
      while (right + 1 < end && gain(right + 1) == gain(k)) ++right;
      if (right + 1 >= end || !(gain(right + 1) < gain(k))) {
        k = right;
        continue;
      }
      const double top = gain(k);
      double left_min = top;
      for (Eigen::Index j = k - 1; j >= start && gain(j) <= top; --j) left_min = std::min(left_min, gain(j));
      double right_min = top;
      for (Eigen::Index j = right + 1; j < end && gain(j) <= top; ++j) right_min = std::min(right_min, gain(j));
      const double prominence = top - std::max(left_min, right_min);
      if (prominence >= min_prominence) {
        // Report the middle of a plateau.
        const Eigen::Index mid = (k + right) / 2;
        peaks.push_back({freqs(mid), top, prominence});
      }
      k = right;
    }
  }
  std::stable_sort(peaks.begin(), peaks.end(),
                   [](const Peak& a, const Peak& b) { return a.gain > b.gain; });
  return peaks;
}

std::vector<Peak> detect_peaks(const FrequencyResponseFunction& frf, double f_lo, double f_hi,
                               double min_prominence) {
  return detect_peaks(frf.freqs, frf.gain(), frf.valid, f_lo, f_hi, min_prominence);
}

}  // namespace comfortsim
