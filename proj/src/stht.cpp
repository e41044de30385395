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

#include "comfortsim/stht.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <fstream>
#include <numbers>
#include <random>
#include <thread>

#include <json.hpp>
#include <unsupported/Eigen/FFT>

#include "comfortsim/csv.hpp"
#include "comfortsim/error.hpp"
#include "comfortsim/resample.hpp"

namespace comfortsim {
namespace {

using Eigen::VectorXd;
constexpr double kTwoPi = 2.0 * std::numbers::pi;

// Uniform in [0, 1) from the top 53 bits; independent of the standard
// library's distribution implementations.
double unit_uniform(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

Eigen::Index sample_count(const ExcitationSpec& spec) {
  return static_cast<Eigen::Index>(std::floor(spec.duration_s / spec.dt_s + 1e-9)) + 1;
}

VectorXd multisine(const ExcitationSpec& spec, Eigen::Index n) {
  Eigen::Index len = 1;
  while (len < n) len <<= 1;
  const double df = 1.0 / (static_cast<double>(len) * spec.dt_s);
  std::mt19937_64 rng(spec.seed);
  std::vector<std::complex<double>> spectrum(static_cast<std::size_t>(len / 2 + 1));
  for (std::size_t k = 1; k < spectrum.size(); ++k) {
    // Draw for every bin so the in-band phases do not depend on the band.
    const double phase = kTwoPi * unit_uniform(rng);
    const double f = static_cast<double>(k) * df;
    if (f >= spec.f_lo_hz && f <= spec.f_hi_hz) spectrum[k] = std::polar(1.0, phase);
  }
  Eigen::FFT<double> fft;
  fft.SetFlag(Eigen::FFT<double>::HalfSpectrum);
  std::vector<double> time;
  fft.inv(time, spectrum, static_cast<std::size_t>(len));
  VectorXd out(n);
  for (Eigen::Index i = 0; i < n; ++i) out(i) = time[static_cast<std::size_t>(i)];
  return out;
}

VectorXd log_sweep(const ExcitationSpec& spec, Eigen::Index n) {
  const double total = spec.duration_s;
  const double ratio = std::log(spec.f_hi_hz / spec.f_lo_hz);
  VectorXd out(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double t = static_cast<double>(i) * spec.dt_s;
    const double phase = kTwoPi * spec.f_lo_hz * total / ratio * (std::exp(t / total * ratio) - 1.0);
    out(i) = std::sin(phase);
  }
  return out;
}

void apply_fades(VectorXd& x, double dt, double fade_s) {
  const auto n = x.size();
  const auto ramp = std::min<Eigen::Index>(static_cast<Eigen::Index>(fade_s / dt), n / 2);
  for (Eigen::Index i = 0; i < ramp; ++i) {
    const double w = 0.5 * (1.0 - std::cos(std::numbers::pi * static_cast<double>(i) /
                                           static_cast<double>(ramp)));
    x(i) *= w;
    x(n - 1 - i) *= w;
  }
}

}  // namespace

std::string_view to_string(Axis axis) {
  switch (axis) {
    case Axis::kX: return "x";
    case Axis::kY: return "y";
    case Axis::kZ: return "z";
  }
  return "z";
}

std::string_view to_string(ExcitationKind kind) {
  return kind == ExcitationKind::kNoise ? "noise" : "sweep";
}

std::optional<Axis> parse_axis(std::string_view s) {
  if (s == "x" || s == "X") return Axis::kX;
  if (s == "y" || s == "Y") return Axis::kY;
  if (s == "z" || s == "Z") return Axis::kZ;
  return std::nullopt;
}

std::optional<ExcitationKind> parse_excitation_kind(std::string_view s) {
  if (s == "noise") return ExcitationKind::kNoise;
  if (s == "sweep") return ExcitationKind::kSweep;
  return std::nullopt;
}

std::string seat_channel(Axis axis) { return "seat_acc_" + std::string(to_string(axis)); }

void validate_excitation(const ExcitationSpec& spec) {
  if (!(spec.dt_s > 0.0) || !std::isfinite(spec.dt_s)) {
    throw Error(ErrorCode::kInvalidArgument, "excitation dt must be positive");
  }
  if (!(spec.rms_m_per_s2 >= 0.0) || !std::isfinite(spec.rms_m_per_s2)) {
    throw Error(ErrorCode::kInvalidArgument, "excitation rms must be >= 0");
  }
  if (!(spec.duration_s > 0.0) || !std::isfinite(spec.duration_s)) {
    throw Error(ErrorCode::kInvalidArgument, "excitation duration must be positive");
  }
  if (!(spec.f_lo_hz > 0.0)) throw Error(ErrorCode::kInvalidBand, "f_lo must be > 0");
  if (!(spec.f_hi_hz > spec.f_lo_hz)) throw Error(ErrorCode::kInvalidBand, "f_hi must exceed f_lo");
  if (spec.f_hi_hz >= 0.5 / spec.dt_s) {
    throw Error(ErrorCode::kInvalidBand, "f_hi must lie below the Nyquist frequency");
  }
  if (spec.duration_s * spec.f_lo_hz < 10.0 - 1e-9) {
    throw Error(ErrorCode::kInvalidBand,
                "duration must cover at least 10 cycles of f_lo");
  }
}

TimeSeries generate_excitation(const ExcitationSpec& spec) {
  validate_excitation(spec);
  const Eigen::Index n = sample_count(spec);
  VectorXd x = spec.kind == ExcitationKind::kNoise ? multisine(spec, n) : log_sweep(spec, n);
  apply_fades(x, spec.dt_s, std::min(1.0 / spec.f_lo_hz, 0.1 * spec.duration_s));
  x.array() -= x.mean();
  const double r = rms(x);
  x *= r > 0.0 ? spec.rms_m_per_s2 / r : 0.0;

  Eigen::MatrixXd samples = Eigen::MatrixXd::Zero(n, 3);
  samples.col(static_cast<Eigen::Index>(spec.axis)) = x;
  std::vector<Channel> channels;
  for (Axis a : {Axis::kX, Axis::kY, Axis::kZ}) {
    channels.push_back({seat_channel(a), std::string(kUnitAccel)});
  }
  return TimeSeries(0.0, spec.dt_s, std::move(channels), std::move(samples));
}

const std::vector<std::string>& stht_channels() {
  static const std::vector<std::string> names = {
      "trunk_acc_x",     "trunk_acc_y",      "trunk_acc_z",    "trunk_rotvel_roll",
      "trunk_rotvel_pitch", "trunk_rotvel_yaw", "head_acc_x",   "head_acc_y",
      "head_acc_z",      "head_rotvel_roll", "head_rotvel_pitch", "head_rotvel_yaw"};
  return names;
}

const FrequencyResponseFunction& SthtResult::frf(std::string_view output) const {
  for (const auto& f : frfs) {
    if (f.output_channel == output) return f;
  }
  throw Error(ErrorCode::kMissingChannel, "no STHT curve for '" + std::string(output) + "'");
}

SthtResult run_stht(const ModelRealization& model, const ExcitationSpec& spec,
                    const SthtOptions& options) {
  const auto clock_start = std::chrono::steady_clock::now();
  const TimeSeries input = generate_excitation(spec);
  const BodyResponse response = simulate(model, input);

  std::vector<TimeSeries> parts = {input.select({seat_channel(spec.axis)}),
                                   response.series.select(stht_channels())};
  TimeSeries traces = hstack(parts);
  if (options.analysis_dt_s > 0.0 && options.analysis_dt_s != spec.dt_s) {
    traces = resample(traces, options.analysis_dt_s);
  }

  SthtResult result;
  result.axis = spec.axis;
  result.spec = spec;
  result.preset_id = options.preset_id;
  result.frfs = estimate_frfs(traces, seat_channel(spec.axis), stht_channels(), options.welch);
  for (const auto& frf : result.frfs) {
    auto peaks = detect_peaks(frf, spec.f_lo_hz, spec.f_hi_hz, options.min_prominence);
    std::erase_if(peaks, [](const Peak& p) { return !(p.gain > 1.0); });
    result.resonances.push_back(std::move(peaks));
  }
  result.body_wall_clock_s = response.wall_clock_s;
  result.wall_clock_s =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - clock_start).count();
  return result;
}

std::vector<SthtResult> run_stht_batch(const ModelRealization& model,
                                       const std::vector<ExcitationSpec>& specs,
                                       const SthtOptions& options, int jobs) {
  std::vector<std::optional<SthtResult>> slots(specs.size());
  std::vector<std::exception_ptr> errors(specs.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < specs.size(); i = next++) {
      try {
        slots[i] = run_stht(model, specs[i], options);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  const auto threads = static_cast<std::size_t>(std::clamp<int>(jobs, 1, 64));
  {
    std::vector<std::jthread> pool;
    for (std::size_t t = 1; t < std::min(threads, specs.size()); ++t) pool.emplace_back(worker);
    worker();
  }
  std::vector<SthtResult> out;
  for (std::size_t i = 0; i < specs.size(); ++i) {
    if (errors[i]) std::rethrow_exception(errors[i]);
    out.push_back(std::move(*slots[i]));
  }
  return out;
}

ReferenceCurve to_curve(const FrequencyResponseFunction& frf) {
  ReferenceCurve c;
  c.channel = frf.output_channel;
  const VectorXd gain = frf.gain();
  const VectorXd phase = frf.phase_deg();
  std::vector<Eigen::Index> keep;
  for (Eigen::Index i = 0; i < frf.freqs.size(); ++i) {
    if (frf.valid[static_cast<std::size_t>(i)] && frf.freqs(i) > 0.0) keep.push_back(i);
  }
  const auto n = static_cast<Eigen::Index>(keep.size());
  c.freqs.resize(n);
  c.gain.resize(n);
  c.phase_deg.resize(n);
  for (Eigen::Index k = 0; k < n; ++k) {
    const Eigen::Index i = keep[static_cast<std::size_t>(k)];
    c.freqs(k) = frf.freqs(i);
    c.gain(k) = gain(i);
    c.phase_deg(k) = phase(i);
  }
  return c;
}

namespace {

// Finite, positive-frequency, positive-gain points of a curve.
ReferenceCurve usable(const ReferenceCurve& c) {
  ReferenceCurve out;
  out.channel = c.channel;
  std::vector<Eigen::Index> keep;
  for (Eigen::Index i = 0; i < c.freqs.size(); ++i) {
    if (c.freqs(i) > 0.0 && c.gain(i) > 0.0 && std::isfinite(c.gain(i)) &&
        std::isfinite(c.phase_deg(i)) && std::isfinite(c.freqs(i))) {
      keep.push_back(i);
    }
  }
  const auto n = static_cast<Eigen::Index>(keep.size());
  out.freqs.resize(n);
  out.gain.resize(n);
  out.phase_deg.resize(n);
  for (Eigen::Index k = 0; k < n; ++k) {
    const auto i = keep[static_cast<std::size_t>(k)];
    out.freqs(k) = c.freqs(i);
    out.gain(k) = c.gain(i);
    out.phase_deg(k) = c.phase_deg(i);
  }
  for (Eigen::Index k = 1; k < n; ++k) {
    if (!(out.freqs(k) > out.freqs(k - 1))) {
      throw Error(ErrorCode::kMalformedInput,
                  "frequencies of '" + c.channel + "' must increase strictly");
    }
  }
  return out;
}

// Linear interpolation of y against log f.
double interp_log(const VectorXd& f, const VectorXd& y, double at) {
  const auto* begin = f.data();
  const auto* end = f.data() + f.size();
  const auto* hi = std::lower_bound(begin, end, at);
  if (hi == begin) return y(0);
  if (hi == end) return y(f.size() - 1);
  const auto i = hi - begin;
  if (*hi == at) return y(i);
  const double t = std::log(at / f(i - 1)) / std::log(f(i) / f(i - 1));
  return (1.0 - t) * y(i - 1) + t * y(i);
}

double peak_frequency(const ReferenceCurve& c, double lo, double hi) {
  double best = -1.0, freq = lo;
  for (Eigen::Index i = 0; i < c.freqs.size(); ++i) {
    if (c.freqs(i) >= lo && c.freqs(i) <= hi && c.gain(i) > best) {
      best = c.gain(i);
      freq = c.freqs(i);
    }
  }
  return freq;
}

}  // namespace

CurveError compare_curves(const ReferenceCurve& a_in, const ReferenceCurve& b_in) {
  const ReferenceCurve a = usable(a_in);
  const ReferenceCurve b = usable(b_in);
  if (a.freqs.size() < 2 || b.freqs.size() < 2) {
    throw Error(ErrorCode::kGridMismatch, "curve '" + a_in.channel + "' has too few points");
  }
  const double lo = std::max(a.freqs(0), b.freqs(0));
  const double hi = std::min(a.freqs(a.freqs.size() - 1), b.freqs(b.freqs.size() - 1));
  if (!(hi >= 10.0 * lo * (1.0 - 1e-12))) {
    throw Error(ErrorCode::kGridMismatch,
                "curves for '" + a_in.channel + "' overlap over less than one decade");
  }
  std::vector<double> grid;
  for (const auto* c : {&a, &b}) {
    for (Eigen::Index i = 0; i < c->freqs.size(); ++i) {
      if (c->freqs(i) >= lo && c->freqs(i) <= hi) grid.push_back(c->freqs(i));
    }
  }
  std::sort(grid.begin(), grid.end());
  grid.erase(std::unique(grid.begin(), grid.end()), grid.end());

  const VectorXd la = a.gain.array().log10() * 20.0;
  const VectorXd lb = b.gain.array().log10() * 20.0;
  double sum_gain = 0.0, sum_phase = 0.0;
  for (double f : grid) {
    const double dg = interp_log(a.freqs, la, f) - interp_log(b.freqs, lb, f);
    const double dp = interp_log(a.freqs, a.phase_deg, f) - interp_log(b.freqs, b.phase_deg, f);
    sum_gain += dg * dg;
    sum_phase += dp * dp;
  }
  const auto count = static_cast<double>(grid.size());
  CurveError e;
  e.channel = a_in.channel;
  e.rms_gain_error_db = std::sqrt(sum_gain / count);
  e.rms_phase_error_deg = std::sqrt(sum_phase / count);
  e.peak_freq_error_hz = std::abs(peak_frequency(a, lo, hi) - peak_frequency(b, lo, hi));
  return e;
}

std::vector<CurveError> compare_to_reference(const SthtResult& result,
                                             const std::vector<ReferenceCurve>& reference) {
  std::vector<CurveError> out;
  for (const auto& ref : reference) {
    out.push_back(compare_curves(to_curve(result.frf(ref.channel)), ref));
  }
  return out;
}

void write_frf_csv(const std::filesystem::path& path, const FrequencyResponseFunction& frf) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::kIoError, "cannot write '" + path.string() + "'");
  const VectorXd gain = frf.gain();
  const VectorXd phase = frf.phase_deg();
  const double nan = std::numeric_limits<double>::quiet_NaN();
  out << "freq_hz,gain,phase_deg,coherence\n";
  for (Eigen::Index i = 0; i < frf.freqs.size(); ++i) {
    const bool ok = frf.valid[static_cast<std::size_t>(i)];
    out << format_double(frf.freqs(i)) << ',' << format_double(ok ? gain(i) : nan) << ','
        << format_double(ok ? phase(i) : nan) << ','
        << format_double(ok ? frf.coherence(i) : nan) << '\n';
  }
  if (!out) throw Error(ErrorCode::kIoError, "write to '" + path.string() + "' failed");
}

ReferenceCurve read_reference_csv(const std::filesystem::path& path, std::string channel) {
  const CsvTable table = read_csv_table(path);
  auto column = [&](std::string_view name) -> Eigen::Index {
    for (std::size_t i = 0; i < table.header.size(); ++i) {
      if (parse_header_cell(table.header[i]).name == name) return static_cast<Eigen::Index>(i);
    }
    throw Error(ErrorCode::kMissingChannel,
                "'" + path.string() + "' has no column '" + std::string(name) + "'");
  };
  ReferenceCurve c;
  c.channel = std::move(channel);
  c.freqs = table.rows.col(column("freq_hz"));
  c.gain = table.rows.col(column("gain"));
  c.phase_deg = table.rows.col(column("phase_deg"));
  return c;
}

std::string resonances_to_json(const SthtResult& result) {
  nlohmann::ordered_json j;
  j["axis"] = std::string(to_string(result.axis));
  j["preset_id"] = result.preset_id;
  nlohmann::ordered_json ex;
  ex["kind"] = std::string(to_string(result.spec.kind));
  ex["f_lo_hz"] = result.spec.f_lo_hz;
  ex["f_hi_hz"] = result.spec.f_hi_hz;
  ex["rms_m_per_s2"] = result.spec.rms_m_per_s2;
  ex["duration_s"] = result.spec.duration_s;
  ex["dt_s"] = result.spec.dt_s;
  ex["seed"] = result.spec.seed;
  j["excitation"] = ex;
  nlohmann::ordered_json channels = nlohmann::ordered_json::object();
  for (std::size_t i = 0; i < result.frfs.size(); ++i) {
    nlohmann::ordered_json list = nlohmann::ordered_json::array();
    for (const auto& p : result.resonances[i]) {
      nlohmann::ordered_json e;
      e["freq_hz"] = p.freq_hz;
      e["gain"] = p.gain;
      e["prominence"] = p.prominence;
      list.push_back(e);
    }
    channels[result.frfs[i].output_channel] = list;
  }
  j["resonances"] = channels;
  return j.dump(2) + "\n";
}

std::vector<std::filesystem::path> write_stht(const std::filesystem::path& dir,
                                              const SthtResult& result) {
  std::filesystem::create_directories(dir);
  std::vector<std::filesystem::path> written;
  const std::string prefix = "stht_" + std::string(to_string(result.axis)) + "_";
  for (const auto& frf : result.frfs) {
    auto path = dir / (prefix + frf.output_channel + ".csv");
    write_frf_csv(path, frf);
    written.push_back(path);
  }
  auto path = dir / (prefix + "resonances.json");
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::kIoError, "cannot write '" + path.string() + "'");
  out << resonances_to_json(result);
  written.push_back(path);
  return written;
}

}  // namespace comfortsim
