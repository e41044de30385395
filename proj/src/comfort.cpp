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

#include "comfortsim/comfort.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>

#include <json.hpp>

#include "comfortsim/csv.hpp"
#include "comfortsim/error.hpp"

namespace comfortsim {
namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

struct Section {
  AnalogSection analog;
  double prewarp_hz;
};

std::vector<Section> sections(const WeightingParams& w, bool drop_lowpass) {
  std::vector<Section> out;
  const double w1 = kTwoPi * w.f1;
  out.push_back({{0.0, 0.0, 1.0, w1 * w1, std::sqrt(2.0) * w1, 1.0}, w.f1});
  if (!drop_lowpass) {
    const double w2 = kTwoPi * w.f2;
    out.push_back({{1.0, 0.0, 0.0, 1.0, std::sqrt(2.0) / w2, 1.0 / (w2 * w2)}, w.f2});
  }
  const double w3 = kTwoPi * w.f3;
  const double w4 = kTwoPi * w.f4;
  out.push_back({{1.0, std::isinf(w.f3) ? 0.0 : 1.0 / w3, 0.0, 1.0, 1.0 / (w.q4 * w4),
                  1.0 / (w4 * w4)},
                 w.f4});
  if (w.f5 > 0.0 && w.f6 > 0.0) {
    const double w5 = kTwoPi * w.f5;
    const double w6 = kTwoPi * w.f6;
    const double k = (w5 * w5) / (w6 * w6);
    out.push_back({{k, k / (w.q5 * w5), k / (w5 * w5), 1.0, 1.0 / (w.q6 * w6), 1.0 / (w6 * w6)},
                   w.f6});
  }
  return out;
}

double lowest_frequency(const WeightingParams& w) {
  double f = std::min({w.f1, w.f4});
  if (!std::isinf(w.f3)) f = std::min(f, w.f3);
  if (w.f5 > 0.0) f = std::min({f, w.f5, w.f6});
  return f;
}

bool drops_lowpass(const WeightingParams& w, double sample_rate) {
  return w.f2 >= 0.45 * sample_rate;
}

}  // namespace

std::string_view to_string(WeightingKind kind) { return weighting_params(kind).name; }

std::optional<WeightingKind> parse_weighting_kind(std::string_view s) {
  for (const auto& w : kWeightingTable) {
    if (w.name == s) return w.kind;
  }
  return std::nullopt;
}

std::vector<AnalogSection> weighting_sections(WeightingKind kind, bool drop_lowpass) {
  std::vector<AnalogSection> out;
  for (const auto& s : sections(weighting_params(kind), drop_lowpass)) out.push_back(s.analog);
  return out;
}

WeightingFilter design_weighting(WeightingKind kind, double sample_rate) {
  const double min_rate = kind == WeightingKind::kWf ? 10.0 : 50.0;
  if (!(sample_rate >= min_rate) || !std::isfinite(sample_rate)) {
    throw Error(ErrorCode::kUnsupportedRate,
                std::string(to_string(kind)) + " needs a sample rate of at least " +
                    std::to_string(static_cast<int>(min_rate)) + " Hz");
  }
  const WeightingParams& p = weighting_params(kind);
  WeightingFilter f;
  f.kind_ = kind;
  f.sample_rate_ = sample_rate;
  f.tau_ = 1.0 / (kTwoPi * lowest_frequency(p));
  std::vector<Biquad> digital;
  for (const auto& s : sections(p, drops_lowpass(p, sample_rate))) {
    f.analog_.push_back(s.analog);
    digital.push_back(bilinear(s.analog, sample_rate, s.prewarp_hz));
  }
  f.cascade_ = BiquadCascade(std::move(digital));
  return f;
}

double WeightingFilter::dc_gain() const {
  double g = 1.0;
  for (const auto& q : cascade_.sections()) g *= q.dc_gain();
  return g;
}

double WeightingFilter::magnitude(double freq_hz) const {
  return std::abs(cascade_.response(freq_hz, sample_rate_));
}

Eigen::VectorXd WeightingFilter::filter(const Eigen::Ref<const Eigen::VectorXd>& x) const {
  return cascade_.filter(x);
}

double weighted_rms(const TimeSeries& ts, std::string_view channel, const WeightingFilter& w,
                    const RmsOptions& options) {
  const Channel& ch = ts.channel(channel);
  if (ch.unit != kUnitAccel) {
    throw Error(ErrorCode::kUnitMismatch,
                ch.name + " has unit '" + ch.unit + "', expected m/s^2");
  }
  const double rate = 1.0 / ts.dt();
  if (std::abs(rate - w.sample_rate()) > 1e-6 * w.sample_rate()) {
    throw Error(ErrorCode::kRateMismatch,
                "series rate " + format_double(rate) + " Hz differs from filter rate " +
                    format_double(w.sample_rate()) + " Hz");
  }
  const Eigen::VectorXd y = w.filter(ts.column(channel));
  Eigen::Index skip = 0;
  if (options.trim_settling) {
    skip = std::min<Eigen::Index>(
        y.size() - 1, static_cast<Eigen::Index>(std::ceil(3.0 * w.settling_time_constant() / ts.dt())));
  }
  return rms(y.tail(y.size() - skip));
}

Msdv msdv(const TimeSeries& ts, std::string_view channel, const WeightingFilter& wf, double km) {
  if (wf.kind() != WeightingKind::kWf) {
    throw Error(ErrorCode::kInvalidArgument, "MSDV requires the Wf weighting");
  }
  const double a_rms = weighted_rms(ts, channel, wf);
  Msdv out;
  // sum a^2 dt = rms^2 * n * dt
  out.msdv_m_per_s15 = a_rms * std::sqrt(static_cast<double>(ts.size()) * ts.dt());
  out.iso_msi_percent = std::min(100.0, km * out.msdv_m_per_s15);
  return out;
}

ComfortReport comfort_report(const TimeSeries& ts, std::string_view prefix,
                             const MetricsOptions& options) {
  ComfortReport report;
  report.location = std::string(prefix);
  report.duration_s = static_cast<double>(ts.size()) * ts.dt();
  const double rate = 1.0 / ts.dt();
  const std::string base = std::string(prefix) + "_acc_";
  for (const char* axis : {"x", "y", "z"}) {
    const WeightingKind kind =
        std::string_view(axis) == "z" ? options.vertical_weighting : options.horizontal_weighting;
    const WeightingFilter w = design_weighting(kind, rate);
    const std::string name = base + axis;
    report.weighted_rms.push_back(
        {name, kind, weighted_rms(ts, name, w, {options.trim_settling})});
  }
  const Msdv m = msdv(ts, base + "z", design_weighting(WeightingKind::kWf, rate), options.km);
  report.msdv_m_per_s15 = m.msdv_m_per_s15;
  report.iso_msi_percent = m.iso_msi_percent;
  return report;
}

std::string comfort_report_to_json(const ComfortReport& report) {
  nlohmann::ordered_json j;
  j["location"] = report.location;
  j["duration_s"] = report.duration_s;
  nlohmann::ordered_json channels = nlohmann::ordered_json::array();
  for (const auto& c : report.weighted_rms) {
    nlohmann::ordered_json e;
    e["channel"] = c.channel;
    e["weighting"] = std::string(to_string(c.weighting));
    e["weighted_rms_m_per_s2"] = c.rms_m_per_s2;
    channels.push_back(e);
  }
  j["weighted_rms"] = channels;
  j["msdv_m_per_s1_5"] = report.msdv_m_per_s15;
  j["iso_msi_percent"] = report.iso_msi_percent;
  j["weighting_table_version"] = kWeightingTableVersion;
  return j.dump(2) + "\n";
}

void write_weighting_curve(const std::filesystem::path& path, const WeightingFilter& w,
                           const Eigen::VectorXd& freqs) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::kIoError, "cannot write '" + path.string() + "'");
  out << "freq_hz,magnitude\n";
  for (Eigen::Index i = 0; i < freqs.size(); ++i) {
    out << format_double(freqs(i)) << ',' << format_double(w.magnitude(freqs(i))) << '\n';
  }
}

}  // namespace comfortsim
