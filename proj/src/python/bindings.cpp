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

// Python bindings. Series cross the boundary as numpy arrays; library
// errors become comfortsim.Error with the code name as `code`.

#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "comfortsim/body_model.hpp"
#include "comfortsim/comfort.hpp"
#include "comfortsim/config.hpp"
#include "comfortsim/csv.hpp"
#include "comfortsim/error.hpp"
#include "comfortsim/perception.hpp"
#include "comfortsim/pipeline.hpp"
#include "comfortsim/sickness.hpp"
#include "comfortsim/spectral.hpp"
#include "comfortsim/stht.hpp"

namespace py = pybind11;
using namespace comfortsim;

namespace {

std::vector<std::string> channel_names(const TimeSeries& ts) {
  std::vector<std::string> out;
  for (const auto& c : ts.channels()) out.push_back(c.name);
  return out;
}

std::vector<std::string> channel_units(const TimeSeries& ts) {
  std::vector<std::string> out;
  for (const auto& c : ts.channels()) out.push_back(c.unit);
  return out;
}

TimeSeries make_timeseries(double start, double dt, const std::vector<std::string>& names,
                           const std::vector<std::string>& units, const Eigen::MatrixXd& samples) {
  if (names.size() != units.size()) {
    throw Error(ErrorCode::kInvalidArgument, "names and units differ in length");
  }
  std::vector<Channel> channels;
  for (std::size_t i = 0; i < names.size(); ++i) channels.push_back({names[i], units[i]});
  return TimeSeries(start, dt, std::move(channels), samples);
}

py::dict params_to_dict(const BodyParams& p) {
  py::dict d;
  for (const auto& key : body_param_keys()) d[py::str(key)] = *get_body_param(p, key);
  d["vision_feedback_enabled"] = p.vision_feedback_enabled;
  d["locked_coordinates"] = p.locked_coordinates;
  return d;
}

BodyParams params_from_dict(const py::dict& d) {
  BodyParams p;
  for (const auto& [k, v] : d) {
    const auto key = k.cast<std::string>();
    if (key == "vision_feedback_enabled") {
      p.vision_feedback_enabled = v.cast<bool>();
    } else if (key == "locked_coordinates") {
      p.locked_coordinates = v.cast<std::vector<std::string>>();
    } else if (!set_body_param(p, key, v.cast<double>())) {
      throw Error(ErrorCode::kInvalidParameter, "unknown parameter '" + key + "'");
    }
  }
  return p;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Seated-human vibration, motion perception and motion sickness simulation";

  py::exception<Error>(m, "Error");
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const Error& e) {
      py::object cls = py::module_::import("comfortsim._core").attr("Error");
      py::object exc = cls(e.what());
      exc.attr("code") = std::string(to_string(e.code()));
      PyErr_SetObject(cls.ptr(), exc.ptr());
    }
  });

  py::class_<TimeSeries>(m, "TimeSeries")
      .def(py::init(&make_timeseries), py::arg("start_time"), py::arg("dt"), py::arg("names"),
           py::arg("units"), py::arg("samples"))
      .def_property_readonly("start_time", &TimeSeries::start_time)
      .def_property_readonly("dt", &TimeSeries::dt)
      .def_property_readonly("duration", &TimeSeries::duration)
      .def_property_readonly("names", &channel_names)
      .def_property_readonly("units", &channel_units)
      .def_property_readonly("samples", &TimeSeries::samples)
      .def("column", py::overload_cast<std::string_view>(&TimeSeries::column, py::const_))
      .def("select", &TimeSeries::select)
      .def("__len__", &TimeSeries::size);

  m.def("load_timeseries",
        [](const std::filesystem::path& path) { return load_timeseries(path); });
  m.def("write_timeseries", &write_timeseries);

  m.def("default_body_params", [] { return params_to_dict(BodyParams{}); });
  m.def("load_body_params",
        [](const std::filesystem::path& path) { return params_to_dict(load_body_params(path)); });
  m.def("validate_body_params",
        [](const py::dict& d) { return validate_body_params(params_from_dict(d)); });

  py::class_<ModelRealization>(m, "ModelRealization")
      .def_property_readonly("dof", &ModelRealization::dof)
      .def_property_readonly("coordinates", &ModelRealization::coordinates)
      .def_property_readonly("mass", &ModelRealization::mass)
      .def_property_readonly("damping", &ModelRealization::damping)
      .def_property_readonly("stiffness", &ModelRealization::stiffness)
      .def_property_readonly("equilibrium", &ModelRealization::equilibrium)
      .def_property_readonly("eigenvalues", &ModelRealization::eigenvalues)
      .def("describe_layout", &ModelRealization::describe_layout);

  m.def(
      "build_model",
      [](const py::dict& params, const std::string& posture, const std::string& backrest) {
        const auto p = parse_posture(posture);
        const auto b = parse_backrest(backrest);
        if (!p || !b) throw Error(ErrorCode::kInvalidParameter, "unknown posture or backrest");
        return build_model(params_from_dict(params), PostureConfig::preset(*p, *b));
      },
      py::arg("params") = py::dict(), py::arg("posture") = "erect", py::arg("backrest") = "high");

  m.def(
      "simulate",
      [](const ModelRealization& model, const TimeSeries& seat) {
        return simulate(model, seat).series;
      },
      py::arg("model"), py::arg("seat_motion"));

  m.def(
      "generate_excitation",
      [](const std::string& axis, const std::string& kind, double f_lo, double f_hi, double rms,
         double duration, std::uint64_t seed, double dt) {
        ExcitationSpec s;
        const auto a = parse_axis(axis);
        const auto k = parse_excitation_kind(kind);
        if (!a || !k) throw Error(ErrorCode::kInvalidArgument, "unknown axis or excitation kind");
        s = {*a, *k, f_lo, f_hi, rms, duration, seed, dt};
        return generate_excitation(s);
      },
      py::arg("axis") = "z", py::arg("kind") = "noise", py::arg("f_lo_hz") = 0.5,
      py::arg("f_hi_hz") = 12.0, py::arg("rms_m_per_s2") = 1.0, py::arg("duration_s") = 180.0,
      py::arg("seed") = 42, py::arg("dt_s") = 0.001);

  m.def(
      "estimate_frf",
      [](const TimeSeries& ts, const std::string& input, const std::string& output,
         Eigen::Index segment_length, double overlap) {
        const auto f = estimate_frf(ts, input, output, {segment_length, overlap, Window::kHann});
        py::dict d;
        d["freq_hz"] = f.freqs;
        d["gain"] = Eigen::VectorXd(f.gain());
        d["phase_deg"] = Eigen::VectorXd(f.phase_deg());
        d["coherence"] = f.coherence;
        return d;
      },
      py::arg("ts"), py::arg("input"), py::arg("output"), py::arg("segment_length") = 4096,
      py::arg("overlap") = 0.5);

  m.def(
      "perceive",
      [](const TimeSeries& head_motion, bool vision) {
        VestibularParams p;
        p.vision_enabled = vision;
        Perception out = perceive(head_motion, p);
        return py::make_tuple(out.perceived, out.conflict);
      },
      py::arg("head_motion"), py::arg("vision") = false);

  m.def(
      "accumulate",
      [](const TimeSeries& conflict, double b, double n, double mu, double scale) {
        return accumulate(conflict, {b, n, mu, scale});
      },
      py::arg("conflict"), py::arg("half_saturation_m_per_s2") = 0.5,
      py::arg("hill_exponent") = 2.0, py::arg("time_constant_s") = 720.0,
      py::arg("scale_percent") = 85.0);

  m.def(
      "weighted_rms",
      [](const TimeSeries& ts, const std::string& channel, const std::string& weighting) {
        const auto kind = parse_weighting_kind(weighting);
        if (!kind) throw Error(ErrorCode::kInvalidArgument, "unknown weighting '" + weighting + "'");
        return weighted_rms(ts, channel, design_weighting(*kind, 1.0 / ts.dt()));
      },
      py::arg("ts"), py::arg("channel"), py::arg("weighting"));

  m.def(
      "weighting_magnitude",
      [](const std::string& weighting, double sample_rate, const Eigen::VectorXd& freqs) {
        const auto kind = parse_weighting_kind(weighting);
        if (!kind) throw Error(ErrorCode::kInvalidArgument, "unknown weighting '" + weighting + "'");
        const WeightingFilter w = design_weighting(*kind, sample_rate);
        Eigen::VectorXd out(freqs.size());
        for (Eigen::Index i = 0; i < freqs.size(); ++i) out(i) = w.magnitude(freqs(i));
        return out;
      },
      py::arg("weighting"), py::arg("sample_rate"), py::arg("freqs"));

  m.def("validate_config", [](const std::filesystem::path& path) {
    std::vector<std::pair<std::string, std::string>> out;
    for (const auto& e : validate_config(path)) out.emplace_back(e.path, e.message);
    return out;
  });

  m.def(
      "run_pipeline",
      [](const std::filesystem::path& config, std::optional<std::filesystem::path> out) {
        ConfigOverrides ov;
        ov.output_dir = out;
        const ScenarioConfig cfg = load_config(config, ov);
        RunReport report;
        {
          py::gil_scoped_release release;
          report = run_pipeline(cfg);
        }
        py::dict d;
        d["output_dir"] = report.output_dir;
        d["final_msi_percent"] = report.sickness.final_percent;
        d["peak_msi_percent"] = report.sickness.peak_percent;
        d["body_realtime_factor"] = report.body_realtime_factor();
        d["manifest"] = report.manifest();
        return d;
      },
      py::arg("config"), py::arg("out") = py::none());
}
