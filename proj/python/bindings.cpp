// Copyright svtk contributors
// SPDX-License-Identifier: Apache-2.0

#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <optional>
#include <string>
#include <vector>

#include "svtk/align.hpp"
#include "svtk/config.hpp"
#include "svtk/emg.hpp"
#include "svtk/error.hpp"
#include "svtk/io.hpp"
#include "svtk/metrics.hpp"
#include "svtk/pitch.hpp"
#include "svtk/psola.hpp"
#include "svtk/signal.hpp"

namespace py = pybind11;
using namespace svtk;

namespace {

using Vec = py::array_t<double, py::array::c_style | py::array::forcecast>;

std::vector<double> to_vector(const Vec& a) {
  if (a.ndim() != 1) throw DomainError("expected a 1-d array");
  return {a.data(), a.data() + a.size()};
}

Matrix to_matrix(const Vec& a) {
  if (a.ndim() != 2) throw DomainError("expected a 2-d array");
  const auto rows = static_cast<std::size_t>(a.shape(0));
  const auto cols = static_cast<std::size_t>(a.shape(1));
  return Matrix(rows, cols, std::vector<double>(a.data(), a.data() + a.size()));
}

py::array_t<double> from_span(std::span<const double> x) {
  py::array_t<double> out(static_cast<py::ssize_t>(x.size()));
  std::copy(x.begin(), x.end(), out.mutable_data());
  return out;
}

py::array_t<double> from_matrix(const Matrix& m) {
  py::array_t<double> out({static_cast<py::ssize_t>(m.rows()), static_cast<py::ssize_t>(m.cols())});
  std::copy(m.data().begin(), m.data().end(), out.mutable_data());
  return out;
}

F0Contour make_contour(const Vec& f0, const py::array_t<bool>& voiced, double hop_s,
                       int sample_rate) {
  const auto hz = to_vector(f0);
  if (voiced.ndim() != 1 || static_cast<std::size_t>(voiced.size()) != hz.size()) {
    throw DomainError("f0 and voiced arrays must have the same length");
  }
  std::vector<F0Frame> frames(hz.size());
  const auto v = voiced.unchecked<1>();
  for (std::size_t i = 0; i < hz.size(); ++i) {
    frames[i] = {hz[i], v(static_cast<py::ssize_t>(i))};
  }
  return F0Contour(std::move(frames), hop_s, sample_rate);
}

DtwMetric parse_metric(const std::string& name) {
  if (name == "euclidean") return DtwMetric::euclidean;
  if (name == "cosine" || name == "cosine_distance") return DtwMetric::cosine_distance;
  throw DomainError("unknown dtw metric \"" + name + "\"");
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Pitch, alignment, metric and EMG routines for silent-speech experiments";

  auto base = py::register_exception<Error>(m, "Error", PyExc_RuntimeError);
  auto format = py::register_exception<FormatError>(m, "FormatError", base.ptr());
  py::register_exception<DataError>(m, "DataError", format.ptr());
  py::register_exception<DomainError>(m, "DomainError", base.ptr());

  py::class_<F0Contour>(m, "Contour")
      .def(py::init(&make_contour), py::arg("f0"), py::arg("voiced"), py::arg("hop_s") = 0.01,
           py::arg("sample_rate") = 0)
      .def_property_readonly("f0", [](const F0Contour& c) {
        py::array_t<double> out(static_cast<py::ssize_t>(c.size()));
        for (std::size_t i = 0; i < c.size(); ++i) out.mutable_at(i) = c[i].f0_hz;
        return out;
      })
      .def_property_readonly("voiced", [](const F0Contour& c) {
        py::array_t<bool> out(static_cast<py::ssize_t>(c.size()));
        for (std::size_t i = 0; i < c.size(); ++i) out.mutable_at(i) = c[i].voiced;
        return out;
      })
      .def_property_readonly("hop_s", &F0Contour::hop_s)
      .def_property_readonly("sample_rate", &F0Contour::sample_rate)
      .def("voiced_count", &F0Contour::voiced_count)
      .def("__len__", &F0Contour::size)
      .def("__eq__", [](const F0Contour& a, const F0Contour& b) { return a == b; })
      .def("__repr__", [](const F0Contour& c) {
        return "<Contour frames=" + std::to_string(c.size()) +
               " voiced=" + std::to_string(c.voiced_count()) + ">";
      });

  m.def(
      "track_pitch",
      [](const Vec& samples, int sample_rate, double floor_hz, double ceiling_hz, double hop_ms) {
        PitchConfig cfg;
        cfg.floor_hz = floor_hz;
        cfg.ceiling_hz = ceiling_hz;
        cfg.hop_ms = hop_ms;
        const AudioBuffer audio(to_vector(samples), sample_rate);
        py::gil_scoped_release release;
        return track_pitch(audio, cfg);
      },
      py::arg("samples"), py::arg("sample_rate"), py::arg("floor_hz") = 60.0,
      py::arg("ceiling_hz") = 500.0, py::arg("hop_ms") = 10.0);

  m.def(
      "global_pitch",
      [](const std::vector<F0Contour>& contours) { return global_pitch(contours).value_hz; },
      py::arg("contours"));

  m.def(
      "flatten",
      [](const Vec& samples, int sample_rate, const F0Contour& contour,
         std::optional<double> target_hz, const std::string& mode) {
        const AudioBuffer audio(to_vector(samples), sample_rate);
        FlattenTarget target = target_hz ? FlattenTarget::fixed(*target_hz)
                                         : FlattenTarget{parse_flatten_mode(mode), 0.0};
        const auto out = flatten_pitch(audio, contour, target);
        return from_span(out.samples());
      },
      py::arg("samples"), py::arg("sample_rate"), py::arg("contour"),
      py::arg("target_hz") = std::nullopt, py::arg("mode") = "speaker_mean");

  m.def(
      "dtw",
      [](const Vec& ref, const Vec& src, const std::string& metric,
         std::optional<std::size_t> band) {
        const auto r = dtw(FeatureSequence(to_matrix(ref)), FeatureSequence(to_matrix(src)),
                           {parse_metric(metric), band});
        py::array_t<std::size_t> path({static_cast<py::ssize_t>(r.path.size()), py::ssize_t{2}});
        auto p = path.mutable_unchecked<2>();
        for (std::size_t k = 0; k < r.path.size(); ++k) {
          p(k, 0) = r.path[k].first;
          p(k, 1) = r.path[k].second;
        }
        py::dict out;
        out["path"] = path;
        out["cost"] = r.cost;
        out["normalized_cost"] = r.normalized_cost;
        return out;
      },
      py::arg("ref"), py::arg("src"), py::arg("metric") = "euclidean",
      py::arg("band") = std::nullopt);

  m.def(
      "content_loss",
      [](const Vec& c, const Vec& c_emg) {
        return content_loss(FeatureSequence(to_matrix(c)), FeatureSequence(to_matrix(c_emg)));
      },
      py::arg("c"), py::arg("c_emg"));

  m.def(
      "local_f0_deviation",
      [](const F0Contour& pred, const F0Contour& gt, bool all_frames) {
        const auto r = local_f0_deviation(
            pred, gt, all_frames ? DeviationDomain::all_frames : DeviationDomain::jointly_voiced);
        py::dict out;
        out["local_dev_hz"] = r.local_dev_hz;
        out["n_eval_frames"] = r.n_eval_frames;
        out["pred_mean_hz"] = r.pred_mean_hz;
        out["gt_mean_hz"] = r.gt_mean_hz;
        return out;
      },
      py::arg("pred"), py::arg("gt"), py::arg("all_frames") = false);

  m.def("frame_f0_loss", &frame_f0_loss, py::arg("pred"), py::arg("gt"));
  m.def("global_pitch_loss", &global_pitch_loss, py::arg("pred_hz"), py::arg("gt_hz"));

  m.def(
      "speaker_consistency",
      [](const Vec& a, const Vec& b) {
        return speaker_consistency({to_vector(a), {}}, {to_vector(b), {}});
      },
      py::arg("a"), py::arg("b"));

  m.def(
      "error_rate",
      [](const std::string& ref, const std::string& hyp, const std::string& unit) {
        if (unit != "word" && unit != "character") {
          throw DomainError("unit must be \"word\" or \"character\"");
        }
        const auto r = error_rate(ref, hyp, unit == "word" ? ErrorUnit::word : ErrorUnit::character);
        py::dict out;
        out["rate"] = r.rate;
        out["substitutions"] = r.substitutions;
        out["insertions"] = r.insertions;
        out["deletions"] = r.deletions;
        out["ref_len"] = r.ref_len;
        return out;
      },
      py::arg("ref"), py::arg("hyp"), py::arg("unit") = "word");

  m.def(
      "emg_preprocess",
      [](const Vec& channels, int sample_rate, int mains_hz, double target_frame_rate) {
        EmgRecording rec;
        rec.channels = to_matrix(channels);
        rec.sample_rate = sample_rate;
        EmgPreprocessConfig cfg;
        cfg.mains_hz = mains_hz;
        cfg.target_frame_rate = target_frame_rate;
        EmgFeatures f;
        {
          py::gil_scoped_release release;
          f = preprocess(rec, cfg);
        }
        return py::make_tuple(from_matrix(f.frames), f.frame_rate);
      },
      py::arg("channels"), py::arg("sample_rate"), py::arg("mains_hz") = 60,
      py::arg("target_frame_rate") = 100.0);

  m.def(
      "lead_shift",
      [](const Vec& channels, int sample_rate, double lead_ms) {
        EmgRecording rec;
        rec.channels = to_matrix(channels);
        rec.sample_rate = sample_rate;
        return from_matrix(apply_lead_shift(rec, lead_ms).channels);
      },
      py::arg("channels"), py::arg("sample_rate"), py::arg("lead_ms") = 60.0);

  m.def(
      "synthesize",
      [](const std::string& kind, double f0, double duration_s, int sample_rate, double depth_hz,
         double rate_hz, double end_hz, double amplitude) {
        SynthSpec spec;
        if (kind == "sine") spec = SynthSpec::sine(f0, duration_s, amplitude);
        else if (kind == "pulse") spec = SynthSpec::pulse_train(f0, duration_s, amplitude);
        else if (kind == "vibrato") spec = SynthSpec::vibrato(f0, depth_hz, rate_hz, duration_s, amplitude);
        else if (kind == "glide") spec = SynthSpec::glide(f0, end_hz, duration_s, amplitude);
        else throw DomainError("unknown synthesis kind \"" + kind + "\"");
        auto s = synthesize(spec, sample_rate);
        return py::make_tuple(from_span(s.audio.samples()), s.contour);
      },
      py::arg("kind"), py::arg("f0"), py::arg("duration_s"), py::arg("sample_rate") = 16000,
      py::arg("depth_hz") = 0.0, py::arg("rate_hz") = 5.0, py::arg("end_hz") = 200.0,
      py::arg("amplitude") = 0.5);

  m.def(
      "read_wav",
      [](const std::filesystem::path& path, std::optional<int> channel) {
        const auto a = io::read_wav(path, channel);
        return py::make_tuple(from_span(a.samples()), a.sample_rate());
      },
      py::arg("path"), py::arg("channel") = std::nullopt);

  m.def(
      "write_wav",
      [](const std::filesystem::path& path, const Vec& samples, int sample_rate,
         const std::string& encoding) {
        if (encoding != "float32" && encoding != "pcm16") {
          throw DomainError("encoding must be \"float32\" or \"pcm16\"");
        }
        io::write_wav(path, AudioBuffer(to_vector(samples), sample_rate),
                      encoding == "pcm16" ? io::WavEncoding::pcm16 : io::WavEncoding::float32);
      },
      py::arg("path"), py::arg("samples"), py::arg("sample_rate"), py::arg("encoding") = "float32");

  m.def("read_contour", &io::read_contour, py::arg("path"));
  m.def("write_contour", &io::write_contour, py::arg("path"), py::arg("contour"));
  m.def("read_features", [](const std::filesystem::path& p) { return from_matrix(io::read_features(p)); },
        py::arg("path"));
  m.def("write_features",
        [](const std::filesystem::path& p, const Vec& a) { io::write_features(p, to_matrix(a)); },
        py::arg("path"), py::arg("matrix"));
}
