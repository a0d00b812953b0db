// Python bindings for the core operations: synthesis, RIF I/O, noise
// estimation, model fitting/evaluation, and calibrated emulation.

#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <cmath>
#include <optional>

#include "rangenoise/emulation.hpp"
#include "rangenoise/errors.hpp"
#include "rangenoise/estimation.hpp"
#include "rangenoise/geometry.hpp"
#include "rangenoise/noise_model.hpp"
#include "rangenoise/plane_scene.hpp"
#include "rangenoise/rif_io.hpp"

namespace py = pybind11;
using namespace rangenoise;

namespace {

RangeImage image_from_array(const py::array_t<float, py::array::c_style |
                                                         py::array::forcecast>& a,
                            std::optional<CameraIntrinsics> intrinsics,
                            std::optional<double> distance_mm,
                            std::optional<double> angle_deg,
                            const std::string& camera) {
  if (a.ndim() != 2)
    throw std::invalid_argument("depth array must be 2-D (height x width)");
  const int h = static_cast<int>(a.shape(0));
  const int w = static_cast<int>(a.shape(1));
  std::vector<float> depth(a.data(), a.data() + a.size());
  RangeImage img(w, h, std::move(depth));
  img.intrinsics = intrinsics;
  img.distance_mm = distance_mm;
  img.angle_deg = angle_deg;
  img.camera = camera;
  return img;
}

py::array_t<float> image_to_array(const RangeImage& img) {
  py::array_t<float> out({img.height(), img.width()});
  std::memcpy(out.mutable_data(), img.depths().data(),
              img.depths().size() * sizeof(float));
  return out;
}

std::vector<RangeImage> frames_from_list(const py::sequence& seq) {
  std::vector<RangeImage> frames;
  frames.reserve(py::len(seq));
  for (auto item : seq) frames.push_back(item.cast<RangeImage>());
  return frames;
}

py::dict residual_set_to_dict(const EdgeResidualSet& set) {
  py::array_t<double> residuals(static_cast<py::ssize_t>(set.residuals.size()),
                                set.residuals.data());
  py::dict d;
  d["residuals"] = residuals;
  d["line_normal"] = py::make_tuple(set.line.normal.x(), set.line.normal.y());
  d["line_offset"] = set.line.offset;
  d["ks_statistic"] = set.ks_statistic;
  return d;
}

EmulationConfig make_emulation_config(const NoiseModel& axial,
                                      const NoiseModel& lateral, double m_n,
                                      std::uint64_t seed,
                                      const std::string& angle_mode,
                                      std::optional<double> focal_px,
                                      int threads) {
  EmulationConfig cfg;
  cfg.axial_model = axial;
  cfg.lateral_model = lateral;
  cfg.m_n = m_n;
  cfg.seed = seed;
  cfg.angle_mode = angle_mode_from_string(angle_mode);
  cfg.focal_px = focal_px;
  cfg.threads = threads;
  return cfg;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() =
      "Range-camera noise toolkit: planar-scene synthesis, lateral/axial "
      "noise estimation, degree-2 noise models, calibrated emulation";

  py::register_exception<FormatError>(m, "FormatError", PyExc_ValueError);
  py::register_exception<EstimationError>(m, "EstimationError",
                                          PyExc_RuntimeError);
  py::register_exception<FitError>(m, "FitError", PyExc_RuntimeError);

  py::class_<CameraIntrinsics>(m, "CameraIntrinsics")
      .def(py::init([](double fx, double fy, double cx, double cy, int width,
                       int height) {
             CameraIntrinsics k{fx, fy, cx, cy, width, height};
             k.validate();
             return k;
           }),
           py::arg("fx"), py::arg("fy"), py::arg("cx"), py::arg("cy"),
           py::arg("width"), py::arg("height"))
      .def_readonly("fx", &CameraIntrinsics::fx)
      .def_readonly("fy", &CameraIntrinsics::fy)
      .def_readonly("cx", &CameraIntrinsics::cx)
      .def_readonly("cy", &CameraIntrinsics::cy)
      .def_readonly("width", &CameraIntrinsics::width)
      .def_readonly("height", &CameraIntrinsics::height)
      .def("__repr__", [](const CameraIntrinsics& k) {
        return "CameraIntrinsics(fx=" + std::to_string(k.fx) +
               ", fy=" + std::to_string(k.fy) + ", cx=" + std::to_string(k.cx) +
               ", cy=" + std::to_string(k.cy) +
               ", width=" + std::to_string(k.width) +
               ", height=" + std::to_string(k.height) + ")";
      });

  py::class_<PlaneSceneSpec>(m, "PlaneSceneSpec")
      .def(py::init([](double distance_mm, double angle_deg,
                       double board_width_mm, double board_height_mm,
                       const std::string& rotation_axis) {
             PlaneSceneSpec spec;
             spec.distance_mm = distance_mm;
             spec.angle_deg = angle_deg;
             spec.board_width_mm = board_width_mm;
             spec.board_height_mm = board_height_mm;
             if (rotation_axis == "vertical")
               spec.rotation_axis = RotationAxis::vertical;
             else if (rotation_axis == "horizontal")
               spec.rotation_axis = RotationAxis::horizontal;
             else
               throw std::invalid_argument(
                   "rotation_axis must be 'vertical' or 'horizontal'");
             spec.validate();
             return spec;
           }),
           py::arg("distance_mm"), py::arg("angle_deg") = 0.0,
           py::arg("board_width_mm") = 400.0, py::arg("board_height_mm") = 300.0,
           py::arg("rotation_axis") = "vertical")
      .def_readonly("distance_mm", &PlaneSceneSpec::distance_mm)
      .def_readonly("angle_deg", &PlaneSceneSpec::angle_deg)
      .def_readonly("board_width_mm", &PlaneSceneSpec::board_width_mm)
      .def_readonly("board_height_mm", &PlaneSceneSpec::board_height_mm);

  py::class_<RangeImage>(m, "RangeImage")
      .def_static("from_array", &image_from_array, py::arg("depth"),
                  py::arg("intrinsics") = std::nullopt,
                  py::arg("distance_mm") = std::nullopt,
                  py::arg("angle_deg") = std::nullopt, py::arg("camera") = "",
                  "Build a range image from a 2-D float array; NaN entries "
                  "mark invalid pixels")
      .def("to_array", &image_to_array,
           "Depth as a (height, width) float32 array, NaN at invalid pixels")
      .def_property_readonly("width", &RangeImage::width)
      .def_property_readonly("height", &RangeImage::height)
      .def_property_readonly("valid_count", &RangeImage::valid_count)
      .def_readwrite("intrinsics", &RangeImage::intrinsics)
      .def_readwrite("distance_mm", &RangeImage::distance_mm)
      .def_readwrite("angle_deg", &RangeImage::angle_deg)
      .def_readwrite("camera", &RangeImage::camera)
      .def("__eq__", [](const RangeImage& a, const RangeImage& b) { return a == b; })
      .def("__repr__", [](const RangeImage& img) {
        return "RangeImage(" + std::to_string(img.width()) + "x" +
               std::to_string(img.height()) + ", valid=" +
               std::to_string(img.valid_count()) + ")";
      });

  py::class_<NoiseSample>(m, "NoiseSample")
      .def(py::init([](double z_mm, double theta_deg, double sigma, long n,
                       const std::string& kind) {
             return NoiseSample{z_mm, theta_deg, sigma, n,
                                noise_kind_from_string(kind)};
           }),
           py::arg("z_mm"), py::arg("theta_deg"), py::arg("sigma"),
           py::arg("n"), py::arg("kind"))
      .def_readonly("z_mm", &NoiseSample::z_mm)
      .def_readonly("theta_deg", &NoiseSample::theta_deg)
      .def_readonly("sigma", &NoiseSample::sigma)
      .def_readonly("n", &NoiseSample::n)
      .def_property_readonly(
          "kind", [](const NoiseSample& s) { return to_string(s.kind); })
      .def("__repr__", [](const NoiseSample& s) {
        return std::string("NoiseSample(kind=") + to_string(s.kind) +
               ", z=" + std::to_string(s.z_mm) +
               ", theta=" + std::to_string(s.theta_deg) +
               ", sigma=" + std::to_string(s.sigma) +
               ", n=" + std::to_string(s.n) + ")";
      });

  py::class_<SigmaValue>(m, "SigmaValue")
      .def_readonly("sigma", &SigmaValue::sigma)
      .def_readonly("clamped", &SigmaValue::clamped)
      .def_readonly("extrapolated", &SigmaValue::extrapolated)
      .def("__float__", [](const SigmaValue& v) { return v.sigma; })
      .def("__repr__", [](const SigmaValue& v) {
        return "SigmaValue(sigma=" + std::to_string(v.sigma) +
               ", clamped=" + std::to_string(v.clamped) +
               ", extrapolated=" + std::to_string(v.extrapolated) + ")";
      });

  py::class_<NoiseModel>(m, "NoiseModel")
      .def(py::init([](const std::vector<double>& coeffs,
                       const std::string& kind, const std::string& units,
                       const std::string& camera) {
             if (coeffs.size() != 6)
               throw std::invalid_argument("need exactly 6 coefficients");
             NoiseModel model;
             std::copy(coeffs.begin(), coeffs.end(), model.coeffs.begin());
             model.kind = noise_kind_from_string(kind);
             model.unit = sigma_unit_from_string(units);
             model.camera = camera;
             return model;
           }),
           py::arg("coeffs"), py::arg("kind"), py::arg("units"),
           py::arg("camera") = "custom")
      .def_property_readonly("coeffs",
                             [](const NoiseModel& m_) {
                               return std::vector<double>(m_.coeffs.begin(),
                                                          m_.coeffs.end());
                             })
      .def_property_readonly(
          "kind", [](const NoiseModel& m_) { return to_string(m_.kind); })
      .def_property_readonly(
          "units", [](const NoiseModel& m_) { return to_string(m_.unit); })
      .def_readonly("camera", &NoiseModel::camera)
      .def("evaluate", &NoiseModel::evaluate, py::arg("z_mm"),
           py::arg("theta_deg"),
           "Clamped sigma(z, theta) with clamping/extrapolation flags")
      .def("raw", &NoiseModel::raw, py::arg("z_mm"), py::arg("theta_deg"),
           "Unclamped polynomial value")
      .def("__repr__", [](const NoiseModel& m_) {
        return std::string("NoiseModel(") + m_.camera + ":" +
               to_string(m_.kind) + ")";
      });

  m.def("preset",
        [](const std::string& camera, const std::string& kind) {
          return preset(camera, noise_kind_from_string(kind));
        },
        py::arg("camera"), py::arg("kind"),
        "Built-in camera noise model (kinect-v1, kinect-v2, motioncam-3d)");
  m.def("preset_cameras", &preset_cameras);

  m.def("fit_polynomial",
        [](const std::vector<NoiseSample>& samples, bool weighted) {
          return fit_polynomial(samples, weighted);
        },
        py::arg("samples"), py::arg("weighted") = false,
        "Least-squares degree-2 fit over [1, z, theta, z^2, z theta, theta^2]");

  m.def("theoretical_axial_sigma",
        [](double m_param, double f, double b, double sigma_rho, double z_mm) {
          return theoretical_axial_sigma({m_param, f, b, sigma_rho}, z_mm);
        },
        py::arg("m"), py::arg("f"), py::arg("b"), py::arg("sigma_rho"),
        py::arg("z_mm"),
        "Structured-light law sigma_z = (m/(f b)) z^2 sigma_rho");

  m.def("read_model", &read_model, py::arg("path"));
  m.def("write_model", &write_model, py::arg("model"), py::arg("path"));
  m.def("read_rif", &read_range_image, py::arg("path"));
  m.def("write_rif", &write_range_image, py::arg("image"), py::arg("path"));

  m.def("synth_plane",
        [](const PlaneSceneSpec& spec, const CameraIntrinsics& k,
           std::optional<double> background_mm, int threads) {
          SynthesisConfig cfg;
          cfg.spec = spec;
          cfg.intrinsics = k;
          cfg.background_mm = background_mm;
          return synth_plane(cfg, threads);
        },
        py::arg("spec"), py::arg("intrinsics"),
        py::arg("background_mm") = std::nullopt, py::arg("threads") = 1,
        "Render a noise-free planar-board range image");

  m.def("average_frames",
        [](const py::sequence& frames, double min_valid_fraction) {
          return average_frames(frames_from_list(frames), min_valid_fraction);
        },
        py::arg("frames"), py::arg("min_valid_fraction") = 0.5);

  m.def("compute_normals",
        [](const RangeImage& img, const CameraIntrinsics& k) {
          const NormalField field = compute_normals(img, k);
          py::array_t<double> out({field.height, field.width, 3});
          auto view = out.mutable_unchecked<3>();
          for (int y = 0; y < field.height; ++y) {
            for (int x = 0; x < field.width; ++x) {
              const std::size_t i = field.index(x, y);
              for (int c = 0; c < 3; ++c)
                view(y, x, c) = field.valid[i]
                                    ? field.normal[i][c]
                                    : std::numeric_limits<double>::quiet_NaN();
            }
          }
          return out;
        },
        py::arg("image"), py::arg("intrinsics"),
        "(H, W, 3) camera-facing unit normals; NaN where undefined");

  m.def("surface_angle_deg",
        [](double nx, double ny, double nz) {
          return surface_angle_deg(Eigen::Vector3d(nx, ny, nz));
        },
        py::arg("nx"), py::arg("ny"), py::arg("nz"));
  m.def("px_to_mm", &px_to_mm, py::arg("sigma_px"), py::arg("z_mm"),
        py::arg("focal_px"));
  m.def("mm_to_px", &mm_to_px, py::arg("sigma_mm"), py::arg("z_mm"),
        py::arg("focal_px"));

  m.def("extract_edge_pixels",
        [](const RangeImage& img, const std::string& side, double gap_mm) {
          const auto pixels =
              extract_edge_pixels(img, edge_side_from_string(side), gap_mm);
          py::array_t<long> out(
              {static_cast<py::ssize_t>(pixels.size()), py::ssize_t{2}});
          auto view = out.mutable_unchecked<2>();
          for (py::ssize_t i = 0; i < static_cast<py::ssize_t>(pixels.size());
               ++i) {
            view(i, 0) = pixels[i].x();
            view(i, 1) = pixels[i].y();
          }
          return out;
        },
        py::arg("image"), py::arg("side"), py::arg("gap_mm") = 50.0,
        "(N, 2) integer (x, y) edge pixels, one per board-crossing scanline");

  m.def("fit_line_odr",
        [](const py::array_t<double, py::array::c_style |
                                         py::array::forcecast>& pts) {
          if (pts.ndim() != 2 || pts.shape(1) != 2)
            throw std::invalid_argument("points must be an (N, 2) array");
          std::vector<Eigen::Vector2d> p(pts.shape(0));
          auto view = pts.unchecked<2>();
          for (py::ssize_t i = 0; i < pts.shape(0); ++i)
            p[i] = {view(i, 0), view(i, 1)};
          const Line2D line = fit_line_odr(p);
          return py::make_tuple(
              py::make_tuple(line.normal.x(), line.normal.y()), line.offset);
        },
        py::arg("points"),
        "Total-least-squares line ((nx, ny), offset) with nx*x + ny*y = "
        "offset");

  m.def("ks_normality",
        [](const std::vector<double>& samples) { return ks_normality(samples); },
        py::arg("samples"),
        "One-sample KS statistic against a normal fitted to the samples");
  m.def("ks_threshold_5pct", &ks_threshold_5pct, py::arg("n"));

  m.def("lowpass_reference", &lowpass_reference, py::arg("mean_image"),
        py::arg("cutoff_px") = 2.0);

  m.def("estimate_lateral",
        [](const py::sequence& frames, const PlaneSceneSpec& spec,
           const std::string& side, double gap_mm) {
          const auto [sample, set] =
              estimate_lateral(frames_from_list(frames), spec,
                               edge_side_from_string(side), gap_mm);
          return py::make_tuple(sample, residual_set_to_dict(set));
        },
        py::arg("frames"), py::arg("spec"), py::arg("side") = "left",
        py::arg("gap_mm") = 50.0,
        "(NoiseSample, residual dict) from pooled board-edge scatter");

  m.def("estimate_axial",
        [](const py::sequence& frames, const PlaneSceneSpec& spec,
           double cutoff_px, bool return_residuals) -> py::object {
          const AxialEstimate est =
              estimate_axial_detailed(frames_from_list(frames), spec, cutoff_px);
          if (!return_residuals) return py::cast(est.sample);
          py::array_t<double> residuals(
              static_cast<py::ssize_t>(est.residuals.size()),
              est.residuals.data());
          return py::make_tuple(est.sample, residuals);
        },
        py::arg("frames"), py::arg("spec"), py::arg("cutoff_px") = 2.0,
        py::arg("return_residuals") = false);

  m.def("emulate_noise",
        [](const RangeImage& img, const NoiseModel& axial,
           const NoiseModel& lateral, double m_n, std::uint64_t seed,
           const std::string& angle_mode, std::optional<double> focal_px,
           int threads) {
          return emulate_noise(img, make_emulation_config(axial, lateral, m_n,
                                                          seed, angle_mode,
                                                          focal_px, threads));
        },
        py::arg("image"), py::arg("axial_model"), py::arg("lateral_model"),
        py::arg("m_n"), py::arg("seed"), py::arg("angle_mode") = "distance",
        py::arg("focal_px") = std::nullopt, py::arg("threads") = 1,
        "Two-stage lateral + axial noise injection, deterministic in seed");

  m.def("axial_noise_field",
        [](const RangeImage& img, const NoiseModel& axial,
           const NoiseModel& lateral, double m_n, std::uint64_t seed,
           const std::string& angle_mode, std::optional<double> focal_px,
           int threads) {
          const auto field = axial_noise_field(
              img, make_emulation_config(axial, lateral, m_n, seed, angle_mode,
                                         focal_px, threads));
          py::array_t<double> out({img.height(), img.width()});
          std::memcpy(out.mutable_data(), field.data(),
                      field.size() * sizeof(double));
          return out;
        },
        py::arg("image"), py::arg("axial_model"), py::arg("lateral_model"),
        py::arg("m_n"), py::arg("seed"), py::arg("angle_mode") = "distance",
        py::arg("focal_px") = std::nullopt, py::arg("threads") = 1);

  m.def("lateral_jitter_scale", &lateral_jitter_scale, py::arg("sigma_px"));
  m.def("quantized_jitter_variance", &quantized_jitter_variance,
        py::arg("scale"));
  m.def("format_sigma", &format_sigma, py::arg("value"));

  m.attr("__version__") = "0.1.0";
}
