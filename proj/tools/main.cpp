// rangenoise: estimate, fit, and emulate range-camera noise models.

#include <CLI11.hpp>
#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "rangenoise/emulation.hpp"
#include "rangenoise/errors.hpp"
#include "rangenoise/estimation.hpp"
#include "rangenoise/geometry.hpp"
#include "rangenoise/noise_model.hpp"
#include "rangenoise/plane_scene.hpp"
#include "rangenoise/rif_io.hpp"

namespace fs = std::filesystem;
using namespace rangenoise;

namespace {

std::string fmt_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

// Every run records its effective configuration (defaults included) next
// to its primary output so results can be reproduced from the sidecar
// alone. Keys are sorted; no timestamps, so reruns are byte-identical.
class RunConfig {
 public:
  explicit RunConfig(std::string command) : command_(std::move(command)) {}

  void set(const std::string& key, const std::string& value) {
    values_[key] = value;
  }
  void set(const std::string& key, double value) { set(key, fmt_double(value)); }
  void set(const std::string& key, std::uint64_t value) {
    set(key, std::to_string(value));
  }
  void set(const std::string& key, int value) { set(key, std::to_string(value)); }

  void write(const fs::path& path) const {
    std::ofstream out(path, std::ios::trunc);
    if (!out)
      throw Error("cannot write run config '" + path.string() + "'");
    out << "command=" << command_ << '\n';
    for (const auto& [k, v] : values_) out << k << '=' << v << '\n';
  }

 private:
  std::string command_;
  std::map<std::string, std::string> values_;
};

std::vector<fs::path> list_rif_files(const fs::path& dir) {
  if (!fs::is_directory(dir))
    throw EstimationError("no input frames: '" + dir.string() +
                          "' is not a directory");
  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(dir))
    if (entry.is_regular_file() && entry.path().extension() == ".rif")
      files.push_back(entry.path());
  std::sort(files.begin(), files.end());
  if (files.empty())
    throw EstimationError("no input frames in '" + dir.string() + "'");
  return files;
}

std::vector<RangeImage> load_frames(const fs::path& dir) {
  std::vector<RangeImage> frames;
  for (const auto& p : list_rif_files(dir)) frames.push_back(read_range_image(p));
  return frames;
}

// Scene metadata for the estimators: explicit flags win, then the frame
// headers.
PlaneSceneSpec resolve_scene(const std::vector<RangeImage>& frames,
                             std::optional<double> distance,
                             std::optional<double> angle) {
  PlaneSceneSpec spec;
  if (!distance && frames.front().distance_mm)
    distance = frames.front().distance_mm;
  if (!angle && frames.front().angle_deg) angle = frames.front().angle_deg;
  if (!distance)
    throw EstimationError(
        "scene distance unknown: pass --distance or use frames with "
        "distance_mm metadata");
  spec.distance_mm = *distance;
  spec.angle_deg = angle.value_or(0.0);
  spec.validate();
  return spec;
}

// A model argument is either a preset camera name or a model file path.
NoiseModel resolve_model(const std::string& arg, NoiseKind kind) {
  if (fs::exists(arg)) {
    const NoiseModel m = read_model(arg);
    if (m.kind != kind)
      throw std::invalid_argument("model file '" + arg + "' holds a " +
                                  std::string(to_string(m.kind)) +
                                  " model, expected " + to_string(kind));
    return m;
  }
  return preset(arg, kind);
}

void emit_sample(const NoiseSample& sample, const fs::path& csv_out) {
  write_samples_csv({&sample, 1}, csv_out);
  std::cout << format_sigma(sample.sigma) << '\n';
}

// ---- subcommand payloads --------------------------------------------------

struct SynthArgs {
  std::string out;
  double distance = 1000.0;
  double angle = 0.0;
  std::string axis = "vertical";
  double board_width = 400.0;
  double board_height = 300.0;
  int width = 640;
  int height = 480;
  double fx = 580.0, fy = 580.0;
  double cx = -1.0, cy = -1.0;  // default: image center
  double background = -1.0;     // <0: invalid background
  int threads = 1;
};

int run_synth(const SynthArgs& a) {
  SynthesisConfig cfg;
  cfg.spec.distance_mm = a.distance;
  cfg.spec.angle_deg = a.angle;
  cfg.spec.board_width_mm = a.board_width;
  cfg.spec.board_height_mm = a.board_height;
  cfg.spec.rotation_axis = a.axis == "horizontal" ? RotationAxis::horizontal
                                                  : RotationAxis::vertical;
  cfg.intrinsics = {a.fx, a.fy, a.cx < 0 ? a.width / 2.0 : a.cx,
                    a.cy < 0 ? a.height / 2.0 : a.cy, a.width, a.height};
  if (a.background >= 0) cfg.background_mm = a.background;

  RunConfig rc("synth-plane");
  rc.set("out", a.out);
  rc.set("distance_mm", a.distance);
  rc.set("angle_deg", a.angle);
  rc.set("axis", a.axis);
  rc.set("board_width_mm", a.board_width);
  rc.set("board_height_mm", a.board_height);
  rc.set("width", a.width);
  rc.set("height", a.height);
  rc.set("fx", cfg.intrinsics.fx);
  rc.set("fy", cfg.intrinsics.fy);
  rc.set("cx", cfg.intrinsics.cx);
  rc.set("cy", cfg.intrinsics.cy);
  rc.set("background_mm",
         a.background >= 0 ? fmt_double(a.background) : "invalid");
  rc.set("threads", a.threads);
  rc.write(a.out + ".config");

  write_range_image(synth_plane(cfg, a.threads), a.out);
  return 0;
}

struct AverageArgs {
  std::string input_dir;
  std::string out;
  double min_valid_fraction = 0.5;
};

int run_average(const AverageArgs& a) {
  RunConfig rc("average");
  rc.set("input_dir", a.input_dir);
  rc.set("out", a.out);
  rc.set("min_valid_fraction", a.min_valid_fraction);
  rc.write(a.out + ".config");

  const auto frames = load_frames(a.input_dir);
  write_range_image(average_frames(frames, a.min_valid_fraction), a.out);
  return 0;
}

struct EstimateArgs {
  std::string input_dir;
  std::string csv_out;
  std::string hist_out;
  std::string side = "left";
  double gap_mm = 50.0;
  double cutoff = 2.0;
  double distance = -1.0;
  double angle = -1.0;

  std::optional<double> distance_opt() const {
    return distance >= 0 ? std::optional<double>(distance) : std::nullopt;
  }
  std::optional<double> angle_opt() const {
    return angle >= 0 ? std::optional<double>(angle) : std::nullopt;
  }
};

int run_estimate_lateral(const EstimateArgs& a) {
  RunConfig rc("estimate-lateral");
  rc.set("input_dir", a.input_dir);
  rc.set("csv_out", a.csv_out);
  rc.set("hist_out", a.hist_out.empty() ? "(none)" : a.hist_out);
  rc.set("side", a.side);
  rc.set("gap_mm", a.gap_mm);
  rc.write(a.csv_out + ".config");

  const auto frames = load_frames(a.input_dir);
  const auto spec = resolve_scene(frames, a.distance_opt(), a.angle_opt());
  const auto [sample, residual_set] =
      estimate_lateral(frames, spec, edge_side_from_string(a.side), a.gap_mm);
  emit_sample(sample, a.csv_out);
  if (!a.hist_out.empty())
    write_histogram_csv(freedman_diaconis_histogram(residual_set.residuals),
                        a.hist_out);
  return 0;
}

int run_estimate_axial(const EstimateArgs& a) {
  RunConfig rc("estimate-axial");
  rc.set("input_dir", a.input_dir);
  rc.set("csv_out", a.csv_out);
  rc.set("hist_out", a.hist_out.empty() ? "(none)" : a.hist_out);
  rc.set("cutoff_px", a.cutoff);
  rc.write(a.csv_out + ".config");

  const auto frames = load_frames(a.input_dir);
  const auto spec = resolve_scene(frames, a.distance_opt(), a.angle_opt());
  const AxialEstimate est = estimate_axial_detailed(frames, spec, a.cutoff);
  emit_sample(est.sample, a.csv_out);
  if (!a.hist_out.empty())
    write_histogram_csv(freedman_diaconis_histogram(est.residuals),
                        a.hist_out);
  return 0;
}

struct FitArgs {
  std::string samples;
  std::string out;
  std::string kind = "lateral";
  std::string camera = "custom";
  bool weighted = false;
};

int run_fit(const FitArgs& a) {
  RunConfig rc("fit-model");
  rc.set("samples", a.samples);
  rc.set("out", a.out);
  rc.set("kind", a.kind);
  rc.set("camera", a.camera);
  rc.set("weighted", a.weighted ? "true" : "false");
  rc.write(a.out + ".config");

  const NoiseKind kind = noise_kind_from_string(a.kind);
  std::vector<NoiseSample> samples;
  for (const auto& s : read_samples_csv(a.samples))
    if (s.kind == kind) samples.push_back(s);
  if (samples.size() < 6)
    throw FitError("fit-model: only " + std::to_string(samples.size()) +
                   " samples of kind '" + a.kind + "' in " + a.samples);
  NoiseModel model = fit_polynomial(samples, a.weighted);
  model.camera = a.camera;
  write_model(model, a.out);
  return 0;
}

struct EvalArgs {
  std::string preset_name;  // camera:kind
  std::string model_file;
  double z = 0.0;
  double theta = 0.0;
  std::string config_out;
};

int run_eval(const EvalArgs& a) {
  NoiseModel model;
  if (!a.preset_name.empty()) {
    const auto colon = a.preset_name.find(':');
    if (colon == std::string::npos)
      throw std::invalid_argument(
          "--preset expects <camera>:<lateral|axial>, e.g. kinect-v1:lateral");
    model = preset(a.preset_name.substr(0, colon),
                   noise_kind_from_string(a.preset_name.substr(colon + 1)));
  } else if (!a.model_file.empty()) {
    model = read_model(a.model_file);
  } else {
    throw std::invalid_argument("eval-model needs --preset or --model");
  }
  const SigmaValue v = model.evaluate(a.z, a.theta);
  std::cout << format_sigma(v.sigma) << '\n';
  if (v.clamped)
    std::cerr << "note: polynomial went negative, sigma clamped to 0\n";
  if (v.extrapolated)
    std::cerr << "note: (z, theta) outside the model's calibrated range\n";
  if (!a.config_out.empty()) {
    RunConfig rc("eval-model");
    rc.set("preset", a.preset_name.empty() ? "(none)" : a.preset_name);
    rc.set("model", a.model_file.empty() ? "(none)" : a.model_file);
    rc.set("z_mm", a.z);
    rc.set("theta_deg", a.theta);
    rc.write(a.config_out);
  }
  return 0;
}

int run_presets() {
  for (const auto& camera : preset_cameras()) {
    for (NoiseKind kind : {NoiseKind::lateral, NoiseKind::axial}) {
      const NoiseModel m = preset(camera, kind);
      std::cout << camera << ':' << to_string(kind) << " units="
                << to_string(m.unit);
      for (int i = 0; i < 6; ++i) std::cout << " c" << i << '=' << m.coeffs[i];
      std::cout << '\n';
    }
  }
  return 0;
}

struct EmulateArgs {
  std::string input_dir;
  std::string output_dir;
  std::string axial_model;
  std::string lateral_model;
  double mn = 1.0;
  std::string mn_list;
  std::uint64_t seed = 0;
  std::string angle_mode = "distance";
  double focal = -1.0;
  int threads = 1;
};

EmulationConfig build_emulation_config(const EmulateArgs& a) {
  EmulationConfig cfg;
  cfg.axial_model = resolve_model(a.axial_model, NoiseKind::axial);
  cfg.lateral_model = resolve_model(a.lateral_model, NoiseKind::lateral);
  cfg.m_n = a.mn;
  cfg.seed = a.seed;
  cfg.angle_mode = angle_mode_from_string(a.angle_mode);
  if (a.focal > 0) cfg.focal_px = a.focal;
  cfg.threads = a.threads;
  return cfg;
}

void record_emulation(RunConfig& rc, const EmulateArgs& a) {
  rc.set("input_dir", a.input_dir);
  rc.set("output_dir", a.output_dir);
  rc.set("axial_model", a.axial_model);
  rc.set("lateral_model", a.lateral_model);
  rc.set("seed", a.seed);
  rc.set("angle_mode", a.angle_mode);
  rc.set("focal_px", a.focal > 0 ? fmt_double(a.focal) : "(from metadata)");
  rc.set("threads", a.threads);
}

int run_emulate(const EmulateArgs& a) {
  const EmulationConfig cfg = build_emulation_config(a);
  const auto inputs = list_rif_files(a.input_dir);
  fs::create_directories(a.output_dir);

  RunConfig rc("emulate");
  record_emulation(rc, a);
  rc.set("mn", a.mn);
  rc.write(fs::path(a.output_dir) / "run.config");

  // Same per-image seed derivation as sweep, so `emulate --mn m` equals
  // the mn_<m> slice of a sweep with the same seed.
  const double ms[] = {a.mn};
  const SweepResult result = sweep_mn(inputs, cfg, ms, a.output_dir);
  for (const auto& f : result.failures) std::cerr << "error: " << f << '\n';

  // Flatten mn_<m>/ into the output directory.
  const fs::path sub = fs::path(a.output_dir) / sweep_dir_name(a.mn);
  for (const auto& entry : fs::directory_iterator(sub))
    fs::rename(entry.path(), fs::path(a.output_dir) / entry.path().filename());
  fs::remove(sub);
  return result.failures.empty() ? 0 : 2;
}

int run_sweep(const EmulateArgs& a) {
  const EmulationConfig cfg = build_emulation_config(a);
  const auto inputs = list_rif_files(a.input_dir);

  std::vector<double> ms;
  std::stringstream ss(a.mn_list);
  std::string token;
  while (std::getline(ss, token, ',')) {
    try {
      ms.push_back(std::stod(token));
    } catch (const std::exception&) {
      throw std::invalid_argument("--mn-list: bad multiplier '" + token + "'");
    }
  }
  if (ms.empty()) throw std::invalid_argument("--mn-list: no multipliers");

  fs::create_directories(a.output_dir);
  RunConfig rc("sweep");
  record_emulation(rc, a);
  rc.set("mn_list", a.mn_list);
  rc.write(fs::path(a.output_dir) / "run.config");

  const SweepResult result = sweep_mn(inputs, cfg, ms, a.output_dir);
  for (const auto& f : result.failures) std::cerr << "error: " << f << '\n';
  std::cout << result.written.size() << " files written, "
            << result.failures.size() << " failures\n";
  return result.failures.empty() ? 0 : 2;
}

struct ReportArgs {
  std::vector<std::string> inputs;  // camera=path pairs
  std::string out_dir;
};

int run_report(const ReportArgs& a) {
  fs::create_directories(a.out_dir);
  RunConfig rc("report");
  rc.set("out_dir", a.out_dir);

  int index = 0;
  std::vector<std::pair<std::string, std::vector<NoiseSample>>> groups;
  for (const auto& spec : a.inputs) {
    const auto eq = spec.find('=');
    if (eq == std::string::npos)
      throw std::invalid_argument(
          "report inputs are <camera>=<samples.csv>, got '" + spec + "'");
    const std::string camera = spec.substr(0, eq);
    const std::string path = spec.substr(eq + 1);
    rc.set("input" + std::to_string(index++), spec);
    groups.emplace_back(camera, read_samples_csv(path));
  }
  rc.write(fs::path(a.out_dir) / "run.config");

  for (const auto& [camera, samples] : groups) {
    for (NoiseKind kind : {NoiseKind::lateral, NoiseKind::axial}) {
      std::set<double> zs, thetas;
      std::map<std::pair<double, double>, std::pair<double, int>> cells;
      for (const auto& s : samples) {
        if (s.kind != kind) continue;
        zs.insert(s.z_mm);
        thetas.insert(s.theta_deg);
        auto& cell = cells[{s.z_mm, s.theta_deg}];
        cell.first += s.sigma;
        cell.second += 1;
      }
      if (cells.empty()) continue;
      auto cell_text = [&](double z, double t) -> std::string {
        const auto it = cells.find({z, t});
        if (it == cells.end()) return "";
        return format_sigma(it->second.first / it->second.second);
      };

      const std::string stem = camera + "_" + to_string(kind);
      {
        std::ofstream out(fs::path(a.out_dir) / (stem + "_sigma_vs_z.csv"));
        out << "z_mm";
        for (double t : thetas) out << ",theta_" << t;
        out << '\n';
        for (double z : zs) {
          out << z;
          for (double t : thetas) out << ',' << cell_text(z, t);
          out << '\n';
        }
      }
      {
        std::ofstream out(fs::path(a.out_dir) /
                          (stem + "_sigma_vs_theta.csv"));
        out << "theta_deg";
        for (double z : zs) out << ",z_" << z;
        out << '\n';
        for (double t : thetas) {
          out << t;
          for (double z : zs) out << ',' << cell_text(z, t);
          out << '\n';
        }
      }
    }
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "rangenoise: lateral/axial noise estimation, polynomial noise models, "
      "and calibrated noise emulation for range images"};
  app.require_subcommand(1);

  SynthArgs synth;
  auto* synth_cmd =
      app.add_subcommand("synth-plane", "Render a noise-free planar-board scene");
  synth_cmd->add_option("--out", synth.out, "Output RIF file")->required();
  synth_cmd->add_option("--distance", synth.distance,
                        "Board center distance [mm]")
      ->capture_default_str();
  synth_cmd->add_option("--angle", synth.angle, "Surface angle [deg]")
      ->capture_default_str();
  synth_cmd->add_option("--axis", synth.axis, "Rotation axis")
      ->check(CLI::IsMember({"vertical", "horizontal"}))
      ->capture_default_str();
  synth_cmd->add_option("--board-width", synth.board_width, "Board width [mm]")
      ->capture_default_str();
  synth_cmd->add_option("--board-height", synth.board_height,
                        "Board height [mm]")
      ->capture_default_str();
  synth_cmd->add_option("--width", synth.width, "Image width [px]")
      ->capture_default_str();
  synth_cmd->add_option("--height", synth.height, "Image height [px]")
      ->capture_default_str();
  synth_cmd->add_option("--fx", synth.fx, "Focal length x [px]")
      ->capture_default_str();
  synth_cmd->add_option("--fy", synth.fy, "Focal length y [px]")
      ->capture_default_str();
  synth_cmd->add_option("--cx", synth.cx, "Principal point x (default: center)");
  synth_cmd->add_option("--cy", synth.cy, "Principal point y (default: center)");
  synth_cmd->add_option("--background", synth.background,
                        "Constant background depth [mm]; omit for invalid");
  synth_cmd->add_option("--threads", synth.threads, "Worker threads")
      ->capture_default_str();

  AverageArgs average;
  auto* average_cmd =
      app.add_subcommand("average", "Average a directory of RIF frames");
  average_cmd->add_option("--input-dir", average.input_dir, "Frame directory")
      ->required();
  average_cmd->add_option("--out", average.out, "Output RIF file")->required();
  average_cmd
      ->add_option("--min-valid-fraction", average.min_valid_fraction,
                   "Minimum valid fraction for an output pixel")
      ->capture_default_str();

  EstimateArgs lateral;
  auto* lateral_cmd = app.add_subcommand(
      "estimate-lateral", "Estimate lateral noise from board edge scatter");
  lateral_cmd->add_option("--input-dir", lateral.input_dir, "Frame directory")
      ->required();
  lateral_cmd->add_option("--csv-out", lateral.csv_out, "NoiseSample CSV out")
      ->required();
  lateral_cmd->add_option("--hist-out", lateral.hist_out,
                          "Residual histogram CSV out");
  lateral_cmd->add_option("--side", lateral.side, "Board edge to measure")
      ->check(CLI::IsMember({"left", "right", "top", "bottom"}))
      ->capture_default_str();
  lateral_cmd->add_option("--gap-mm", lateral.gap_mm,
                          "Foreground/background depth gap threshold [mm]")
      ->capture_default_str();
  lateral_cmd->add_option("--distance", lateral.distance,
                          "Scene distance [mm] (default: frame metadata)");
  lateral_cmd->add_option("--angle", lateral.angle,
                          "Scene angle [deg] (default: frame metadata)");

  EstimateArgs axial;
  auto* axial_cmd = app.add_subcommand(
      "estimate-axial", "Estimate axial noise against a low-passed reference");
  axial_cmd->add_option("--input-dir", axial.input_dir, "Frame directory")
      ->required();
  axial_cmd->add_option("--csv-out", axial.csv_out, "NoiseSample CSV out")
      ->required();
  axial_cmd->add_option("--hist-out", axial.hist_out,
                        "Residual histogram CSV out");
  axial_cmd->add_option("--cutoff", axial.cutoff,
                        "Gaussian smoothing std [px] for the reference")
      ->capture_default_str();
  axial_cmd->add_option("--distance", axial.distance,
                        "Scene distance [mm] (default: frame metadata)");
  axial_cmd->add_option("--angle", axial.angle,
                        "Scene angle [deg] (default: frame metadata)");

  FitArgs fit;
  auto* fit_cmd = app.add_subcommand(
      "fit-model", "Fit a degree-2 noise model to NoiseSample CSV rows");
  fit_cmd->add_option("--samples", fit.samples, "NoiseSample CSV")->required();
  fit_cmd->add_option("--out", fit.out, "Model file out")->required();
  fit_cmd->add_option("--kind", fit.kind, "Noise kind to fit")
      ->check(CLI::IsMember({"lateral", "axial"}))
      ->capture_default_str();
  fit_cmd->add_option("--camera", fit.camera, "Camera label for the model")
      ->capture_default_str();
  fit_cmd->add_flag("--weighted", fit.weighted,
                    "Weight samples by their residual counts");

  EvalArgs eval;
  auto* eval_cmd =
      app.add_subcommand("eval-model", "Print sigma(z, theta) for a model");
  eval_cmd->add_option("--preset", eval.preset_name,
                       "Built-in model, <camera>:<lateral|axial>");
  eval_cmd->add_option("--model", eval.model_file, "Model file");
  eval_cmd->add_option("--z", eval.z, "Distance z [mm]")->required();
  eval_cmd->add_option("--theta", eval.theta, "Surface angle [deg]")
      ->required();
  eval_cmd->add_option("--config-out", eval.config_out,
                       "Optional run-config sidecar path");

  auto* presets_cmd =
      app.add_subcommand("presets", "List built-in camera noise models");

  EmulateArgs emulate;
  auto* emulate_cmd = app.add_subcommand(
      "emulate", "Add calibrated noise to clean range images");
  auto add_emulation_options = [](CLI::App* cmd, EmulateArgs& args) {
    cmd->add_option("--input-dir", args.input_dir, "Clean RIF directory")
        ->required();
    cmd->add_option("--output-dir", args.output_dir, "Output directory")
        ->required();
    cmd->add_option("--axial-model", args.axial_model,
                    "Axial model: preset camera name or model file")
        ->required();
    cmd->add_option("--lateral-model", args.lateral_model,
                    "Lateral model: preset camera name or model file")
        ->required();
    cmd->add_option("--seed", args.seed, "RNG seed (64-bit)")
        ->capture_default_str();
    cmd->add_option("--angle-mode", args.angle_mode,
                    "Surface angle source: normals|distance")
        ->check(CLI::IsMember({"normals", "distance"}))
        ->capture_default_str();
    cmd->add_option("--focal", args.focal,
                    "Focal length [px] for unit conversion (default: image "
                    "metadata)");
    cmd->add_option("--threads", args.threads, "Worker threads")
        ->capture_default_str();
  };
  add_emulation_options(emulate_cmd, emulate);
  emulate_cmd->add_option("--mn", emulate.mn, "Noise multiplier M_n")
      ->capture_default_str();

  EmulateArgs sweep;
  auto* sweep_cmd = app.add_subcommand(
      "sweep", "Emulate a list of noise multipliers into subdirectories");
  add_emulation_options(sweep_cmd, sweep);
  sweep_cmd
      ->add_option("--mn-list", sweep.mn_list,
                   "Comma-separated multipliers, e.g. 0,0.25,0.5")
      ->required();

  ReportArgs report;
  auto* report_cmd = app.add_subcommand(
      "report", "Aggregate NoiseSample CSVs into sigma-vs-z/theta tables");
  report_cmd
      ->add_option("inputs", report.inputs,
                   "Sample sets as <camera>=<samples.csv>")
      ->required();
  report_cmd->add_option("--out-dir", report.out_dir, "Output directory")
      ->required();

  try {
    app.parse(argc, argv);
    if (synth_cmd->parsed()) return run_synth(synth);
    if (average_cmd->parsed()) return run_average(average);
    if (lateral_cmd->parsed()) return run_estimate_lateral(lateral);
    if (axial_cmd->parsed()) return run_estimate_axial(axial);
    if (fit_cmd->parsed()) return run_fit(fit);
    if (eval_cmd->parsed()) return run_eval(eval);
    if (presets_cmd->parsed()) return run_presets();
    if (emulate_cmd->parsed()) return run_emulate(emulate);
    if (sweep_cmd->parsed()) return run_sweep(sweep);
    if (report_cmd->parsed()) return run_report(report);
    return 1;
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 1;
  } catch (const std::invalid_argument& e) {
    std::cerr << "usage error: " << e.what() << '\n';
    return 1;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
}
