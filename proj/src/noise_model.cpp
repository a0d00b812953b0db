#include "rangenoise/noise_model.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "rangenoise/errors.hpp"

namespace rangenoise {

const char* to_string(NoiseKind kind) {
  return kind == NoiseKind::lateral ? "lateral" : "axial";
}

const char* to_string(SigmaUnit unit) {
  return unit == SigmaUnit::px ? "px" : "mm";
}

NoiseKind noise_kind_from_string(const std::string& name) {
  if (name == "lateral") return NoiseKind::lateral;
  if (name == "axial") return NoiseKind::axial;
  throw std::invalid_argument("unknown noise kind '" + name +
                              "' (expected lateral|axial)");
}

SigmaUnit sigma_unit_from_string(const std::string& name) {
  if (name == "px") return SigmaUnit::px;
  if (name == "mm") return SigmaUnit::mm;
  throw std::invalid_argument("unknown sigma unit '" + name +
                              "' (expected px|mm)");
}

double NoiseModel::raw(double z, double theta) const {
  return coeffs[0] + coeffs[1] * z + coeffs[2] * theta + coeffs[3] * z * z +
         coeffs[4] * z * theta + coeffs[5] * theta * theta;
}

SigmaValue NoiseModel::evaluate(double z, double theta) const {
  if (!(z > 0.0))
    throw std::invalid_argument("noise model: z must be positive");
  if (!(theta >= 0.0 && theta < 90.0))
    throw std::invalid_argument("noise model: theta must be in [0, 90)");
  SigmaValue out;
  const double value = raw(z, theta);
  out.clamped = value < 0.0;
  out.sigma = out.clamped ? 0.0 : value;
  if (domain)
    out.extrapolated = z < domain->z_min_mm || z > domain->z_max_mm ||
                       theta > domain->theta_max_deg;
  return out;
}

namespace {

struct PresetRow {
  const char* camera;
  NoiseKind kind;
  std::array<double, 6> coeffs;
  ValidityDomain domain;
};

// Published degree-2 fits per camera. Domains follow the capture ranges
// the fits were made on (device default depth range; angles up to 70
// degrees, 80 for Kinect v2).
const PresetRow kPresets[] = {
    {"kinect-v1", NoiseKind::lateral,
     {0.94, 4.51e-5, 6.20e-4, 0.0, 0.0, 0.0},
     {800.0, 4000.0, 70.0}},
    {"kinect-v2", NoiseKind::lateral,
     {0.736, -6.20e-4, 5.35e-3, 2.13e-7, -1.40e-6, -4.13e-5},
     {500.0, 4500.0, 80.0}},
    {"motioncam-3d", NoiseKind::lateral,
     {0.915, -6.91e-5, 2.84e-3, 0.0, 0.0, 0.0},
     {500.0, 2000.0, 70.0}},
    {"kinect-v1", NoiseKind::axial,
     {-0.422, 6.89e-4, 2.24e-2, 5.99e-7, -2.70e-6, -1.52e-4},
     {800.0, 4000.0, 70.0}},
    {"kinect-v2", NoiseKind::axial,
     {1.17, 9.72e-5, -1.37e-2, -6.35e-9, 7.86e-6, 1.17e-4},
     {500.0, 4500.0, 80.0}},
    {"motioncam-3d", NoiseKind::axial,
     {0.599, -1.43e-3, -8.94e-3, 8.84e-7, 1.27e-5, 2.75e-5},
     {500.0, 2000.0, 70.0}},
};

}  // namespace

NoiseModel preset(const std::string& camera, NoiseKind kind) {
  for (const auto& row : kPresets) {
    if (camera == row.camera && kind == row.kind) {
      NoiseModel m;
      m.coeffs = row.coeffs;
      m.kind = kind;
      m.unit = kind == NoiseKind::lateral ? SigmaUnit::px : SigmaUnit::mm;
      m.camera = row.camera;
      m.domain = row.domain;
      return m;
    }
  }
  std::string names;
  for (const auto& c : preset_cameras()) {
    if (!names.empty()) names += ", ";
    names += c;
  }
  throw std::invalid_argument("unknown preset '" + camera + ":" +
                              to_string(kind) + "'; valid cameras: " + names +
                              "; valid kinds: lateral, axial");
}

std::vector<std::string> preset_cameras() {
  return {"kinect-v1", "kinect-v2", "motioncam-3d"};
}

NoiseModel fit_polynomial(std::span<const NoiseSample> samples, bool weighted) {
  if (samples.empty()) throw FitError("fit_polynomial: no samples");

  // Center and scale z and theta so the quadratic columns stay O(1).
  RegressorScaling scaling;
  double z_mean = 0.0, t_mean = 0.0;
  for (const auto& s : samples) {
    z_mean += s.z_mm;
    t_mean += s.theta_deg;
  }
  scaling.z_center = z_mean / static_cast<double>(samples.size());
  scaling.theta_center = t_mean / static_cast<double>(samples.size());
  double z_scale = 0.0, t_scale = 0.0;
  for (const auto& s : samples) {
    z_scale = std::max(z_scale, std::abs(s.z_mm - scaling.z_center));
    t_scale = std::max(t_scale, std::abs(s.theta_deg - scaling.theta_center));
  }
  scaling.z_scale = z_scale == 0.0 ? 1.0 : z_scale;
  scaling.theta_scale = t_scale == 0.0 ? 1.0 : t_scale;
  return fit_polynomial(samples, scaling, weighted);
}

NoiseModel fit_polynomial(std::span<const NoiseSample> samples,
                          const RegressorScaling& scaling, bool weighted) {
  if (samples.size() < 6)
    throw FitError("fit_polynomial: need at least 6 samples, got " +
                   std::to_string(samples.size()));
  if (!(scaling.z_scale > 0.0) || !(scaling.theta_scale > 0.0))
    throw std::invalid_argument("fit_polynomial: scales must be positive");
  const NoiseKind kind = samples[0].kind;
  for (const auto& s : samples)
    if (s.kind != kind)
      throw std::invalid_argument(
          "fit_polynomial: samples mix lateral and axial observations");

  const auto n = static_cast<Eigen::Index>(samples.size());
  const double z_mean = scaling.z_center;
  const double t_mean = scaling.theta_center;
  const double z_scale = scaling.z_scale;
  const double t_scale = scaling.theta_scale;

  Eigen::MatrixXd design(n, 6);
  Eigen::VectorXd rhs(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double zs = (samples[i].z_mm - z_mean) / z_scale;
    const double ts = (samples[i].theta_deg - t_mean) / t_scale;
    design(i, 0) = 1.0;
    design(i, 1) = zs;
    design(i, 2) = ts;
    design(i, 3) = zs * zs;
    design(i, 4) = zs * ts;
    design(i, 5) = ts * ts;
    rhs(i) = samples[i].sigma;
    if (weighted) {
      if (samples[i].n < 1)
        throw std::invalid_argument(
            "fit_polynomial: weighted fit needs positive sample counts");
      const double w = std::sqrt(static_cast<double>(samples[i].n));
      design.row(i) *= w;
      rhs(i) *= w;
    }
  }

  // Rank check on the scaled design; name the basis directions spanned by
  // the null space so degenerate grids produce actionable errors.
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(design,
                                        Eigen::ComputeThinU | Eigen::ComputeThinV);
  const double tol = 1e-10 * svd.singularValues()(0);
  if (svd.singularValues().minCoeff() <= tol) {
    static const char* kBasisNames[6] = {"1",   "z",   "theta",
                                         "z^2", "z*theta", "theta^2"};
    std::string deficient;
    const Eigen::VectorXd null_dir = svd.matrixV().col(5);
    for (int j = 0; j < 6; ++j) {
      if (std::abs(null_dir(j)) > 1e-6) {
        if (!deficient.empty()) deficient += ", ";
        deficient += kBasisNames[j];
      }
    }
    throw FitError(
        "fit_polynomial: rank-deficient design; dependent basis directions: " +
        deficient);
  }

  const Eigen::VectorXd beta = svd.solve(rhs);

  // Back-substitute zs = (z - a)/p, ts = (theta - b)/q into the scaled
  // polynomial to recover raw-basis coefficients.
  const double a = z_mean, p = z_scale, b = t_mean, q = t_scale;
  NoiseModel model;
  model.kind = kind;
  model.unit = kind == NoiseKind::lateral ? SigmaUnit::px : SigmaUnit::mm;
  model.coeffs[0] = beta(0) - beta(1) * a / p - beta(2) * b / q +
                    beta(3) * a * a / (p * p) + beta(4) * a * b / (p * q) +
                    beta(5) * b * b / (q * q);
  model.coeffs[1] =
      beta(1) / p - 2.0 * beta(3) * a / (p * p) - beta(4) * b / (p * q);
  model.coeffs[2] =
      beta(2) / q - beta(4) * a / (p * q) - 2.0 * beta(5) * b / (q * q);
  model.coeffs[3] = beta(3) / (p * p);
  model.coeffs[4] = beta(4) / (p * q);
  model.coeffs[5] = beta(5) / (q * q);
  return model;
}

double theoretical_axial_sigma(const TheoreticalSLParams& p, double z_mm) {
  if (!(p.f > 0.0) || !(p.b > 0.0))
    throw std::invalid_argument(
        "theoretical_axial_sigma: focal length and baseline must be positive");
  if (!(p.sigma_rho >= 0.0))
    throw std::invalid_argument(
        "theoretical_axial_sigma: sigma_rho must be nonnegative");
  if (!(z_mm > 0.0))
    throw std::invalid_argument("theoretical_axial_sigma: z must be positive");
  return (p.m / (p.f * p.b)) * z_mm * z_mm * p.sigma_rho;
}

namespace {

std::string format_full(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace

void write_model(const NoiseModel& model, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw Error("cannot open '" + path.string() + "' for writing");
  out << "camera=" << (model.camera.empty() ? "unknown" : model.camera) << '\n'
      << "kind=" << to_string(model.kind) << '\n'
      << "units=" << to_string(model.unit) << '\n';
  for (int i = 0; i < 6; ++i)
    out << 'c' << i << '=' << format_full(model.coeffs[i]) << '\n';
  out.flush();
  if (!out) throw Error("I/O error while writing '" + path.string() + "'");
}

NoiseModel read_model(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open '" + path.string() + "' for reading");

  NoiseModel model;
  bool have_camera = false, have_kind = false, have_units = false;
  bool have_coeff[6] = {};
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw FormatError(path.string() + ":" + std::to_string(line_no) +
                        ": expected 'key=value'");
    const std::string key = line.substr(0, eq);
    const std::string value = line.substr(eq + 1);
    auto parse_double = [&] {
      try {
        std::size_t pos = 0;
        const double v = std::stod(value, &pos);
        if (pos != value.size()) throw std::invalid_argument("trailing");
        return v;
      } catch (const std::exception&) {
        throw FormatError(path.string() + ":" + std::to_string(line_no) +
                          ": invalid numeric value for '" + key + "'");
      }
    };
    if (key == "camera") {
      model.camera = value;
      have_camera = true;
    } else if (key == "kind") {
      try {
        model.kind = noise_kind_from_string(value);
      } catch (const std::invalid_argument& e) {
        throw FormatError(path.string() + ":" + std::to_string(line_no) +
                          ": " + e.what());
      }
      have_kind = true;
    } else if (key == "units") {
      try {
        model.unit = sigma_unit_from_string(value);
      } catch (const std::invalid_argument& e) {
        throw FormatError(path.string() + ":" + std::to_string(line_no) +
                          ": " + e.what());
      }
      have_units = true;
    } else if (key.size() == 2 && key[0] == 'c' && key[1] >= '0' &&
               key[1] <= '5') {
      const int idx = key[1] - '0';
      if (have_coeff[idx])
        throw FormatError(path.string() + ":" + std::to_string(line_no) +
                          ": duplicate key '" + key + "'");
      model.coeffs[idx] = parse_double();
      have_coeff[idx] = true;
    } else {
      throw FormatError(path.string() + ":" + std::to_string(line_no) +
                        ": unknown key '" + key + "'");
    }
  }
  if (!have_camera || !have_kind || !have_units)
    throw FormatError(path.string() +
                      ": missing required key(s) camera/kind/units");
  for (int i = 0; i < 6; ++i)
    if (!have_coeff[i])
      throw FormatError(path.string() + ": missing coefficient c" +
                        std::to_string(i));
  return model;
}

std::string format_sigma(double value) {
  if (value == 0.0) return "0.0000";
  if (!std::isfinite(value)) return "nan";
  const double mag = std::abs(value);
  const int exponent = static_cast<int>(std::floor(std::log10(mag)));
  char buf[64];
  if (exponent < -6 || exponent > 8) {
    std::snprintf(buf, sizeof(buf), "%.4e", value);
  } else {
    const int decimals = std::max(0, 4 - exponent);
    std::snprintf(buf, sizeof(buf), "%.*f", decimals, value);
  }
  return buf;
}

}  // namespace rangenoise
