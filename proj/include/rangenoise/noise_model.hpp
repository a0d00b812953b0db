#pragma once

#include <array>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace rangenoise {

enum class NoiseKind { lateral, axial };
enum class SigmaUnit { px, mm };

const char* to_string(NoiseKind kind);
const char* to_string(SigmaUnit unit);
NoiseKind noise_kind_from_string(const std::string& name);
SigmaUnit sigma_unit_from_string(const std::string& name);

/// One estimated noise observation feeding the model fitter.
struct NoiseSample {
  double z_mm = 0.0;
  double theta_deg = 0.0;
  double sigma = 0.0;  ///< px for lateral, mm for axial
  long n = 0;          ///< residual count behind the estimate
  NoiseKind kind = NoiseKind::lateral;
};

/// Result of evaluating a noise model. `clamped` flags evaluations where
/// the raw polynomial went negative; `extrapolated` flags (z, theta)
/// outside the model's recorded validity domain.
struct SigmaValue {
  double sigma = 0.0;
  bool clamped = false;
  bool extrapolated = false;
};

/// Range of (z, theta) the model was calibrated on.
struct ValidityDomain {
  double z_min_mm = 0.0;
  double z_max_mm = 0.0;
  double theta_max_deg = 90.0;
};

/// Degree-2 bivariate polynomial noise model
///   sigma(z, theta) = c0 + c1 z + c2 theta + c3 z^2 + c4 z theta + c5 theta^2
/// with z in mm and theta in degrees. Immutable value object.
struct NoiseModel {
  std::array<double, 6> coeffs{};  // basis [1, z, th, z^2, z*th, th^2]
  NoiseKind kind = NoiseKind::lateral;
  SigmaUnit unit = SigmaUnit::px;
  std::string camera;
  std::optional<ValidityDomain> domain;

  /// Raw polynomial value, no clamping.
  double raw(double z_mm, double theta_deg) const;

  /// Clamped evaluation max(0, raw). Throws std::invalid_argument unless
  /// z > 0 and 0 <= theta < 90.
  SigmaValue evaluate(double z_mm, double theta_deg) const;
};

/// Camera presets with the published coefficients. Valid camera names are
/// kinect-v1, kinect-v2, motioncam-3d. Throws std::invalid_argument
/// listing the valid names on an unknown camera or kind.
NoiseModel preset(const std::string& camera, NoiseKind kind);
std::vector<std::string> preset_cameras();

/// Affine transform applied to the regressors before fitting, for
/// conditioning only: raw-basis results do not depend on it.
struct RegressorScaling {
  double z_center = 0.0;
  double z_scale = 1.0;
  double theta_center = 0.0;
  double theta_scale = 1.0;
};

/// Unweighted ordinary least squares over the 6-term basis. Regressors are
/// centered and scaled internally for conditioning; returned coefficients
/// are in the raw basis. With weighted=true rows are weighted by sqrt(n).
/// Requires >= 6 samples of one kind; throws FitError naming the deficient
/// basis directions when the design is rank-deficient.
NoiseModel fit_polynomial(std::span<const NoiseSample> samples,
                          bool weighted = false);

/// fit_polynomial with an explicit regressor scaling instead of the
/// data-derived one.
NoiseModel fit_polynomial(std::span<const NoiseSample> samples,
                          const RegressorScaling& scaling,
                          bool weighted = false);

/// Parameters of the structured-light axial noise law
/// sigma_z = (m / (f b)) z^2 sigma_rho.
struct TheoreticalSLParams {
  double m = 1.0;          ///< internal disparity-normalization parameter
  double f = 1.0;          ///< focal length, px
  double b = 1.0;          ///< baseline, mm
  double sigma_rho = 0.0;  ///< std of normalized disparity
};

double theoretical_axial_sigma(const TheoreticalSLParams& p, double z_mm);

/// Model file I/O. ASCII lines `camera=`, `kind=`, `units=`, `c0=`..`c5=`;
/// round-trips to full double precision. Parse errors report line numbers;
/// unknown keys are named.
void write_model(const NoiseModel& model, const std::filesystem::path& path);
NoiseModel read_model(const std::filesystem::path& path);

/// Formats sigma with 5 significant digits (trailing zeros kept), the
/// canonical numeric format of the CLI and its golden files.
std::string format_sigma(double value);

}  // namespace rangenoise
