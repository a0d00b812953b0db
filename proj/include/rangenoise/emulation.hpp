#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "rangenoise/noise_model.hpp"
#include "rangenoise/range_image.hpp"

namespace rangenoise {

/// How the surface angle entering sigma(z, theta) is obtained.
enum class AngleMode {
  per_pixel_normals,  ///< theta from per-pixel surface normals
  distance_only,      ///< theta fixed at 0, noise depends on distance alone
};

const char* to_string(AngleMode mode);
AngleMode angle_mode_from_string(const std::string& name);

/// Configuration of the noise emulator. m_n scales both noise components
/// relative to the calibrated model (m_n = 0 adds nothing, m_n = 1 the
/// estimated device level).
struct EmulationConfig {
  NoiseModel axial_model;
  NoiseModel lateral_model;
  double m_n = 1.0;
  std::uint64_t seed = 0;
  AngleMode angle_mode = AngleMode::distance_only;
  /// Focal length in px; required to convert a lateral model in mm to
  /// pixel jitter. Defaults to the image intrinsics' fx when absent.
  std::optional<double> focal_px;
  int threads = 1;

  void validate() const;
};

/// Variance of round(scale * N(0,1)): the lateral displacement actually
/// realized after nearest-neighbor resampling on the pixel grid.
double quantized_jitter_variance(double scale);

/// Inverse of quantized_jitter_variance: the draw scale whose quantized
/// displacement has standard deviation sigma_px. Resampling quantizes the
/// jitter to whole pixels, which inflates small displacements; this
/// compensation makes the emulated lateral noise carry the requested
/// sigma instead of sigma plus grid noise.
double lateral_jitter_scale(double sigma_px);

/// Adds calibrated noise to a clean range image in two stages:
///   1. lateral: every output pixel resamples the input (nearest neighbor)
///      at a jittered position; each row carries one 2D offset draw,
///      scaled by the local m_n * sigma_L(z, theta) through
///      lateral_jitter_scale. Out-of-image samples become invalid.
///   2. axial: every valid depth receives m_n * sigma_z(z, theta) * g with
///      g a per-pixel unit normal draw; z and theta come from the
///      post-lateral image.
/// Deterministic given cfg.seed, independent of thread count.
RangeImage emulate_noise(const RangeImage& img, const EmulationConfig& cfg);

/// The additive axial perturbation field emulate_noise would apply to this
/// image (no lateral stage), in mm; 0 at invalid pixels. Computed as
/// m_n * (sigma * g), so the field scales exactly linearly in m_n for a
/// fixed seed.
std::vector<double> axial_noise_field(const RangeImage& img,
                                      const EmulationConfig& cfg);

/// Outcome of one sweep_mn run. Failures are per-file; the sweep continues
/// past them.
struct SweepResult {
  std::vector<std::filesystem::path> written;
  std::vector<std::string> failures;
};

/// For every multiplier m, writes `mn_<m>/<input name>` emulated copies of
/// the inputs under out_dir. Per-image seeds derive from (cfg.seed, image
/// index, m), so trees are reproducible and the per-m datasets are
/// independent.
SweepResult sweep_mn(std::span<const std::filesystem::path> inputs,
                     const EmulationConfig& cfg,
                     std::span<const double> m_values,
                     const std::filesystem::path& out_dir);

/// Directory name used by sweep_mn for multiplier m ("mn_0.25" style).
std::string sweep_dir_name(double m);

}  // namespace rangenoise
