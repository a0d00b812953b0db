#pragma once

#include <Eigen/Core>
#include <filesystem>
#include <span>
#include <vector>

#include "rangenoise/geometry.hpp"
#include "rangenoise/noise_model.hpp"
#include "rangenoise/range_image.hpp"

namespace rangenoise {

/// Signed orthogonal distances of pooled edge pixels from the jointly
/// fitted boundary line, plus the Kolmogorov-Smirnov D of the residuals
/// against a normal fitted to them. The fitted line passes through the
/// centroid, so the residual mean vanishes.
struct EdgeResidualSet {
  std::vector<double> residuals;
  Line2D line;
  double ks_statistic = 0.0;
};

/// Per-scanline outermost foreground pixel on the requested side.
///
/// The board is segmented from the background by a depth gap larger than
/// gap_mm when the image is fully valid, by validity otherwise. Throws
/// EstimationError("no board detected") when no foreground is found.
std::vector<Eigen::Vector2i> extract_edge_pixels(const RangeImage& img,
                                                 EdgeSide side,
                                                 double gap_mm = 50.0);

/// Total-least-squares line through >= 2 points: passes through the
/// centroid with the minor principal axis of the covariance as direction.
/// Throws EstimationError when the covariance is isotropic (direction
/// undefined) and std::invalid_argument on fewer than 2 distinct points.
Line2D fit_line_odr(std::span<const Eigen::Vector2d> points);

/// One-sample Kolmogorov-Smirnov statistic of the samples against a
/// normal with mean and standard deviation fitted from the same samples.
/// Because the reference parameters are fitted, the plain asymptotic
/// threshold 1.36/sqrt(n) is conservative (Lilliefors situation); D is
/// reported as-is. Requires >= 5 samples; throws EstimationError on zero
/// variance.
double ks_normality(std::span<const double> samples);

/// Critical value of the plain one-sample KS test at alpha = 0.05.
double ks_threshold_5pct(std::size_t n);

/// Lateral noise from the scatter of board edge pixels around the jointly
/// fitted ODR line, pooled over all frames.
///
/// sigma is the sample standard deviation of the orthogonal residuals
/// with the uniform pixel-quantization variance 1/12 removed
/// (sigma^2 = max(0, s^2 - 1/12)); edge coordinates are integers, so the
/// raw spread always carries that quantization floor. The returned
/// NoiseSample carries the scene's z and theta. Throws EstimationError
/// when fewer than 10 edge pixels are pooled.
std::pair<NoiseSample, EdgeResidualSet> estimate_lateral(
    std::span<const RangeImage> frames, const PlaneSceneSpec& spec,
    EdgeSide side, double gap_mm = 50.0);

/// Gaussian spatial blur with standard deviation cutoff_px, normalized
/// over valid pixels only; invalid pixels stay invalid. Affine depth
/// profiles away from boundaries are preserved exactly.
RangeImage lowpass_reference(const RangeImage& mean_img, double cutoff_px = 2.0);

/// Axial noise: sample standard deviation of per-pixel differences
/// between each frame and the low-passed temporal mean, excluding a 2-px
/// margin from the board boundary. Requires >= 2 frames and >= 100 pooled
/// residuals.
NoiseSample estimate_axial(std::span<const RangeImage> frames,
                           const PlaneSceneSpec& spec, double cutoff_px = 2.0);

/// estimate_axial variant that also hands back the pooled residuals (for
/// histograms and distribution checks).
struct AxialEstimate {
  NoiseSample sample;
  std::vector<double> residuals;
};
AxialEstimate estimate_axial_detailed(std::span<const RangeImage> frames,
                                      const PlaneSceneSpec& spec,
                                      double cutoff_px = 2.0);

/// Histogram with Freedman-Diaconis bin width (fallback to a single bin
/// when the IQR vanishes).
struct Histogram {
  std::vector<double> bin_center;
  std::vector<long> count;
};
Histogram freedman_diaconis_histogram(std::span<const double> values);

/// NoiseSample CSV: header `kind,z_mm,theta_deg,sigma,n`, one row per
/// sample, full double precision.
void write_samples_csv(std::span<const NoiseSample> samples,
                       const std::filesystem::path& path);
std::vector<NoiseSample> read_samples_csv(const std::filesystem::path& path);

void write_histogram_csv(const Histogram& hist,
                         const std::filesystem::path& path);

}  // namespace rangenoise
