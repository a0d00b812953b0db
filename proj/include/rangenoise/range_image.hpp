#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace rangenoise {

/// Pinhole camera parameters. Focal lengths and principal point in pixels.
struct CameraIntrinsics {
  double fx = 0.0;
  double fy = 0.0;
  double cx = 0.0;
  double cy = 0.0;
  int width = 0;
  int height = 0;

  /// Throws std::invalid_argument when fx/fy are not positive or the
  /// principal point lies outside the sensor.
  void validate() const;

  bool operator==(const CameraIntrinsics&) const = default;
};

/// Which way the planar target is rotated away from the frontal pose.
enum class RotationAxis { vertical, horizontal };

/// Ground-truth description of a planar board scene: the board center sits
/// on the optical axis at distance_mm, rotated by angle_deg about the axis
/// through its center.
struct PlaneSceneSpec {
  double distance_mm = 0.0;
  double angle_deg = 0.0;  ///< angle between plane normal and optical axis
  double board_width_mm = 400.0;
  double board_height_mm = 300.0;
  RotationAxis rotation_axis = RotationAxis::vertical;

  void validate() const;
};

/// Rectangular grid of depth values in mm along the optical axis.
///
/// Invalid pixels carry a quiet-NaN depth and a cleared validity flag; the
/// two are kept in sync at construction. Depth values of valid pixels are
/// finite and positive. Images are value types and safe to share across
/// threads once built.
class RangeImage {
 public:
  RangeImage() = default;

  /// All-invalid image of the given size.
  RangeImage(int width, int height);

  /// Builds an image from a row-major depth array; the validity mask is
  /// derived from NaN entries. Throws std::invalid_argument on size
  /// mismatch, nonpositive dimensions, or nonfinite/nonpositive depths.
  RangeImage(int width, int height, std::vector<float> depth);

  int width() const { return width_; }
  int height() const { return height_; }
  std::size_t pixel_count() const { return depth_.size(); }

  std::size_t index(int x, int y) const {
    return static_cast<std::size_t>(y) * width_ + x;
  }
  bool in_bounds(int x, int y) const {
    return x >= 0 && x < width_ && y >= 0 && y < height_;
  }

  bool is_valid(int x, int y) const { return valid_[index(x, y)] != 0; }
  bool is_valid(std::size_t i) const { return valid_[i] != 0; }
  float at(int x, int y) const { return depth_[index(x, y)]; }
  float at(std::size_t i) const { return depth_[i]; }

  void set(int x, int y, float depth_mm);
  void set_invalid(int x, int y);

  std::span<const float> depths() const { return depth_; }
  std::span<const std::uint8_t> validity() const { return valid_; }
  std::size_t valid_count() const;

  /// The quiet NaN written to invalid pixels (and to RIF payloads).
  static float invalid_sentinel();

  // Optional metadata carried through RIF headers.
  std::optional<CameraIntrinsics> intrinsics;
  std::optional<double> distance_mm;
  std::optional<double> angle_deg;
  std::string camera;

  /// Bit-exact comparison: dimensions, depth bit patterns, validity and
  /// metadata must all match.
  bool operator==(const RangeImage& other) const;

 private:
  int width_ = 0;
  int height_ = 0;
  std::vector<float> depth_;
  std::vector<std::uint8_t> valid_;
};

/// Per-pixel mean over frames where the pixel is valid. A pixel stays
/// valid when its valid fraction is at least min_valid_fraction.
/// Throws std::invalid_argument on an empty list or dimension mismatch.
RangeImage average_frames(std::span<const RangeImage> frames,
                          double min_valid_fraction = 0.5);

}  // namespace rangenoise
