#pragma once

#include <Eigen/Core>
#include <vector>

#include "rangenoise/range_image.hpp"

namespace rangenoise {

/// A 2D line in pixel coordinates in Hessian form: normal . p = offset,
/// with |normal| = 1.
struct Line2D {
  Eigen::Vector2d normal{0.0, 0.0};
  double offset = 0.0;

  double signed_distance(const Eigen::Vector2d& p) const {
    return normal.dot(p) - offset;
  }
};

/// Image side an edge is extracted from (scanlines are rows for
/// left/right, columns for top/bottom).
enum class EdgeSide { left, right, top, bottom };

const char* to_string(EdgeSide side);
EdgeSide edge_side_from_string(const std::string& name);

/// Pinhole back-projection of all valid pixels; z equals the stored depth.
std::vector<Eigen::Vector3d> to_point_cloud(const RangeImage& img,
                                            const CameraIntrinsics& K);

/// Per-pixel unit normals, oriented toward the camera (z component < 0).
struct NormalField {
  int width = 0;
  int height = 0;
  std::vector<Eigen::Vector3d> normal;
  std::vector<std::uint8_t> valid;

  std::size_t index(int x, int y) const {
    return static_cast<std::size_t>(y) * width + x;
  }
  bool is_valid(int x, int y) const { return valid[index(x, y)] != 0; }
};

/// Normals from central differences of back-projected 3D points. Pixels
/// without a fully valid 4-neighborhood get an invalid normal.
NormalField compute_normals(const RangeImage& img, const CameraIntrinsics& K);

/// Angle in degrees between a camera-facing unit normal and the optical
/// axis, in [0, 90]. Throws std::invalid_argument when |n| deviates from 1
/// by more than 1e-6.
double surface_angle_deg(const Eigen::Vector3d& normal);

/// Converts a lateral standard deviation between pixel and metric units at
/// depth z (similar triangles). Inverses of one another to within
/// round-off.
double px_to_mm(double sigma_px, double z_mm, double focal_px);
double mm_to_px(double sigma_mm, double z_mm, double focal_px);

}  // namespace rangenoise
