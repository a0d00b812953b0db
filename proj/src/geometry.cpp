#include "rangenoise/geometry.hpp"

#include <Eigen/Geometry>
#include <algorithm>

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace rangenoise {

const char* to_string(EdgeSide side) {
  switch (side) {
    case EdgeSide::left: return "left";
    case EdgeSide::right: return "right";
    case EdgeSide::top: return "top";
    case EdgeSide::bottom: return "bottom";
  }
  return "?";
}

EdgeSide edge_side_from_string(const std::string& name) {
  if (name == "left") return EdgeSide::left;
  if (name == "right") return EdgeSide::right;
  if (name == "top") return EdgeSide::top;
  if (name == "bottom") return EdgeSide::bottom;
  throw std::invalid_argument("unknown edge side '" + name +
                              "' (expected left|right|top|bottom)");
}

std::vector<Eigen::Vector3d> to_point_cloud(const RangeImage& img,
                                            const CameraIntrinsics& K) {
  K.validate();
  if (img.width() != K.width || img.height() != K.height)
    throw std::invalid_argument(
        "to_point_cloud: image dimensions do not match intrinsics");
  std::vector<Eigen::Vector3d> cloud;
  cloud.reserve(img.valid_count());
  for (int v = 0; v < img.height(); ++v) {
    for (int u = 0; u < img.width(); ++u) {
      if (!img.is_valid(u, v)) continue;
      const double z = img.at(u, v);
      cloud.emplace_back((u - K.cx) * z / K.fx, (v - K.cy) * z / K.fy, z);
    }
  }
  return cloud;
}

namespace {

inline Eigen::Vector3d back_project(const RangeImage& img,
                                    const CameraIntrinsics& K, int u, int v) {
  const double z = img.at(u, v);
  return {(u - K.cx) * z / K.fx, (v - K.cy) * z / K.fy, z};
}

}  // namespace

NormalField compute_normals(const RangeImage& img, const CameraIntrinsics& K) {
  K.validate();
  if (img.width() != K.width || img.height() != K.height)
    throw std::invalid_argument(
        "compute_normals: image dimensions do not match intrinsics");
  NormalField field;
  field.width = img.width();
  field.height = img.height();
  field.normal.assign(img.pixel_count(), Eigen::Vector3d::Zero());
  field.valid.assign(img.pixel_count(), 0);

  for (int v = 1; v < img.height() - 1; ++v) {
    for (int u = 1; u < img.width() - 1; ++u) {
      if (!img.is_valid(u, v) || !img.is_valid(u - 1, v) ||
          !img.is_valid(u + 1, v) || !img.is_valid(u, v - 1) ||
          !img.is_valid(u, v + 1))
        continue;
      const Eigen::Vector3d du =
          back_project(img, K, u + 1, v) - back_project(img, K, u - 1, v);
      const Eigen::Vector3d dv =
          back_project(img, K, u, v + 1) - back_project(img, K, u, v - 1);
      Eigen::Vector3d n = du.cross(dv);
      const double len = n.norm();
      if (!(len > 0.0)) continue;
      n /= len;
      if (n.z() > 0.0) n = -n;
      const std::size_t i = field.index(u, v);
      field.normal[i] = n;
      field.valid[i] = 1;
    }
  }
  return field;
}

double surface_angle_deg(const Eigen::Vector3d& normal) {
  const double len = normal.norm();
  if (std::abs(len - 1.0) > 1e-6)
    throw std::invalid_argument("surface_angle_deg: normal must be unit length");
  const double toward_camera = std::clamp(-normal.z(), 0.0, 1.0);
  return std::acos(toward_camera) * 180.0 / std::numbers::pi;
}

double px_to_mm(double sigma_px, double z_mm, double focal_px) {
  if (!(z_mm > 0.0) || !(focal_px > 0.0))
    throw std::invalid_argument("px_to_mm: z and focal length must be positive");
  return sigma_px * z_mm / focal_px;
}

double mm_to_px(double sigma_mm, double z_mm, double focal_px) {
  if (!(z_mm > 0.0) || !(focal_px > 0.0))
    throw std::invalid_argument("mm_to_px: z and focal length must be positive");
  return sigma_mm * focal_px / z_mm;
}

}  // namespace rangenoise
