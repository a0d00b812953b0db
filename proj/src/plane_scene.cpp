#include "rangenoise/plane_scene.hpp"

#include <Eigen/Geometry>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include "rangenoise/parallel.hpp"

namespace rangenoise {
namespace {

struct BoardFrame {
  Eigen::Matrix3d rotation;  // board frame -> camera frame
  Eigen::Vector3d center;    // board center in camera frame
  Eigen::Vector3d normal;    // unit plane normal (camera-facing, n.z < 0)
  double half_w;
  double half_h;
};

BoardFrame board_frame(const SynthesisConfig& cfg) {
  const double theta = cfg.spec.angle_deg * std::numbers::pi / 180.0;
  const Eigen::Vector3d axis = cfg.spec.rotation_axis == RotationAxis::vertical
                                   ? Eigen::Vector3d::UnitY()
                                   : Eigen::Vector3d::UnitX();
  BoardFrame f;
  f.rotation = Eigen::AngleAxisd(theta, axis).toRotationMatrix();
  f.center = {0.0, 0.0, cfg.spec.distance_mm};
  f.normal = f.rotation * Eigen::Vector3d(0.0, 0.0, -1.0);
  f.half_w = 0.5 * cfg.spec.board_width_mm;
  f.half_h = 0.5 * cfg.spec.board_height_mm;
  return f;
}

}  // namespace

void SynthesisConfig::validate() const {
  spec.validate();
  intrinsics.validate();
  if (background_mm && !(*background_mm > spec.distance_mm))
    throw std::invalid_argument(
        "synthesis: background depth must lie behind the board");
}

RangeImage synth_plane(const SynthesisConfig& cfg, int threads) {
  cfg.validate();
  const auto& K = cfg.intrinsics;
  const BoardFrame board = board_frame(cfg);
  RangeImage img(K.width, K.height);

  const double plane_d = board.normal.dot(board.center);
  parallel_for(0, K.height, threads, [&](int v) {
    for (int u = 0; u < K.width; ++u) {
      const Eigen::Vector3d dir((u - K.cx) / K.fx, (v - K.cy) / K.fy, 1.0);
      const double denom = board.normal.dot(dir);
      bool on_board = false;
      double depth = 0.0;
      if (std::abs(denom) > 1e-15) {
        const double t = plane_d / denom;  // dir.z == 1, so t is the depth
        if (t > 0.0) {
          const Eigen::Vector3d local =
              board.rotation.transpose() * (t * dir - board.center);
          if (std::abs(local.x()) <= board.half_w &&
              std::abs(local.y()) <= board.half_h) {
            on_board = true;
            depth = t;
          }
        }
      }
      if (on_board)
        img.set(u, v, static_cast<float>(depth));
      else if (cfg.background_mm)
        img.set(u, v, static_cast<float>(*cfg.background_mm));
    }
  });

  img.intrinsics = K;
  img.distance_mm = cfg.spec.distance_mm;
  img.angle_deg = cfg.spec.angle_deg;
  return img;
}

std::vector<std::pair<EdgeSide, Line2D>> board_edge_ground_truth(
    const SynthesisConfig& cfg) {
  cfg.validate();
  const auto& K = cfg.intrinsics;
  const BoardFrame board = board_frame(cfg);

  auto corner = [&](double sx, double sy) -> Eigen::Vector3d {
    return board.center +
           board.rotation *
               Eigen::Vector3d(sx * board.half_w, sy * board.half_h, 0.0);
  };
  const Eigen::Vector3d tl = corner(-1, -1), tr = corner(1, -1),
                        bl = corner(-1, 1), br = corner(1, 1);

  auto project = [&](const Eigen::Vector3d& p) {
    return Eigen::Vector2d(K.fx * p.x() / p.z() + K.cx,
                           K.fy * p.y() / p.z() + K.cy);
  };

  // Clip the projected segment against the pixel-center rectangle; an edge
  // with no part inside the field of view is omitted.
  auto visible = [&](Eigen::Vector2d a, Eigen::Vector2d b) {
    double t0 = 0.0, t1 = 1.0;
    const Eigen::Vector2d d = b - a;
    const double lo[2] = {-0.5, -0.5};
    const double hi[2] = {K.width - 0.5, K.height - 0.5};
    for (int i = 0; i < 2; ++i) {
      if (std::abs(d[i]) < 1e-12) {
        if (a[i] < lo[i] || a[i] > hi[i]) return false;
        continue;
      }
      double ta = (lo[i] - a[i]) / d[i];
      double tb = (hi[i] - a[i]) / d[i];
      if (ta > tb) std::swap(ta, tb);
      t0 = std::max(t0, ta);
      t1 = std::min(t1, tb);
      if (t0 > t1) return false;
    }
    return true;
  };

  auto line_through = [](const Eigen::Vector2d& a, const Eigen::Vector2d& b) {
    const Eigen::Vector2d d = (b - a).normalized();
    Line2D line;
    line.normal = {-d.y(), d.x()};
    line.offset = line.normal.dot(a);
    return line;
  };

  std::vector<std::pair<EdgeSide, Line2D>> edges;
  const std::pair<EdgeSide, std::pair<Eigen::Vector3d, Eigen::Vector3d>>
      segments[4] = {{EdgeSide::left, {tl, bl}},
                     {EdgeSide::right, {tr, br}},
                     {EdgeSide::top, {tl, tr}},
                     {EdgeSide::bottom, {bl, br}}};
  for (const auto& [side, seg] : segments) {
    if (seg.first.z() <= 0.0 || seg.second.z() <= 0.0) continue;
    const Eigen::Vector2d a = project(seg.first), b = project(seg.second);
    if ((b - a).norm() < 1e-12) continue;
    if (!visible(a, b)) continue;
    edges.emplace_back(side, line_through(a, b));
  }
  return edges;
}

}  // namespace rangenoise
