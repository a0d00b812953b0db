#pragma once

#include <filesystem>
#include <random>
#include <string>

#include "rangenoise/plane_scene.hpp"
#include "rangenoise/range_image.hpp"

namespace testutil {

inline rangenoise::CameraIntrinsics vga_intrinsics(double f = 580.0) {
  return {f, f, 320.0, 240.0, 640, 480};
}

inline rangenoise::CameraIntrinsics small_intrinsics(int w = 160, int h = 120,
                                                     double f = 160.0) {
  return {f, f, w / 2.0, h / 2.0, w, h};
}

inline rangenoise::SynthesisConfig frontal_board(
    double z = 1000.0, const rangenoise::CameraIntrinsics& k = vga_intrinsics()) {
  rangenoise::SynthesisConfig cfg;
  cfg.spec.distance_mm = z;
  cfg.spec.angle_deg = 0.0;
  cfg.intrinsics = k;
  return cfg;
}

/// Board rasterized per row from a continuous left-edge position: pixel u
/// belongs to the board iff u >= edge(v). Single quantization of a
/// sub-pixel edge, used as the independent lateral-noise injector.
template <typename EdgeFn>
rangenoise::RangeImage board_from_edge_fn(int width, int height, EdgeFn edge,
                                          float depth = 1000.0f) {
  rangenoise::RangeImage img(width, height);
  for (int v = 0; v < height; ++v) {
    const double e = edge(v);
    for (int u = 0; u < width; ++u)
      if (u >= e) img.set(u, v, depth);
  }
  return img;
}

inline std::filesystem::path temp_dir(const std::string& tag) {
  auto dir = std::filesystem::temp_directory_path() /
             ("rangenoise_test_" + tag + "_" + std::to_string(::getpid()));
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

}  // namespace testutil
