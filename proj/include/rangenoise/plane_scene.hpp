#pragma once

#include <optional>
#include <utility>
#include <vector>

#include "rangenoise/geometry.hpp"
#include "rangenoise/range_image.hpp"

namespace rangenoise {

/// Parameters for rendering an ideal (noise-free) planar-board scene.
struct SynthesisConfig {
  PlaneSceneSpec spec;
  CameraIntrinsics intrinsics;
  /// Depth of a constant background plane behind the board; nullopt makes
  /// the background invalid.
  std::optional<double> background_mm;

  void validate() const;
};

/// Renders the scene by intersecting each pixel's center ray with the
/// rotated bounded board. Depth is the z coordinate of the hit. A pixel
/// belongs to the board iff its center ray hits it (no anti-aliasing), so
/// noiseless boundaries stay crisp. Deterministic; parallel and serial
/// renders are bit-identical.
RangeImage synth_plane(const SynthesisConfig& cfg, int threads = 1);

/// Exact image-plane lines of the board's edges, obtained by projecting
/// the 3D edge segments. Edges whose projection misses the field of view
/// entirely are omitted.
std::vector<std::pair<EdgeSide, Line2D>> board_edge_ground_truth(
    const SynthesisConfig& cfg);

}  // namespace rangenoise
