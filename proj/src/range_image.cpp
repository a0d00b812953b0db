#include "rangenoise/range_image.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <limits>
#include <stdexcept>

namespace rangenoise {

void CameraIntrinsics::validate() const {
  if (width < 1 || height < 1)
    throw std::invalid_argument("intrinsics: sensor dimensions must be >= 1");
  if (!(fx > 0.0) || !(fy > 0.0))
    throw std::invalid_argument("intrinsics: focal lengths must be positive");
  if (!(cx >= 0.0 && cx < width) || !(cy >= 0.0 && cy < height))
    throw std::invalid_argument(
        "intrinsics: principal point must lie inside the sensor");
}

void PlaneSceneSpec::validate() const {
  if (!(distance_mm > 0.0))
    throw std::invalid_argument("plane scene: distance_mm must be positive");
  if (!(angle_deg >= 0.0 && angle_deg < 90.0))
    throw std::invalid_argument("plane scene: angle_deg must be in [0, 90)");
  if (!(board_width_mm > 0.0) || !(board_height_mm > 0.0))
    throw std::invalid_argument("plane scene: board extent must be positive");
}

float RangeImage::invalid_sentinel() {
  return std::bit_cast<float>(std::uint32_t{0x7fc00000});  // canonical qNaN
}

RangeImage::RangeImage(int width, int height) : width_(width), height_(height) {
  if (width < 1 || height < 1)
    throw std::invalid_argument("range image: dimensions must be >= 1");
  depth_.assign(static_cast<std::size_t>(width) * height, invalid_sentinel());
  valid_.assign(depth_.size(), 0);
}

RangeImage::RangeImage(int width, int height, std::vector<float> depth)
    : width_(width), height_(height), depth_(std::move(depth)) {
  if (width < 1 || height < 1)
    throw std::invalid_argument("range image: dimensions must be >= 1");
  if (depth_.size() != static_cast<std::size_t>(width) * height)
    throw std::invalid_argument(
        "range image: depth array length does not match width*height");
  valid_.assign(depth_.size(), 0);
  for (std::size_t i = 0; i < depth_.size(); ++i) {
    if (std::isnan(depth_[i])) {
      depth_[i] = invalid_sentinel();
    } else if (std::isfinite(depth_[i]) && depth_[i] > 0.0f) {
      valid_[i] = 1;
    } else {
      throw std::invalid_argument(
          "range image: valid depths must be finite and positive");
    }
  }
}

void RangeImage::set(int x, int y, float depth_mm) {
  if (!(std::isfinite(depth_mm) && depth_mm > 0.0f))
    throw std::invalid_argument(
        "range image: valid depths must be finite and positive");
  const std::size_t i = index(x, y);
  depth_[i] = depth_mm;
  valid_[i] = 1;
}

void RangeImage::set_invalid(int x, int y) {
  const std::size_t i = index(x, y);
  depth_[i] = invalid_sentinel();
  valid_[i] = 0;
}

std::size_t RangeImage::valid_count() const {
  std::size_t n = 0;
  for (auto v : valid_) n += v;
  return n;
}

bool RangeImage::operator==(const RangeImage& other) const {
  if (width_ != other.width_ || height_ != other.height_) return false;
  if (valid_ != other.valid_) return false;
  if (depth_.size() != other.depth_.size()) return false;
  if (!depth_.empty() &&
      std::memcmp(depth_.data(), other.depth_.data(),
                  depth_.size() * sizeof(float)) != 0)
    return false;
  return intrinsics == other.intrinsics && distance_mm == other.distance_mm &&
         angle_deg == other.angle_deg && camera == other.camera;
}

RangeImage average_frames(std::span<const RangeImage> frames,
                          double min_valid_fraction) {
  if (frames.empty())
    throw std::invalid_argument("average_frames: need at least one frame");
  if (!(min_valid_fraction >= 0.0 && min_valid_fraction <= 1.0))
    throw std::invalid_argument(
        "average_frames: min_valid_fraction must be in [0, 1]");
  const int w = frames[0].width();
  const int h = frames[0].height();
  for (const auto& f : frames)
    if (f.width() != w || f.height() != h)
      throw std::invalid_argument("average_frames: frame dimensions differ");

  RangeImage out(w, h);
  const std::size_t n = frames[0].pixel_count();
  std::vector<double> sum(n, 0.0);
  std::vector<std::uint32_t> count(n, 0);
  for (const auto& f : frames) {
    for (std::size_t i = 0; i < n; ++i) {
      if (f.is_valid(i)) {
        sum[i] += f.at(i);
        ++count[i];
      }
    }
  }
  const double needed = min_valid_fraction * static_cast<double>(frames.size());
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const std::size_t i = out.index(x, y);
      if (count[i] > 0 && static_cast<double>(count[i]) >= needed)
        out.set(x, y, static_cast<float>(sum[i] / count[i]));
    }
  }
  out.intrinsics = frames[0].intrinsics;
  out.distance_mm = frames[0].distance_mm;
  out.angle_deg = frames[0].angle_deg;
  out.camera = frames[0].camera;
  return out;
}

}  // namespace rangenoise
