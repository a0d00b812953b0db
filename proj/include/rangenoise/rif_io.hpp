#pragma once

#include <filesystem>

#include "rangenoise/range_image.hpp"

namespace rangenoise {

/// Reads a RIF (Range Image Format) file.
///
/// Layout, bit-exact:
///   line 1: magic `RIF1`
///   line 2: `<width> <height>` in decimal
///   zero or more `key=value` lines, keys from
///     {fx, fy, cx, cy, distance_mm, angle_deg, camera}
///   line `DATA`
///   width*height little-endian IEEE-754 32-bit floats, row-major,
///   top-left origin, NaN marking invalid pixels. Depths in mm.
///
/// Throws FormatError naming the offending line on malformed headers and
/// on payload size mismatch.
RangeImage read_range_image(const std::filesystem::path& path);

/// Writes a RIF file; reading it back yields a bit-identical image.
/// Invalid pixels are written as the canonical quiet NaN. Throws
/// rangenoise::Error on I/O failure.
void write_range_image(const RangeImage& img, const std::filesystem::path& path);

}  // namespace rangenoise
