#include "rangenoise/rif_io.hpp"

#include <bit>
#include <cassert>
#include <charconv>
#include <cinttypes>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>

#include "rangenoise/errors.hpp"

namespace rangenoise {
namespace {

static_assert(sizeof(float) == 4, "RIF payload requires 32-bit floats");

[[noreturn]] void fail(const std::filesystem::path& path, int line,
                       const std::string& msg) {
  throw FormatError(path.string() + ":" + std::to_string(line) + ": " + msg);
}

double parse_number(const std::filesystem::path& path, int line,
                    const std::string& text, const std::string& key) {
  try {
    std::size_t pos = 0;
    const double v = std::stod(text, &pos);
    if (pos != text.size()) throw std::invalid_argument("trailing characters");
    return v;
  } catch (const std::exception&) {
    fail(path, line, "invalid numeric value for key '" + key + "'");
  }
}

std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

// Reads a '\n'-terminated header line; the final header line before DATA
// must still end with '\n' so the payload offset is unambiguous.
bool read_line(std::istream& in, std::string& out) {
  out.clear();
  char c;
  while (in.get(c)) {
    if (c == '\n') return true;
    out.push_back(c);
  }
  return false;
}

}  // namespace

RangeImage read_range_image(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open '" + path.string() + "' for reading");

  std::string line;
  int line_no = 1;
  if (!read_line(in, line) || line != "RIF1")
    fail(path, 1, "bad magic, expected 'RIF1'");

  ++line_no;
  if (!read_line(in, line)) fail(path, line_no, "missing dimension line");
  int width = 0, height = 0;
  {
    std::istringstream dims(line);
    std::string extra;
    if (!(dims >> width >> height) || (dims >> extra))
      fail(path, line_no, "expected '<width> <height>'");
  }
  if (width < 1 || height < 1)
    fail(path, line_no, "dimensions must be >= 1");

  std::optional<double> fx, fy, cx, cy, distance, angle;
  std::string camera;
  bool saw_data = false;
  while (read_line(in, line)) {
    ++line_no;
    if (line == "DATA") {
      saw_data = true;
      break;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      fail(path, line_no, "expected 'key=value' or 'DATA'");
    const std::string key = line.substr(0, eq);
    const std::string value = line.substr(eq + 1);
    auto store = [&](std::optional<double>& slot) {
      if (slot) fail(path, line_no, "duplicate key '" + key + "'");
      slot = parse_number(path, line_no, value, key);
    };
    if (key == "fx") store(fx);
    else if (key == "fy") store(fy);
    else if (key == "cx") store(cx);
    else if (key == "cy") store(cy);
    else if (key == "distance_mm") store(distance);
    else if (key == "angle_deg") store(angle);
    else if (key == "camera") {
      if (!camera.empty()) fail(path, line_no, "duplicate key 'camera'");
      if (value.empty()) fail(path, line_no, "empty value for key 'camera'");
      camera = value;
    } else {
      fail(path, line_no, "unknown key '" + key + "'");
    }
  }
  if (!saw_data) fail(path, line_no, "missing DATA line");

  const std::size_t n = static_cast<std::size_t>(width) * height;
  std::vector<float> payload(n);
  in.read(reinterpret_cast<char*>(payload.data()),
          static_cast<std::streamsize>(n * sizeof(float)));
  const std::size_t got = static_cast<std::size_t>(in.gcount()) / sizeof(float);
  if (got != n || in.gcount() % 4 != 0)
    throw FormatError(path.string() + ": truncated payload, expected " +
                      std::to_string(n) + " floats, got " +
                      std::to_string(got));
  in.peek();
  if (!in.eof())
    throw FormatError(path.string() + ": trailing bytes after payload");

  if constexpr (std::endian::native == std::endian::big) {
    for (auto& v : payload) {
      auto bits = std::bit_cast<std::uint32_t>(v);
      bits = __builtin_bswap32(bits);
      v = std::bit_cast<float>(bits);
    }
  }

  RangeImage img(width, height, std::move(payload));
  const int present =
      fx.has_value() + fy.has_value() + cx.has_value() + cy.has_value();
  if (present != 0 && present != 4)
    throw FormatError(path.string() +
                      ": intrinsics require all of fx, fy, cx, cy");
  if (present == 4) {
    CameraIntrinsics k{*fx, *fy, *cx, *cy, width, height};
    k.validate();
    img.intrinsics = k;
  }
  img.distance_mm = distance;
  img.angle_deg = angle;
  img.camera = camera;
  return img;
}

void write_range_image(const RangeImage& img,
                       const std::filesystem::path& path) {
  if (img.width() < 1 || img.height() < 1)
    throw std::invalid_argument("write_range_image: dimensions must be >= 1");
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot open '" + path.string() + "' for writing");

  out << "RIF1\n" << img.width() << ' ' << img.height() << '\n';
  if (img.intrinsics) {
    out << "fx=" << format_double(img.intrinsics->fx) << '\n'
        << "fy=" << format_double(img.intrinsics->fy) << '\n'
        << "cx=" << format_double(img.intrinsics->cx) << '\n'
        << "cy=" << format_double(img.intrinsics->cy) << '\n';
  }
  if (img.distance_mm)
    out << "distance_mm=" << format_double(*img.distance_mm) << '\n';
  if (img.angle_deg)
    out << "angle_deg=" << format_double(*img.angle_deg) << '\n';
  if (!img.camera.empty()) out << "camera=" << img.camera << '\n';
  out << "DATA\n";

  const auto depths = img.depths();
  if constexpr (std::endian::native == std::endian::big) {
    for (float v : depths) {
      auto bits = __builtin_bswap32(std::bit_cast<std::uint32_t>(v));
      out.write(reinterpret_cast<const char*>(&bits), 4);
    }
  } else {
    out.write(reinterpret_cast<const char*>(depths.data()),
              static_cast<std::streamsize>(depths.size() * sizeof(float)));
  }
  out.flush();
  if (!out) throw Error("I/O error while writing '" + path.string() + "'");
}

}  // namespace rangenoise
