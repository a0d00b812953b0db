#include "rangenoise/emulation.hpp"

#include <algorithm>
#include <bit>
#include <limits>
#include <climits>
#include <cmath>
#include <cstdio>
#include <numbers>

#include "rangenoise/errors.hpp"
#include "rangenoise/geometry.hpp"
#include "rangenoise/parallel.hpp"
#include "rangenoise/rif_io.hpp"
#include "rangenoise/rng.hpp"

namespace rangenoise {
namespace {

// Stream tags for counter-based draws; part of the output contract.
constexpr std::uint64_t kLateralUStream = 1;  // horizontal shift, per row
constexpr std::uint64_t kLateralVStream = 2;  // vertical shift, per row
constexpr std::uint64_t kAxialStream = 3;     // per pixel

double normal_cdf(double x) {
  return 0.5 * std::erfc(-x / std::numbers::sqrt2);
}

double normal_pdf(double x) {
  return std::exp(-0.5 * x * x) / std::sqrt(2.0 * std::numbers::pi);
}

}  // namespace

const char* to_string(AngleMode mode) {
  return mode == AngleMode::per_pixel_normals ? "normals" : "distance";
}

AngleMode angle_mode_from_string(const std::string& name) {
  if (name == "normals") return AngleMode::per_pixel_normals;
  if (name == "distance") return AngleMode::distance_only;
  throw std::invalid_argument("unknown angle mode '" + name +
                              "' (expected normals|distance)");
}

void EmulationConfig::validate() const {
  if (axial_model.kind != NoiseKind::axial)
    throw std::invalid_argument(
        "emulation: axial_model slot holds a non-axial model");
  if (lateral_model.kind != NoiseKind::lateral)
    throw std::invalid_argument(
        "emulation: lateral_model slot holds a non-lateral model");
  if (!(m_n >= 0.0))
    throw std::invalid_argument("emulation: m_n must be nonnegative");
  if (threads < 1)
    throw std::invalid_argument("emulation: threads must be >= 1");
  if (focal_px && !(*focal_px > 0.0))
    throw std::invalid_argument("emulation: focal_px must be positive");
}

double quantized_jitter_variance(double scale) {
  if (!(scale > 0.0)) return 0.0;
  double var = 0.0;
  for (int k = 1; (k - 0.5) / scale < 9.0; ++k) {
    const double p =
        normal_cdf((k + 0.5) / scale) - normal_cdf((k - 0.5) / scale);
    var += 2.0 * k * k * p;
  }
  return var;
}

double lateral_jitter_scale(double sigma_px) {
  if (!(sigma_px > 0.0)) return 0.0;
  const double target = sigma_px * sigma_px;

  // Safeguarded Newton on V(s) - target with a shrinking bracket. V is
  // strictly increasing and V(s) ~ s^2 + 1/12 for s >~ 0.7.
  double lo = 0.0;
  double hi = sigma_px + 2.0;
  double s = std::sqrt(std::max(target - 1.0 / 12.0, 0.25 * target));
  for (int iter = 0; iter < 80; ++iter) {
    const double v = quantized_jitter_variance(s);
    if (std::abs(v - target) <= 1e-12 * std::max(1.0, target)) break;
    if (v < target)
      lo = s;
    else
      hi = s;
    double dv = 0.0;
    for (int k = 1; (k - 0.5) / s < 9.0; ++k) {
      const double a = (k - 0.5) / s;
      const double b = (k + 0.5) / s;
      dv += (2.0 * k * k / s) * (a * normal_pdf(a) - b * normal_pdf(b));
    }
    double next = dv > 0.0 ? s - (v - target) / dv : 0.5 * (lo + hi);
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    s = next;
  }
  return s;
}

namespace {

// Per-pixel scalar field with a validity flag.
struct ScalarField {
  std::vector<double> value;
  std::vector<std::uint8_t> known;
};

// Fills unknown entries of each row with the nearest known value in that
// row (ties prefer the left neighbor). Rows with no known value keep the
// fallback.
void fill_nearest_in_row(ScalarField& field, int width, int height,
                         double fallback) {
  std::vector<int> left(width), right(width);
  for (int y = 0; y < height; ++y) {
    const std::size_t row = static_cast<std::size_t>(y) * width;
    int last = -1;
    for (int x = 0; x < width; ++x) {
      if (field.known[row + x]) last = x;
      left[x] = last;
    }
    last = -1;
    for (int x = width - 1; x >= 0; --x) {
      if (field.known[row + x]) last = x;
      right[x] = last;
    }
    for (int x = 0; x < width; ++x) {
      if (field.known[row + x]) continue;
      const int dl = left[x] >= 0 ? x - left[x] : INT_MAX;
      const int dr = right[x] >= 0 ? right[x] - x : INT_MAX;
      if (dl == INT_MAX && dr == INT_MAX)
        field.value[row + x] = fallback;
      else
        field.value[row + x] =
            dl <= dr ? field.value[row + left[x]] : field.value[row + right[x]];
    }
  }
}

ScalarField depth_field(const RangeImage& img) {
  ScalarField f;
  f.value.assign(img.pixel_count(), 0.0);
  f.known.assign(img.pixel_count(), 0);
  for (std::size_t i = 0; i < img.pixel_count(); ++i) {
    if (img.is_valid(i)) {
      f.value[i] = img.at(i);
      f.known[i] = 1;
    }
  }
  fill_nearest_in_row(f, img.width(), img.height(), 0.0);
  return f;
}

ScalarField theta_field(const RangeImage& img, const EmulationConfig& cfg) {
  ScalarField f;
  f.value.assign(img.pixel_count(), 0.0);
  f.known.assign(img.pixel_count(), 0);
  if (cfg.angle_mode == AngleMode::distance_only) return f;

  if (!img.intrinsics)
    throw std::invalid_argument(
        "emulation: per-pixel-normals mode requires intrinsics metadata");
  const NormalField normals = compute_normals(img, *img.intrinsics);
  for (std::size_t i = 0; i < img.pixel_count(); ++i) {
    if (normals.valid[i]) {
      // Grazing normals would fall on the closed edge of the model domain;
      // keep them just inside.
      f.value[i] = std::min(surface_angle_deg(normals.normal[i]), 89.9999);
      f.known[i] = 1;
    }
  }
  fill_nearest_in_row(f, img.width(), img.height(), 0.0);
  return f;
}

double model_sigma_px(const NoiseModel& lateral, double z, double theta,
                      double focal_px) {
  const double sigma = lateral.evaluate(z, theta).sigma;
  return lateral.unit == SigmaUnit::mm ? mm_to_px(sigma, z, focal_px) : sigma;
}

double model_sigma_mm(const NoiseModel& axial, double z, double theta,
                      double focal_px) {
  const double sigma = axial.evaluate(z, theta).sigma;
  return axial.unit == SigmaUnit::px ? px_to_mm(sigma, z, focal_px) : sigma;
}

// Maps per-pixel target sigma to the compensated draw scale through a
// dense interpolation table; one exact inversion per table knot.
class JitterScaleMap {
 public:
  JitterScaleMap(double sigma_min, double sigma_max) {
    lo_ = std::max(0.0, sigma_min);
    hi_ = std::max(sigma_max, lo_);
    if (hi_ - lo_ < 1e-9) {
      single_ = lateral_jitter_scale(0.5 * (lo_ + hi_));
      return;
    }
    table_.resize(kKnots);
    for (int i = 0; i < kKnots; ++i)
      table_[i] =
          lateral_jitter_scale(lo_ + (hi_ - lo_) * i / double(kKnots - 1));
  }

  double operator()(double sigma) const {
    if (!(sigma > 0.0)) return 0.0;
    if (table_.empty()) return single_;
    const double t =
        std::clamp((sigma - lo_) / (hi_ - lo_), 0.0, 1.0) * (kKnots - 1);
    const int i = std::min(static_cast<int>(t), kKnots - 2);
    const double frac = t - i;
    return table_[i] * (1.0 - frac) + table_[i + 1] * frac;
  }

 private:
  static constexpr int kKnots = 257;
  double lo_ = 0.0, hi_ = 0.0;
  double single_ = 0.0;
  std::vector<double> table_;
};

double resolve_focal(const RangeImage& img, const EmulationConfig& cfg,
                     bool required) {
  if (cfg.focal_px) return *cfg.focal_px;
  if (img.intrinsics) return img.intrinsics->fx;
  if (required)
    throw std::invalid_argument(
        "emulation: model unit conversion needs a focal length (none in "
        "config or image metadata)");
  return 1.0;
}

}  // namespace

RangeImage emulate_noise(const RangeImage& img, const EmulationConfig& cfg) {
  cfg.validate();
  const int w = img.width();
  const int h = img.height();
  const double focal = resolve_focal(
      img, cfg,
      cfg.lateral_model.unit == SigmaUnit::mm ||
          cfg.axial_model.unit == SigmaUnit::px);

  // ---- stage 1: lateral resampling -------------------------------------
  const ScalarField z_in = depth_field(img);
  const ScalarField theta_in = theta_field(img, cfg);

  std::vector<double> sigma_lat(img.pixel_count(), 0.0);
  double sig_min = std::numeric_limits<double>::infinity();
  double sig_max = 0.0;
  for (std::size_t i = 0; i < img.pixel_count(); ++i) {
    const double z = z_in.value[i];
    if (!(z > 0.0)) continue;  // no depth anywhere in this row
    const double s =
        cfg.m_n * model_sigma_px(cfg.lateral_model, z, theta_in.value[i], focal);
    sigma_lat[i] = s;
    sig_min = std::min(sig_min, s);
    sig_max = std::max(sig_max, s);
  }
  if (!(sig_min <= sig_max)) sig_min = sig_max = 0.0;
  const JitterScaleMap scale_map(sig_min, sig_max);

  // Each scanline resamples at one jittered 2D offset (scaled by the local
  // sigma): edges then shift coherently at the scanline scale, which is
  // what per-scanline edge statistics measure on real devices. Per-pixel
  // independent offsets would instead turn the outermost-pixel edge
  // statistic into an extreme-value measurement and decalibrate it.
  std::vector<double> draw_u(h), draw_v(h);
  for (int y = 0; y < h; ++y) {
    draw_u[y] = rng::standard_normal(cfg.seed, kLateralUStream, y);
    draw_v[y] = rng::standard_normal(cfg.seed, kLateralVStream, y);
  }

  RangeImage lateral(w, h);
  parallel_for(0, h, cfg.threads, [&](int y) {
    for (int x = 0; x < w; ++x) {
      const double scale = scale_map(sigma_lat[lateral.index(x, y)]);
      const long sx = std::lround(x + scale * draw_u[y]);
      const long sy = std::lround(y + scale * draw_v[y]);
      if (sx < 0 || sx >= w || sy < 0 || sy >= h) continue;
      if (!img.is_valid(static_cast<int>(sx), static_cast<int>(sy))) continue;
      lateral.set(x, y, img.at(static_cast<int>(sx), static_cast<int>(sy)));
    }
  });
  lateral.intrinsics = img.intrinsics;
  lateral.distance_mm = img.distance_mm;
  lateral.angle_deg = img.angle_deg;
  lateral.camera = img.camera;

  // ---- stage 2: axial perturbation --------------------------------------
  const std::vector<double> field = axial_noise_field(lateral, cfg);
  RangeImage out(w, h);
  parallel_for(0, h, cfg.threads, [&](int y) {
    for (int x = 0; x < w; ++x) {
      const std::size_t i = out.index(x, y);
      if (!lateral.is_valid(i)) continue;
      const double depth = static_cast<double>(lateral.at(i)) + field[i];
      if (depth > 0.0 && std::isfinite(depth))
        out.set(x, y, static_cast<float>(depth));
    }
  });
  out.intrinsics = img.intrinsics;
  out.distance_mm = img.distance_mm;
  out.angle_deg = img.angle_deg;
  out.camera = img.camera;
  return out;
}

std::vector<double> axial_noise_field(const RangeImage& img,
                                      const EmulationConfig& cfg) {
  cfg.validate();
  const double focal =
      resolve_focal(img, cfg, cfg.axial_model.unit == SigmaUnit::px);
  const ScalarField theta = theta_field(img, cfg);

  std::vector<double> field(img.pixel_count(), 0.0);
  parallel_for(0, img.height(), cfg.threads, [&](int y) {
    for (int x = 0; x < img.width(); ++x) {
      const std::size_t i = img.index(x, y);
      if (!img.is_valid(i)) continue;
      const double sigma =
          model_sigma_mm(cfg.axial_model, img.at(i), theta.value[i], focal);
      const double draw = rng::standard_normal(cfg.seed, kAxialStream, i);
      // m_n * (sigma * draw): the field at m_n = k is exactly k times the
      // field at m_n = 1 for the same seed.
      field[i] = cfg.m_n * (sigma * draw);
    }
  });
  return field;
}

std::string sweep_dir_name(double m) {
  char buf[48];
  std::snprintf(buf, sizeof(buf), "mn_%.6g", m);
  return buf;
}

SweepResult sweep_mn(std::span<const std::filesystem::path> inputs,
                     const EmulationConfig& cfg,
                     std::span<const double> m_values,
                     const std::filesystem::path& out_dir) {
  cfg.validate();
  if (m_values.empty())
    throw std::invalid_argument("sweep: m_values must be nonempty");
  for (double m : m_values)
    if (!(m >= 0.0))
      throw std::invalid_argument("sweep: every multiplier must be >= 0");
  if (inputs.empty())
    throw std::invalid_argument("sweep: no input images");

  std::filesystem::create_directories(out_dir);
  for (double m : m_values)
    std::filesystem::create_directories(out_dir / sweep_dir_name(m));

  const std::size_t total = inputs.size();
  std::vector<std::vector<std::filesystem::path>> written(total);
  std::vector<std::vector<std::string>> failures(total);

  parallel_for(0, static_cast<int>(total), cfg.threads, [&](int idx) {
    const auto& in_path = inputs[idx];
    RangeImage img;
    try {
      img = read_range_image(in_path);
    } catch (const std::exception& e) {
      failures[idx].emplace_back(in_path.string() + ": " + e.what());
      return;
    }
    for (double m : m_values) {
      EmulationConfig local = cfg;
      local.m_n = m;
      local.seed = rng::derive(cfg.seed, static_cast<std::uint64_t>(idx),
                               std::bit_cast<std::uint64_t>(m));
      local.threads = 1;  // parallelism lives at the image level here
      const auto dest = out_dir / sweep_dir_name(m) / in_path.filename();
      try {
        write_range_image(emulate_noise(img, local), dest);
        written[idx].push_back(dest);
      } catch (const std::exception& e) {
        failures[idx].emplace_back(dest.string() + ": " + e.what());
      }
    }
  });

  SweepResult result;
  for (std::size_t i = 0; i < total; ++i) {
    result.written.insert(result.written.end(), written[i].begin(),
                          written[i].end());
    result.failures.insert(result.failures.end(), failures[i].begin(),
                           failures[i].end());
  }
  return result;
}

}  // namespace rangenoise
