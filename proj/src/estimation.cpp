#include "rangenoise/estimation.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <numbers>
#include <sstream>

#include "rangenoise/errors.hpp"

namespace rangenoise {
namespace {

// Foreground = board pixels. When the valid depths split across a gap
// larger than gap_mm, the near side is the board; otherwise every valid
// pixel is (validity-segmented background).
std::vector<std::uint8_t> foreground_mask(const RangeImage& img,
                                          double gap_mm) {
  const std::size_t n = img.pixel_count();
  std::vector<float> depths;
  depths.reserve(n);
  for (std::size_t i = 0; i < n; ++i)
    if (img.is_valid(i)) depths.push_back(img.at(i));
  if (depths.empty()) throw EstimationError("no board detected");

  std::sort(depths.begin(), depths.end());
  double best_gap = 0.0;
  double split = 0.0;
  for (std::size_t i = 1; i < depths.size(); ++i) {
    const double gap = static_cast<double>(depths[i]) - depths[i - 1];
    if (gap > best_gap) {
      best_gap = gap;
      split = 0.5 * (static_cast<double>(depths[i]) + depths[i - 1]);
    }
  }

  std::vector<std::uint8_t> fg(n, 0);
  const bool use_gap = best_gap > gap_mm;
  bool all_valid = depths.size() == n;
  if (!use_gap && all_valid)
    throw EstimationError("no board detected");
  for (std::size_t i = 0; i < n; ++i)
    fg[i] = img.is_valid(i) && (!use_gap || img.at(i) < split) ? 1 : 0;
  return fg;
}

double sample_std(std::span<const double> values, double mean) {
  double ss = 0.0;
  for (double v : values) ss += (v - mean) * (v - mean);
  return std::sqrt(ss / (static_cast<double>(values.size()) - 1.0));
}

}  // namespace

std::vector<Eigen::Vector2i> extract_edge_pixels(const RangeImage& img,
                                                 EdgeSide side,
                                                 double gap_mm) {
  const auto fg = foreground_mask(img, gap_mm);
  const int w = img.width();
  const int h = img.height();
  auto at = [&](int x, int y) {
    return fg[static_cast<std::size_t>(y) * w + x] != 0;
  };

  // Per scanline, the board is the longest contiguous foreground run; the
  // edge pixel is that run's outer end. Scanlines whose longest run falls
  // below half the median run length do not cross the board (isolated
  // noise pixels past the top/bottom corners would otherwise pollute the
  // edge statistics) and contribute nothing.
  const bool row_scan = side == EdgeSide::left || side == EdgeSide::right;
  const int scan_count = row_scan ? h : w;
  const int scan_len = row_scan ? w : h;

  struct Run {
    int begin = 0, end = 0;  // [begin, end), 0-length when absent
    int length() const { return end - begin; }
  };
  std::vector<Run> runs(scan_count);
  for (int s = 0; s < scan_count; ++s) {
    Run best, current;
    bool open = false;
    for (int t = 0; t < scan_len; ++t) {
      const bool on = row_scan ? at(t, s) : at(s, t);
      if (on) {
        if (!open) {
          current.begin = t;
          open = true;
        }
        current.end = t + 1;
        if (current.length() > best.length()) best = current;
      } else {
        open = false;
      }
    }
    runs[s] = best;
  }

  std::vector<int> lengths;
  for (const auto& r : runs)
    if (r.length() > 0) lengths.push_back(r.length());
  if (lengths.empty()) throw EstimationError("no board detected");
  std::nth_element(lengths.begin(), lengths.begin() + lengths.size() / 2,
                   lengths.end());
  const int min_len =
      std::max(1, (lengths[lengths.size() / 2] + 1) / 2);

  std::vector<Eigen::Vector2i> edges;
  for (int s = 0; s < scan_count; ++s) {
    const Run& r = runs[s];
    if (r.length() < min_len) continue;
    const int outer = (side == EdgeSide::left || side == EdgeSide::top)
                          ? r.begin
                          : r.end - 1;
    edges.emplace_back(row_scan ? outer : s, row_scan ? s : outer);
  }
  return edges;
}

Line2D fit_line_odr(std::span<const Eigen::Vector2d> points) {
  if (points.size() < 2)
    throw std::invalid_argument("fit_line_odr: need at least 2 points");

  Eigen::Vector2d centroid = Eigen::Vector2d::Zero();
  for (const auto& p : points) centroid += p;
  centroid /= static_cast<double>(points.size());

  // Second moments about the centroid.
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (const auto& p : points) {
    const Eigen::Vector2d d = p - centroid;
    sxx += d.x() * d.x();
    sxy += d.x() * d.y();
    syy += d.y() * d.y();
  }
  if (sxx == 0.0 && syy == 0.0)
    throw std::invalid_argument("fit_line_odr: points are all identical");

  // Minor principal axis via the half-angle form. The eigenvalue gap of
  // [[sxx, sxy], [sxy, syy]] is sqrt((sxx-syy)^2 + 4 sxy^2); when it
  // vanishes the direction is undefined.
  const double gap =
      std::hypot(sxx - syy, 2.0 * sxy);
  if (gap <= 1e-12 * (sxx + syy))
    throw EstimationError(
        "fit_line_odr: isotropic point covariance, line direction undefined");

  // Major-axis direction angle; the normal is the minor axis.
  const double angle = 0.5 * std::atan2(2.0 * sxy, sxx - syy);
  const Eigen::Vector2d major(std::cos(angle), std::sin(angle));
  Line2D line;
  line.normal = {-major.y(), major.x()};
  line.offset = line.normal.dot(centroid);
  return line;
}

double ks_normality(std::span<const double> samples) {
  if (samples.size() < 5)
    throw std::invalid_argument("ks_normality: need at least 5 samples");
  const double n = static_cast<double>(samples.size());
  double mean = 0.0;
  for (double v : samples) mean += v;
  mean /= n;
  const double sd = sample_std(samples, mean);
  if (!(sd > 0.0))
    throw EstimationError(
        "ks_normality: degenerate distribution (zero variance)");

  std::vector<double> sorted(samples.begin(), samples.end());
  std::sort(sorted.begin(), sorted.end());
  double d_stat = 0.0;
  for (std::size_t i = 0; i < sorted.size(); ++i) {
    const double u = (sorted[i] - mean) / sd;
    const double cdf = 0.5 * std::erfc(-u / std::numbers::sqrt2);
    const double hi = (static_cast<double>(i) + 1.0) / n - cdf;
    const double lo = cdf - static_cast<double>(i) / n;
    d_stat = std::max({d_stat, hi, lo});
  }
  return d_stat;
}

double ks_threshold_5pct(std::size_t n) {
  return 1.36 / std::sqrt(static_cast<double>(n));
}

std::pair<NoiseSample, EdgeResidualSet> estimate_lateral(
    std::span<const RangeImage> frames, const PlaneSceneSpec& spec,
    EdgeSide side, double gap_mm) {
  if (frames.empty())
    throw EstimationError("estimate_lateral: no input frames");
  spec.validate();
  const int w = frames[0].width();
  const int h = frames[0].height();
  for (const auto& f : frames)
    if (f.width() != w || f.height() != h)
      throw std::invalid_argument("estimate_lateral: frame dimensions differ");

  std::vector<Eigen::Vector2d> pooled;
  for (const auto& f : frames)
    for (const auto& px : extract_edge_pixels(f, side, gap_mm))
      pooled.emplace_back(px.x(), px.y());
  if (pooled.size() < 10)
    throw EstimationError("estimate_lateral: insufficient data, pooled only " +
                          std::to_string(pooled.size()) + " edge pixels");

  EdgeResidualSet set;
  set.line = fit_line_odr(pooled);
  set.residuals.reserve(pooled.size());
  for (const auto& p : pooled)
    set.residuals.push_back(set.line.signed_distance(p));

  double mean = 0.0;
  for (double r : set.residuals) mean += r;
  mean /= static_cast<double>(set.residuals.size());
  const double raw_std = sample_std(set.residuals, mean);

  // Edge coordinates are integer pixels, so the residual spread carries a
  // uniform quantization component of variance 1/12 on top of the lateral
  // noise; remove it (Sheppard's correction) to report the noise itself.
  const double corrected_var = raw_std * raw_std - 1.0 / 12.0;
  const double sigma = corrected_var > 0.0 ? std::sqrt(corrected_var) : 0.0;

  set.ks_statistic = ks_normality(set.residuals);

  NoiseSample sample;
  sample.z_mm = spec.distance_mm;
  sample.theta_deg = spec.angle_deg;
  sample.sigma = sigma;
  sample.n = static_cast<long>(set.residuals.size());
  sample.kind = NoiseKind::lateral;
  return {sample, std::move(set)};
}

RangeImage lowpass_reference(const RangeImage& mean_img, double cutoff_px) {
  if (!(cutoff_px > 0.0))
    throw std::invalid_argument("lowpass_reference: cutoff must be positive");
  const int w = mean_img.width();
  const int h = mean_img.height();
  const int radius = std::max(1, static_cast<int>(std::ceil(3.0 * cutoff_px)));
  std::vector<double> kernel(2 * radius + 1);
  for (int k = -radius; k <= radius; ++k)
    kernel[k + radius] = std::exp(-0.5 * (k * k) / (cutoff_px * cutoff_px));

  // Normalized (masked) convolution, separable: blur depth*mask and mask
  // with the same kernel, divide at the end.
  std::vector<double> num(mean_img.pixel_count(), 0.0);
  std::vector<double> den(mean_img.pixel_count(), 0.0);
  std::vector<double> tmp_num(mean_img.pixel_count(), 0.0);
  std::vector<double> tmp_den(mean_img.pixel_count(), 0.0);

  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      double sn = 0.0, sd = 0.0;
      for (int k = -radius; k <= radius; ++k) {
        const int xx = x + k;
        if (xx < 0 || xx >= w || !mean_img.is_valid(xx, y)) continue;
        const double wgt = kernel[k + radius];
        sn += wgt * mean_img.at(xx, y);
        sd += wgt;
      }
      tmp_num[mean_img.index(x, y)] = sn;
      tmp_den[mean_img.index(x, y)] = sd;
    }
  }
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      double sn = 0.0, sd = 0.0;
      for (int k = -radius; k <= radius; ++k) {
        const int yy = y + k;
        if (yy < 0 || yy >= h) continue;
        const double wgt = kernel[k + radius];
        sn += wgt * tmp_num[mean_img.index(x, yy)];
        sd += wgt * tmp_den[mean_img.index(x, yy)];
      }
      num[mean_img.index(x, y)] = sn;
      den[mean_img.index(x, y)] = sd;
    }
  }

  RangeImage out(w, h);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x)
      if (mean_img.is_valid(x, y) && den[mean_img.index(x, y)] > 0.0)
        out.set(x, y, static_cast<float>(num[mean_img.index(x, y)] /
                                         den[mean_img.index(x, y)]));
  out.intrinsics = mean_img.intrinsics;
  out.distance_mm = mean_img.distance_mm;
  out.angle_deg = mean_img.angle_deg;
  out.camera = mean_img.camera;
  return out;
}

namespace {

// 2-px erosion of the foreground so lateral edge noise does not leak into
// the axial residual pool.
std::vector<std::uint8_t> eroded_interior(const RangeImage& img,
                                          const std::vector<std::uint8_t>& fg,
                                          int margin) {
  const int w = img.width();
  const int h = img.height();
  std::vector<std::uint8_t> interior(fg.size(), 0);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const std::size_t i = static_cast<std::size_t>(y) * w + x;
      if (!fg[i]) continue;
      bool ok = true;
      for (int dy = -margin; dy <= margin && ok; ++dy) {
        for (int dx = -margin; dx <= margin && ok; ++dx) {
          const int xx = x + dx;
          const int yy = y + dy;
          if (xx < 0 || xx >= w || yy < 0 || yy >= h ||
              !fg[static_cast<std::size_t>(yy) * w + xx])
            ok = false;
        }
      }
      interior[i] = ok ? 1 : 0;
    }
  }
  return interior;
}

}  // namespace

AxialEstimate estimate_axial_detailed(std::span<const RangeImage> frames,
                                      const PlaneSceneSpec& spec,
                                      double cutoff_px) {
  if (frames.size() < 2)
    throw EstimationError("estimate_axial: need at least 2 frames");
  spec.validate();

  const RangeImage mean = average_frames(frames);
  const RangeImage reference = lowpass_reference(mean, cutoff_px);
  const auto fg = foreground_mask(mean, 50.0);
  const auto interior = eroded_interior(mean, fg, 2);

  std::vector<double> residuals;
  for (const auto& f : frames) {
    for (std::size_t i = 0; i < f.pixel_count(); ++i) {
      if (!interior[i] || !f.is_valid(i) || !reference.is_valid(i)) continue;
      residuals.push_back(static_cast<double>(f.at(i)) - reference.at(i));
    }
  }
  if (residuals.size() < 100)
    throw EstimationError("estimate_axial: insufficient data, pooled only " +
                          std::to_string(residuals.size()) + " residuals");

  double mean_r = 0.0;
  for (double r : residuals) mean_r += r;
  mean_r /= static_cast<double>(residuals.size());

  AxialEstimate out;
  out.sample.z_mm = spec.distance_mm;
  out.sample.theta_deg = spec.angle_deg;
  out.sample.sigma = sample_std(residuals, mean_r);
  out.sample.n = static_cast<long>(residuals.size());
  out.sample.kind = NoiseKind::axial;
  out.residuals = std::move(residuals);
  return out;
}

NoiseSample estimate_axial(std::span<const RangeImage> frames,
                           const PlaneSceneSpec& spec, double cutoff_px) {
  return estimate_axial_detailed(frames, spec, cutoff_px).sample;
}

Histogram freedman_diaconis_histogram(std::span<const double> values) {
  if (values.empty())
    throw std::invalid_argument("histogram: no values");
  std::vector<double> sorted(values.begin(), values.end());
  std::sort(sorted.begin(), sorted.end());
  const double lo = sorted.front();
  const double hi = sorted.back();
  const auto n = sorted.size();
  auto quantile = [&](double q) {
    const double pos = q * (static_cast<double>(n) - 1.0);
    const std::size_t i = static_cast<std::size_t>(pos);
    const double frac = pos - static_cast<double>(i);
    return i + 1 < n ? sorted[i] * (1.0 - frac) + sorted[i + 1] * frac
                     : sorted[i];
  };
  const double iqr = quantile(0.75) - quantile(0.25);
  const double width =
      2.0 * iqr / std::cbrt(static_cast<double>(n));

  Histogram hist;
  if (!(width > 0.0) || hi == lo) {
    hist.bin_center.push_back(0.5 * (lo + hi));
    hist.count.push_back(static_cast<long>(n));
    return hist;
  }
  const std::size_t bins =
      static_cast<std::size_t>(std::ceil((hi - lo) / width));
  hist.bin_center.resize(bins, 0.0);
  hist.count.assign(bins, 0);
  for (std::size_t b = 0; b < bins; ++b)
    hist.bin_center[b] = lo + (static_cast<double>(b) + 0.5) * width;
  for (double v : sorted) {
    auto b = static_cast<std::size_t>((v - lo) / width);
    if (b >= bins) b = bins - 1;
    ++hist.count[b];
  }
  return hist;
}

void write_samples_csv(std::span<const NoiseSample> samples,
                       const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw Error("cannot open '" + path.string() + "' for writing");
  out << "kind,z_mm,theta_deg,sigma,n\n";
  char buf[160];
  for (const auto& s : samples) {
    std::snprintf(buf, sizeof(buf), "%s,%.17g,%.17g,%.17g,%ld\n",
                  to_string(s.kind), s.z_mm, s.theta_deg, s.sigma, s.n);
    out << buf;
  }
  out.flush();
  if (!out) throw Error("I/O error while writing '" + path.string() + "'");
}

std::vector<NoiseSample> read_samples_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open '" + path.string() + "' for reading");
  std::string line;
  int line_no = 0;
  if (!std::getline(in, line) || line != "kind,z_mm,theta_deg,sigma,n")
    throw FormatError(path.string() +
                      ":1: expected header 'kind,z_mm,theta_deg,sigma,n'");
  line_no = 1;
  std::vector<NoiseSample> samples;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::istringstream row(line);
    std::string field;
    NoiseSample s;
    try {
      if (!std::getline(row, field, ',')) throw std::invalid_argument("kind");
      s.kind = noise_kind_from_string(field);
      if (!std::getline(row, field, ',')) throw std::invalid_argument("z");
      s.z_mm = std::stod(field);
      if (!std::getline(row, field, ',')) throw std::invalid_argument("theta");
      s.theta_deg = std::stod(field);
      if (!std::getline(row, field, ',')) throw std::invalid_argument("sigma");
      s.sigma = std::stod(field);
      if (!std::getline(row, field, ',')) throw std::invalid_argument("n");
      s.n = std::stol(field);
    } catch (const std::exception&) {
      throw FormatError(path.string() + ":" + std::to_string(line_no) +
                        ": malformed sample row");
    }
    samples.push_back(s);
  }
  return samples;
}

void write_histogram_csv(const Histogram& hist,
                         const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw Error("cannot open '" + path.string() + "' for writing");
  out << "bin_center,count\n";
  char buf[96];
  for (std::size_t i = 0; i < hist.bin_center.size(); ++i) {
    std::snprintf(buf, sizeof(buf), "%.17g,%ld\n", hist.bin_center[i],
                  hist.count[i]);
    out << buf;
  }
  out.flush();
  if (!out) throw Error("I/O error while writing '" + path.string() + "'");
}

}  // namespace rangenoise
