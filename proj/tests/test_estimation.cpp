#include <doctest.h>

#include <Eigen/Eigenvalues>
#include <cmath>
#include <fstream>
#include <numbers>
#include <random>

#include "helpers.hpp"
#include "rangenoise/errors.hpp"
#include "rangenoise/estimation.hpp"
#include "rangenoise/plane_scene.hpp"

using namespace rangenoise;

namespace {

// Independent ODR oracle: smallest-eigenvalue eigenvector of the scatter
// matrix via Eigen's solver (the implementation uses the half-angle form).
Line2D odr_oracle(const std::vector<Eigen::Vector2d>& pts) {
  Eigen::Vector2d centroid = Eigen::Vector2d::Zero();
  for (const auto& p : pts) centroid += p;
  centroid /= static_cast<double>(pts.size());
  Eigen::Matrix2d scatter = Eigen::Matrix2d::Zero();
  for (const auto& p : pts) {
    const Eigen::Vector2d d = p - centroid;
    scatter += d * d.transpose();
  }
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> eig(scatter);
  Line2D line;
  line.normal = eig.eigenvectors().col(0);  // minor axis
  line.offset = line.normal.dot(centroid);
  return line;
}

double sum_sq_residuals(const std::vector<Eigen::Vector2d>& pts,
                        const Line2D& line) {
  double ss = 0.0;
  for (const auto& p : pts) {
    const double r = line.signed_distance(p);
    ss += r * r;
  }
  return ss;
}

}  // namespace

TEST_SUITE("estimation") {

TEST_CASE("extract_edge_pixels on synthetic boards") {
  SUBCASE("centered frontal board, invalid background") {
    auto cfg = testutil::frontal_board(1000.0, testutil::small_intrinsics());
    const RangeImage img = synth_plane(cfg);
    const auto left = extract_edge_pixels(img, EdgeSide::left);
    REQUIRE(left.size() > 10);
    for (const auto& e : left) CHECK(e.x() == left.front().x());
    const auto top = extract_edge_pixels(img, EdgeSide::top);
    REQUIRE(top.size() > 10);
    for (const auto& e : top) CHECK(e.y() == top.front().y());
  }

  SUBCASE("a fully invalid row contributes no edge pixel") {
    auto cfg = testutil::frontal_board(1000.0, testutil::small_intrinsics());
    RangeImage img = synth_plane(cfg);
    const auto before = extract_edge_pixels(img, EdgeSide::left);
    const int row = before[before.size() / 2].y();
    for (int x = 0; x < img.width(); ++x) img.set_invalid(x, row);
    const auto after = extract_edge_pixels(img, EdgeSide::left);
    CHECK(after.size() == before.size() - 1);
    for (const auto& e : after) CHECK(e.y() != row);
  }

  SUBCASE("depth-gap segmentation on a fully valid image") {
    auto cfg = testutil::frontal_board(1000.0, testutil::small_intrinsics());
    cfg.background_mm = 1200.0;  // 200 mm gap
    const RangeImage img = synth_plane(cfg);
    const auto left = extract_edge_pixels(img, EdgeSide::left);
    REQUIRE(!left.empty());
    for (const auto& e : left) CHECK(img.at(e.x(), e.y()) == 1000.0f);
  }

  SUBCASE("no board found") {
    CHECK_THROWS_WITH_AS(extract_edge_pixels(RangeImage(8, 8), EdgeSide::left),
                         doctest::Contains("no board detected"),
                         EstimationError);
    // Fully valid but no depth gap above the threshold: nothing to segment.
    RangeImage flat(8, 8, std::vector<float>(64, 1000.0f));
    CHECK_THROWS_WITH_AS(extract_edge_pixels(flat, EdgeSide::left),
                         doctest::Contains("no board detected"),
                         EstimationError);
  }
}

TEST_CASE("fit_line_odr matches hand-derived cases") {
  SUBCASE("collinear points give a zero-residual line") {
    const std::vector<Eigen::Vector2d> pts{{0, 0}, {1, 1}, {2, 2}};
    const Line2D line = fit_line_odr(pts);
    for (const auto& p : pts) CHECK(std::abs(line.signed_distance(p)) < 1e-12);
  }

  SUBCASE("2x1 rectangle: line y = 0.5 with residuals +-0.5") {
    const std::vector<Eigen::Vector2d> pts{{0, 0}, {2, 0}, {0, 1}, {2, 1}};
    const Line2D line = fit_line_odr(pts);
    CHECK(std::abs(line.normal.x()) < 1e-12);
    CHECK(std::abs(std::abs(line.normal.y()) - 1.0) < 1e-12);
    CHECK(std::abs(std::abs(line.offset) - 0.5) < 1e-12);
    for (const auto& p : pts)
      CHECK(std::abs(line.signed_distance(p)) == doctest::Approx(0.5));
  }

  SUBCASE("isotropic covariance is a degeneracy error") {
    const std::vector<Eigen::Vector2d> square{{0, 0}, {1, 0}, {0, 1}, {1, 1}};
    CHECK_THROWS_AS(fit_line_odr(square), EstimationError);
  }

  SUBCASE("fewer than 2 distinct points") {
    CHECK_THROWS_AS(fit_line_odr(std::vector<Eigen::Vector2d>{{1, 1}}),
                    std::invalid_argument);
    const std::vector<Eigen::Vector2d> same{{1, 1}, {1, 1}, {1, 1}};
    CHECK_THROWS_AS(fit_line_odr(same), std::invalid_argument);
  }
}

TEST_CASE("fit_line_odr properties against the eigen oracle") {
  std::mt19937 gen(99);
  std::uniform_real_distribution<double> coord(-50.0, 50.0);
  std::normal_distribution<double> jitter(0.0, 0.7);

  for (int trial = 0; trial < 50; ++trial) {
    // Random line with scatter.
    const double angle = coord(gen) * 0.02;
    const Eigen::Vector2d dir(std::cos(angle), std::sin(angle));
    const Eigen::Vector2d origin(coord(gen), coord(gen));
    std::vector<Eigen::Vector2d> pts;
    std::uniform_int_distribution<int> count(5, 40);
    const int n = count(gen);
    for (int i = 0; i < n; ++i) {
      const double t = coord(gen);
      const Eigen::Vector2d normal(-dir.y(), dir.x());
      pts.push_back(origin + t * dir + jitter(gen) * normal);
    }
    const Line2D fit = fit_line_odr(pts);

    // The line passes through the centroid: signed residuals sum to zero.
    double sum = 0.0, max_abs = 0.0;
    for (const auto& p : pts) {
      const double r = fit.signed_distance(p);
      sum += r;
      max_abs = std::max(max_abs, std::abs(r));
    }
    CHECK(std::abs(sum) <= 1e-9 * std::max(1.0, max_abs * n));

    // Matches the eigen-decomposition oracle (up to the normal's sign).
    const Line2D oracle = odr_oracle(pts);
    const double dot = fit.normal.dot(oracle.normal);
    CHECK(std::abs(std::abs(dot) - 1.0) < 1e-9);
    CHECK(std::abs(fit.offset - dot * oracle.offset) < 1e-9);

    // Optimality: no centroid-passing comparison line among 360 rotations
    // has a smaller squared-orthogonal-distance sum.
    const double best = sum_sq_residuals(pts, fit);
    Eigen::Vector2d centroid = Eigen::Vector2d::Zero();
    for (const auto& p : pts) centroid += p;
    centroid /= static_cast<double>(pts.size());
    for (int deg = 0; deg < 360; ++deg) {
      const double a = deg * std::numbers::pi / 180.0;
      Line2D cmp;
      cmp.normal = {std::cos(a), std::sin(a)};
      cmp.offset = cmp.normal.dot(centroid);
      CHECK(best <= sum_sq_residuals(pts, cmp) + 1e-9);
    }
  }
}

TEST_CASE("ks_normality frozen oracle values") {
  SUBCASE("exact normal quantiles stay near zero") {
    // Quantiles at k/(n+1), n = 99; direct CDF comparison gives D = 0.0104.
    std::vector<double> q;
    for (int k = 1; k <= 99; ++k) {
      // Acklam-style inverse via bisection on erfc keeps the oracle
      // independent of any library quantile function.
      double lo = -10.0, hi = 10.0;
      const double target = k / 100.0;
      for (int it = 0; it < 200; ++it) {
        const double mid = 0.5 * (lo + hi);
        (0.5 * std::erfc(-mid / std::numbers::sqrt2) < target ? lo : hi) = mid;
      }
      q.push_back(0.5 * (lo + hi));
    }
    const double d = ks_normality(q);
    CHECK(d < 0.02);
    CHECK(d == doctest::Approx(0.01041).epsilon(0.05));
  }

  SUBCASE("uniform samples are rejected at the 5% threshold") {
    std::vector<double> u;
    for (int k = 1; k <= 1000; ++k) u.push_back((k - 0.5) / 1000.0);
    const double d = ks_normality(u);
    CHECK(d > ks_threshold_5pct(u.size()));  // 1.36/sqrt(1000) = 0.043
    CHECK(d > 0.05);
    CHECK(d < 0.06);
  }

  SUBCASE("degenerate and tiny inputs") {
    const std::vector<double> same(10, 3.25);
    CHECK_THROWS_AS(ks_normality(same), EstimationError);
    const std::vector<double> few{1.0, 2.0, 3.0};
    CHECK_THROWS_AS(ks_normality(few), std::invalid_argument);
  }
}

TEST_CASE("lowpass_reference") {
  SUBCASE("constant image is unchanged") {
    RangeImage img(32, 24, std::vector<float>(32 * 24, 1250.5f));
    const RangeImage out = lowpass_reference(img);
    for (std::size_t i = 0; i < out.pixel_count(); ++i)
      CHECK(out.at(i) == 1250.5f);
  }

  SUBCASE("affine ramp is preserved in the interior") {
    // Dyadic slope keeps every ramp value exactly representable.
    RangeImage img(64, 48);
    for (int y = 0; y < 48; ++y)
      for (int x = 0; x < 64; ++x)
        img.set(x, y, 1000.0f + 0.25f * x + 0.5f * y);
    const RangeImage out = lowpass_reference(img, 2.0);
    for (int y = 8; y < 40; ++y)
      for (int x = 8; x < 56; ++x)
        CHECK(std::abs(static_cast<double>(out.at(x, y)) -
                       (1000.0 + 0.25 * x + 0.5 * y)) < 1e-9);
  }

  SUBCASE("single valid pixel normalizes to itself; invalid stays invalid") {
    RangeImage img(9, 9);
    img.set(4, 4, 777.0f);
    const RangeImage out = lowpass_reference(img);
    CHECK(out.at(4, 4) == 777.0f);
    CHECK(out.valid_count() == 1);
  }
}

TEST_CASE("estimate_lateral") {
  // Slanted noiseless edge: continuous edge position 20 + 0.1184 * v.
  auto slanted = [](int v) { return 20.0 + 0.1184 * v; };

  SUBCASE("noiseless frames show only quantization") {
    const RangeImage frame = testutil::board_from_edge_fn(64, 200, slanted);
    std::vector<RangeImage> frames(20, frame);
    PlaneSceneSpec spec;
    spec.distance_mm = 1000.0;
    spec.angle_deg = 0.0;
    const auto [sample, set] = estimate_lateral(frames, spec, EdgeSide::left);
    CHECK(sample.kind == NoiseKind::lateral);
    CHECK(sample.z_mm == 1000.0);
    CHECK(sample.sigma >= 0.0);
    CHECK(sample.sigma <= 0.29);
    CHECK(sample.n == static_cast<long>(set.residuals.size()));
  }

  SUBCASE("injected sub-pixel jitter of 1.0 px is recovered within 5%") {
    // Independent injector: the continuous edge position of every
    // (row, frame) is shifted by N(0, 1) before rasterization, so the
    // oracle for sigma is the injection parameter itself.
    std::mt19937_64 gen(2024);
    std::normal_distribution<double> noise(0.0, 1.0);
    std::vector<RangeImage> frames;
    for (int f = 0; f < 200; ++f) {
      frames.push_back(testutil::board_from_edge_fn(
          64, 200, [&](int v) { return slanted(v) + noise(gen); }));
    }
    PlaneSceneSpec spec;
    spec.distance_mm = 1000.0;
    spec.angle_deg = 0.0;
    const auto [sample, set] = estimate_lateral(frames, spec, EdgeSide::left);
    CHECK(sample.sigma == doctest::Approx(1.0).epsilon(0.05));
    CHECK(sample.n == 200 * 200);

    // Frame order does not matter.
    std::vector<RangeImage> reversed(frames.rbegin(), frames.rend());
    const auto [sample2, set2] =
        estimate_lateral(reversed, spec, EdgeSide::left);
    CHECK(sample2.sigma == doctest::Approx(sample.sigma).epsilon(1e-12));
  }

  SUBCASE("axis-aligned edges expose quantization to the KS test") {
    // A vertical edge keeps all residuals on one integer lattice; the
    // KS statistic then rejects normality decisively, as quantization in
    // pixel positions should.
    std::mt19937_64 gen(11);
    std::normal_distribution<double> noise(0.0, 1.0);
    std::vector<RangeImage> frames;
    for (int f = 0; f < 100; ++f)
      frames.push_back(testutil::board_from_edge_fn(
          64, 200, [&](int) { return 20.3 + noise(gen); }));
    PlaneSceneSpec spec;
    spec.distance_mm = 1000.0;
    const auto [sample, set] = estimate_lateral(frames, spec, EdgeSide::left);
    CHECK(set.ks_statistic > ks_threshold_5pct(set.residuals.size()));
    CHECK(sample.sigma == doctest::Approx(1.0).epsilon(0.05));
  }

  SUBCASE("estimator consistency improves with pooled residual count") {
    std::mt19937_64 gen(77);
    std::normal_distribution<double> noise(0.0, 0.6);
    std::vector<RangeImage> frames;
    for (int f = 0; f < 200; ++f)
      frames.push_back(testutil::board_from_edge_fn(
          48, 64, [&](int v) { return 10.0 + 0.2417 * v + noise(gen); }));
    PlaneSceneSpec spec;
    spec.distance_mm = 800.0;
    const auto [sample, set] = estimate_lateral(frames, spec, EdgeSide::left);
    CHECK(sample.n >= 10000);
    CHECK(sample.sigma == doctest::Approx(0.6).epsilon(0.05));
  }

  SUBCASE("insufficient data") {
    RangeImage tiny(4, 4);
    tiny.set(2, 1, 1000.0f);
    tiny.set(2, 2, 1000.0f);
    const std::vector<RangeImage> frames{tiny};
    PlaneSceneSpec spec;
    spec.distance_mm = 1000.0;
    CHECK_THROWS_WITH_AS(
        (void)estimate_lateral(frames, spec, EdgeSide::left),
        doctest::Contains("insufficient"), EstimationError);
    CHECK_THROWS_WITH_AS((void)estimate_lateral({}, spec, EdgeSide::left),
                         doctest::Contains("no input frames"),
                         EstimationError);
  }
}

TEST_CASE("estimate_axial") {
  auto cfg = testutil::frontal_board(1000.0, testutil::small_intrinsics());
  const RangeImage clean = synth_plane(cfg);

  SUBCASE("noiseless frames have vanishing sigma") {
    std::vector<RangeImage> frames(5, clean);
    const NoiseSample s = estimate_axial(frames, cfg.spec);
    CHECK(s.kind == NoiseKind::axial);
    CHECK(s.sigma < 1e-6);
  }

  SUBCASE("injected axial noise of 1.0 mm is recovered within 3%") {
    std::mt19937_64 gen(31337);
    std::normal_distribution<float> noise(0.0f, 1.0f);
    std::vector<RangeImage> frames;
    for (int f = 0; f < 200; ++f) {
      RangeImage frame = clean;
      for (int y = 0; y < frame.height(); ++y)
        for (int x = 0; x < frame.width(); ++x)
          if (frame.is_valid(x, y))
            frame.set(x, y, frame.at(x, y) + noise(gen));
      frames.push_back(std::move(frame));
    }
    const AxialEstimate est = estimate_axial_detailed(frames, cfg.spec);
    CHECK(est.sample.n >= 10000);
    CHECK(est.sample.sigma == doctest::Approx(1.0).epsilon(0.03));

    // Unbiasedness: residual mean within 3 sigma / sqrt(n).
    double mean = 0.0;
    for (double r : est.residuals) mean += r;
    mean /= static_cast<double>(est.residuals.size());
    CHECK(std::abs(mean) <=
          3.0 * est.sample.sigma / std::sqrt(double(est.residuals.size())));
  }

  SUBCASE("insufficient frames or residuals") {
    const std::vector<RangeImage> one{clean};
    CHECK_THROWS_AS((void)estimate_axial(one, cfg.spec), EstimationError);
    RangeImage dot(8, 8);
    dot.set(4, 4, 900.0f);
    const std::vector<RangeImage> dots{dot, dot};
    CHECK_THROWS_WITH_AS((void)estimate_axial(dots, cfg.spec),
                         doctest::Contains("insufficient"), EstimationError);
  }
}

TEST_CASE("histogram and sample CSV plumbing") {
  SUBCASE("freedman-diaconis bins cover all values") {
    std::mt19937 gen(5);
    std::normal_distribution<double> d(0.0, 2.0);
    std::vector<double> values;
    for (int i = 0; i < 4000; ++i) values.push_back(d(gen));
    const Histogram h = freedman_diaconis_histogram(values);
    long total = 0;
    for (long c : h.count) total += c;
    CHECK(total == 4000);
    CHECK(h.bin_center.size() > 10);
  }
  SUBCASE("constant values collapse to one bin") {
    const std::vector<double> values(50, 1.5);
    const Histogram h = freedman_diaconis_histogram(values);
    CHECK(h.bin_center.size() == 1);
    CHECK(h.count[0] == 50);
  }
  SUBCASE("sample CSV round trip") {
    const auto dir = testutil::temp_dir("samples_csv");
    const std::vector<NoiseSample> samples{
        {1000.0, 0.0, 0.98510000000000009, 40000, NoiseKind::lateral},
        {1500.0, 30.0, 1.3202, 123456, NoiseKind::axial},
    };
    const auto path = dir / "samples.csv";
    write_samples_csv(samples, path);
    const auto back = read_samples_csv(path);
    REQUIRE(back.size() == 2);
    CHECK(back[0].sigma == samples[0].sigma);
    CHECK(back[0].kind == NoiseKind::lateral);
    CHECK(back[1].n == 123456);
    CHECK(back[1].z_mm == 1500.0);

    std::ofstream bad(dir / "bad.csv");
    bad << "kind,z\n";
    bad.close();
    CHECK_THROWS_AS(read_samples_csv(dir / "bad.csv"), FormatError);
    std::filesystem::remove_all(dir);
  }
}

}  // TEST_SUITE
