#include <doctest.h>

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <fstream>
#include <random>

#include "helpers.hpp"
#include "rangenoise/errors.hpp"
#include "rangenoise/noise_model.hpp"

using namespace rangenoise;

namespace {

// Noise-free samples of a model's raw polynomial on a z x theta grid.
std::vector<NoiseSample> grid_samples(const NoiseModel& m,
                                      const std::vector<double>& zs,
                                      const std::vector<double>& thetas) {
  std::vector<NoiseSample> samples;
  for (double z : zs)
    for (double t : thetas)
      samples.push_back({z, t, m.raw(z, t), 1000, m.kind});
  return samples;
}

// Independent fitting oracle: normal equations solved on the same
// centered/scaled basis with a Cholesky factorization.
std::array<double, 6> normal_equations_oracle(
    const std::vector<NoiseSample>& samples) {
  double zm = 0.0, tm = 0.0;
  for (const auto& s : samples) {
    zm += s.z_mm;
    tm += s.theta_deg;
  }
  zm /= samples.size();
  tm /= samples.size();
  double zs = 0.0, ts = 0.0;
  for (const auto& s : samples) {
    zs = std::max(zs, std::abs(s.z_mm - zm));
    ts = std::max(ts, std::abs(s.theta_deg - tm));
  }
  if (zs == 0.0) zs = 1.0;
  if (ts == 0.0) ts = 1.0;

  Eigen::MatrixXd ata = Eigen::MatrixXd::Zero(6, 6);
  Eigen::VectorXd atb = Eigen::VectorXd::Zero(6);
  for (const auto& s : samples) {
    Eigen::VectorXd row(6);
    const double z = (s.z_mm - zm) / zs;
    const double t = (s.theta_deg - tm) / ts;
    row << 1.0, z, t, z * z, z * t, t * t;
    ata += row * row.transpose();
    atb += row * s.sigma;
  }
  const Eigen::VectorXd beta = ata.ldlt().solve(atb);
  // Expand back to the raw basis.
  const double a = zm, p = zs, b = tm, q = ts;
  return {beta(0) - beta(1) * a / p - beta(2) * b / q +
              beta(3) * a * a / (p * p) + beta(4) * a * b / (p * q) +
              beta(5) * b * b / (q * q),
          beta(1) / p - 2 * beta(3) * a / (p * p) - beta(4) * b / (p * q),
          beta(2) / q - beta(4) * a / (p * q) - 2 * beta(5) * b / (q * q),
          beta(3) / (p * p), beta(4) / (p * q), beta(5) / (q * q)};
}

double fit_ssr(const NoiseModel& m, const std::vector<NoiseSample>& samples) {
  double ss = 0.0;
  for (const auto& s : samples) {
    const double r = s.sigma - m.raw(s.z_mm, s.theta_deg);
    ss += r * r;
  }
  return ss;
}

const std::vector<double> kZGrid{500.0, 1000.0, 1500.0, 2000.0, 2500.0};
const std::vector<double> kThetaGrid{0.0, 20.0, 40.0, 60.0, 80.0};

}  // namespace

TEST_SUITE("noise_model") {

TEST_CASE("published coefficient evaluations, 5 significant digits") {
  CHECK(format_sigma(preset("kinect-v1", NoiseKind::lateral)
                         .evaluate(1000.0, 0.0)
                         .sigma) == "0.98510");
  CHECK(format_sigma(preset("kinect-v2", NoiseKind::lateral)
                         .evaluate(1000.0, 30.0)
                         .sigma) == "0.41033");
  CHECK(format_sigma(preset("motioncam-3d", NoiseKind::axial)
                         .evaluate(1000.0, 0.0)
                         .sigma) == "0.053000");
  CHECK(format_sigma(preset("kinect-v1", NoiseKind::axial)
                         .evaluate(1000.0, 30.0)
                         .sigma) == "1.3202");

  CHECK(preset("kinect-v1", NoiseKind::lateral).evaluate(1000.0, 0.0).sigma ==
        doctest::Approx(0.98510).epsilon(1e-9));
  CHECK(preset("kinect-v2", NoiseKind::lateral).evaluate(1000.0, 30.0).sigma ==
        doctest::Approx(0.41033).epsilon(1e-9));
  CHECK(preset("motioncam-3d", NoiseKind::axial).evaluate(1000.0, 0.0).sigma ==
        doctest::Approx(0.053).epsilon(1e-9));
  CHECK(preset("kinect-v1", NoiseKind::axial).evaluate(1000.0, 30.0).sigma ==
        doctest::Approx(1.3202).epsilon(1e-9));
}

TEST_CASE("preset lookup") {
  const NoiseModel kv1 = preset("kinect-v1", NoiseKind::lateral);
  CHECK(kv1.coeffs == std::array<double, 6>{0.94, 4.51e-5, 6.20e-4, 0, 0, 0});
  CHECK(kv1.unit == SigmaUnit::px);

  const NoiseModel mc = preset("motioncam-3d", NoiseKind::axial);
  CHECK(mc.coeffs == std::array<double, 6>{0.599, -1.43e-3, -8.94e-3, 8.84e-7,
                                           1.27e-5, 2.75e-5});
  CHECK(mc.unit == SigmaUnit::mm);

  CHECK_THROWS_WITH_AS(preset("kinect-v3", NoiseKind::lateral),
                       doctest::Contains("kinect-v1"), std::invalid_argument);
}

TEST_CASE("evaluation clamps negatives and flags extrapolation") {
  const NoiseModel kv1ax = preset("kinect-v1", NoiseKind::axial);
  // At short range the published polynomial dips below zero.
  CHECK(kv1ax.raw(300.0, 0.0) < 0.0);
  const SigmaValue v = kv1ax.evaluate(300.0, 0.0);
  CHECK(v.sigma == 0.0);
  CHECK(v.clamped);
  CHECK(v.extrapolated);  // 300 mm is below the 800 mm capture range

  const SigmaValue in_range = kv1ax.evaluate(1000.0, 30.0);
  CHECK_FALSE(in_range.clamped);
  CHECK_FALSE(in_range.extrapolated);
  CHECK(kv1ax.evaluate(1000.0, 75.0).extrapolated);  // captured only to 70

  CHECK_THROWS_AS(kv1ax.evaluate(-1.0, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(kv1ax.evaluate(1000.0, 90.0), std::invalid_argument);
  CHECK_THROWS_AS(kv1ax.evaluate(1000.0, -0.5), std::invalid_argument);
}

TEST_CASE("eval_sigma is nonnegative across the admissible domain") {
  for (const auto& camera : preset_cameras()) {
    for (NoiseKind kind : {NoiseKind::lateral, NoiseKind::axial}) {
      const NoiseModel m = preset(camera, kind);
      for (double z = 100.0; z <= 6000.0; z += 137.0)
        for (double theta = 0.0; theta < 90.0; theta += 7.3)
          CHECK(m.evaluate(z, theta).sigma >= 0.0);
    }
  }
}

TEST_CASE("fit_polynomial recovers generating coefficients") {
  for (const auto& camera : preset_cameras()) {
    for (NoiseKind kind : {NoiseKind::lateral, NoiseKind::axial}) {
      const NoiseModel truth = preset(camera, kind);
      const auto samples = grid_samples(truth, kZGrid, kThetaGrid);
      const NoiseModel fitted = fit_polynomial(samples);
      const auto oracle = normal_equations_oracle(samples);
      for (int i = 0; i < 6; ++i) {
        const double scale = std::max(std::abs(truth.coeffs[i]), 1e-12);
        if (truth.coeffs[i] != 0.0)
          CHECK(std::abs(fitted.coeffs[i] - truth.coeffs[i]) / scale <= 1e-6);
        else
          CHECK(std::abs(fitted.coeffs[i]) <= 1e-12);
        CHECK(std::abs(fitted.coeffs[i] - oracle[i]) <=
              1e-6 * std::max(1e-9, std::abs(oracle[i])) + 1e-15);
      }
    }
  }
}

TEST_CASE("fit_polynomial on constant samples") {
  std::vector<NoiseSample> samples;
  for (double z : kZGrid)
    for (double t : kThetaGrid)
      samples.push_back({z, t, 1.0, 10, NoiseKind::axial});
  const NoiseModel m = fit_polynomial(samples);
  CHECK(m.coeffs[0] == doctest::Approx(1.0).epsilon(1e-9));
  for (int i = 1; i < 6; ++i) CHECK(std::abs(m.coeffs[i]) < 1e-9);
}

TEST_CASE("fit_polynomial error paths") {
  const NoiseModel truth = preset("kinect-v1", NoiseKind::axial);
  auto samples = grid_samples(truth, kZGrid, kThetaGrid);

  SUBCASE("underdetermined") {
    samples.resize(5);
    CHECK_THROWS_AS((void)fit_polynomial(samples), FitError);
  }
  SUBCASE("rank-deficient design names the dependent directions") {
    // Constant theta: the theta columns collapse into the intercept.
    const auto flat = grid_samples(
        truth, {500.0, 800.0, 1100.0, 1400.0, 1700.0, 2000.0, 2300.0}, {30.0});
    CHECK_THROWS_WITH_AS((void)fit_polynomial(flat),
                         doctest::Contains("theta"), FitError);
  }
  SUBCASE("mixed kinds are rejected") {
    samples[3].kind = NoiseKind::lateral;
    CHECK_THROWS_AS((void)fit_polynomial(samples), std::invalid_argument);
  }
}

TEST_CASE("fit_polynomial invariances and local optimality") {
  const NoiseModel truth = preset("kinect-v2", NoiseKind::axial);
  auto samples = grid_samples(truth, kZGrid, kThetaGrid);
  // Perturb sigmas so the fit is not exact and the optimum is strict.
  std::mt19937 gen(4);
  std::normal_distribution<double> noise(0.0, 0.01);
  for (auto& s : samples) s.sigma += noise(gen);

  const NoiseModel fitted = fit_polynomial(samples);

  SUBCASE("sample order does not matter") {
    auto shuffled = samples;
    std::shuffle(shuffled.begin(), shuffled.end(), gen);
    const NoiseModel refit = fit_polynomial(shuffled);
    for (int i = 0; i < 6; ++i)
      CHECK(refit.coeffs[i] ==
            doctest::Approx(fitted.coeffs[i]).epsilon(1e-9));
  }

  SUBCASE("raw coefficients do not depend on the internal scaling") {
    const RegressorScaling a{1500.0, 1000.0, 40.0, 40.0};
    const RegressorScaling b{0.0, 3000.0, 10.0, 100.0};
    const NoiseModel fit_a = fit_polynomial(samples, a);
    const NoiseModel fit_b = fit_polynomial(samples, b);
    for (int i = 0; i < 6; ++i) {
      const double tol = 1e-9 * std::max(1.0, std::abs(fit_a.coeffs[i]));
      CHECK(std::abs(fit_a.coeffs[i] - fit_b.coeffs[i]) <= tol);
      CHECK(std::abs(fit_a.coeffs[i] - fitted.coeffs[i]) <= tol);
    }
  }

  SUBCASE("no random coefficient perturbation beats the fit") {
    const double best = fit_ssr(fitted, samples);
    std::normal_distribution<double> rel(0.0, 1.0);
    for (int trial = 0; trial < 100; ++trial) {
      NoiseModel tweaked = fitted;
      for (int i = 0; i < 6; ++i) {
        const double step =
            1e-3 * std::max(std::abs(fitted.coeffs[i]), 1e-6);
        tweaked.coeffs[i] += step * rel(gen);
      }
      CHECK(best <= fit_ssr(tweaked, samples) + 1e-15);
    }
  }

  SUBCASE("weighted mode accepts per-sample counts") {
    for (auto& s : samples) s.n = 100 + (s.n % 7);
    const NoiseModel weighted = fit_polynomial(samples, true);
    // Same data, nearly-equal weights: the fits agree loosely.
    for (int i = 0; i < 6; ++i)
      CHECK(weighted.coeffs[i] ==
            doctest::Approx(fitted.coeffs[i]).epsilon(0.2));
  }
}

TEST_CASE("theoretical structured-light axial law") {
  // Combined constant m sigma_rho / (f b) = 1e-6 per mm.
  TheoreticalSLParams p{0.1, 1000.0, 100.0, 1.0};
  CHECK(theoretical_axial_sigma(p, 1000.0) == doctest::Approx(1.0));
  p.sigma_rho = 0.0;
  for (double z : {100.0, 1000.0, 4000.0})
    CHECK(theoretical_axial_sigma(p, z) == 0.0);

  p.sigma_rho = 0.37;
  std::mt19937 gen(8);
  std::uniform_real_distribution<double> depth(10.0, 5000.0);
  for (int i = 0; i < 20; ++i) {
    const double z = depth(gen);
    CHECK(theoretical_axial_sigma(p, 2.0 * z) ==
          doctest::Approx(4.0 * theoretical_axial_sigma(p, z)).epsilon(1e-12));
  }
  TheoreticalSLParams bad = p;
  bad.f = 0.0;
  CHECK_THROWS_AS(theoretical_axial_sigma(bad, 1000.0), std::invalid_argument);
}

TEST_CASE("model file round trip and parse errors") {
  const auto dir = testutil::temp_dir("model_io");
  const NoiseModel m = preset("motioncam-3d", NoiseKind::axial);
  const auto path = dir / "model.txt";
  write_model(m, path);
  const NoiseModel back = read_model(path);
  CHECK(back.coeffs == m.coeffs);
  CHECK(back.kind == m.kind);
  CHECK(back.unit == m.unit);
  CHECK(back.camera == m.camera);

  auto write_text = [&](const std::string& name, const std::string& text) {
    const auto p = dir / name;
    std::ofstream out(p);
    out << text;
    return p;
  };
  const std::string base =
      "camera=test\nkind=axial\nunits=mm\nc0=1\nc1=0\nc2=0\nc3=0\nc4=0\n";
  CHECK_THROWS_WITH_AS(read_model(write_text("missing.txt", base)),
                       doctest::Contains("c5"), FormatError);
  CHECK_THROWS_WITH_AS(
      read_model(write_text("unknown.txt", base + "c5=0\nwobble=1\n")),
      doctest::Contains("wobble"), FormatError);
  CHECK_THROWS_WITH_AS(
      read_model(write_text("badnum.txt",
                            "camera=x\nkind=axial\nunits=mm\nc0=abc\nc1=0\n"
                            "c2=0\nc3=0\nc4=0\nc5=0\n")),
      doctest::Contains(":4:"), FormatError);
  std::filesystem::remove_all(dir);
}

TEST_CASE("format_sigma uses 5 significant digits") {
  CHECK(format_sigma(0.98510) == "0.98510");
  CHECK(format_sigma(1.3202) == "1.3202");
  CHECK(format_sigma(0.053) == "0.053000");
  CHECK(format_sigma(12.345678) == "12.346");
  CHECK(format_sigma(0.0) == "0.0000");
  CHECK(format_sigma(2.0) == "2.0000");
}

}  // TEST_SUITE
