// SPDX-License-Identifier: Apache-2.0
#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/multiprecision/cpp_bin_float.hpp>

#include "majdyn/analytic.hpp"

using namespace majdyn;
using Big = boost::multiprecision::cpp_bin_float_50;

namespace {

double reference_cdf(double z) {
  Big x(z);
  return static_cast<double>(Big(0.5) * boost::multiprecision::erfc(-x / boost::multiprecision::sqrt(Big(2))));
}

constexpr double kPi = std::numbers::pi;

}  // namespace

TEST(Normal, AgainstFiftyDigitReference) {
  for (double z = -8.0; z <= 8.0; z += 0.0625) EXPECT_NEAR(normal_cdf(z), reference_cdf(z), 1e-12) << z;
  EXPECT_EQ(normal_cdf(0.0), 0.5);
  EXPECT_NEAR(normal_cdf(1.959964), 0.975, 1e-7);
  for (double z : {0.3, 1.7, 4.2}) EXPECT_NEAR(normal_cdf(-z), 1 - normal_cdf(z), 1e-15);
}

TEST(Normal, DensityIntegratesToOne) {
  const double mass = boost::math::quadrature::gauss_kronrod<double, 61>::integrate(
      [](double z) { return normal_pdf(z); }, -10.0, 10.0, 15, 1e-14);
  EXPECT_NEAR(mass, 1.0, 1e-12);
}

TEST(WinProbability, Targets) {
  EXPECT_EQ(win_probability({1000, 0, 0.5}), 0.5);
  EXPECT_EQ(win_probability({1000, 0, 0.13}), 0.5);
  EXPECT_NEAR(win_probability({1000, 1, 0.5}), reference_cdf(std::sqrt(2 / kPi)), 1e-14);
  EXPECT_NEAR(win_probability({1000, 2, 0.5}), reference_cdf(2 * std::sqrt(2 / kPi)), 1e-14);
  EXPECT_NEAR(win_probability({1000, 3, 0.5}), reference_cdf(3 * std::sqrt(2 / kPi)), 1e-14);
  // frozen from the 50-digit evaluation
  EXPECT_NEAR(win_probability({1000, 1, 0.5}), 0.7875313, 1e-7);
  EXPECT_NEAR(win_probability({1000, 2, 0.5}), 0.9447298, 1e-7);
  EXPECT_NEAR(win_probability({1000, 3, 0.5}), 0.9916593, 1e-7);
  EXPECT_THROW(win_probability({10, 1, 0.0}), SingularParameters);
  EXPECT_THROW(win_probability({10, 1, 1.0}), SingularParameters);
}

TEST(WinProbability, StrictlyIncreasingInDelta) {
  for (double p : {0.05, 0.3, 0.5, 0.8})
    for (long d = 0; d < 6; ++d) EXPECT_LT(win_probability({1000, d, p}), win_probability({1000, d + 1, p}));
}

TEST(ChopProbabilityApprox, Examples) {
  EXPECT_NEAR(chop_probability_approx(1000, 0, 0.5, 0, 0), 0.508921, 5e-7);
  EXPECT_EQ(chop_probability_approx(1000, 1, 0.5, -1.0, 0.0), 0.5);
  const double base = chop_probability_approx(700, 2, 0.3, 0.2, 0.1);
  const double bumped = chop_probability_approx(700, 2, 0.3, 0.45, 0.1);
  EXPECT_NEAR(bumped - base, 0.25 / (2 * std::sqrt(kPi * 0.3 * 0.7 * 700)), 1e-15);
}

TEST(ChopMoments, Examples) {
  const auto m = chop_moments_approx(1e4, 0.5);
  EXPECT_NEAR(m.mean_plus, 5028.21, 5e-3);
  EXPECT_NEAR(m.mean_minus, 4971.79, 5e-3);
  EXPECT_NEAR(m.variance, 1704.23, 5e-3);
  EXPECT_DOUBLE_EQ(m.mean_plus + m.mean_minus, 1e4);
  EXPECT_NEAR(chop_moments_approx(777, 0.5).variance / 777, (1 - 1 / kPi) / 4, 1e-15);
}

TEST(DayOne, CenteringIdentity) {
  for (long d : {0L, 1L, 3L}) {
    const ModelParams params{1234, d, 0.37};
    const auto c = day_one_centering(params);
    const double n = 1234;
    EXPECT_NEAR(c.x_center - c.y_center, 0.37 * d * n / std::sqrt(kPi * 0.37 * 0.63 * n), 1e-9);
  }
}

TEST(DayOne, PeakAndDiagonal) {
  const ModelParams params{1000, 0, 0.5};
  EXPECT_NEAR(day_one_peak(1000), 4.976e-4, 5e-7);
  for (double t : {0.5, 1.3, 2.0}) {
    EXPECT_NEAR(std::exp(-day_one_exponent(t, t)), std::exp(-t * t / (2 + kPi)), 1e-15);
    EXPECT_NEAR(day_one_exponent(t, -0.4), day_one_exponent(-0.4, t), 1e-15);
  }
  const auto c = day_one_centering(params);
  EXPECT_GT(day_one_density(params, std::lround(c.x_center), std::lround(c.y_center)), 0.99 * day_one_peak(1000));
}

TEST(DayOne, LatticeMassNearOne) {
  const ModelParams params{1000, 0, 0.5};
  const auto c = day_one_centering(params);
  double total = 0;
  const long lo_x = std::lround(c.x_center - 10 * c.scale), hi_x = std::lround(c.x_center + 10 * c.scale);
  const long lo_y = std::lround(c.y_center - 10 * c.scale), hi_y = std::lround(c.y_center + 10 * c.scale);
  for (long x = lo_x; x <= hi_x; ++x)
    for (long y = lo_y; y <= hi_y; ++y) total += day_one_density(params, x, y);
  EXPECT_NEAR(total, 1.0, 0.02);
}

TEST(DayOne, QuadraticFormIsPositiveDefiniteWithKnownInverse) {
  // eigenvalues of [[1+pi, -1], [-1, 1+pi]] are pi and 2 + pi
  const double a = 1 + kPi, b = -1;
  EXPECT_NEAR((a + b), kPi, 1e-15);
  EXPECT_NEAR((a - b), 2 + kPi, 1e-15);
  // inverse of the precision matrix [[a, b], [b, a]] / (pi (2 + pi)) is the covariance
  const double scale = kPi * (2 + kPi);
  const double det = (a * a - b * b) / (scale * scale);
  const double cov_xx = (a / scale) / det, cov_xy = (-b / scale) / det;
  EXPECT_NEAR(cov_xx, kDayOneMarginalVariance, 1e-12);
  EXPECT_NEAR(cov_xy / cov_xx, kDayOneCorrelation, 1e-12);
  EXPECT_NEAR(kDayOneCorrelation, 0.241453, 1e-6);
}

TEST(StarParams, Identities) {
  const ModelParams params{1000, 1, 0.5};
  const auto s = star_params(params, 0.3, 0.3, 0.3, 0, 0);
  EXPECT_NEAR(s.r_star, 0.5 + 1 / (4 * std::sqrt(kPi * 0.25 * 1000)), 1e-15);
  const auto t = star_params({1000, 2, 0.4}, 0.1, 0.1, -0.2, 5.0, 5.0);
  EXPECT_NEAR(t.mu_star, -2 * 0.4 * 2 * 1000 / kPi, 1e-9);
  EXPECT_NEAR(s.sigma, std::sqrt((2 - 2 / kPi) * 0.25) * 1000, 1e-9);
  EXPECT_NEAR(s.sigma, 583.82, 0.01);
  for (auto [a0, a1] : {std::pair{0.0, 0.0}, {0.4, -0.3}, {-1.0, 2.0}}) {
    const ModelParams q{777, 3, 0.3};
    const auto u = star_params(q, a0, a1, 0.25, 1, 2);
    EXPECT_NEAR(u.r_star - u.b_star, (2 * 0.3 * 3 + a0 - a1) / (2 * std::sqrt(kPi * 0.3 * 0.7 * 777)), 1e-12);
  }
}

TEST(DayTwo, Examples) {
  const ModelParams params{1000, 0, 0.5};
  const auto z = day_two_expectations(params, 0);
  EXPECT_NEAR(z.e_r2, 1000, 1e-9);
  EXPECT_NEAR(z.e_r0_r2 / 1000, 1 - reference_cdf(std::sqrt(2 / kPi)), 1e-12);
  EXPECT_NEAR(z.e_r0_r2 / 1000, 0.2124687, 1e-7);
  EXPECT_NEAR(day_two_expectations(params, 1000000).e_r2, 2000, 1e-6);
  for (long l : {3L, 40L, 250L}) {
    EXPECT_NEAR(day_two_expectations(params, -l).e_r2 - 1000, -(day_two_expectations(params, l).e_r2 - 1000), 1e-9);
  }
}

TEST(DayTwo, ClosedFormMatchesQuadrature) {
  const ModelParams params{1000, 0, 0.5};
  const double a = std::sqrt(2 / kPi);
  for (long lead : {-300L, -40L, 7L, 55L, 400L}) {
    const auto d = day_two_expectations(params, lead);
    const double integral = boost::math::quadrature::gauss_kronrod<double, 61>::integrate(
        [a](double u) { return normal_pdf(u - a); }, -d.eta, d.eta, 15, 1e-12);
    EXPECT_NEAR(d.e_r2, 1000 + 1000 * integral, 1e-7) << lead;
    EXPECT_NEAR(d.e_r0_r2 + d.e_b0_r2, d.e_r2, 1e-7);
  }
}

TEST(DayTwo, MonotoneAndBounded) {
  const ModelParams params{500, 0, 0.3};
  double prev = -1;
  for (long l = -2000; l <= 2000; l += 13) {
    const double v = day_two_expectations(params, l).e_r2;
    EXPECT_GE(v, prev - 1e-9);
    EXPECT_GE(v, 0.0);
    EXPECT_LE(v, 1000.0);
    prev = v;
  }
}

TEST(DayThree, Margin) {
  const ModelParams params{1000, 0, 0.5};
  EXPECT_FALSE(day_three_margin(params, 1000, 1000).safe);
  EXPECT_EQ(day_three_margin(params, 1000, 1000).predicted_margin, 0.0);
  const auto m = day_three_margin(params, 1200, 800);
  EXPECT_DOUBLE_EQ(m.predicted_margin, 200.0);
  EXPECT_NEAR(m.threshold, 10 * std::sqrt(1000.0) * std::pow(std::log(1000.0), 2), 1e-9);
  EXPECT_FALSE(m.safe);  // 200 is far below 10 sqrt(n) (log n)^2 at n = 1000
  EXPECT_TRUE(day_three_margin(params, 1200, 800, 0.1, 1.0).safe);
  EXPECT_DOUBLE_EQ(day_three_margin({1000, 0, 0.7}, 1200, 800).predicted_margin, 0.7 * 400);
  EXPECT_THROW(day_three_margin(params, 1000, 999), InvalidInput);
}

TEST(Analytic, FiniteAcrossP) {
  for (double p : {1e-6, 1e-3, 0.2, 0.5, 0.9, 1 - 1e-6}) {
    const ModelParams params{2000, 2, p};
    EXPECT_TRUE(std::isfinite(win_probability(params)));
    EXPECT_TRUE(std::isfinite(day_one_density(params, 1000, 1000)));
    const auto s = star_params(params, 0.1, 0.2, 0.3, 1, -1);
    EXPECT_TRUE(std::isfinite(s.r_star) && std::isfinite(s.mu_star) && std::isfinite(s.sigma));
    const auto d = day_two_expectations(params, 17);
    EXPECT_TRUE(std::isfinite(d.e_r2) && std::isfinite(d.e_r0_r2));
    EXPECT_TRUE(std::isfinite(chop_probability_approx(2000, 1, p, 0.1, 0)));
  }
}

TEST(Analytic, RegimeAnnotation) {
  // the p window is empty until log n exceeds 2^16, so no simulable size is inside it
  EXPECT_FALSE(in_theorem_regime({100000, 1, 0.5}));
  EXPECT_FALSE(in_theorem_regime({1L << 62, 1, 0.5}));
  EXPECT_FALSE(in_theorem_regime({1000, 5, 0.5}));
}
