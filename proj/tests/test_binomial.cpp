// SPDX-License-Identifier: Apache-2.0
#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include <boost/multiprecision/cpp_bin_float.hpp>
#include <boost/multiprecision/cpp_int.hpp>

#include "majdyn/analytic.hpp"
#include "majdyn/binomial.hpp"

using namespace majdyn;
using boost::multiprecision::cpp_int;
using Big = boost::multiprecision::cpp_bin_float_50;

namespace {

cpp_int choose(unsigned n, unsigned k) {
  cpp_int r = 1;
  for (unsigned i = 1; i <= k; ++i) r = r * (n - k + i) / i;
  return r;
}

// exact P[X >= Y] by brute enumeration of both binomials, in 50-digit floats
double brute_ge(int nx, double qx, int ny, double qy) {
  Big total = 0;
  for (int a = 0; a <= nx; ++a)
    for (int b = 0; b <= ny && b <= a; ++b) {
      Big pa = Big(choose(nx, a)) * boost::multiprecision::pow(Big(qx), a) * boost::multiprecision::pow(1 - Big(qx), nx - a);
      Big pb = Big(choose(ny, b)) * boost::multiprecision::pow(Big(qy), b) * boost::multiprecision::pow(1 - Big(qy), ny - b);
      total += pa * pb;
    }
  return static_cast<double>(total);
}

}  // namespace

TEST(BinomPmf, SmallCases) {
  auto p0 = binom_pmf(0, 0.3);
  EXPECT_EQ(p0.size(), 1u);
  EXPECT_DOUBLE_EQ(p0.prob(0), 1.0);
  auto p2 = binom_pmf(2, 0.5);
  EXPECT_NEAR(p2.prob(0), 0.25, 1e-15);
  EXPECT_NEAR(p2.prob(1), 0.5, 1e-15);
  EXPECT_NEAR(p2.prob(2), 0.25, 1e-15);
  EXPECT_THROW(binom_pmf(3, 1.2), InvalidParameters);
  EXPECT_THROW(binom_pmf(-1, 0.2), InvalidParameters);
}

TEST(BinomPmf, CentralTermAgainstBigIntegers) {
  const Big exact = Big(choose(1000, 500)) / boost::multiprecision::pow(Big(2), 1000);
  const double got = binom_pmf(1000, 0.5).prob(500);
  EXPECT_NEAR(got / static_cast<double>(exact), 1.0, 1e-12);
}

TEST(BinomPmf, NormalizesAndHasBinomialMoments) {
  for (long n : {1L, 7L, 100L, 5000L, 100000L})
    for (double p : {0.01, 0.3, 0.5, 0.97}) {
      auto b = binom_pmf(n, p);
      EXPECT_NEAR(b.total_mass(), 1.0, 1e-10);
      EXPECT_NEAR(b.mean(), n * p, 1e-8 * n);
      EXPECT_NEAR(b.variance(), n * p * (1 - p), 1e-7 * n);
      EXPECT_TRUE(logconcavity_check(b));
    }
}

TEST(ExactGe, HandEnumerations) {
  EXPECT_NEAR(exact_ge_probability(2, 0, 0.5, 0.5), 11.0 / 16.0, 1e-15);
  EXPECT_NEAR(exact_ge_probability(17, 0, 1.0, 1.0), 1.0, 0.0);
  const Big central = Big(choose(2000, 1000)) / boost::multiprecision::pow(Big(2), 2001);
  EXPECT_NEAR(exact_ge_probability(1000, 0, 0.5, 0.5), 0.5 + static_cast<double>(central), 1e-12);
  EXPECT_NEAR(exact_ge_probability(1000, 0, 0.5, 0.5), 0.508921, 2e-6);  // rounded decimal of the same value
}

TEST(ExactGe, MatchesBruteForce) {
  for (auto [n, tau, q, qq] : {std::tuple{5, 1, 0.3, 0.4}, {12, -2, 0.6, 0.5}, {20, 3, 0.45, 0.55}, {9, 0, 0.1, 0.9}}) {
    const double brute = brute_ge(n + tau, q, n, qq);
    EXPECT_NEAR(exact_ge_probability(n, tau, q, qq) / brute, 1.0, 1e-12) << n << " " << tau;
  }
}

TEST(ExactGe, ComplementIdentity) {
  for (auto [n, tau, q, qq] : {std::tuple{40, 2, 0.3, 0.35}, {300, -3, 0.5, 0.5}, {1000, 1, 0.7, 0.69}}) {
    const auto c = compare_independent(binom_pmf(n + tau, q), binom_pmf(n, qq));
    const auto rev = compare_independent(binom_pmf(n, qq), binom_pmf(n + tau, q));
    EXPECT_NEAR(c.greater + c.equal + rev.greater, 1.0, 1e-12);
  }
}

TEST(ConditionedSplit, OneTrialEnumeration) {
  auto s = conditioned_split(1, 0, 0.5, 0.5);
  EXPECT_EQ(s.x_plus.size(), 1u);
  EXPECT_EQ(s.x_plus.offset(), 1);
  EXPECT_NEAR(1.0 - s.r, 0.25, 1e-15);  // P[X > Y]
  EXPECT_NEAR(s.x_minus.prob(0), 2.0 / 3.0, 1e-15);
  EXPECT_NEAR(s.y_minus.prob(0), 2.0 / 3.0, 1e-15);
}

TEST(ConditionedSplit, MixtureReconstructs) {
  auto s = conditioned_split(50, 1, 0.4, 0.45);
  auto x = binom_pmf(51, 0.4);
  auto y = binom_pmf(50, 0.45);
  for (long k = 0; k <= 51; ++k)
    EXPECT_NEAR(s.r * s.x_minus.prob(k) + (1 - s.r) * s.x_plus.prob(k), x.prob(k), 1e-12);
  for (long k = 0; k <= 50; ++k)
    EXPECT_NEAR(s.r_y * s.y_minus.prob(k) + (1 - s.r_y) * s.y_plus.prob(k), y.prob(k), 1e-12);
}

TEST(ConditionedSplit, DegenerateThrows) {
  EXPECT_THROW(conditioned_split(5, 0, 1.0, 1.0), DegenerateCondition);
}

TEST(ConditionedSplit, LogConcaveParts) {
  auto s = conditioned_split(60, 0, 0.5, 0.5);
  EXPECT_TRUE(logconcavity_check(s.x_plus));
  EXPECT_TRUE(logconcavity_check(s.x_minus));
  EXPECT_TRUE(logconcavity_check(s.y_plus));
  EXPECT_TRUE(logconcavity_check(s.y_minus));
}

TEST(ConditionedSplit, LargeNMean) {
  auto s = conditioned_split(10000, 0, 0.5, 0.5);
  EXPECT_NEAR(s.x_plus.mean(), 5028.21, 5 * std::pow(1e4, 0.25));
  EXPECT_NEAR(s.x_plus.total_mass(), 1.0, 1e-10);
}

TEST(LogConcavity, DetectsViolation) {
  const std::vector<double> w{0.4, 0.1, 0.5};
  EXPECT_FALSE(logconcavity_check(Pmf::from_probs(0, w)));
  const std::vector<double> gap{0.5, 0.0, 0.5};
  EXPECT_FALSE(logconcavity_check(Pmf::from_probs(0, gap)));
}

TEST(ConvolveSigned, Examples) {
  auto b = binom_pmf(2, 0.5);
  auto one = convolve_signed({{b, +1}});
  for (long k = 0; k <= 2; ++k) EXPECT_NEAR(one.prob(k), b.prob(k), 1e-15);
  auto diff = convolve_signed({{b, +1}, {b, -1}});
  EXPECT_EQ(diff.min_value(), -2);
  EXPECT_EQ(diff.max_value(), 2);
  const double expect[] = {1, 4, 6, 4, 1};
  for (long k = -2; k <= 2; ++k) EXPECT_NEAR(diff.prob(k), expect[k + 2] / 16.0, 1e-15);
  EXPECT_THROW(convolve_signed(std::span<const std::pair<Pmf, int>>{}), InvalidInput);
}

TEST(ConvolveSigned, MomentIdentity) {
  auto a = conditioned_split(80, 1, 0.5, 0.5);
  auto b = conditioned_split(80, -1, 0.4, 0.45);
  auto c = binom_pmf(33, 0.2);
  auto s = convolve_signed({{a.x_plus, +1}, {b.x_minus, -1}, {c, +1}, {a.y_minus, -1}});
  const double mean = a.x_plus.mean() - b.x_minus.mean() + c.mean() - a.y_minus.mean();
  const double var = a.x_plus.variance() + b.x_minus.variance() + c.variance() + a.y_minus.variance();
  EXPECT_NEAR(s.mean(), mean, 1e-9 * std::abs(mean) + 1e-9);
  EXPECT_NEAR(s.variance(), var, 1e-9 * var);
  EXPECT_NEAR(s.total_mass(), 1.0, 1e-10);
}

TEST(ShiftedDifference, Identities) {
  for (long m : {1L, 10L, 300L}) {
    auto sd = shifted_difference(m, 0.37, 0);
    EXPECT_NEAR(sd.tail, 0.5 + sd.point / 2, 1e-13);
  }
  auto one = shifted_difference(1, 0.5, 1);
  EXPECT_NEAR(one.point, 0.25, 1e-15);
  auto big = shifted_difference(1000, 0.5, 1);
  EXPECT_NEAR(big.tail, shifted_difference_tail_approx(1000, 0.5, 1), 5 * std::pow(1000.0, -0.75));
  EXPECT_NEAR(shifted_difference_tail_approx(1000, 0.5, 1), 0.491079, 1e-6);
  EXPECT_NEAR(big.point, shifted_difference_point_approx(1000, 0.5), 5 * std::pow(1000.0, -0.75));
  EXPECT_THROW(shifted_difference(5, 0.5, 6), InvalidParameters);
}

TEST(ChopProbability, ConvergesAtDeskScale) {
  for (long tau : {-3L, -1L, 0L, 1L, 3L}) {
    double prev = 1.0;
    for (long n : {1000L, 4000L, 16000L}) {
      const double err =
          std::abs(exact_ge_probability(n, tau, 0.5, 0.5) - chop_probability_approx(static_cast<double>(n), tau, 0.5, 0, 0));
      EXPECT_LE(err, 5 * std::pow(static_cast<double>(n), -0.75));
      if (err > 1e-12) {
        EXPECT_LT(err, prev);
      }
      prev = err;
    }
  }
}

TEST(ChopStatistics, VarianceConverges) {
  for (long n : {1000L, 4000L, 16000L}) {
    auto s = conditioned_split(n, 0, 0.5, 0.5);
    const auto mom = chop_moments_approx(static_cast<double>(n), 0.5);
    EXPECT_LE(std::abs(s.x_plus.variance() - mom.variance), 5 * std::pow(static_cast<double>(n), 0.75));
    EXPECT_LE(std::abs(s.x_plus.mean() - mom.mean_plus), 5 * std::pow(static_cast<double>(n), 0.25));
    EXPECT_LE(std::abs(s.x_minus.mean() - mom.mean_minus), 5 * std::pow(static_cast<double>(n), 0.25));
  }
}

TEST(BinomPmfCore, MatchesFullTableOnItsSupport) {
  for (long n : {1L, 40L, 999L, 100000L})
    for (double p : {1e-4, 0.03, 0.5, 0.9}) {
      const auto full = binom_pmf(n, p);
      const auto core = binom_pmf_core(n, p);
      EXPECT_LE(core.min_value(), static_cast<long>(n * p));
      EXPECT_GE(core.max_value(), std::min(n, static_cast<long>(std::ceil(n * p))));
      double dropped = 1.0;
      for (long k = core.min_value(); k <= core.max_value(); ++k) {
        EXPECT_NEAR(core.prob(k) / full.prob(k), 1.0, 1e-9) << n << " " << p << " " << k;
        dropped -= full.prob(k);
      }
      EXPECT_LT(dropped, 1e-13);
    }
}
