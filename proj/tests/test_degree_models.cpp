// SPDX-License-Identifier: Apache-2.0
#include <gtest/gtest.h>

#include <cmath>
#include <map>
#include <numeric>

#include <boost/math/distributions/chi_squared.hpp>
#include <boost/random/normal_distribution.hpp>
#include <boost/random/uniform_01.hpp>

#include "majdyn/degree_models.hpp"
#include "majdyn/normal.hpp"

using namespace majdyn;

namespace {

// Pearson statistic over cells with expected count >= 5 (the rest pooled),
// compared with the 0.99 chi-square quantile.
bool chi_square_ok(const std::map<long, double>& observed, const std::function<double(long)>& prob, long lo, long hi,
                   double draws) {
  double stat = 0, pooled_obs = 0, pooled_exp = 0;
  int cells = 0;
  for (long k = lo; k <= hi; ++k) {
    const double e = prob(k) * draws;
    const auto it = observed.find(k);
    const double o = it == observed.end() ? 0.0 : it->second;
    if (e < 5) {
      pooled_obs += o;
      pooled_exp += e;
      continue;
    }
    stat += (o - e) * (o - e) / e;
    ++cells;
  }
  if (pooled_exp >= 5) {
    stat += (pooled_obs - pooled_exp) * (pooled_obs - pooled_exp) / pooled_exp;
    ++cells;
  }
  const boost::math::chi_squared dist(cells - 1);
  return stat <= boost::math::quantile(dist, 0.99);
}

}  // namespace

TEST(TrueModel, ForcedAndHandshake) {
  EXPECT_EQ(sample_true(2, 1.0, 3).degrees, (std::vector<long>{1, 1}));
  EXPECT_EQ(sample_true(5, 0.0, 3).degrees, std::vector<long>(5, 0));
  for (std::uint64_t s = 0; s < 50; ++s) {
    EXPECT_TRUE(sample_true(37, 0.41, s).even_sum());
    const auto b = sample_true_bip(13, 21, 0.3, s);
    EXPECT_EQ(b.s.size(), 13u);
    EXPECT_EQ(b.t.size(), 21u);
    EXPECT_TRUE(b.equal_sums());
    EXPECT_TRUE(b.in_range());
  }
}

TEST(TrueModel, MeanDegree) {
  const long n = 2000;
  const int samples = 5000;
  KahanSum acc;
  for (int s = 0; s < samples; ++s) acc.add(static_cast<double>(sample_true(n, 0.5, derive_seed(77, s)).sum()) / n);
  const double mean = acc.value() / samples;
  // mean degree 2|E|/n has variance 2 p (1 - p) (n - 1) / n per graph
  const double se = std::sqrt(2 * 0.25 * (n - 1) / n / samples);
  EXPECT_NEAR(mean, 0.5 * (n - 1), 4 * se);
}

TEST(ModelB, DegenerateP) {
  EXPECT_EQ(sample_B(6, 0.0, 1).degrees, std::vector<long>(6, 0));
  EXPECT_EQ(sample_B(6, 1.0, 1).degrees, std::vector<long>(6, 5));
  const auto b = sample_B_bip(3, 4, 1.0, 9);
  EXPECT_EQ(b.s, std::vector<long>(3, 4));
  EXPECT_EQ(b.t, std::vector<long>(4, 3));
  EXPECT_THROW(sample_B(5, -0.1, 1), InvalidParameters);
}

TEST(ModelB, CoordinateHistogram) {
  std::map<long, double> hist;
  double draws = 0;
  for (std::uint64_t s = 0; draws < 1e5; ++s)
    for (long x : sample_B(3000, 0.3, derive_seed(5, s)).degrees) {
      hist[x] += 1;
      draws += 1;
    }
  const auto pmf = binom_pmf(2999, 0.3);
  EXPECT_TRUE(chi_square_ok(hist, [&](long k) { return pmf.prob(k); }, 0, 2999, draws));
}

TEST(ModelE, ParityAndEqualSums) {
  SamplerStats st;
  for (std::uint64_t s = 0; s < 200; ++s) {
    EXPECT_TRUE(sample_E(31, 0.37, s, &st).even_sum());
    EXPECT_GE(st.attempts, 1u);
    const auto b = sample_E_bip(7, 11, 0.4, s, &st);
    EXPECT_TRUE(b.equal_sums());
    EXPECT_TRUE(b.in_range());
  }
}

TEST(ModelE, TwoVertexLawIsExact) {
  // even sum forces d1 = d2; P[d1 = 1 | even] = p^2 / (p^2 + (1 - p)^2)
  const double p = 0.3;
  std::map<long, double> hist;
  const int draws = 40000;
  for (int s = 0; s < draws; ++s) {
    const auto d = sample_E(2, p, derive_seed(11, s));
    ASSERT_EQ(d.degrees[0], d.degrees[1]);
    hist[d.degrees[0]] += 1;
  }
  const double one = p * p / (p * p + (1 - p) * (1 - p));
  EXPECT_TRUE(chi_square_ok(hist, [&](long k) { return k == 1 ? one : 1 - one; }, 0, 1, draws));
}

TEST(ModelE, FirstCoordinateMatchesParityOracle) {
  const long n = 100;
  for (double p : {0.5, 0.02}) {
    std::map<long, double> hist;
    const int draws = 100000;
    for (int s = 0; s < draws; ++s) hist[sample_E(n, p, derive_seed(12, s)).degrees[0]] += 1;
    const auto first = binom_pmf(n - 1, p);
    const double rest_even = binom_even_probability((n - 1) * (n - 1), p);
    const double all_even = binom_even_probability(n * (n - 1), p);
    auto law = [&](long k) { return first.prob(k) * (k % 2 == 0 ? rest_even : 1 - rest_even) / all_even; };
    EXPECT_TRUE(chi_square_ok(hist, law, 0, n - 1, draws)) << p;
  }
}

TEST(ModelE, BipartiteMarginalMatchesEnumeration) {
  // m = n = 2: s1, s2, t1, t2 iid Bin(2, p) conditioned on s1 + s2 = t1 + t2
  const double p = 0.3;
  const auto b = binom_pmf(2, p);
  std::vector<double> law(3, 0.0);
  double z = 0;
  for (int s1 = 0; s1 <= 2; ++s1)
    for (int s2 = 0; s2 <= 2; ++s2)
      for (int t1 = 0; t1 <= 2; ++t1)
        for (int t2 = 0; t2 <= 2; ++t2) {
          if (s1 + s2 != t1 + t2) continue;
          const double w = b.prob(s1) * b.prob(s2) * b.prob(t1) * b.prob(t2);
          law[static_cast<std::size_t>(s1)] += w;
          z += w;
        }
  std::map<long, double> hist;
  const int draws = 50000;
  for (int s = 0; s < draws; ++s) hist[sample_E_bip(2, 2, p, derive_seed(13, s)).s[0]] += 1;
  EXPECT_TRUE(chi_square_ok(hist, [&](long k) { return law[static_cast<std::size_t>(k)] / z; }, 0, 2, draws));
}

TEST(ModelE, BudgetExhaustion) {
  EXPECT_THROW(sample_E_bip(50, 50, 0.5, 1, nullptr, 1) , SamplerExhausted);
  SamplerStats st;
  double attempts = 0;
  for (int s = 0; s < 2000; ++s) {
    sample_E(21, 0.5, derive_seed(14, s), &st);
    attempts += static_cast<double>(st.attempts);
  }
  EXPECT_NEAR(attempts / 2000, 2.0, 0.15);  // acceptance about 1/2
}

TEST(Hypergeometric, MatchesExactLaw) {
  for (auto [draws, marked, total] : {std::tuple{10L, 4L, 30L}, {300L, 900L, 2000L}, {5L, 5L, 5L}, {7L, 0L, 9L}}) {
    Xoshiro256 eng(static_cast<std::uint64_t>(draws * 31 + marked));
    std::map<long, double> hist;
    const int n = 60000;
    for (int i = 0; i < n; ++i) hist[sample_hypergeometric(draws, marked, total, eng)] += 1;
    auto law = [&](long k) {
      return std::exp(log_choose(double(marked), double(k)) + log_choose(double(total - marked), double(draws - k)) -
                      log_choose(double(total), double(draws)));
    };
    const long lo = std::max(0L, draws - (total - marked)), hi = std::min(draws, marked);
    if (lo == hi) {
      EXPECT_EQ(hist.size(), 1u);
      EXPECT_EQ(hist.begin()->first, lo);
    } else {
      EXPECT_TRUE(chi_square_ok(hist, law, lo, hi, n)) << draws << " " << marked;
    }
  }
}

TEST(ModelE, CountsGivenSum) {
  Xoshiro256 eng(4);
  for (int i = 0; i < 500; ++i) {
    const auto c = sample_counts_given_sum(6, 5, 17, eng);
    EXPECT_EQ(std::accumulate(c.begin(), c.end(), 0L), 17);
    for (long x : c) {
      EXPECT_GE(x, 0);
      EXPECT_LE(x, 5);
    }
  }
}

TEST(ModelI, OutputsInE) {
  SamplerStats st;
  for (std::uint64_t s = 0; s < 100; ++s) {
    EXPECT_TRUE(sample_I(40, 0.3, s, &st).even_sum());
    EXPECT_GT(st.p_used, 0.0);
    EXPECT_LT(st.p_used, 1.0);
    EXPECT_TRUE(sample_I_bip(5, 9, 0.6, s).equal_sums());
  }
  EXPECT_THROW(sample_I(10, 1.0, 1), InvalidParameters);
}

TEST(ModelI, PPrimeVariance) {
  const long n = 500;
  const double p = 0.4;
  const int draws = 100000;
  SamplerStats st;
  KahanSum s1, s2;
  for (int s = 0; s < draws; ++s) {
    sample_I(n, p, derive_seed(15, s), &st);
    s1.add(st.p_used - p);
    s2.add((st.p_used - p) * (st.p_used - p));
  }
  const double mean = s1.value() / draws;
  const double var = s2.value() / draws - mean * mean;
  const double target = p * (1 - p) / (static_cast<double>(n) * n - n);
  EXPECT_NEAR(var / target, 1.0, 0.05);
}

TEST(Summaries, Basic) {
  const std::vector<long> d{1, 2, 3, 6};
  const auto s = summarize(d);
  EXPECT_DOUBLE_EQ(s.sum, 12);
  EXPECT_DOUBLE_EQ(s.variance, 3.5);
  EXPECT_DOUBLE_EQ(s.max, 6);
  EXPECT_THROW(summarize(std::span<const long>{}), InvalidInput);
}

TEST(Kolmogorov, OneDimensional) {
  const std::vector<double> a{0.3, 1.2, -4.0, 2.2}, zero{0.0}, one{1.0};
  EXPECT_EQ(kolmogorov_distance(a, a), 0.0);
  EXPECT_EQ(kolmogorov_distance(zero, one), 1.0);
  EXPECT_THROW(kolmogorov_distance(std::span<const double>{}, a), InvalidInput);
  const std::vector<double> u{0.5};
  EXPECT_DOUBLE_EQ(kolmogorov_distance(u, [](double x) { return std::clamp(x, 0.0, 1.0); }), 0.5);
  Xoshiro256 eng(21);
  boost::random::normal_distribution<double> z;
  std::vector<double> big(100000);
  for (auto& x : big) x = z(eng);
  EXPECT_LE(kolmogorov_distance(big, [](double x) { return normal_cdf(x); }), 0.01);
}

TEST(Kolmogorov, TwoSampleMatchesBruteForce) {
  Xoshiro256 eng(8);
  boost::random::uniform_01<double> u;
  std::vector<double> a(37), b(53);
  for (auto& x : a) x = std::floor(10 * u(eng));
  for (auto& x : b) x = std::floor(10 * u(eng)) + 0.5 * std::floor(2 * u(eng));
  double brute = 0;
  for (double t = -1; t <= 11; t += 0.25) {
    const double fa = static_cast<double>(std::count_if(a.begin(), a.end(), [&](double x) { return x <= t; })) / 37;
    const double fb = static_cast<double>(std::count_if(b.begin(), b.end(), [&](double x) { return x <= t; })) / 53;
    brute = std::max(brute, std::abs(fa - fb));
  }
  EXPECT_NEAR(kolmogorov_distance(a, b), brute, 1e-15);
}

TEST(Kolmogorov, TwoDimensional) {
  const std::vector<std::array<double, 2>> a{{0, 0}, {1, 2}, {2, 1}};
  EXPECT_EQ(kolmogorov_distance_2d(a, a), 0.0);
  const std::vector<std::array<double, 2>> p{{0, 0}}, q{{1, 1}};
  EXPECT_EQ(kolmogorov_distance_2d(p, q), 1.0);
  // one point at (0.5, 0.5) vs the uniform square: sup is 1 - 0.25 at the corner
  const std::vector<std::array<double, 2>> c{{0.5, 0.5}};
  auto unif = [](double x) { return std::clamp(x, 0.0, 1.0); };
  EXPECT_NEAR(kolmogorov_distance_2d(c, unif, unif), 0.75, 1e-15);

  Xoshiro256 eng(31);
  boost::random::uniform_01<double> u;
  std::vector<std::array<double, 2>> pts(300);
  for (auto& pt : pts) pt = {u(eng), u(eng)};
  // brute force over a fine grid is a lower bound that converges to the exact value
  double brute = 0;
  for (int i = 0; i <= 400; ++i)
    for (int j = 0; j <= 400; ++j) {
      const double x = i / 400.0, y = j / 400.0;
      const double emp = static_cast<double>(std::count_if(pts.begin(), pts.end(), [&](const auto& pt) {
                           return pt[0] <= x && pt[1] <= y;
                         })) / 300.0;
      brute = std::max(brute, std::abs(emp - x * y));
    }
  const double exact = kolmogorov_distance_2d(pts, unif, unif);
  EXPECT_GE(exact, brute - 1e-12);
  EXPECT_LE(exact, brute + 2.0 / 400);
  EXPECT_LE(exact, 0.15);
}
