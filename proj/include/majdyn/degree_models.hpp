// SPDX-License-Identifier: Apache-2.0
//
// Degree-sequence models for G(n, p) and the bipartite G(m, n, p):
//   true        degree sequence of a sampled graph
//   B           independent binomial coordinates
//   E           B conditioned on even sum (graph) or equal side sums (bipartite)
//   I           E at a random p' ~ N(p, var), truncated to (0, 1)
// plus Kolmogorov distances for comparing samples.
#pragma once

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <cstdint>
#include <functional>
#include <numeric>
#include <span>
#include <vector>

#include <boost/random/normal_distribution.hpp>

#include "majdyn/binomial.hpp"
#include "majdyn/errors.hpp"
#include "majdyn/graph.hpp"
#include "majdyn/rng.hpp"

namespace majdyn {

struct DegreeSequence {
  std::vector<long> degrees;

  std::size_t size() const noexcept { return degrees.size(); }
  long sum() const noexcept { return std::accumulate(degrees.begin(), degrees.end(), 0L); }
  bool even_sum() const noexcept { return sum() % 2 == 0; }
  /// Every entry in [0, n - 1].
  bool in_range() const noexcept {
    const long n = static_cast<long>(degrees.size());
    return std::all_of(degrees.begin(), degrees.end(), [n](long d) { return d >= 0 && d <= n - 1; });
  }
};

/// Row sums s (m entries in [0, n]) and column sums t (n entries in [0, m]).
struct BipartiteDegreeSequence {
  std::vector<long> s;
  std::vector<long> t;

  long sum_s() const noexcept { return std::accumulate(s.begin(), s.end(), 0L); }
  long sum_t() const noexcept { return std::accumulate(t.begin(), t.end(), 0L); }
  bool equal_sums() const noexcept { return sum_s() == sum_t(); }
  bool in_range() const noexcept {
    const long m = static_cast<long>(s.size());
    const long n = static_cast<long>(t.size());
    return std::all_of(s.begin(), s.end(), [n](long d) { return d >= 0 && d <= n; }) &&
           std::all_of(t.begin(), t.end(), [m](long d) { return d >= 0 && d <= m; });
  }
};

/// Cost and mixing information for one draw.
struct SamplerStats {
  std::uint64_t attempts = 0;  ///< rejection rounds used (1 when no rejection)
  double p_used = 0.0;         ///< edge probability of the final stage (p' for model I)
};

inline constexpr std::uint64_t kDefaultRejectionBudget = 1'000'000'000ULL;

/// Inverse-cdf sampler for a Pmf. Mass below 2^-60 of the peak is dropped
/// from the table, which is beneath the resolution of a 53-bit uniform.
class DiscreteSampler {
 public:
  explicit DiscreteSampler(const Pmf& pmf) {
    const auto lw = pmf.log_weights();
    const double peak = *std::max_element(lw.begin(), lw.end());
    const double cut = peak - 60.0 * std::log(2.0);
    std::size_t lo = 0, hi = lw.size();
    while (lo < hi && lw[lo] < cut) ++lo;
    while (hi > lo && lw[hi - 1] < cut) --hi;
    offset_ = pmf.offset() + static_cast<long>(lo);
    cdf_.reserve(hi - lo);
    KahanSum acc;
    for (std::size_t i = lo; i < hi; ++i) {
      acc.add(std::exp(lw[i]));
      cdf_.push_back(acc.value());
    }
    const double total = cdf_.back();
    for (double& c : cdf_) c /= total;
    cdf_.back() = 1.0;
  }

  template <class Engine>
  long operator()(Engine& eng) const {
    const double u = static_cast<double>(eng() >> 11) * 0x1.0p-53;
    const auto it = std::upper_bound(cdf_.begin(), cdf_.end(), u);
    return offset_ + static_cast<long>(it - cdf_.begin());
  }

 private:
  long offset_ = 0;
  std::vector<double> cdf_;
};

/// Number of marked items among `draws` taken without replacement from
/// `total` items of which `marked` are marked. Inversion that starts at the
/// mode and alternates outward, so the cost is proportional to the spread.
template <class Engine>
long sample_hypergeometric(long draws, long marked, long total, Engine& eng) {
  const long lo = std::max(0L, draws - (total - marked));
  const long hi = std::min(draws, marked);
  if (lo == hi) return lo;
  auto log_pmf = [&](long k) {
    return log_choose(static_cast<double>(marked), static_cast<double>(k)) +
           log_choose(static_cast<double>(total - marked), static_cast<double>(draws - k)) -
           log_choose(static_cast<double>(total), static_cast<double>(draws));
  };
  const long mode = std::clamp(static_cast<long>(std::floor(static_cast<double>(draws + 1) *
                                                          static_cast<double>(marked + 1) /
                                                          static_cast<double>(total + 2))),
                               lo, hi);
  // ratio P(k + 1) / P(k)
  auto ratio = [&](long k) {
    return static_cast<double>(marked - k) * static_cast<double>(draws - k) /
           (static_cast<double>(k + 1) * static_cast<double>(total - marked - draws + k + 1));
  };
  double u = static_cast<double>(eng() >> 11) * 0x1.0p-53;
  const double pm = std::exp(log_pmf(mode));
  u -= pm;
  if (u <= 0.0) return mode;
  long up = mode, down = mode;
  double pu = pm, pd = pm;
  while (up < hi || down > lo) {
    if (up < hi) {
      pu *= ratio(up);
      ++up;
      u -= pu;
      if (u <= 0.0) return up;
    }
    if (down > lo) {
      pd /= ratio(down - 1);
      --down;
      u -= pd;
      if (u <= 0.0) return down;
    }
  }
  return mode;  // only reachable through rounding in the last ulp
}

/// Multivariate hypergeometric split of `total` marked cells among `parts`
/// groups of `group_size` cells each: the conditional law of iid
/// Bin(group_size, q) counts given their sum.
template <class Engine>
std::vector<long> sample_counts_given_sum(long parts, long group_size, long total, Engine& eng) {
  std::vector<long> out(static_cast<std::size_t>(parts), 0);
  long cells = parts * group_size;
  long left = total;
  for (long i = 0; i + 1 < parts && left > 0; ++i) {
    const long k = sample_hypergeometric(group_size, left, cells, eng);
    out[static_cast<std::size_t>(i)] = k;
    left -= k;
    cells -= group_size;
  }
  if (parts > 0) out.back() += left;
  return out;
}

// ---- true model --------------------------------------------------------------

inline DegreeSequence sample_true(long n, double p, std::uint64_t seed) {
  if (n < 2) throw InvalidParameters("sample_true: need at least two vertices");
  const auto g = sample_gnp_vertices(static_cast<std::size_t>(n), p, seed);
  DegreeSequence d;
  d.degrees.assign(g.degrees().begin(), g.degrees().end());
  return d;
}

/// Degree sequences of a random m x n bipartite graph with edge probability p.
inline BipartiteDegreeSequence sample_true_bip(long m, long n, double p, std::uint64_t seed) {
  if (m < 1 || n < 1) throw InvalidParameters("sample_true_bip: need m, n >= 1");
  if (!(p >= 0.0 && p <= 1.0)) throw InvalidParameters("sample_true_bip: p must lie in [0, 1]");
  Xoshiro256 eng(seed);
  const BernoulliWords bern(p);
  BipartiteDegreeSequence out;
  out.s.assign(static_cast<std::size_t>(m), 0);
  out.t.assign(static_cast<std::size_t>(n), 0);
  const std::size_t words = words_for(static_cast<std::size_t>(n));
  for (long i = 0; i < m; ++i) {
    for (std::size_t w = 0; w < words; ++w) {
      std::uint64_t bits = bern(eng);
      const std::size_t lo = w * 64;
      if (lo + 64 > static_cast<std::size_t>(n)) bits &= (1ULL << (static_cast<std::size_t>(n) - lo)) - 1;
      out.s[static_cast<std::size_t>(i)] += std::popcount(bits);
      while (bits) {
        out.t[lo + static_cast<std::size_t>(std::countr_zero(bits))] += 1;
        bits &= bits - 1;
      }
    }
  }
  return out;
}

// ---- independent model -------------------------------------------------------

namespace detail {

inline void check_p(double p, const char* who) {
  if (!(p >= 0.0 && p <= 1.0)) throw InvalidParameters(std::string(who) + ": p must lie in [0, 1]");
}

template <class Engine>
std::vector<long> iid_binomials(long count, long trials, double p, Engine& eng) {
  const DiscreteSampler draw(binom_pmf_core(trials, p));
  std::vector<long> out(static_cast<std::size_t>(count));
  for (auto& x : out) x = draw(eng);
  return out;
}

}  // namespace detail

/// n iid Bin(n - 1, p) coordinates.
inline DegreeSequence sample_B(long n, double p, std::uint64_t seed) {
  detail::check_p(p, "sample_B");
  if (n < 1) throw InvalidParameters("sample_B: n must be positive");
  Xoshiro256 eng(seed);
  return {detail::iid_binomials(n, n - 1, p, eng)};
}

/// m iid Bin(n, p) row sums and n iid Bin(m, p) column sums.
inline BipartiteDegreeSequence sample_B_bip(long m, long n, double p, std::uint64_t seed) {
  detail::check_p(p, "sample_B_bip");
  if (m < 1 || n < 1) throw InvalidParameters("sample_B_bip: need m, n >= 1");
  Xoshiro256 eng(seed);
  BipartiteDegreeSequence out;
  out.s = detail::iid_binomials(m, n, p, eng);
  out.t = detail::iid_binomials(n, m, p, eng);
  return out;
}

// ---- conditioned model -------------------------------------------------------

namespace detail {

template <class Engine>
DegreeSequence sample_E_with(long n, double p, Engine& eng, std::uint64_t budget, SamplerStats* stats) {
  const DiscreteSampler draw(binom_pmf_core(n - 1, p));
  DegreeSequence d;
  d.degrees.resize(static_cast<std::size_t>(n));
  for (std::uint64_t attempt = 1; attempt <= budget; ++attempt) {
    long sum = 0;
    for (auto& x : d.degrees) sum += (x = draw(eng));
    if (sum % 2 == 0) {
      if (stats) {
        stats->attempts = attempt;
        stats->p_used = p;
      }
      return d;
    }
  }
  throw SamplerExhausted("sample_E: rejection budget exhausted");
}

// Rejection acts on the pair of side sums, each Bin(mn, p); given equal sums
// the two sides are independent count vectors conditioned on their total.
template <class Engine>
BipartiteDegreeSequence sample_E_bip_with(long m, long n, double p, Engine& eng, std::uint64_t budget,
                                          SamplerStats* stats) {
  const DiscreteSampler total(binom_pmf_core(m * n, p));
  for (std::uint64_t attempt = 1; attempt <= budget; ++attempt) {
    const long a = total(eng);
    const long b = total(eng);
    if (a != b) continue;
    BipartiteDegreeSequence out;
    out.s = sample_counts_given_sum(m, n, a, eng);
    out.t = sample_counts_given_sum(n, m, a, eng);
    if (stats) {
      stats->attempts = attempt;
      stats->p_used = p;
    }
    return out;
  }
  throw SamplerExhausted("sample_E_bip: rejection budget exhausted");
}

}  // namespace detail

/// B conditioned on even sum, by rejection.
inline DegreeSequence sample_E(long n, double p, std::uint64_t seed, SamplerStats* stats = nullptr,
                               std::uint64_t budget = kDefaultRejectionBudget) {
  detail::check_p(p, "sample_E");
  if (n < 1) throw InvalidParameters("sample_E: n must be positive");
  Xoshiro256 eng(seed);
  return detail::sample_E_with(n, p, eng, budget, stats);
}

/// Bipartite B conditioned on equal side sums.
inline BipartiteDegreeSequence sample_E_bip(long m, long n, double p, std::uint64_t seed,
                                            SamplerStats* stats = nullptr,
                                            std::uint64_t budget = kDefaultRejectionBudget) {
  detail::check_p(p, "sample_E_bip");
  if (m < 1 || n < 1) throw InvalidParameters("sample_E_bip: need m, n >= 1");
  Xoshiro256 eng(seed);
  return detail::sample_E_bip_with(m, n, p, eng, budget, stats);
}

// ---- integrated model --------------------------------------------------------

namespace detail {

template <class Engine>
double truncated_normal_unit(double mean, double variance, Engine& eng, std::uint64_t budget) {
  boost::random::normal_distribution<double> z(mean, std::sqrt(variance));
  for (std::uint64_t i = 0; i < budget; ++i) {
    const double x = z(eng);
    if (x > 0.0 && x < 1.0) return x;
  }
  throw SamplerExhausted("sample_I: truncated normal budget exhausted");
}

inline void check_open_p(double p, const char* who) {
  if (!(p > 0.0 && p < 1.0)) throw InvalidParameters(std::string(who) + ": p must lie in (0, 1)");
}

}  // namespace detail

/// p' ~ N(p, p(1-p)/(n^2 - n)) truncated to (0, 1), then a draw from E at p'.
inline DegreeSequence sample_I(long n, double p, std::uint64_t seed, SamplerStats* stats = nullptr,
                               std::uint64_t budget = kDefaultRejectionBudget) {
  detail::check_open_p(p, "sample_I");
  if (n < 2) throw InvalidParameters("sample_I: n must be at least 2");
  Xoshiro256 eng(seed);
  const double nd = static_cast<double>(n);
  const double q = detail::truncated_normal_unit(p, p * (1.0 - p) / (nd * nd - nd), eng, budget);
  return detail::sample_E_with(n, q, eng, budget, stats);
}

/// Bipartite analogue with variance p(1-p)/(2mn).
inline BipartiteDegreeSequence sample_I_bip(long m, long n, double p, std::uint64_t seed,
                                            SamplerStats* stats = nullptr,
                                            std::uint64_t budget = kDefaultRejectionBudget) {
  detail::check_open_p(p, "sample_I_bip");
  if (m < 1 || n < 1) throw InvalidParameters("sample_I_bip: need m, n >= 1");
  Xoshiro256 eng(seed);
  const double q = detail::truncated_normal_unit(
      p, p * (1.0 - p) / (2.0 * static_cast<double>(m) * static_cast<double>(n)), eng, budget);
  return detail::sample_E_bip_with(m, n, q, eng, budget, stats);
}

// ---- summaries ---------------------------------------------------------------

struct DegreeSummary {
  double sum;
  double variance;  ///< population variance of the entries
  double max;
};

inline DegreeSummary summarize(std::span<const long> d) {
  if (d.empty()) throw InvalidInput("summarize: empty sequence");
  KahanSum s;
  long mx = d.front();
  for (long x : d) {
    s.add(static_cast<double>(x));
    mx = std::max(mx, x);
  }
  const double mean = s.value() / static_cast<double>(d.size());
  KahanSum v;
  for (long x : d) v.add((static_cast<double>(x) - mean) * (static_cast<double>(x) - mean));
  return {s.value(), v.value() / static_cast<double>(d.size()), static_cast<double>(mx)};
}

// ---- Kolmogorov distance -----------------------------------------------------

/// sup_a |F_n(a) - F(a)| for a continuous reference cdf, by a sorted sweep.
inline double kolmogorov_distance(std::span<const double> sample, const std::function<double(double)>& cdf) {
  if (sample.empty()) throw InvalidInput("kolmogorov_distance: empty sample");
  std::vector<double> x(sample.begin(), sample.end());
  std::sort(x.begin(), x.end());
  const double n = static_cast<double>(x.size());
  double d = 0.0;
  std::size_t i = 0;
  while (i < x.size()) {
    std::size_t j = i;
    while (j < x.size() && x[j] == x[i]) ++j;
    const double f = cdf(x[i]);
    d = std::max({d, static_cast<double>(j) / n - f, f - static_cast<double>(i) / n});
    i = j;
  }
  return d;
}

/// Two-sample distance sup_a |F_a(a) - F_b(a)|.
inline double kolmogorov_distance(std::span<const double> a, std::span<const double> b) {
  if (a.empty() || b.empty()) throw InvalidInput("kolmogorov_distance: empty sample");
  std::vector<double> x(a.begin(), a.end()), y(b.begin(), b.end());
  std::sort(x.begin(), x.end());
  std::sort(y.begin(), y.end());
  const double na = static_cast<double>(x.size()), nb = static_cast<double>(y.size());
  std::size_t i = 0, j = 0;
  double d = 0.0;
  while (i < x.size() || j < y.size()) {
    double v;
    if (j == y.size() || (i < x.size() && x[i] <= y[j]))
      v = x[i];
    else
      v = y[j];
    while (i < x.size() && x[i] == v) ++i;
    while (j < y.size() && y[j] == v) ++j;
    d = std::max(d, std::abs(static_cast<double>(i) / na - static_cast<double>(j) / nb));
  }
  return d;
}

namespace detail {

// Sorted distinct values and the rank of each input among them.
inline std::vector<double> distinct_sorted(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  v.erase(std::unique(v.begin(), v.end()), v.end());
  return v;
}

inline std::size_t rank_of(const std::vector<double>& grid, double v) {
  return static_cast<std::size_t>(std::lower_bound(grid.begin(), grid.end(), v) - grid.begin());
}

// counts[(i + 1) * (M + 1) + (j + 1)] = #{points with x <= gx[i], y <= gy[j]}; row
// and column 0 stand for -infinity.
inline std::vector<std::uint32_t> orthant_counts(std::span<const std::array<double, 2>> pts,
                                                 const std::vector<double>& gx, const std::vector<double>& gy) {
  const std::size_t w = gy.size() + 1;
  std::vector<std::uint32_t> c((gx.size() + 1) * w, 0);
  for (const auto& pt : pts) {
    // a point counts for every corner at or beyond it
    const std::size_t i = rank_of(gx, pt[0]) + 1;
    const std::size_t j = rank_of(gy, pt[1]) + 1;
    if (i <= gx.size() && j <= gy.size()) ++c[i * w + j];
  }
  for (std::size_t i = 1; i <= gx.size(); ++i)
    for (std::size_t j = 1; j <= gy.size(); ++j) c[i * w + j] += c[(i - 1) * w + j] + c[i * w + j - 1] - c[(i - 1) * w + j - 1];
  return c;
}

}  // namespace detail

/// Exact sup over orthants (-inf, a] x (-inf, b] of |F_n - F| against the
/// product cdf F(a, b) = cdf_x(a) cdf_y(b) with continuous marginals.
///
/// F_n is constant on each cell of the grid of sample coordinates, so the
/// supremum of F_n - F sits at the closed lower-left corner of a cell and the
/// supremum of F - F_n is approached at its open upper-right corner.
inline double kolmogorov_distance_2d(std::span<const std::array<double, 2>> sample,
                                     const std::function<double(double)>& cdf_x,
                                     const std::function<double(double)>& cdf_y) {
  if (sample.empty()) throw InvalidInput("kolmogorov_distance_2d: empty sample");
  std::vector<double> xs, ys;
  for (const auto& p : sample) {
    xs.push_back(p[0]);
    ys.push_back(p[1]);
  }
  const auto gx = detail::distinct_sorted(std::move(xs));
  const auto gy = detail::distinct_sorted(std::move(ys));
  const auto counts = detail::orthant_counts(sample, gx, gy);
  const std::size_t w = gy.size() + 1;
  // marginal cdf values at -inf, every grid point, and +inf
  std::vector<double> fx(gx.size() + 2), fy(gy.size() + 2);
  fx.front() = 0.0;
  fx.back() = 1.0;
  fy.front() = 0.0;
  fy.back() = 1.0;
  for (std::size_t i = 0; i < gx.size(); ++i) fx[i + 1] = cdf_x(gx[i]);
  for (std::size_t j = 0; j < gy.size(); ++j) fy[j + 1] = cdf_y(gy[j]);
  const double inv = 1.0 / static_cast<double>(sample.size());
  double d = 0.0;
  for (std::size_t i = 0; i <= gx.size(); ++i) {
    for (std::size_t j = 0; j <= gy.size(); ++j) {
      const double emp = static_cast<double>(counts[i * w + j]) * inv;
      d = std::max(d, emp - fx[i] * fy[j]);
      d = std::max(d, fx[i + 1] * fy[j + 1] - emp);
    }
  }
  return d;
}

/// Two-sample distance in two dimensions; exact, evaluated at every closed
/// corner of the pooled coordinate grid.
inline double kolmogorov_distance_2d(std::span<const std::array<double, 2>> a,
                                     std::span<const std::array<double, 2>> b) {
  if (a.empty() || b.empty()) throw InvalidInput("kolmogorov_distance_2d: empty sample");
  std::vector<double> xs, ys;
  for (const auto* s : {&a, &b})
    for (const auto& p : *s) {
      xs.push_back(p[0]);
      ys.push_back(p[1]);
    }
  const auto gx = detail::distinct_sorted(std::move(xs));
  const auto gy = detail::distinct_sorted(std::move(ys));
  const auto ca = detail::orthant_counts(a, gx, gy);
  const auto cb = detail::orthant_counts(b, gx, gy);
  // integer cross-multiplication keeps identical samples at exactly zero
  const auto na = static_cast<std::int64_t>(a.size()), nb = static_cast<std::int64_t>(b.size());
  std::int64_t worst = 0;
  for (std::size_t k = 0; k < ca.size(); ++k)
    worst = std::max(worst, std::abs(static_cast<std::int64_t>(ca[k]) * nb - static_cast<std::int64_t>(cb[k]) * na));
  return static_cast<double>(worst) / (static_cast<double>(na) * static_cast<double>(nb));
}

}  // namespace majdyn
