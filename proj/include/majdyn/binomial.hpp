// SPDX-License-Identifier: Apache-2.0
//
// Exact binomial mass functions and the conditioned / convolved laws built on
// top of them. Everything is held in log space and normalized once.
#pragma once

#include <algorithm>
#include <cmath>
#include <numbers>
#include <cstddef>
#include <limits>
#include <span>
#include <utility>
#include <vector>

#include "majdyn/errors.hpp"

namespace majdyn {

/// Neumaier-compensated running sum.
class KahanSum {
 public:
  void add(double x) noexcept {
    const double t = sum_ + x;
    if (std::abs(sum_) >= std::abs(x))
      comp_ += (sum_ - t) + x;
    else
      comp_ += (x - t) + sum_;
    sum_ = t;
  }
  double value() const noexcept { return sum_ + comp_; }

 private:
  double sum_ = 0.0;
  double comp_ = 0.0;
};

inline constexpr double kNegInf = -std::numeric_limits<double>::infinity();

/// log(exp(a) + exp(b)) without overflow.
inline double log_add(double a, double b) noexcept {
  if (a == kNegInf) return b;
  if (b == kNegInf) return a;
  const double hi = std::max(a, b);
  return hi + std::log1p(std::exp(std::min(a, b) - hi));
}

/// Log of the binomial coefficient C(n, k); -inf outside 0 <= k <= n.
inline double log_choose(double n, double k) {
  if (k < 0.0 || k > n) return kNegInf;
  return std::lgamma(n + 1.0) - std::lgamma(k + 1.0) - std::lgamma(n - k + 1.0);
}

/// Finite mass function on {offset, ..., offset + size - 1}, stored as
/// log-probabilities that sum to one.
class Pmf {
 public:
  Pmf() : offset_(0), log_w_{0.0} {}

  /// Normalizes arbitrary log-weights. Leading and trailing zero-mass entries
  /// are trimmed so the support is tight.
  static Pmf from_log_weights(long offset, std::vector<double> log_w) {
    std::size_t lo = 0;
    while (lo < log_w.size() && log_w[lo] == kNegInf) ++lo;
    std::size_t hi = log_w.size();
    while (hi > lo && log_w[hi - 1] == kNegInf) --hi;
    if (lo == hi) throw InvalidInput("Pmf: all weights are zero");
    std::vector<double> w(log_w.begin() + static_cast<long>(lo), log_w.begin() + static_cast<long>(hi));
    const double peak = *std::max_element(w.begin(), w.end());
    KahanSum total;
    for (double v : w) total.add(std::exp(v - peak));
    const double norm = peak + std::log(total.value());
    for (double& v : w) v -= norm;
    Pmf out;
    out.offset_ = offset + static_cast<long>(lo);
    out.log_w_ = std::move(w);
    return out;
  }

  static Pmf from_probs(long offset, std::span<const double> probs) {
    std::vector<double> lw(probs.size());
    for (std::size_t i = 0; i < probs.size(); ++i) {
      if (!(probs[i] >= 0.0)) throw InvalidInput("Pmf: negative or NaN probability");
      lw[i] = probs[i] > 0.0 ? std::log(probs[i]) : kNegInf;
    }
    return from_log_weights(offset, std::move(lw));
  }

  static Pmf point_mass(long at) { return from_log_weights(at, {0.0}); }

  long offset() const noexcept { return offset_; }
  long min_value() const noexcept { return offset_; }
  long max_value() const noexcept { return offset_ + static_cast<long>(log_w_.size()) - 1; }
  std::size_t size() const noexcept { return log_w_.size(); }
  std::span<const double> log_weights() const noexcept { return log_w_; }

  double log_prob(long k) const noexcept {
    if (k < offset_ || k > max_value()) return kNegInf;
    return log_w_[static_cast<std::size_t>(k - offset_)];
  }
  double prob(long k) const noexcept { return std::exp(log_prob(k)); }

  std::vector<double> probs() const {
    std::vector<double> p(log_w_.size());
    for (std::size_t i = 0; i < p.size(); ++i) p[i] = std::exp(log_w_[i]);
    return p;
  }

  double total_mass() const noexcept {
    KahanSum s;
    for (double v : log_w_) s.add(std::exp(v));
    return s.value();
  }

  double mean() const noexcept {
    KahanSum s;
    for (std::size_t i = 0; i < log_w_.size(); ++i) s.add(std::exp(log_w_[i]) * static_cast<double>(i));
    return static_cast<double>(offset_) + s.value();
  }

  double variance() const noexcept {
    const double mu = mean() - static_cast<double>(offset_);
    KahanSum s;
    for (std::size_t i = 0; i < log_w_.size(); ++i) {
      const double d = static_cast<double>(i) - mu;
      s.add(std::exp(log_w_[i]) * d * d);
    }
    return s.value();
  }

  /// Law of -X.
  Pmf negated() const {
    Pmf out;
    out.offset_ = -max_value();
    out.log_w_.assign(log_w_.rbegin(), log_w_.rend());
    return out;
  }

 private:
  long offset_;
  std::vector<double> log_w_;
};

/// Exact Bin(n, p).
inline Pmf binom_pmf(long n, double p) {
  if (n < 0) throw InvalidParameters("binom_pmf: n must be non-negative");
  if (!(p >= 0.0 && p <= 1.0)) throw InvalidParameters("binom_pmf: p must lie in [0, 1]");
  if (p == 0.0) return Pmf::point_mass(0);
  if (p == 1.0) return Pmf::point_mass(n);
  const double lp = std::log(p);
  const double lq = std::log1p(-p);
  const double nd = static_cast<double>(n);
  std::vector<double> lw(static_cast<std::size_t>(n) + 1);
  for (long k = 0; k <= n; ++k) {
    const double kd = static_cast<double>(k);
    lw[static_cast<std::size_t>(k)] = log_choose(nd, kd) + kd * lp + (nd - kd) * lq;
  }
  return Pmf::from_log_weights(0, std::move(lw));
}

/// Bin(n, p) restricted to the values whose probability is at least
/// exp(-log_cut) times the mode's, built outward from the mode by the ratio
/// recurrence. Sampling tables use this; exact comparisons use binom_pmf.
inline Pmf binom_pmf_core(long n, double p, double log_cut = 60.0 * std::numbers::ln2) {
  if (n < 0) throw InvalidParameters("binom_pmf_core: n must be non-negative");
  if (!(p >= 0.0 && p <= 1.0)) throw InvalidParameters("binom_pmf_core: p must lie in [0, 1]");
  if (p == 0.0) return Pmf::point_mass(0);
  if (p == 1.0) return Pmf::point_mass(n);
  const double nd = static_cast<double>(n);
  const double odds = std::log(p) - std::log1p(-p);
  const long mode = std::min(n, static_cast<long>(std::floor((nd + 1.0) * p)));
  std::vector<double> up{0.0}, down;
  for (long k = mode; k < n; ++k) {
    const double next = up.back() + std::log(static_cast<double>(n - k) / static_cast<double>(k + 1)) + odds;
    if (next < -log_cut) break;
    up.push_back(next);
  }
  double cur = 0.0;
  for (long k = mode; k > 0; --k) {
    cur -= std::log(static_cast<double>(n - k + 1) / static_cast<double>(k)) + odds;
    if (cur < -log_cut) break;
    down.push_back(cur);
  }
  std::vector<double> lw(down.rbegin(), down.rend());
  lw.insert(lw.end(), up.begin(), up.end());
  return Pmf::from_log_weights(mode - static_cast<long>(down.size()), std::move(lw));
}

/// Probability that Bin(trials, p) is even: (1 + (1 - 2p)^trials) / 2.
inline double binom_even_probability(long trials, double p) {
  return 0.5 * (1.0 + std::pow(1.0 - 2.0 * p, static_cast<double>(trials)));
}

namespace detail {

// log P[Y < k] and log P[Y <= k] for every k in [lo, hi], from running
// log-sum-exp over Y's weights.
struct LogCdf {
  long lo;
  std::vector<double> below;     // log P[Y < k]
  std::vector<double> at_most;   // log P[Y <= k]
  std::vector<double> above;     // log P[Y > k]
  std::vector<double> at_least;  // log P[Y >= k]

  static LogCdf build(const Pmf& y, long lo, long hi) {
    LogCdf c;
    c.lo = lo;
    const std::size_t len = static_cast<std::size_t>(hi - lo + 1);
    c.below.assign(len, kNegInf);
    c.at_most.assign(len, kNegInf);
    c.above.assign(len, kNegInf);
    c.at_least.assign(len, kNegInf);
    double acc = kNegInf;
    for (long k = lo; k <= hi; ++k) {
      const auto i = static_cast<std::size_t>(k - lo);
      c.below[i] = acc;
      acc = log_add(acc, y.log_prob(k));
      c.at_most[i] = acc;
    }
    acc = kNegInf;
    for (long k = hi; k >= lo; --k) {
      const auto i = static_cast<std::size_t>(k - lo);
      c.above[i] = acc;
      acc = log_add(acc, y.log_prob(k));
      c.at_least[i] = acc;
    }
    return c;
  }
};

inline long lower_of(const Pmf& a, const Pmf& b) { return std::min(a.min_value(), b.min_value()); }
inline long upper_of(const Pmf& a, const Pmf& b) { return std::max(a.max_value(), b.max_value()); }

}  // namespace detail

/// P[X > Y], P[X = Y] and P[X < Y] for independent X, Y.
struct Comparison {
  double greater;
  double equal;
  double less;
};

inline Comparison compare_independent(const Pmf& x, const Pmf& y) {
  KahanSum gt, eq, lt;
  const auto xp = x.probs();
  const auto yp = y.probs();
  // cumulative sums of Y from each end, so neither tail is formed by subtraction
  std::vector<double> below(yp.size() + 1, 0.0);
  std::vector<double> above(yp.size() + 1, 0.0);
  {
    KahanSum lo, hi;
    for (std::size_t i = 0; i < yp.size(); ++i) {
      lo.add(yp[i]);
      below[i + 1] = lo.value();
      hi.add(yp[yp.size() - 1 - i]);
      above[yp.size() - 1 - i] = hi.value();
    }
  }
  // below[j] = P[Y < offset + j], above[j] = P[Y >= offset + j]
  const long ny = static_cast<long>(yp.size());
  for (std::size_t i = 0; i < xp.size(); ++i) {
    const long j = x.offset() + static_cast<long>(i) - y.offset();
    if (j < 0) {
      lt.add(xp[i]);
    } else if (j >= ny) {
      gt.add(xp[i]);
    } else {
      const auto u = static_cast<std::size_t>(j);
      gt.add(xp[i] * below[u]);
      eq.add(xp[i] * yp[u]);
      lt.add(xp[i] * above[u + 1]);
    }
  }
  return {gt.value(), eq.value(), lt.value()};
}

/// Exact P[Bin(n + tau, q) >= Bin(n, q_prime)] for independent variables.
inline double exact_ge_probability(long n, long tau, double q, double q_prime) {
  if (n < 0 || n + tau < 0) throw InvalidParameters("exact_ge_probability: need n >= 0 and n + tau >= 0");
  const auto c = compare_independent(binom_pmf(n + tau, q), binom_pmf(n, q_prime));
  // the two tails are summed separately and the smaller one is subtracted, which
  // keeps relative accuracy when P[X >= Y] is close to 1
  const double ge = c.greater + c.equal;
  return ge <= 0.5 ? ge : 1.0 - c.less;
}

/// X and Y split on the outcome of comparing them.
///
/// x_plus is X given X > Y and x_minus is X given X <= Y; y_plus is Y given
/// Y > X and y_minus is Y given Y <= X. r = P[X <= Y], so r * x_minus +
/// (1 - r) * x_plus is the law of X, and r_y = P[Y <= X] plays the same role on
/// the Y side.
struct ConditionedSplit {
  Pmf x_plus;
  Pmf x_minus;
  Pmf y_plus;
  Pmf y_minus;
  double r;
  double r_y;
};

inline ConditionedSplit conditioned_split(const Pmf& x, const Pmf& y) {
  const long lo = detail::lower_of(x, y);
  const long hi = detail::upper_of(x, y);
  const auto ycdf = detail::LogCdf::build(y, lo, hi);
  const auto xcdf = detail::LogCdf::build(x, lo, hi);

  auto conditioned = [&](const Pmf& base, const std::vector<double>& factor) {
    std::vector<double> lw(base.size());
    for (std::size_t i = 0; i < lw.size(); ++i) {
      const long k = base.offset() + static_cast<long>(i);
      lw[i] = base.log_weights()[i] + factor[static_cast<std::size_t>(k - lo)];
    }
    return lw;
  };
  auto any_mass = [](const std::vector<double>& lw) {
    return std::any_of(lw.begin(), lw.end(), [](double v) { return v != kNegInf; });
  };

  auto xp = conditioned(x, ycdf.below);     // X = k, Y < k
  auto xm = conditioned(x, ycdf.at_least);  // X = k, Y >= k
  auto yp = conditioned(y, xcdf.below);     // Y = k, X < k
  auto ym = conditioned(y, xcdf.at_least);  // Y = k, X >= k
  if (!any_mass(xp) || !any_mass(xm) || !any_mass(yp) || !any_mass(ym))
    throw DegenerateCondition("conditioned_split: a conditioning event has probability zero");

  const auto c = compare_independent(x, y);
  ConditionedSplit out{Pmf::from_log_weights(x.offset(), std::move(xp)),
                       Pmf::from_log_weights(x.offset(), std::move(xm)),
                       Pmf::from_log_weights(y.offset(), std::move(yp)),
                       Pmf::from_log_weights(y.offset(), std::move(ym)),
                       c.equal + c.less,
                       c.equal + c.greater};
  return out;
}

/// Split of X ~ Bin(n + tau, q) against Y ~ Bin(n, q_prime).
inline ConditionedSplit conditioned_split(long n, long tau, double q, double q_prime) {
  if (n < 0 || n + tau < 0) throw InvalidParameters("conditioned_split: need n >= 0 and n + tau >= 0");
  return conditioned_split(binom_pmf(n + tau, q), binom_pmf(n, q_prime));
}

/// Exact law of sum_k sign_k * X_k for independent X_k.
inline Pmf convolve_signed(std::span<const std::pair<Pmf, int>> terms) {
  if (terms.empty()) throw InvalidInput("convolve_signed: empty term list");
  std::vector<double> acc{1.0};
  long offset = 0;
  for (const auto& [pmf, sign] : terms) {
    if (sign != 1 && sign != -1) throw InvalidInput("convolve_signed: sign must be +1 or -1");
    const Pmf term = sign == 1 ? pmf : pmf.negated();
    const auto tp = term.probs();
    std::vector<double> next(acc.size() + tp.size() - 1, 0.0);
    for (std::size_t i = 0; i < acc.size(); ++i) {
      if (acc[i] == 0.0) continue;
      for (std::size_t j = 0; j < tp.size(); ++j) next[i + j] += acc[i] * tp[j];
    }
    acc = std::move(next);
    offset += term.offset();
  }
  return Pmf::from_probs(offset, acc);
}

inline Pmf convolve_signed(std::initializer_list<std::pair<Pmf, int>> terms) {
  std::vector<std::pair<Pmf, int>> v(terms);
  return convolve_signed(std::span<const std::pair<Pmf, int>>(v));
}

/// True iff w(k)^2 >= w(k-1) w(k+1) at every interior point, compared in log
/// space with 1e-12 relative slack.
inline bool logconcavity_check(const Pmf& pmf) {
  const auto lw = pmf.log_weights();
  for (std::size_t k = 1; k + 1 < lw.size(); ++k) {
    const double side = lw[k - 1] + lw[k + 1];
    if (side == kNegInf) continue;
    if (lw[k] == kNegInf) return false;
    const double slack = 1e-12 * std::max({1.0, std::abs(lw[k - 1]), std::abs(lw[k]), std::abs(lw[k + 1])});
    if (2.0 * lw[k] < side - slack) return false;
  }
  return true;
}

struct ShiftedDifference {
  double point;  ///< P[X' = X + k]
  double tail;   ///< P[X' >= X + k]
};

/// Exact values for X, X' iid Bin(m, p).
inline ShiftedDifference shifted_difference(long m, double p, long k) {
  if (m < 1) throw InvalidParameters("shifted_difference: m must be positive");
  if (k < -m || k > m) throw InvalidParameters("shifted_difference: |k| must not exceed m");
  const Pmf b = binom_pmf(m, p);
  // upper tails of X', from the top with compensation
  std::vector<double> tail(static_cast<std::size_t>(m) + 2, 0.0);
  {
    KahanSum run;
    for (long j = m; j >= 0; --j) {
      run.add(b.prob(j));
      tail[static_cast<std::size_t>(j)] = run.value();
    }
  }
  KahanSum point, upper;
  for (long x = 0; x <= m; ++x) {
    const double px = b.prob(x);
    const long target = x + k;
    if (target >= 0 && target <= m) point.add(px * b.prob(target));
    if (target <= 0)
      upper.add(px);
    else if (target <= m)
      upper.add(px * tail[static_cast<std::size_t>(target)]);
  }
  return {point.value(), upper.value()};
}

}  // namespace majdyn
