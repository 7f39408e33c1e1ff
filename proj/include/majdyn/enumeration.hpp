// SPDX-License-Identifier: Apache-2.0
//
// Degree-constrained graph counting: exact counts for tiny instances, the
// McKay-Wormald and Canfield-Greenhill-McKay asymptotic formulas, and the
// conditional-degree formulas built from them.
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <numbers>
#include <numeric>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

#include "majdyn/binomial.hpp"
#include "majdyn/degree_models.hpp"
#include "majdyn/errors.hpp"
#include "majdyn/rng.hpp"

namespace majdyn {

using BigInt = boost::multiprecision::cpp_int;

inline constexpr long kGraphCountCap = 10;
inline constexpr long kBigraphSlotCap = 30;

// ---- exact counts ------------------------------------------------------------

namespace detail {

class GraphCounter {
 public:
  // Labelled graphs realizing the residual degrees `r`. The count is
  // invariant under relabelling, so the memo is keyed on the sorted multiset.
  BigInt count(std::vector<int> r) {
    std::sort(r.begin(), r.end(), std::greater<>());
    while (!r.empty() && r.back() == 0) r.pop_back();
    if (r.empty()) return 1;
    if (r.front() >= static_cast<int>(r.size())) return 0;
    auto it = memo_.find(r);
    if (it != memo_.end()) return it->second;

    // connect the first (largest) vertex to every subset of the others of the right size
    BigInt total = 0;
    std::vector<int> rest(r.begin() + 1, r.end());
    choose(rest, 0, r.front(), total);
    memo_.emplace(std::move(r), total);
    return total;
  }

 private:
  void choose(std::vector<int>& rest, std::size_t from, int need, BigInt& total) {
    if (need == 0) {
      total += count(rest);
      return;
    }
    if (rest.size() - from < static_cast<std::size_t>(need)) return;
    for (std::size_t i = from; i < rest.size(); ++i) {
      if (rest[i] == 0) continue;
      --rest[i];
      choose(rest, i + 1, need - 1, total);
      ++rest[i];
    }
  }

  std::map<std::vector<int>, BigInt> memo_;
};

class BigraphCounter {
 public:
  explicit BigraphCounter(std::vector<int> rows) : rows_(std::move(rows)) {}

  BigInt count(std::size_t row, std::vector<int> cols) {
    std::sort(cols.begin(), cols.end(), std::greater<>());
    if (row == rows_.size()) return std::all_of(cols.begin(), cols.end(), [](int c) { return c == 0; }) ? 1 : 0;
    auto key = std::make_pair(row, cols);
    auto it = memo_.find(key);
    if (it != memo_.end()) return it->second;
    BigInt total = 0;
    fill(row, cols, 0, rows_[row], total);
    memo_.emplace(std::move(key), total);
    return total;
  }

 private:
  void fill(std::size_t row, std::vector<int>& cols, std::size_t from, int need, BigInt& total) {
    if (need == 0) {
      total += count(row + 1, cols);
      return;
    }
    if (cols.size() - from < static_cast<std::size_t>(need)) return;
    for (std::size_t j = from; j < cols.size(); ++j) {
      if (cols[j] == 0) continue;
      --cols[j];
      fill(row, cols, j + 1, need - 1, total);
      ++cols[j];
    }
  }

  std::vector<int> rows_;
  std::map<std::pair<std::size_t, std::vector<int>>, BigInt> memo_;
};

}  // namespace detail

/// Number of labelled simple graphs with degree sequence d (0 if d is not
/// graphical).
inline BigInt exact_count_graphs(std::span<const long> d, long cap = kGraphCountCap) {
  const long n = static_cast<long>(d.size());
  if (n > cap) throw SizeLimitExceeded("exact_count_graphs: " + std::to_string(n) + " vertices exceeds the cap");
  std::vector<int> r;
  for (long x : d) {
    if (x < 0 || x > std::max(0L, n - 1)) return 0;
    r.push_back(static_cast<int>(x));
  }
  if (std::accumulate(r.begin(), r.end(), 0L) % 2) return 0;
  return detail::GraphCounter().count(std::move(r));
}

inline BigInt exact_count_graphs(const DegreeSequence& d, long cap = kGraphCountCap) {
  return exact_count_graphs(std::span<const long>(d.degrees), cap);
}

/// Number of 0/1 matrices with row sums s and column sums t.
inline BigInt exact_count_bigraphs(std::span<const long> s, std::span<const long> t,
                                   long cap = kBigraphSlotCap) {
  const long m = static_cast<long>(s.size()), n = static_cast<long>(t.size());
  if (m * n > cap) throw SizeLimitExceeded("exact_count_bigraphs: " + std::to_string(m * n) + " slots exceeds the cap");
  const long ss = std::accumulate(s.begin(), s.end(), 0L);
  const long ts = std::accumulate(t.begin(), t.end(), 0L);
  if (ss != ts) return 0;
  std::vector<int> rows, cols;
  for (long x : s) {
    if (x < 0 || x > n) return 0;
    rows.push_back(static_cast<int>(x));
  }
  for (long x : t) {
    if (x < 0 || x > m) return 0;
    cols.push_back(static_cast<int>(x));
  }
  return detail::BigraphCounter(std::move(rows)).count(0, std::move(cols));
}

inline BigInt exact_count_bigraphs(const BipartiteDegreeSequence& b, long cap = kBigraphSlotCap) {
  return exact_count_bigraphs(std::span<const long>(b.s), std::span<const long>(b.t), cap);
}

/// Erdős–Gallai test.
inline bool is_graphical(std::span<const long> d) {
  std::vector<long> x(d.begin(), d.end());
  const long n = static_cast<long>(x.size());
  if (std::any_of(x.begin(), x.end(), [n](long v) { return v < 0 || v > std::max(0L, n - 1); })) return false;
  if (std::accumulate(x.begin(), x.end(), 0L) % 2) return false;
  std::sort(x.begin(), x.end(), std::greater<>());
  long lhs = 0;
  for (long k = 1; k <= n; ++k) {
    lhs += x[static_cast<std::size_t>(k - 1)];
    long rhs = k * (k - 1);
    for (long i = k; i < n; ++i) rhs += std::min(x[static_cast<std::size_t>(i)], k);
    if (lhs > rhs) return false;
  }
  return true;
}

// ---- asymptotic counts ---------------------------------------------------------

/// Derived quantities of a degree sequence (graph case) or pair (bipartite).
struct EnumContext {
  double d_bar = 0, r = 0, mu = 0, gamma2_sq = 0;
  double s_bar = 0, t_bar = 0, gamma2_s_sq = 0, gamma2_t_sq = 0;
};

struct LogCountEstimate {
  double log_count;
  EnumContext context;
  bool in_band;  ///< hypotheses of the asymptotic theorem hold (with the configured epsilon)
};

inline constexpr double kDefaultEnumEpsilon = 0.1;

inline EnumContext graph_context(std::span<const long> d) {
  const double n = static_cast<double>(d.size());
  EnumContext c;
  KahanSum s;
  for (long x : d) s.add(static_cast<double>(x));
  c.d_bar = s.value() / n;
  c.r = c.d_bar * n / 2.0;
  c.mu = c.d_bar / (n - 1.0);
  KahanSum v;
  for (long x : d) v.add((static_cast<double>(x) - c.d_bar) * (static_cast<double>(x) - c.d_bar));
  c.gamma2_sq = v.value() / ((n - 1.0) * (n - 1.0));
  return c;
}

/// log of exp(1/4 - gamma2^2 / (4 mu^2 (1 - mu)^2)) C(n(n-1)/2, r) C(n(n-1), 2r)^-1 prod C(n-1, d_i).
inline LogCountEstimate mw_log_count(std::span<const long> d, double epsilon = kDefaultEnumEpsilon) {
  const long n = static_cast<long>(d.size());
  if (n < 2) throw InvalidInput("mw_log_count: need at least two vertices");
  const long total = std::accumulate(d.begin(), d.end(), 0L);
  if (total % 2) throw InvalidInput("mw_log_count: r = sum / 2 is not an integer");
  const auto c = graph_context(d);
  if (c.mu <= 0.0 || c.mu >= 1.0) throw InvalidInput("mw_log_count: density must lie strictly between 0 and 1");
  const double nd = static_cast<double>(n);
  double lc = 0.25 - c.gamma2_sq / (4.0 * c.mu * c.mu * (1.0 - c.mu) * (1.0 - c.mu));
  lc += log_choose(nd * (nd - 1.0) / 2.0, c.r) - log_choose(nd * (nd - 1.0), 2.0 * c.r);
  for (long x : d) lc += log_choose(nd - 1.0, static_cast<double>(x));
  const double spread = std::pow(nd, 0.5 + epsilon);
  bool band = c.d_bar >= nd / std::log(nd);
  for (long x : d) band = band && std::abs(static_cast<double>(x) - c.d_bar) <= spread;
  return {lc, c, band};
}

inline LogCountEstimate mw_log_count(const DegreeSequence& d, double epsilon = kDefaultEnumEpsilon) {
  return mw_log_count(std::span<const long>(d.degrees), epsilon);
}

/// log of exp(-1/2 (1 - g(s)^2/(mu(1-mu))) (1 - g(t)^2/(mu(1-mu)))) C(mn, r)^-1
/// prod C(n, s_i) prod C(m, t_j), for s of length m and t of length n. Each
/// gamma is normalised by the squared length of its own sequence, as in the
/// displayed formula, which keeps the value transpose-invariant.
inline LogCountEstimate cgm_log_count(std::span<const long> s, std::span<const long> t,
                                      double epsilon = kDefaultEnumEpsilon) {
  const double m = static_cast<double>(s.size()), n = static_cast<double>(t.size());
  if (s.empty() || t.empty()) throw InvalidInput("cgm_log_count: empty side");
  const long ss = std::accumulate(s.begin(), s.end(), 0L);
  if (ss != std::accumulate(t.begin(), t.end(), 0L)) throw InvalidInput("cgm_log_count: side sums differ");
  EnumContext c;
  c.s_bar = static_cast<double>(ss) / m;
  c.t_bar = static_cast<double>(ss) / n;
  c.mu = static_cast<double>(ss) / (m * n);
  c.r = static_cast<double>(ss);
  if (c.mu <= 0.0 || c.mu >= 1.0) throw InvalidInput("cgm_log_count: density must lie strictly between 0 and 1");
  KahanSum vs, vt;
  for (long x : s) vs.add((static_cast<double>(x) - c.s_bar) * (static_cast<double>(x) - c.s_bar));
  for (long x : t) vt.add((static_cast<double>(x) - c.t_bar) * (static_cast<double>(x) - c.t_bar));
  c.gamma2_s_sq = vs.value() / (m * m);
  c.gamma2_t_sq = vt.value() / (n * n);
  const double q = c.mu * (1.0 - c.mu);
  double lc = -0.5 * (1.0 - c.gamma2_s_sq / q) * (1.0 - c.gamma2_t_sq / q);
  lc -= log_choose(m * n, c.r);
  for (long x : s) lc += log_choose(n, static_cast<double>(x));
  for (long x : t) lc += log_choose(m, static_cast<double>(x));
  bool band = true;
  for (long x : s) band = band && std::abs(static_cast<double>(x) - c.s_bar) <= std::pow(m, 0.5 + epsilon);
  for (long x : t) band = band && std::abs(static_cast<double>(x) - c.t_bar) <= std::pow(n, 0.5 + epsilon);
  const double big = std::max(m, n), small = std::min(m, n);
  band = band && small >= big / std::sqrt(std::log(big));
  return {lc, c, band};
}

inline LogCountEstimate cgm_log_count(const BipartiteDegreeSequence& b, double epsilon = kDefaultEnumEpsilon) {
  return cgm_log_count(std::span<const long>(b.s), std::span<const long>(b.t), epsilon);
}

// ---- binomial ratio ----------------------------------------------------------

enum class EnumCase { kGraph, kBipartite };

struct BinomialRatio {
  double exact_log_ratio;
  double approx_log_ratio;
  double delta1;
  double delta2;
  bool in_band;  ///< |Delta1| <= n^(8/5) and |Delta2| <= n^(3/5)
};

/// Exact and approximated log of the binomial ratio that appears when one
/// vertex (degree d) is removed from a graph (or one row from a bigraph) with
/// r edges. For the graph case m is ignored.
inline BinomialRatio binomial_ratio_approx(EnumCase which, long m, long n, long r, long d, double p) {
  if (!(p > 0.0 && p < 1.0)) throw SingularParameters("binomial_ratio_approx: need 0 < p < 1");
  const double nd = static_cast<double>(n), rd = static_cast<double>(r), dd = static_cast<double>(d);
  const double lp = std::log(p), lq = std::log1p(-p);
  BinomialRatio out{};
  if (which == EnumCase::kBipartite) {
    const double md = static_cast<double>(m);
    out.exact_log_ratio = -log_choose(md * (nd - 1.0), rd - dd) + log_choose(md * nd, rd) + dd * lp + (md - dd) * lq;
    out.delta1 = rd - p * md * nd;
    out.delta2 = dd - p * md;
    out.approx_log_ratio = out.delta1 * (out.delta1 - 2.0 * nd * out.delta2) / (2.0 * p * (1.0 - p) * md * nd * nd);
  } else {
    out.exact_log_ratio = log_choose((nd - 1.0) * (nd - 2.0) / 2.0, rd - dd) -
                          log_choose((nd - 1.0) * (nd - 2.0), 2.0 * (rd - dd)) -
                          log_choose(nd * (nd - 1.0) / 2.0, rd) + log_choose(nd * (nd - 1.0), 2.0 * rd) + dd * lp +
                          (nd - 1.0 - dd) * lq;
    out.delta1 = rd - p * nd * (nd - 1.0) / 2.0;
    out.delta2 = dd - p * (nd - 1.0);
    out.approx_log_ratio = 2.0 * out.delta1 * (out.delta1 - nd * out.delta2) / (p * (1.0 - p) * nd * nd * nd);
  }
  out.in_band = std::abs(out.delta1) <= std::pow(nd, 1.6) && std::abs(out.delta2) <= std::pow(nd, 0.6);
  return out;
}

// ---- conditional degree formulas ---------------------------------------------

/// Inputs shared by the conditional-degree evaluators.
///
/// Graph case: beta has n entries, beta[i] = (d_i - p(n-1)) / sqrt(p(1-p)(n-1));
/// the distinguished vertex v_n is the last one and V is the first h vertices
/// (so v_n is never in V). Bipartite case: beta has n entries for the side W,
/// t_i = pm + beta_i sqrt(p(1-p)m), alpha describes s_m = pn + alpha sqrt(p(1-p)n)
/// and V is again the first h vertices of W.
struct BalancedDegreeInputs {
  std::vector<double> beta;
  double alpha = 0.0;
  long h = 1;
  double gamma = 0.0;
  long m = 0;  ///< bipartite only: size of the other side
};

struct ConditionalDegree {
  double value = 0.0;
  double log_value = 0.0;
  double std_error = 0.0;        ///< Monte Carlo forms only
  bool tail_envelope = false;    ///< value is the exp(-c (t - ph)^2 / n) envelope
  bool hypotheses_ok = true;     ///< the displayed formula's band conditions hold
  std::string notes;
};

namespace detail {

inline void validate_inputs(EnumCase which, const BalancedDegreeInputs& in, long n, double p) {
  if (!(p > 0.0 && p < 1.0)) throw SingularParameters("conditional degree: need 0 < p < 1");
  if (static_cast<long>(in.beta.size()) != n) throw InvalidInput("conditional degree: beta must have n entries");
  if (in.h < 1 || in.h > n - 1) throw InvalidInput("conditional degree: need 1 <= h <= n - 1");
  for (double b : in.beta)
    if (!std::isfinite(b)) throw InvalidInput("conditional degree: beta must be finite");
  if (which == EnumCase::kBipartite && in.m < 1) throw InvalidInput("conditional degree: bipartite case needs m >= 1");
}

// Degree of the distinguished vertex implied by the inputs, rounded to the
// nearest integer.
inline long target_degree(EnumCase which, const BalancedDegreeInputs& in, long n, double p) {
  const double nd = static_cast<double>(n);
  if (which == EnumCase::kGraph)
    return std::lround(p * (nd - 1.0) + in.beta.back() * std::sqrt(p * (1.0 - p) * (nd - 1.0)));
  return std::lround(p * nd + in.alpha * std::sqrt(p * (1.0 - p) * nd));
}

struct Sums {
  double all = 0, v = 0, v_sq = 0, c = 0, c_sq = 0, sq_excl = 0;
  long v_size = 0, c_size = 0;
};

// Sums of beta over V and over the complement, leaving out v_n in the graph case.
inline Sums beta_sums(EnumCase which, const BalancedDegreeInputs& in) {
  Sums s;
  const std::size_t n = in.beta.size();
  const std::size_t stop = which == EnumCase::kGraph ? n - 1 : n;
  KahanSum all, v, vsq, c, csq;
  for (std::size_t i = 0; i < n; ++i) all.add(in.beta[i]);
  for (std::size_t i = 0; i < stop; ++i) {
    const double b = in.beta[i];
    if (static_cast<long>(i) < in.h) {
      v.add(b);
      vsq.add(b * b);
      ++s.v_size;
    } else {
      c.add(b);
      csq.add(b * b);
      ++s.c_size;
    }
  }
  s.all = all.value();
  s.v = v.value();
  s.v_sq = vsq.value();
  s.c = c.value();
  s.c_sq = csq.value();
  s.sq_excl = s.v_sq + s.c_sq;
  return s;
}

// log of C(|V|, t) C(|V^c minus v_n|, target - t) / C(pool, target).
inline double log_hyper_ratio(long v_size, long c_size, long target, long t) {
  return log_choose(static_cast<double>(v_size), static_cast<double>(t)) +
         log_choose(static_cast<double>(c_size), static_cast<double>(target - t)) -
         log_choose(static_cast<double>(v_size + c_size), static_cast<double>(target));
}

// exp((sum beta)(sum beta - 2 n beta_n) / (2 n^2)) or the bipartite
// exp((sum beta)(sum beta - 2 sqrt(mn) alpha) / (2 m n)), in log form.
inline double log_edge_prefactor(EnumCase which, const BalancedDegreeInputs& in, const Sums& s, long n) {
  const double nd = static_cast<double>(n);
  if (which == EnumCase::kGraph) return s.all * (s.all - 2.0 * nd * in.beta.back()) / (2.0 * nd * nd);
  const double md = static_cast<double>(in.m);
  return s.all * (s.all - 2.0 * std::sqrt(md * nd) * in.alpha) / (2.0 * md * nd);
}

}  // namespace detail

/// Leading Gaussian form sqrt(2)/sqrt(pi p(1-p)n) exp(-(2 gamma - b - S)^2 / 2),
/// with b = beta_n and S = sum_V beta / (n/2) for graphs, b = alpha and
/// S = sum_V beta / (sqrt(mn)/2) for bigraphs.
inline ConditionalDegree cond_degree_balanced(EnumCase which, const BalancedDegreeInputs& in, long n, double p) {
  detail::validate_inputs(which, in, n, p);
  const double nd = static_cast<double>(n);
  const auto s = detail::beta_sums(which, in);
  double shift;
  double centre;
  if (which == EnumCase::kGraph) {
    centre = in.beta.back();
    shift = s.v / (nd / 2.0);
  } else {
    centre = in.alpha;
    shift = s.v / (std::sqrt(static_cast<double>(in.m) * nd) / 2.0);
  }
  const double z = 2.0 * in.gamma - centre - shift;
  ConditionalDegree out;
  out.log_value = 0.5 * std::log(2.0) - 0.5 * std::log(std::numbers::pi * p * (1.0 - p) * nd) - 0.5 * z * z;
  out.value = std::exp(out.log_value);
  const double hd = static_cast<double>(in.h);
  const bool h_ok = std::abs(hd - nd / 2.0) <= std::sqrt(nd * std::log(nd));
  const bool sum_ok = std::abs(s.all) <= std::pow(nd, 5.0 / 6.0);
  const bool gamma_ok = std::abs(in.gamma) <= std::pow(nd, 0.1);
  out.hypotheses_ok = h_ok && sum_ok && gamma_ok;
  if (!h_ok) out.notes += "h outside sqrt(n log n) of n/2; ";
  if (!sum_ok) out.notes += "sum of beta outside n^(5/6); ";
  if (!gamma_ok) out.notes += "|gamma| above n^(1/10); ";
  return out;
}

/// Configuration of the bounded form's far-tail switch.
struct TailEnvelope {
  double kappa = 2.0;     ///< threshold kappa sqrt(n) (log n)^exponent
  double exponent = 2.0;
  double c_env = 1.0;     ///< envelope exp(-c_env (t - ph)^2 / n)
};

/// Full second-clause formula of the bounded proposition (hypergeometric
/// prefactor times the exponential of the bracketed expression). Beyond the
/// tail threshold the exponential envelope is returned instead, flagged.
inline ConditionalDegree cond_degree_bounded(EnumCase which, const BalancedDegreeInputs& in, long n, double p, long t,
                                             const TailEnvelope& tail = {}) {
  detail::validate_inputs(which, in, n, p);
  const double nd = static_cast<double>(n), hd = static_cast<double>(in.h), td = static_cast<double>(t);
  const double logn = std::log(nd);
  ConditionalDegree out;
  const double dev = td - p * hd;
  if (std::abs(dev) >= tail.kappa * std::sqrt(nd) * std::pow(logn, tail.exponent)) {
    out.tail_envelope = true;
    out.log_value = -tail.c_env * dev * dev / nd;
    out.value = std::exp(out.log_value);
    out.notes = "tail envelope";
    return out;
  }
  const auto s = detail::beta_sums(which, in);
  const long target = detail::target_degree(which, in, n, p);
  const double dn = static_cast<double>(target);
  const double lh = detail::log_hyper_ratio(s.v_size, s.c_size, target, t);
  if (lh == kNegInf) {
    out.value = 0.0;
    out.log_value = kNegInf;
    return out;
  }
  const double root = std::sqrt(p / (1.0 - p));
  double norm, pair_v, pair_c;  // beta scaling and the pairwise-difference weights
  if (which == EnumCase::kGraph) {
    norm = nd - 1.0;
    pair_v = 1.0 / (2.0 * nd * hd);
    pair_c = 1.0 / (2.0 * nd * (nd - hd));
  } else {
    const double md = static_cast<double>(in.m);
    norm = md;
    pair_v = 1.0 / (2.0 * md * hd);
    pair_c = 1.0 / (2.0 * md * (nd - hd));
  }
  const double rn = std::sqrt(norm);
  double bracket = detail::log_edge_prefactor(which, in, s, n);
  bracket -= root * ((1.0 - td / (p * hd)) * s.v / rn + (1.0 - (dn - td) / (p * (nd - hd))) * s.c / rn);
  bracket -= 0.5 * s.sq_excl / norm;
  // sum_{i<j} (b_i - b_j)^2 = k sum b^2 - (sum b)^2 over a set of size k
  bracket += pair_v * (static_cast<double>(s.v_size) * s.v_sq - s.v * s.v);
  bracket += pair_c * (static_cast<double>(s.c_size) * s.c_sq - s.c * s.c);
  out.log_value = lh + bracket;
  out.value = std::exp(out.log_value);

  double bmax = 0.0;
  for (double b : in.beta) bmax = std::max(bmax, std::abs(b));
  const bool beta_ok = bmax <= logn * logn && std::abs(in.alpha) <= logn * logn;
  const bool near = std::abs(dev) <= std::pow(nd, 0.6);
  double ms = (s.sq_excl + (which == EnumCase::kGraph ? in.beta.back() * in.beta.back() : 0.0)) / nd;
  if (which == EnumCase::kBipartite) ms *= nd / static_cast<double>(in.m);
  const bool ms_ok = ms <= std::pow(logn, 1.0 / 9.0);
  out.hypotheses_ok = beta_ok && near && ms_ok;
  if (!beta_ok) out.notes += "beta above (log n)^2; ";
  if (!near) out.notes += "|t - ph| above n^(3/5); ";
  if (!ms_ok) out.notes += "mean square beta above (log n)^(1/9); ";
  return out;
}

/// Monte Carlo evaluation of the expectation form: prefactor times the
/// hypergeometric ratio times E exp(X), X driven by uniform slices S1 of V and
/// S2 of the complement (minus v_n). Returns 0 for an infeasible slice.
inline ConditionalDegree expectation_form(EnumCase which, const BalancedDegreeInputs& in, long n, double p, long t,
                                          long mc_samples, std::uint64_t seed = 1) {
  detail::validate_inputs(which, in, n, p);
  if (mc_samples < 1000) throw InvalidParameters("expectation_form: need at least 1000 samples");
  const auto s = detail::beta_sums(which, in);
  const long target = detail::target_degree(which, in, n, p);
  ConditionalDegree out;
  if (t < 0 || t > s.v_size || target - t < 0 || target - t > s.c_size) {
    out.value = 0.0;
    out.log_value = kNegInf;
    out.notes = "empty slice";
    return out;
  }
  const double norm = which == EnumCase::kGraph ? static_cast<double>(n - 1) : static_cast<double>(in.m);
  const double root = std::sqrt(p / (1.0 - p));
  const double odds = (1.0 - p) / p;
  // X = base + sum over the chosen set of delta_i
  const std::size_t pool = static_cast<std::size_t>(s.v_size + s.c_size);
  std::vector<double> delta(pool);
  KahanSum base;
  for (std::size_t i = 0; i < pool; ++i) {
    const double b = in.beta[i];
    const double lin = b / std::sqrt(norm), sq = b * b / norm;
    base.add(-root * lin - 0.5 * sq / odds);
    delta[i] = -root * (-odds - 1.0) * lin - 0.5 * (odds - 1.0 / odds) * sq;
  }
  const double x0 = base.value();

  Xoshiro256 eng(seed);
  std::vector<std::size_t> vidx(static_cast<std::size_t>(s.v_size)), cidx(static_cast<std::size_t>(s.c_size));
  std::iota(vidx.begin(), vidx.end(), 0);
  std::iota(cidx.begin(), cidx.end(), static_cast<std::size_t>(s.v_size));
  auto partial_shuffle_sum = [&](std::vector<std::size_t>& idx, long k) {
    double acc = 0.0;
    for (long j = 0; j < k; ++j) {
      const std::size_t left = idx.size() - static_cast<std::size_t>(j);
      const std::size_t pick = static_cast<std::size_t>(j) + static_cast<std::size_t>(eng() % left);
      std::swap(idx[static_cast<std::size_t>(j)], idx[pick]);
      acc += delta[idx[static_cast<std::size_t>(j)]];
    }
    return acc;
  };
  // exp(X - x_ref) keeps the running sums well scaled
  std::vector<double> xs(static_cast<std::size_t>(mc_samples));
  for (auto& x : xs) x = x0 + partial_shuffle_sum(vidx, t) + partial_shuffle_sum(cidx, target - t);
  const double x_ref = *std::max_element(xs.begin(), xs.end());
  KahanSum m1, m2;
  for (double x : xs) {
    const double e = std::exp(x - x_ref);
    m1.add(e);
    m2.add(e * e);
  }
  const double k = static_cast<double>(mc_samples);
  const double mean = m1.value() / k;
  const double var = std::max(0.0, m2.value() / k - mean * mean) * k / (k - 1.0);
  const double log_scale = detail::log_edge_prefactor(which, in, s, n) +
                           detail::log_hyper_ratio(s.v_size, s.c_size, target, t) + x_ref;
  out.log_value = log_scale + std::log(mean);
  out.value = std::exp(out.log_value);
  out.std_error = std::exp(log_scale) * std::sqrt(var / k);
  return out;
}

// ---- slice moment ------------------------------------------------------------

enum class SliceMode { kExact, kApprox };

inline constexpr long kSliceExactCap = 22;

/// E exp(sum a_i xi_i) for xi uniform on the weight-s slice of {0,1}^n.
inline double slice_exp_moment(std::span<const double> a, long s, SliceMode mode) {
  const long n = static_cast<long>(a.size());
  if (s < 0 || s > n) throw InvalidInput("slice_exp_moment: need 0 <= s <= n");
  if (mode == SliceMode::kApprox) {
    KahanSum sum, sq;
    for (double x : a) {
      sum.add(x);
      sq.add(x * x);
    }
    const double nd = static_cast<double>(n), sd = static_cast<double>(s);
    const double mean = sd / nd * sum.value();
    const double eta2 = sq.value() - sum.value() * sum.value() / nd;
    const double var = n > 1 ? sd * (nd - sd) / (nd * (nd - 1.0)) * eta2 : 0.0;
    return std::exp(mean + 0.5 * var);
  }
  if (n > kSliceExactCap) throw SizeLimitExceeded("slice_exp_moment: exact mode needs n <= 22");
  if (s == 0) return 1.0;
  // Gosper's hack walks every n-bit mask with s bits set
  KahanSum acc;
  std::uint64_t count = 0;
  std::uint64_t mask = (std::uint64_t{1} << s) - 1;
  const std::uint64_t limit = std::uint64_t{1} << n;
  while (mask < limit) {
    double x = 0.0;
    for (std::uint64_t b = mask; b; b &= b - 1) x += a[static_cast<std::size_t>(std::countr_zero(b))];
    acc.add(std::exp(x));
    ++count;
    const std::uint64_t c = mask & (~mask + 1);
    const std::uint64_t r = mask + c;
    mask = (((r ^ mask) >> 2) / c) | r;
  }
  return acc.value() / static_cast<double>(count);
}

}  // namespace majdyn
