// SPDX-License-Identifier: Apache-2.0
//
// Closed-form predictions for majority dynamics on G(2n + delta, p): the win
// probability, the day-one joint local limit law, the day-two size law and the
// conditioned-binomial approximations they are built from. Every function
// returns the leading term only; error terms are left to the callers'
// tolerances.
#pragma once

#include <cmath>
#include <numbers>

#include "majdyn/errors.hpp"
#include "majdyn/graph.hpp"
#include "majdyn/normal.hpp"

namespace majdyn {

namespace detail {

inline void require_open_p(double p) {
  if (!(p > 0.0 && p < 1.0)) throw SingularParameters("formula requires 0 < p < 1");
}

// sqrt(pi p (1 - p) n), the recurring scale of the day-one corrections.
inline double chop_scale(double n, double p) { return std::sqrt(std::numbers::pi * p * (1.0 - p) * n); }

}  // namespace detail

/// Probability that red eventually takes every vertex:
/// Phi(p * delta * sqrt(2) / sqrt(pi p (1 - p))).
inline double win_probability(const ModelParams& params) {
  params.validate_open();
  const double p = params.p;
  const double z = p * static_cast<double>(params.delta) * std::numbers::sqrt2 /
                   std::sqrt(std::numbers::pi * p * (1.0 - p));
  return normal_cdf(z);
}

/// Whether (n, delta, p) lies inside the parameter window the three-step
/// theorem is stated for: (log n)^(-1/16) <= p <= 1 - (log n)^(-1/16) and
/// delta <= (log n)^(1/4).
inline bool in_theorem_regime(const ModelParams& params) {
  if (params.n < 3) return false;
  const double ln = std::log(static_cast<double>(params.n));
  const double lo = std::pow(ln, -1.0 / 16.0);
  return params.p >= lo && params.p <= 1.0 - lo && static_cast<double>(params.delta) <= std::pow(ln, 0.25);
}

/// First-order value of P[Bin(n + tau, p + alpha/n) >= Bin(n, p + beta/n)].
inline double chop_probability_approx(double n, long tau, double p, double alpha, double beta) {
  detail::require_open_p(p);
  return 0.5 + (p * static_cast<double>(tau) + 0.5 + alpha - beta) / (2.0 * detail::chop_scale(n, p));
}

struct ChopMoments {
  double mean_plus;
  double mean_minus;
  double variance;
};

/// Leading-order mean of X conditioned on beating (or not beating) an
/// independent comparison binomial, and the common variance.
inline ChopMoments chop_moments_approx(double n, double p) {
  detail::require_open_p(p);
  const double shift = std::sqrt(p * (1.0 - p) * n / std::numbers::pi);
  return {p * n + shift, p * n - shift, (1.0 - 1.0 / std::numbers::pi) * p * (1.0 - p) * n};
}

/// P[X' = X + k] ~ 1 / sqrt(4 pi p (1 - p) m) for X, X' iid Bin(m, p), |k| small.
inline double shifted_difference_point_approx(double m, double p) {
  detail::require_open_p(p);
  return 1.0 / std::sqrt(4.0 * std::numbers::pi * p * (1.0 - p) * m);
}

/// P[X' >= X + k] ~ 1/2 - (2k - 1) / (4 sqrt(pi p (1 - p) m)).
inline double shifted_difference_tail_approx(double m, double p, long k) {
  detail::require_open_p(p);
  return 0.5 - (2.0 * static_cast<double>(k) - 1.0) / (4.0 * detail::chop_scale(m, p));
}

/// Centres and scale mapping day-one counts x = |R0 ∩ R1|, y = |B0 ∩ B1| to the
/// standardized coordinates x', y'.
struct DayOneCentering {
  double x_center;
  double y_center;
  double scale;

  double x_prime(double x) const noexcept { return (x - x_center) / scale; }
  double y_prime(double y) const noexcept { return (y - y_center) / scale; }
};

inline DayOneCentering day_one_centering(const ModelParams& params) {
  params.validate_open();
  const double n = static_cast<double>(params.n);
  const double p = params.p;
  const double d = static_cast<double>(params.delta);
  const double s = 2.0 * detail::chop_scale(n, p);
  return {(0.5 + (p * (d - 1.0) + 0.5) / s) * n, (0.5 + (p * (-d - 1.0) + 0.5) / s) * n,
          std::sqrt(n / (4.0 * std::numbers::pi))};
}

/// Peak point probability 2 / (n sqrt(pi (2 + pi))) of the day-one law.
inline double day_one_peak(double n) {
  return 2.0 / (n * std::sqrt(std::numbers::pi * (2.0 + std::numbers::pi)));
}

/// Quadratic form ((1+pi) u^2 - 2uv + (1+pi) v^2) / (2 pi (2+pi)) in the exponent.
inline double day_one_exponent(double xp, double yp) {
  constexpr double pi = std::numbers::pi;
  return ((1.0 + pi) * xp * xp - 2.0 * xp * yp + (1.0 + pi) * yp * yp) / (2.0 * pi * (2.0 + pi));
}

/// Approximate P[|R0 ∩ R1| = x and |B0 ∩ B1| = y].
inline double day_one_density(const ModelParams& params, long x, long y) {
  const auto c = day_one_centering(params);
  const double xp = c.x_prime(static_cast<double>(x));
  const double yp = c.y_prime(static_cast<double>(y));
  return day_one_peak(static_cast<double>(params.n)) * std::exp(-day_one_exponent(xp, yp));
}

/// Correlation of (x', y') implied by the day-one quadratic form. The form's
/// matrix [[1+pi, -1], [-1, 1+pi]] / (pi (2+pi)) inverts to [[1+pi, 1], [1, 1+pi]].
inline constexpr double kDayOneCorrelation = 1.0 / (1.0 + std::numbers::pi);
inline constexpr double kDayOneMarginalVariance = 1.0 + std::numbers::pi;

struct StarParams {
  double r_star;
  double b_star;
  double mu_star;
  double sigma;
};

/// Shifted split probabilities r*, b*, the conditional mean mu* of |S| - |T|
/// and its scale sigma, for normalized edge-density offsets alpha0..alpha2.
inline StarParams star_params(const ModelParams& params, double alpha0, double alpha1, double alpha2,
                              double x, double y) {
  params.validate_open();
  const double n = static_cast<double>(params.n);
  const double p = params.p;
  const double d = static_cast<double>(params.delta);
  const double s = 2.0 * detail::chop_scale(n, p);
  StarParams out{};
  out.r_star = 0.5 + (p * (d - 1.0) + 0.5 + alpha0 - alpha2) / s;
  out.b_star = 0.5 + (p * (-d - 1.0) + 0.5 + alpha1 - alpha2) / s;
  out.mu_star = ((alpha1 - alpha0 - 2.0 * p * d) / std::numbers::pi) * n +
                2.0 * std::sqrt(p * (1.0 - p) * n / std::numbers::pi) * (x - y);
  out.sigma = std::sqrt((2.0 - 2.0 / std::numbers::pi) * p * (1.0 - p)) * n;
  return out;
}

struct DayTwoExpectations {
  double eta;
  double e_r0_r2;  ///< E|R0 ∩ R2|
  double e_b0_r2;  ///< E|B0 ∩ R2|
  double e_r2;     ///< |R2| from the signed eta-integral law
};

/// Day-two predictions given the day-one lead |R1| - |B1|.
///
/// The signed integral n * int_{-eta}^{eta} phi(u - sqrt(2/pi)) du is evaluated
/// in closed form as n * (Phi(eta - a) - Phi(-eta - a)), a = sqrt(2/pi).
inline DayTwoExpectations day_two_expectations(const ModelParams& params, long lead1) {
  params.validate_open();
  const double n = static_cast<double>(params.n);
  const double p = params.p;
  const double l = static_cast<double>(lead1);
  const double a = std::sqrt(2.0 / std::numbers::pi);
  DayTwoExpectations out{};
  out.eta = std::sqrt(p / (2.0 * (1.0 - p) * n)) * l;
  // Z ~ N(0, 2): P[Z >= c] = Phi(-c / sqrt 2).
  const double shift = std::sqrt(p / ((1.0 - p) * n)) * (-l);
  const double two_over_sqrt_pi = 2.0 / std::sqrt(std::numbers::pi);
  out.e_r0_r2 = n * normal_sf((two_over_sqrt_pi + shift) / std::numbers::sqrt2);
  out.e_b0_r2 = n * normal_sf((-two_over_sqrt_pi + shift) / std::numbers::sqrt2);
  const double signed_mass =
      out.eta >= 0.0 ? normal_interval(-out.eta - a, out.eta - a) : -normal_interval(out.eta - a, -out.eta - a);
  out.e_r2 = n + n * signed_mass;
  return out;
}

struct DayThreeMargin {
  double predicted_margin;
  double threshold;
  bool safe;
};

/// Predicted deg_{R2} v - deg_{B2} v = p (|R2| - |B2|) for every vertex, and
/// whether it clears kappa * sqrt(n) * (log n)^exponent.
inline DayThreeMargin day_three_margin(const ModelParams& params, long size_r2, long size_b2, double kappa = 10.0,
                                       double exponent = 2.0) {
  params.validate_open();
  if (size_r2 + size_b2 != params.num_vertices())
    throw InvalidInput("day_three_margin: |R2| + |B2| must equal 2n + delta");
  const double n = static_cast<double>(params.n);
  DayThreeMargin out{};
  out.predicted_margin = params.p * static_cast<double>(size_r2 - size_b2);
  out.threshold = kappa * std::sqrt(n) * std::pow(std::log(n), exponent);
  out.safe = std::abs(out.predicted_margin) > out.threshold;
  return out;
}

}  // namespace majdyn
