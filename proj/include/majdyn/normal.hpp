// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cmath>
#include <numbers>

namespace majdyn {

/// Standard normal density.
inline double normal_pdf(double z) noexcept {
  return std::exp(-0.5 * z * z) / std::sqrt(2.0 * std::numbers::pi);
}

/// Standard normal cdf. Uses erfc on the side that avoids cancellation, so the
/// lower tail keeps full relative precision.
inline double normal_cdf(double z) noexcept { return 0.5 * std::erfc(-z / std::numbers::sqrt2); }

/// Upper tail 1 - Phi(z).
inline double normal_sf(double z) noexcept { return 0.5 * std::erfc(z / std::numbers::sqrt2); }

/// Density of N(mean, variance) at x.
inline double gaussian_pdf(double x, double mean, double variance) noexcept {
  const double d = x - mean;
  return std::exp(-0.5 * d * d / variance) / std::sqrt(2.0 * std::numbers::pi * variance);
}

/// Density of the standard bivariate normal with correlation rho.
inline double bivariate_normal_pdf(double u, double v, double rho) noexcept {
  const double s = 1.0 - rho * rho;
  const double q = (u * u - 2.0 * rho * u * v + v * v) / s;
  return std::exp(-0.5 * q) / (2.0 * std::numbers::pi * std::sqrt(s));
}

/// P[Z1 <= a, Z2 <= b] for independent standard normals.
inline double standard_bivariate_cdf(double a, double b) noexcept { return normal_cdf(a) * normal_cdf(b); }

/// Phi(b) - Phi(a), computed on the tail side when both bounds are large.
inline double normal_interval(double a, double b) noexcept {
  if (a > 0.0) return normal_sf(a) - normal_sf(b);
  return normal_cdf(b) - normal_cdf(a);
}

}  // namespace majdyn
