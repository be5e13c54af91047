#pragma once

#include <cmath>
#include <complex>
#include <functional>

#include "foldnorm/numerics.hpp"

// Test-only oracles. Each one takes an evaluation route that is independent
// of the implementation path it is used to check.

namespace oracles {

// erfc(z) = (2/sqrt(pi)) int_z^inf e^{-t^2} dt, by quadrature.
inline double erfc_quadrature(double z) {
  auto r = foldnorm::integrate(
      [](double t) { return std::exp(-t * t); }, z,
      std::numeric_limits<double>::infinity(), 1e-12);
  return 2.0 * foldnorm::kInvSqrtPi * r.value;
}

// Phi(x + iy) integrated along the segment from x to x + iy:
// Phi(x) + (1/sqrt(2 pi)) int_0^y e^{(s^2 - x^2)/2} [sin(xs) + i cos(xs)] ds.
inline std::complex<double> cdf_complex_segment(double x, double y) {
  const double base = 0.5 * std::erfc(-x * foldnorm::kInvSqrt2);
  if (y == 0.0) return {base, 0.0};
  const double lo = std::min(0.0, y), hi = std::max(0.0, y);
  auto re = foldnorm::integrate(
      [x](double s) { return std::exp(0.5 * (s * s - x * x)) * std::sin(x * s); },
      lo, hi, 1e-12, 1e-16);
  auto im = foldnorm::integrate(
      [x](double s) { return std::exp(0.5 * (s * s - x * x)) * std::cos(x * s); },
      lo, hi, 1e-12, 1e-16);
  const double sign = y > 0.0 ? 1.0 : -1.0;
  return {base + sign * foldnorm::kInvSqrt2Pi * re.value,
          sign * foldnorm::kInvSqrt2Pi * im.value};
}

// Midpoint Riemann sum of f over [a, b] with `points` evaluations.
inline double riemann(const std::function<double(double)>& f, double a, double b,
                      long points) {
  const double h = (b - a) / static_cast<double>(points);
  double sum = 0.0;
  for (long i = 0; i < points; ++i) sum += f(a + (i + 0.5) * h);
  return sum * h;
}

}  // namespace oracles
