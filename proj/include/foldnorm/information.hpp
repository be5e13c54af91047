#pragma once

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "foldnorm/distribution.hpp"
#include "foldnorm/numerics.hpp"

// Entropy of the folded normal and its Kullback-Leibler divergence from the
// normal and half-normal distributions. Each quantity has a truncated
// Taylor-series evaluator and a quadrature evaluator; the series is built
// from terms
//   I_n = E e^{a_n X} = (e^{-theta^2/2}/2) [erfcx((2n-1) theta / sqrt 2)
//                                         + erfcx((2n+1) theta / sqrt 2)],
// a_n = -2 n mu / sigma^2, so no term can overflow however large theta gets.

namespace foldnorm {

/// Number of leading terms of the infinite sums retained.
struct SeriesOrder {
  int n_terms;
  explicit SeriesOrder(int n) : n_terms(n) {
    if (n < 1 || n > 64)
      throw std::invalid_argument("SeriesOrder: n_terms must lie in [1, 64]");
  }
};

inline constexpr int kDefaultSeriesOrder = 3;

// Below this theta the alternating series is too slow to be useful and the
// evaluators fall back to quadrature (flagged in SeriesValue).
inline constexpr double kSeriesThetaFloor = 0.1;

/// Series evaluation outcome; series_unreliable marks the quadrature
/// fallback taken for theta < kSeriesThetaFloor.
struct SeriesValue {
  double value;
  int terms_used;
  bool series_unreliable;
};

namespace detail {

inline double kl_series_term(double theta, int n) {
  return 0.5 * std::exp(-0.5 * theta * theta) *
         (erfcx((2.0 * n - 1.0) * theta * kInvSqrt2) +
          erfcx((2.0 * n + 1.0) * theta * kInvSqrt2));
}

// initial quadrature breakpoints bracketing the density's support
inline std::vector<double> support_knots(const Params& p) {
  return {std::max(0.0, p.mu() - 8.0 * p.sigma()), p.mu(),
          p.mu() + 8.0 * p.sigma()};
}

}  // namespace detail

/// Plain partial sum of the KL(FN||N) series, no fallback. Terms below
/// 1e-15 in magnitude stop the summation early.
inline SeriesValue kl_from_normal_partial_sum(const Params& p, SeriesOrder order) {
  const double theta = p.theta();
  double sum = 0.0;
  int used = 0;
  for (int n = 1; n <= order.n_terms; ++n) {
    const double term = detail::kl_series_term(theta, n) / n;
    sum += (n % 2 == 1) ? term : -term;
    ++used;
    if (term < 1e-15) break;
  }
  return {std::max(0.0, sum), used, false};
}

inline double kl_from_normal_quadrature(const Params& p) {
  if (p.mu() == 0.0) return kLog2;  // integrand is the constant log 2
  const double c = 2.0 * p.mu() / p.sigma2();
  const auto r = integrate(
      [&](double x) {
        const double f = pdf(x, p);
        return f == 0.0 ? 0.0 : f * log1pexp(-c * x);
      },
      0.0, std::numeric_limits<double>::infinity(), 1e-10, 1e-15,
      detail::support_knots(p));
  return std::max(0.0, r.value);
}

inline SeriesValue kl_from_normal_series_info(const Params& p, SeriesOrder order) {
  if (p.theta() < kSeriesThetaFloor)
    return {kl_from_normal_quadrature(p), 0, true};
  return kl_from_normal_partial_sum(p, order);
}

inline double kl_from_normal_series(
    const Params& p, SeriesOrder order = SeriesOrder(kDefaultSeriesOrder)) {
  return kl_from_normal_series_info(p, order).value;
}

/// Differential entropy by the series route:
/// log sqrt(2 pi sigma^2) + 1/2 + (mu^2 - mu mu_f)/sigma^2 - KL(FN||N).
inline SeriesValue entropy_series_info(const Params& p, SeriesOrder order) {
  const double mean_f = moments(p).mean_f;
  const double analytic = 0.5 * std::log(2.0 * kPi * p.sigma2()) + 0.5 +
                          (p.mu() * p.mu() - p.mu() * mean_f) / p.sigma2();
  const SeriesValue kl = kl_from_normal_series_info(p, order);
  return {analytic - kl.value, kl.terms_used, kl.series_unreliable};
}

inline double entropy_series(const Params& p,
                             SeriesOrder order = SeriesOrder(kDefaultSeriesOrder)) {
  return entropy_series_info(p, order).value;
}

inline double entropy_quadrature(const Params& p) {
  const auto r = integrate(
      [&](double x) {
        const double f = pdf(x, p);
        return f <= 0.0 ? 0.0 : -f * std::log(f);
      },
      0.0, std::numeric_limits<double>::infinity(), 1e-10, 1e-15,
      detail::support_knots(p));
  return r.value;
}

/// KL(FN(mu, sigma^2) || HN(sigma^2)) through the decomposition
/// -log 2 + (2 mu mu_f - mu^2)/(2 sigma^2) + KL(FN||N).
inline SeriesValue kl_from_halfnormal_info(
    const Params& p, SeriesOrder order = SeriesOrder(kDefaultSeriesOrder),
    bool use_quadrature = false) {
  const double mean_f = moments(p).mean_f;
  const double shift =
      -kLog2 + (2.0 * p.mu() * mean_f - p.mu() * p.mu()) / (2.0 * p.sigma2());
  SeriesValue kl = use_quadrature
                       ? SeriesValue{kl_from_normal_quadrature(p), 0, false}
                       : kl_from_normal_series_info(p, order);
  return {std::max(0.0, shift + kl.value), kl.terms_used, kl.series_unreliable};
}

inline double kl_from_halfnormal(
    const Params& p, SeriesOrder order = SeriesOrder(kDefaultSeriesOrder),
    bool use_quadrature = false) {
  return kl_from_halfnormal_info(p, order, use_quadrature).value;
}

}  // namespace foldnorm
