#pragma once

#include <cmath>
#include <complex>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "foldnorm/numerics.hpp"
#include "foldnorm/rng.hpp"

// The folded normal distribution FN(mu, sigma^2): the law of |Y| for
// Y ~ N(mu, sigma^2). Density, CDF, quantile, sampling, moments, mode and
// the transform/expectation functions (MGF, characteristic function,
// cumulant GF, Laplace and Fourier transforms, mean residual life).

namespace foldnorm {

/// Parameter pair (mu, sigma^2). The distribution is even in mu, so the
/// canonical representation stores |mu|; the constructor argument's sign is
/// kept for reporting only.
class Params {
 public:
  Params(double mu, double sigma2) : mu_(std::abs(mu)), sigma2_(sigma2) {
    if (!std::isfinite(mu)) throw std::invalid_argument("Params: mu must be finite");
    if (!(sigma2 > 0.0) || !std::isfinite(sigma2))
      throw std::invalid_argument("Params: sigma2 must be positive and finite");
    mu_negative_ = std::signbit(mu) && mu != 0.0;
  }

  double mu() const { return mu_; }
  double sigma2() const { return sigma2_; }
  double sigma() const { return std::sqrt(sigma2_); }
  double theta() const { return mu_ / sigma(); }
  bool mu_was_negative() const { return mu_negative_; }

 private:
  double mu_;
  double sigma2_;
  bool mu_negative_ = false;
};

/// Mean and variance of the folded variable (distinct from mu, sigma^2).
struct MomentSummary {
  double mean_f;
  double var_f;
};

inline double pdf(double x, const Params& p) {
  if (!(x >= 0.0)) throw std::domain_error("pdf: x must be >= 0");
  const double s = p.sigma();
  return (std_normal_pdf((x - p.mu()) / s) + std_normal_pdf((x + p.mu()) / s)) / s;
}

inline double cdf(double x, const Params& p) {
  if (!(x >= 0.0)) throw std::domain_error("cdf: x must be >= 0");
  const double d = kSqrt2 * p.sigma();
  const double v = 0.5 * (std::erf((x - p.mu()) / d) + std::erf((x + p.mu()) / d));
  return std::min(1.0, std::max(0.0, v));
}

/// Survival 1 - F(x) through erfc, free of cancellation in the far tail.
inline double survival(double x, const Params& p) {
  if (!(x >= 0.0)) throw std::domain_error("survival: x must be >= 0");
  const double d = kSqrt2 * p.sigma();
  return 0.5 * (std::erfc((x - p.mu()) / d) + std::erfc((x + p.mu()) / d));
}

inline MomentSummary moments(const Params& p) {
  const double th = p.theta();
  const double mean_f = std::sqrt(2.0 / kPi) * p.sigma() * std::exp(-0.5 * th * th) +
                        p.mu() * (1.0 - 2.0 * std_normal_cdf(-th));
  const double var_f = p.mu() * p.mu() + p.sigma2() - mean_f * mean_f;
  return {mean_f, var_f};
}

inline double quantile(double q, const Params& p) {
  if (!(q > 0.0 && q < 1.0)) throw std::domain_error("quantile: q must lie in (0,1)");
  double hi = p.mu() + 10.0 * p.sigma();
  while (cdf(hi, p) < q) hi *= 2.0;
  double lo = 0.0;
  for (int it = 0; it < 200 && hi - lo > 0.0; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    (cdf(mid, p) < q ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

/// n draws of |N(mu, sigma^2)|, deterministic in the seed.
inline std::vector<double> sample(const Params& p, std::size_t n, std::uint64_t seed) {
  if (n < 1) throw std::invalid_argument("sample: n must be >= 1");
  rng::NormalSampler z(rng::derive_seed(seed, {0x5A4D504CULL}));
  std::vector<double> out(n);
  for (std::size_t i = 0; i < n; ++i)
    out[i] = std::abs(p.mu() + p.sigma() * z());
  return out;
}

/// Argmax of the density: 0 when mu < sigma, otherwise the positive root of
/// (mu + x) e^{-2 mu x / sigma^2} = mu - x located by bisection on (0, mu).
inline double mode(const Params& p) {
  const double mu = p.mu(), s2 = p.sigma2();
  if (mu < p.sigma()) return 0.0;
  auto g = [mu, s2](double x) {
    return (mu + x) * std::exp(-2.0 * mu * x / s2) - (mu - x);
  };
  double lo = mu * 1e-12;
  double hi = mu;
  if (!(g(lo) < 0.0)) return 0.0;  // mu == sigma boundary: maximum stays at 0
  for (int it = 0; it < 200 && hi - lo > 1e-12 * mu; ++it) {
    const double mid = 0.5 * (lo + hi);
    (g(mid) < 0.0 ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

/// E e^{tX}. Both exponential-times-tail products collapse to
/// e^{-theta^2/2} erfcx(.) terms; overflow can only come from the value
/// itself, reported as std::overflow_error.
inline double mgf(double t, const Params& p) {
  if (!std::isfinite(t)) throw std::domain_error("mgf: t must be finite");
  const double s = p.sigma(), th = p.theta();
  const double half_t2s2 = 0.5 * s * s * t * t;
  const double collapsed = -0.5 * th * th;
  const double t1 = exp_normal_sf(half_t2s2 + p.mu() * t, collapsed, -th - s * t);
  const double t2 = exp_normal_sf(half_t2s2 - p.mu() * t, collapsed, th - s * t);
  return t1 + t2;
}

inline double laplace(double t, const Params& p) { return mgf(-t, p); }

inline double cumulant_gf(double t, const Params& p) { return std::log(mgf(t, p)); }

/// E e^{itX}. Evaluated as
///   e^{-s^2 t^2/2 + i mu t} + (e^{-theta^2/2}/2) [w((st + i theta)/sqrt 2)
///                                               - w((-st + i theta)/sqrt 2)]
/// which keeps every Faddeeva argument in the upper half-plane and every
/// exponent non-positive.
inline std::complex<double> cf(double t, const Params& p) {
  const double s = p.sigma(), th = p.theta();
  if (std::abs(s * t) > kComplexImagLimit)
    throw std::domain_error("cf: |t| sigma exceeds the complex stability limit");
  const double st = s * t;
  const double pref = std::exp(-0.5 * st * st);
  const std::complex<double> lead(pref * std::cos(p.mu() * t), pref * std::sin(p.mu() * t));
  const std::complex<double> wplus = faddeeva_w({st * kInvSqrt2, th * kInvSqrt2});
  const std::complex<double> wminus = faddeeva_w({-st * kInvSqrt2, th * kInvSqrt2});
  return lead + 0.5 * std::exp(-0.5 * th * th) * (wplus - wminus);
}

inline std::complex<double> fourier(double t, const Params& p) {
  return cf(-2.0 * kPi * t, p);
}

/// E(X - t | X > t). Reduces to the folded mean at t = 0.
inline double mean_residual_life(double t, const Params& p) {
  if (!(t >= 0.0)) throw std::domain_error("mean_residual_life: t must be >= 0");
  const double surv = survival(t, p);
  if (!(surv > 1e-14))
    throw std::domain_error("mean_residual_life: survival underflow");
  const double s = p.sigma(), mu = p.mu();
  const double zm = (t - mu) / s, zp = (t + mu) / s;
  const double numer = s * (std_normal_pdf(zm) + std_normal_pdf(zp)) +
                       mu * (std_normal_cdf(zp) - std_normal_cdf(zm));
  return numer / surv - t;
}

}  // namespace foldnorm
