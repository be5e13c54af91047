#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <cstdint>
#include <limits>
#include <queue>
#include <stdexcept>
#include <vector>

// Special functions and adaptive quadrature used throughout the library:
// standard normal pdf/cdf/quantile, the scaled complementary error function
// erfcx, the Faddeeva function w(z) (and through it the normal CDF of a
// complex argument), and a Gauss-Kronrod integrator that serves as the
// "true value" oracle for everything with a closed form.

namespace foldnorm {

inline constexpr double kPi        = 3.14159265358979323846;
inline constexpr double kSqrt2     = 1.41421356237309504880;
inline constexpr double kInvSqrt2  = 0.70710678118654752440;
inline constexpr double kInvSqrtPi = 0.56418958354775628695;
inline constexpr double kInvSqrt2Pi = 0.39894228040143267794;
inline constexpr double kLog2      = 0.69314718055994530942;

// Beyond this |z| the standard normal CDF saturates to exactly 0/1.
// Callers needing e^{A}(1-Phi(z)) products past the saturation point must
// go through erfcx (see exp_normal_sf).
inline constexpr double kNormalCdfSaturation = 40.0;

// Declared stability limit on |Im z| for cdf_complex.
inline constexpr double kComplexImagLimit = 50.0;

class quadrature_error : public std::runtime_error {
 public:
  explicit quadrature_error(const std::string& what) : std::runtime_error(what) {}
};

inline double std_normal_pdf(double z) {
  return kInvSqrt2Pi * std::exp(-0.5 * z * z);
}

inline double std_normal_cdf(double z) {
  if (z <= -kNormalCdfSaturation) return 0.0;
  if (z >= kNormalCdfSaturation) return 1.0;
  return 0.5 * std::erfc(-z * kInvSqrt2);
}

/// e^{z^2} erfc(z), overflow-free for z >= 0; for z <= -26.64 the true value
/// exceeds DBL_MAX and +infinity is returned.
inline double erfcx(double z) {
  if (!std::isfinite(z)) throw std::domain_error("erfcx: non-finite argument");
  if (z < 0.0) {
    if (z < -26.64) return std::numeric_limits<double>::infinity();
    return 2.0 * std::exp(z * z) - erfcx(-z);
  }
  if (z < 26.0) return std::exp(z * z) * std::erfc(z);
  // Asymptotic series: erfcx(z) ~ (1/(z sqrt(pi))) sum (-1)^k (2k-1)!!/(2z^2)^k.
  const double inv2z2 = 1.0 / (2.0 * z * z);
  double term = 1.0, sum = 1.0;
  for (int k = 1; k <= 8; ++k) {
    term *= -(2 * k - 1) * inv2z2;
    sum += term;
  }
  return sum / (z * std::sqrt(kPi));
}

// e^{A} * (1 - Phi(z)) without intermediate overflow. The tail branch needs
// E = A - z^2/2 supplied analytically by the caller (the floating-point
// difference A - z*z/2 loses the cancellation that makes it small).
inline double exp_normal_sf(double A, double E, double z) {
  const double w = z * kInvSqrt2;
  if (w >= 0.0) {
    if (E > 709.0) throw std::overflow_error("exp_normal_sf: exponent overflow");
    return 0.5 * erfcx(w) * std::exp(E);
  }
  // erfc(w) in (1, 2]: no cancellation, only e^{A} can overflow.
  const double L = A + std::log(0.5 * std::erfc(w));
  if (L > 709.0) throw std::overflow_error("exp_normal_sf: exponent overflow");
  return std::exp(L);
}

/// log(1 + e^{x}) evaluated without overflow for any finite x.
inline double log1pexp(double x) {
  if (x > 0.0) return x + std::log1p(std::exp(-x));
  return std::log1p(std::exp(x));
}

/// Inverse standard normal CDF (Acklam's rational approximation polished by
/// two Newton steps on erfc, giving full double precision).
inline double std_normal_quantile(double p) {
  if (!(p > 0.0 && p < 1.0))
    throw std::domain_error("std_normal_quantile: p must lie in (0,1)");
  static constexpr double a[] = {-3.969683028665376e+01, 2.209460984245205e+02,
                                 -2.759285104469687e+02, 1.383577518672690e+02,
                                 -3.066479806614716e+01, 2.506628277459239e+00};
  static constexpr double b[] = {-5.447609879822406e+01, 1.615858368580409e+02,
                                 -1.556989798598866e+02, 6.680131188771972e+01,
                                 -1.328068155288572e+01};
  static constexpr double c[] = {-7.784894002430293e-03, -3.223964580411365e-01,
                                 -2.400758277161838e+00, -2.549732539343734e+00,
                                 4.374664141464968e+00,  2.938163982698783e+00};
  static constexpr double d[] = {7.784695709041462e-03, 3.224671290700398e-01,
                                 2.445134137142996e+00, 3.754408661907416e+00};
  const double plow = 0.02425;
  double x;
  if (p < plow) {
    const double q = std::sqrt(-2.0 * std::log(p));
    x = (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
        ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  } else if (p <= 1.0 - plow) {
    const double q = p - 0.5, r = q * q;
    x = (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
        (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
  } else {
    const double q = std::sqrt(-2.0 * std::log1p(-p));
    x = -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
        ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  }
  for (int it = 0; it < 2; ++it) {
    const double e = 0.5 * std::erfc(-x * kInvSqrt2) - p;
    const double u = e * std::sqrt(2.0 * kPi) * std::exp(0.5 * x * x);
    x -= u / (1.0 + 0.5 * x * u);  // Halley step
  }
  return x;
}

namespace detail {

// Faddeeva w(z) by the Laplace continued fraction, backward evaluation.
// Accurate in the far field (|z| >= 8, Im z >= 0).
inline std::complex<double> faddeeva_cf(std::complex<double> z, int depth = 28) {
  std::complex<double> f = z;
  for (int k = depth; k >= 1; --k) f = z - (0.5 * k) / f;
  return std::complex<double>(0.0, kInvSqrtPi) / f;
}

// Faddeeva w(z) by Weideman's rational series (N = 40), valid on the closed
// upper half-plane. Coefficients are the Fourier coefficients of
// exp(-t^2)(L^2+t^2) under the substitution t = L tan(theta/2).
inline std::complex<double> faddeeva_weideman(std::complex<double> z) {
  constexpr int N = 40;
  constexpr int M = 2 * N;
  static const double L = std::sqrt(N / kSqrt2);
  static const std::array<double, N> coeff = [] {
    std::array<double, N> a{};
    std::array<double, M> f{};       // f[k] for k = 0..M-1; f(theta_{-k}) = f[k]
    for (int k = 0; k < M; ++k) {
      const double theta = k * kPi / M;
      const double t = L * std::tan(0.5 * theta);
      f[k] = (k == 0) ? L * L : std::exp(-t * t) * (L * L + t * t);
    }
    for (int n = 1; n <= N; ++n) {
      double s = f[0];
      for (int k = 1; k < M; ++k) s += 2.0 * f[k] * std::cos(n * k * kPi / M);
      a[n - 1] = s / (2.0 * M);
    }
    return a;
  }();
  const std::complex<double> iz(-z.imag(), z.real());
  const std::complex<double> lmiz = L - iz;
  const std::complex<double> Z = (L + iz) / lmiz;
  std::complex<double> p = 0.0;
  for (int n = N - 1; n >= 0; --n) p = p * Z + coeff[n];
  return 2.0 * p / (lmiz * lmiz) + kInvSqrtPi / lmiz;
}

}  // namespace detail

/// Faddeeva function w(z) = e^{-z^2} erfc(-iz) for Im z >= 0.
inline std::complex<double> faddeeva_w(std::complex<double> z) {
  if (z.imag() < 0.0)
    throw std::domain_error("faddeeva_w: requires Im z >= 0");
  const double x = z.real();
  if (z.imag() == 0.0) {
    // Re w(x) = e^{-x^2} exactly; the rational/CF forms lose it once it is
    // below their absolute error floor.
    const std::complex<double> v = (std::abs(x) >= 8.0)
                                       ? detail::faddeeva_cf(z)
                                       : detail::faddeeva_weideman(z);
    return {std::exp(-x * x), v.imag()};
  }
  if (std::norm(z) >= 64.0) return detail::faddeeva_cf(z);
  return detail::faddeeva_weideman(z);
}

/// Standard normal CDF continued to complex argument via the Faddeeva
/// function. |Im z| must not exceed kComplexImagLimit; throws
/// std::overflow_error if the (genuinely huge) result exceeds double range.
inline std::complex<double> cdf_complex(std::complex<double> z) {
  if (!std::isfinite(z.real()) || !std::isfinite(z.imag()))
    throw std::domain_error("cdf_complex: non-finite argument");
  if (std::abs(z.imag()) > kComplexImagLimit)
    throw std::domain_error("cdf_complex: |Im z| exceeds stability limit");
  if (z.imag() == 0.0) return {std_normal_cdf(z.real()), 0.0};

  std::complex<double> zeta = -z * kInvSqrt2;
  const bool reflected = zeta.real() < 0.0;
  if (reflected) zeta = -zeta;
  // erfc(zeta) = e^{-zeta^2} w(i zeta), with Im(i zeta) = Re zeta >= 0.
  const std::complex<double> izeta(-zeta.imag(), zeta.real());
  const std::complex<double> wv = faddeeva_w(izeta);
  const std::complex<double> mz2 = -zeta * zeta;
  if (mz2.real() > 709.0)
    throw std::overflow_error("cdf_complex: result exceeds double range");
  std::complex<double> erfc_v = std::exp(mz2) * wv;
  if (reflected) erfc_v = 2.0 - erfc_v;
  const std::complex<double> phi = 0.5 * erfc_v;
  if (!std::isfinite(phi.real()) || !std::isfinite(phi.imag()))
    throw std::overflow_error("cdf_complex: result exceeds double range");
  return phi;
}

struct QuadratureResult {
  double value = 0.0;
  double abs_error_estimate = 0.0;
  long evaluations = 0;
};

namespace detail {

// 15-point Kronrod nodes/weights with the embedded 7-point Gauss rule.
inline constexpr std::array<double, 8> kKronrodNodes = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144838258730, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.000000000000000000000000000000000};
inline constexpr std::array<double, 8> kKronrodWeights = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
inline constexpr std::array<double, 4> kGaussWeights = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

struct Segment {
  double a, b, value, error;
  bool operator<(const Segment& o) const { return error < o.error; }
};

template <typename F>
Segment gauss_kronrod_15(F&& f, double a, double b, long& evaluations) {
  const double c = 0.5 * (a + b);
  const double h = 0.5 * (b - a);
  std::array<double, 15> fv{};
  const double fc = f(c);
  fv[14] = fc;
  double k15 = kKronrodWeights[7] * fc;
  double g7 = kGaussWeights[3] * fc;
  for (int i = 0; i < 7; ++i) {
    const double dx = h * kKronrodNodes[i];
    const double f1 = f(c - dx), f2 = f(c + dx);
    fv[2 * i] = f1;
    fv[2 * i + 1] = f2;
    k15 += kKronrodWeights[i] * (f1 + f2);
    if (i % 2 == 1) g7 += kGaussWeights[i / 2] * (f1 + f2);
  }
  const double value = k15 * h;
  // QUADPACK-style error scaling against the mean-removed integral.
  const double mean = k15 * 0.5;
  double resasc = kKronrodWeights[7] * std::abs(fc - mean);
  for (int i = 0; i < 7; ++i)
    resasc += kKronrodWeights[i] *
              (std::abs(fv[2 * i] - mean) + std::abs(fv[2 * i + 1] - mean));
  resasc *= std::abs(h);
  double err = std::abs((k15 - g7) * h);
  if (resasc != 0.0 && err != 0.0)
    err = resasc * std::min(1.0, std::pow(200.0 * err / resasc, 1.5));
  evaluations += 15;
  return {a, b, value, err};
}

}  // namespace detail

/// Adaptive Gauss-Kronrod integration of f over [lower, upper]; upper may be
/// +infinity, handled by the substitution x = lower + u/(1-u). Subdivides the
/// worst interval until the summed error estimate drops below
/// max(rel_tol*|value|, abs_tol); throws quadrature_error once the interval
/// budget is exhausted. Interior breakpoints force an initial split there,
/// which keeps narrow features from slipping between the nodes of the first
/// coarse rule.
template <typename F>
QuadratureResult integrate(F&& f, double lower, double upper,
                           double rel_tol = 1e-8, double abs_tol = 0.0,
                           std::vector<double> breakpoints = {}) {
  if (!(rel_tol > 1e-14 && rel_tol < 1e-2))
    throw std::domain_error("integrate: rel_tol out of (1e-14, 1e-2)");
  if (std::isnan(lower) || std::isnan(upper))
    throw std::domain_error("integrate: NaN bound");

  long evaluations = 0;
  const int max_segments = 4000;

  auto run = [&](auto&& g, double a, double b,
                 const std::vector<double>& knots) -> QuadratureResult {
    std::vector<double> edges{a};
    for (double k : knots)
      if (k > edges.back() && k < b) edges.push_back(k);
    edges.push_back(b);
    std::priority_queue<detail::Segment> heap;
    double total = 0.0, total_err = 0.0;
    for (std::size_t i = 0; i + 1 < edges.size(); ++i) {
      detail::Segment s =
          detail::gauss_kronrod_15(g, edges[i], edges[i + 1], evaluations);
      total += s.value;
      total_err += s.error;
      heap.push(s);
    }
    int segments = static_cast<int>(edges.size()) - 1;
    while (!std::isfinite(total) || !std::isfinite(total_err) ||
           total_err > std::max(rel_tol * std::abs(total), abs_tol)) {
      if (!std::isfinite(total))
        throw quadrature_error("integrate: integrand produced a non-finite value");
      if (segments >= max_segments)
        throw quadrature_error("integrate: failed to converge within budget");
      detail::Segment worst = heap.top();
      heap.pop();
      const double mid = 0.5 * (worst.a + worst.b);
      if (!(worst.a < mid && mid < worst.b)) {
        // interval has collapsed to machine width; its error estimate is
        // irreducible, so either the rest already meets the tolerance or
        // the integral is not resolvable
        total_err -= worst.error;
        if (total_err <= std::max(rel_tol * std::abs(total), abs_tol)) break;
        throw quadrature_error("integrate: interval underflow before convergence");
      }
      detail::Segment left = detail::gauss_kronrod_15(g, worst.a, mid, evaluations);
      detail::Segment right = detail::gauss_kronrod_15(g, mid, worst.b, evaluations);
      total += left.value + right.value - worst.value;
      total_err += left.error + right.error - worst.error;
      heap.push(left);
      heap.push(right);
      ++segments;
    }
    return {total, total_err, evaluations};
  };

  std::sort(breakpoints.begin(), breakpoints.end());
  if (std::isinf(upper)) {
    auto g = [&f, lower](double u) {
      const double om = 1.0 - u;
      const double x = lower + u / om;
      const double fx = f(x);
      return fx == 0.0 ? 0.0 : fx / (om * om);
    };
    std::vector<double> knots;
    for (double k : breakpoints)
      if (k > lower && std::isfinite(k))
        knots.push_back((k - lower) / (1.0 + k - lower));
    return run(g, 0.0, 1.0, knots);
  }
  return run(f, lower, upper, breakpoints);
}

}  // namespace foldnorm
