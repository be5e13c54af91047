#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <optional>
#include <stdexcept>
#include <utility>
#include <vector>

#include "foldnorm/distribution.hpp"
#include "foldnorm/numerics.hpp"

// Maximum likelihood estimation for FN(mu, sigma^2): the log-likelihood, the
// score relation in mu, the variance relation sigma^2 = m2 - mu^2, and three
// fitters (recursive two-equation scheme, one-parameter root search, direct
// Nelder-Mead maximization) with observed-information standard errors and
// asymptotic confidence intervals.

namespace foldnorm {

class singular_matrix_error : public std::runtime_error {
 public:
  explicit singular_matrix_error(const std::string& what)
      : std::runtime_error(what) {}
};

class Dataset {
 public:
  explicit Dataset(std::vector<double> values) : values_(std::move(values)) {
    if (values_.empty()) throw std::invalid_argument("Dataset: empty");
    bool any_positive = false;
    for (double v : values_) {
      if (!std::isfinite(v) || v < 0.0)
        throw std::invalid_argument("Dataset: values must be finite and >= 0");
      if (v > 0.0) any_positive = true;
      sum_ += v;
      sum_sq_ += v * v;
    }
    if (!any_positive)
      throw std::invalid_argument("Dataset: needs at least one positive value");
  }

  const std::vector<double>& values() const { return values_; }
  std::size_t n() const { return values_.size(); }
  double sum() const { return sum_; }
  double sum_sq() const { return sum_sq_; }
  double mean() const { return sum_ / static_cast<double>(n()); }
  double second_moment() const { return sum_sq_ / static_cast<double>(n()); }
  double variance() const { return second_moment() - mean() * mean(); }

 private:
  std::vector<double> values_;
  double sum_ = 0.0;
  double sum_sq_ = 0.0;
};

enum class FitMethod { recursive, root_search, simplex };

inline const char* to_string(FitMethod m) {
  switch (m) {
    case FitMethod::recursive: return "recursive";
    case FitMethod::root_search: return "root_search";
    case FitMethod::simplex: return "simplex";
  }
  return "?";
}

struct FitResult {
  Params params_hat;
  double loglik;
  std::optional<double> se_mu;
  std::optional<double> se_sigma2;
  std::optional<double> corr;
  std::optional<std::pair<double, double>> ci_mu;
  std::optional<std::pair<double, double>> ci_sigma2;
  FitMethod method;
  int iterations;
  bool converged;
  bool boundary_half_normal;
};

namespace detail {

inline double loglik_raw(const Dataset& data, double mu, double sigma2) {
  const double n = static_cast<double>(data.n());
  double quad = data.sum_sq() - 2.0 * mu * data.sum() + n * mu * mu;
  double tail = 0.0;
  for (double x : data.values()) tail += log1pexp(-2.0 * mu * x / sigma2);
  return -0.5 * n * std::log(2.0 * kPi * sigma2) - quad / (2.0 * sigma2) + tail;
}

// Brent's root finder on a bracketing interval.
template <typename F>
double brent_root(F&& f, double a, double b, double fa, double fb, double xtol,
                  int max_iter, int* iterations = nullptr) {
  if (fa * fb > 0.0) throw std::invalid_argument("brent_root: no sign change");
  double c = a, fc = fa, d = b - a, e = d;
  int it = 0;
  for (; it < max_iter; ++it) {
    if (std::abs(fc) < std::abs(fb)) {
      a = b; b = c; c = a;
      fa = fb; fb = fc; fc = fa;
    }
    const double tol1 = 2.0 * 1e-16 * std::abs(b) + 0.5 * xtol;
    const double xm = 0.5 * (c - b);
    if (std::abs(xm) <= tol1 || fb == 0.0) break;
    if (std::abs(e) >= tol1 && std::abs(fa) > std::abs(fb)) {
      double p, q, r;
      const double s = fb / fa;
      if (a == c) {
        p = 2.0 * xm * s;
        q = 1.0 - s;
      } else {
        q = fa / fc;
        r = fb / fc;
        p = s * (2.0 * xm * q * (q - r) - (b - a) * (r - 1.0));
        q = (q - 1.0) * (r - 1.0) * (s - 1.0);
      }
      if (p > 0.0) q = -q;
      p = std::abs(p);
      if (2.0 * p < std::min(3.0 * xm * q - std::abs(tol1 * q), std::abs(e * q))) {
        e = d; d = p / q;
      } else {
        d = xm; e = d;
      }
    } else {
      d = xm; e = d;
    }
    a = b; fa = fb;
    b += (std::abs(d) > tol1) ? d : (xm > 0 ? tol1 : -tol1);
    fb = f(b);
    if ((fb > 0.0) == (fc > 0.0)) { c = a; fc = fa; d = b - a; e = d; }
  }
  if (iterations) *iterations += it;
  return b;
}

struct NelderMeadResult {
  std::array<double, 2> x;
  double fmin;
  int iterations;
  bool converged;
};

// Nelder-Mead on R^2, coefficients (reflect, expand, contract, shrink) =
// (1, 2, 1/2, 1/2).
template <typename F>
NelderMeadResult nelder_mead(F&& f, std::array<double, 2> x0,
                             std::array<double, 2> step, double ftol,
                             int max_iter) {
  using Vec = std::array<double, 2>;
  std::array<Vec, 3> v{x0, x0, x0};
  v[1][0] += step[0];
  v[2][1] += step[1];
  std::array<double, 3> fv{f(v[0]), f(v[1]), f(v[2])};
  int it = 0;
  bool converged = false;
  auto order = [&] {
    for (int i = 0; i < 2; ++i)
      for (int j = i + 1; j < 3; ++j)
        if (fv[j] < fv[i]) { std::swap(fv[i], fv[j]); std::swap(v[i], v[j]); }
  };
  for (; it < max_iter; ++it) {
    order();
    if (fv[2] - fv[0] <= ftol) { converged = true; break; }
    const Vec centroid{0.5 * (v[0][0] + v[1][0]), 0.5 * (v[0][1] + v[1][1])};
    auto blend = [&](double coef) {
      return Vec{centroid[0] + coef * (centroid[0] - v[2][0]),
                 centroid[1] + coef * (centroid[1] - v[2][1])};
    };
    const Vec xr = blend(1.0);
    const double fr = f(xr);
    if (fr < fv[0]) {
      const Vec xe = blend(2.0);
      const double fe = f(xe);
      if (fe < fr) { v[2] = xe; fv[2] = fe; } else { v[2] = xr; fv[2] = fr; }
    } else if (fr < fv[1]) {
      v[2] = xr; fv[2] = fr;
    } else {
      const Vec xc = blend(fr < fv[2] ? 0.5 : -0.5);
      const double fc = f(xc);
      if (fc < std::min(fr, fv[2])) {
        v[2] = xc; fv[2] = fc;
      } else {
        for (int i = 1; i < 3; ++i) {
          v[i][0] = v[0][0] + 0.5 * (v[i][0] - v[0][0]);
          v[i][1] = v[0][1] + 0.5 * (v[i][1] - v[0][1]);
          fv[i] = f(v[i]);
        }
      }
    }
  }
  order();
  return {v[0], fv[0], it, converged};
}

}  // namespace detail

inline double loglik(const Dataset& data, const Params& p) {
  return detail::loglik_raw(data, p.mu(), p.sigma2());
}

/// g(mu) = n mu - sum_i x_i tanh(mu x_i / sigma^2); the positive root is the
/// mu-score equation's interior solution.
inline double score_mu_equation(const Dataset& data, double mu, double sigma2) {
  if (!(sigma2 > 0.0)) throw std::domain_error("score_mu_equation: sigma2 <= 0");
  double s = static_cast<double>(data.n()) * mu;
  for (double x : data.values()) {
    if (x == 0.0) continue;
    s -= x * std::tanh(mu * x / sigma2);
  }
  return s;
}

/// sigma^2 = sum x_i^2 / n - mu^2 (the variance relation at the mu-score root).
inline double sigma2_given_mu(const Dataset& data, double mu) {
  const double v = data.second_moment() - mu * mu;
  if (!(v > 0.0))
    throw std::domain_error("sigma2_given_mu: mu^2 >= second sample moment");
  return v;
}

namespace detail {

/// Hessian of the log-likelihood by central differences, symmetric by
/// construction; steps are cbrt(eps)-relative per coordinate.
inline std::array<std::array<double, 2>, 2> loglik_hessian(const Dataset& data,
                                                           double mu,
                                                           double sigma2) {
  const double cbrt_eps = 6.055454452393343e-06;
  const double h = cbrt_eps * std::max(std::abs(mu), 1.0);
  const double k = cbrt_eps * std::max(sigma2, 1e-12);
  auto l = [&](double m, double s2) { return loglik_raw(data, m, s2); };
  const double l0 = l(mu, sigma2);
  const double hmm = (l(mu + h, sigma2) - 2.0 * l0 + l(mu - h, sigma2)) / (h * h);
  const double hss =
      (l(mu, sigma2 + k) - 2.0 * l0 + l(mu, sigma2 - k)) / (k * k);
  const double hms = (l(mu + h, sigma2 + k) - l(mu + h, sigma2 - k) -
                      l(mu - h, sigma2 + k) + l(mu - h, sigma2 - k)) /
                     (4.0 * h * k);
  return {{{hmm, hms}, {hms, hss}}};
}

struct Inference {
  std::optional<double> se_mu, se_sigma2, corr;
  std::optional<std::pair<double, double>> ci_mu, ci_sigma2;
};

inline Inference inference_at(const Dataset& data, double mu_hat,
                              double sigma2_hat, bool boundary, double level) {
  Inference out;
  const double z = std_normal_quantile(0.5 * (1.0 + level));
  if (boundary) {
    // half-normal limit: single-parameter information for sigma^2
    const double se = sigma2_hat * std::sqrt(2.0 / static_cast<double>(data.n()));
    out.se_sigma2 = se;
    out.ci_sigma2 = std::pair{sigma2_hat - z * se, sigma2_hat + z * se};
    return out;
  }
  const auto H = loglik_hessian(data, mu_hat, sigma2_hat);
  const double j00 = -H[0][0], j01 = -H[0][1], j11 = -H[1][1];
  const double det = j00 * j11 - j01 * j01;
  if (!(j00 > 0.0) || !(det > 0.0)) return out;  // information not PD
  const double c00 = j11 / det, c11 = j00 / det, c01 = -j01 / det;
  if (!(c00 > 0.0) || !(c11 > 0.0)) return out;
  out.se_mu = std::sqrt(c00);
  out.se_sigma2 = std::sqrt(c11);
  out.corr = std::clamp(c01 / std::sqrt(c00 * c11), -1.0, 1.0);
  out.ci_mu = std::pair{mu_hat - z * *out.se_mu, mu_hat + z * *out.se_mu};
  out.ci_sigma2 =
      std::pair{sigma2_hat - z * *out.se_sigma2, sigma2_hat + z * *out.se_sigma2};
  return out;
}

inline FitResult make_fit_result(const Dataset& data, double mu_hat,
                                 double sigma2_hat, FitMethod method,
                                 int iterations, bool converged, bool boundary,
                                 double level) {
  const Inference inf = inference_at(data, mu_hat, sigma2_hat, boundary, level);
  return FitResult{Params(mu_hat, sigma2_hat),
                   loglik_raw(data, mu_hat, sigma2_hat),
                   inf.se_mu,
                   inf.se_sigma2,
                   inf.corr,
                   inf.ci_mu,
                   inf.ci_sigma2,
                   method,
                   iterations,
                   converged,
                   boundary};
}

// Scans (0, hi) for the first sign change of f and polishes with Brent.
// Returns the root, 0 when f stays non-negative (boundary case), or hi when
// f stays negative (profile increasing all the way; degenerate data).
template <typename F>
double positive_root_scan(F&& f, double hi, double xtol, int* iterations) {
  const int kScan = 64;
  // probe just off zero: roots below hi/kScan would otherwise hide the
  // initial negative dip from the coarse scan
  double prev_x = hi * 1e-8;
  double prev_f = f(prev_x);
  if (iterations) ++*iterations;
  bool seen_negative = prev_f < 0.0;
  if (!seen_negative) {
    prev_x = 0.0;
    prev_f = 0.0;  // f(0) = 0 by construction
  }
  for (int j = 1; j <= kScan; ++j) {
    const double x = hi * static_cast<double>(j) / kScan;
    const double fx = f(x);
    if (iterations) ++*iterations;
    if (seen_negative && fx >= 0.0)
      return brent_root(f, prev_x, x, prev_f, fx, xtol * std::max(1.0, hi), 200,
                        iterations);
    if (fx < 0.0) seen_negative = true;
    prev_x = x;
    prev_f = fx;
  }
  return seen_negative ? hi : 0.0;
}

inline void require_fit_preconditions(const Dataset& data) {
  if (data.n() < 2)
    throw std::invalid_argument("fit: needs at least two observations");
}

}  // namespace detail

/// Alternates the positive root of the mu-score equation with the variance
/// relation until the log-likelihood change drops below tol.
inline FitResult fit_recursive(const Dataset& data, double tol = 1e-8,
                               int max_iter = 500, double level = 0.95) {
  detail::require_fit_preconditions(data);
  if (!(data.variance() > 0.0))
    throw std::invalid_argument("fit_recursive: zero sample variance");
  const double m2 = data.second_moment();
  const double mu_cap = std::sqrt(m2);
  double sigma2 = data.variance();
  double mu = 0.0, mu_prev = 0.0;
  double l_prev = detail::loglik_raw(data, 0.0, sigma2);
  int iters = 0;
  bool converged = false;
  for (int it = 1; it <= max_iter; ++it) {
    iters = it;
    auto g = [&](double m) { return score_mu_equation(data, m, sigma2); };
    const double root_hi = mu_cap * (1.0 - 1e-12);
    double root = detail::positive_root_scan(g, root_hi, 1e-12, nullptr);
    if (root <= 0.0) {
      // no interior root for the current sigma^2: half-normal boundary
      return detail::make_fit_result(data, 0.0, m2, FitMethod::recursive, iters,
                                     true, true, level);
    }
    mu = root;
    if (mu * mu >= m2) mu = mu_cap * (1.0 - 1e-12);
    sigma2 = m2 - mu * mu;
    const double l_now = detail::loglik_raw(data, mu, sigma2);
    // on flat ridges the log-likelihood change dips below tol while the
    // alternation is still moving; require the parameter step to settle too
    if (std::abs(l_now - l_prev) < tol &&
        (it > 1 && std::abs(mu - mu_prev) <= 1e-9 * std::max(1.0, mu))) {
      converged = true;
      l_prev = l_now;
      break;
    }
    l_prev = l_now;
    mu_prev = mu;
  }
  if (mu < 1e-10 * mu_cap)
    return detail::make_fit_result(data, 0.0, m2, FitMethod::recursive, iters,
                                   converged, true, level);
  return detail::make_fit_result(data, mu, sigma2, FitMethod::recursive, iters,
                                 converged, false, level);
}

/// One-dimensional root search on h(mu) = g(mu; sigma^2(mu)), the mu-score
/// with the variance relation substituted in.
inline FitResult fit_rootsearch(const Dataset& data, double tol = 1e-12,
                                double level = 0.95) {
  detail::require_fit_preconditions(data);
  const double m2 = data.second_moment();
  const double mu_cap = std::sqrt(m2);
  auto h = [&](double mu) {
    return score_mu_equation(data, mu, m2 - mu * mu);
  };
  int iters = 0;
  const double hi = mu_cap * (1.0 - 1e-10);
  double root = detail::positive_root_scan(h, hi, tol, &iters);
  if (root <= 0.0)
    return detail::make_fit_result(data, 0.0, m2, FitMethod::root_search, iters,
                                   true, true, level);
  if (root >= hi) {
    // profile increases all the way to sigma^2 -> 0 (degenerate data, e.g.
    // all observations equal); report the boundary root
    const double mu = mu_cap * (1.0 - 1e-9);
    return detail::make_fit_result(data, mu, m2 - mu * mu,
                                   FitMethod::root_search, iters, true, false,
                                   level);
  }
  return detail::make_fit_result(data, root, m2 - root * root,
                                 FitMethod::root_search, iters, true, false,
                                 level);
}

/// Nelder-Mead maximization over (mu, log sigma^2).
inline FitResult fit_simplex(const Dataset& data, const Params& init,
                             double tol = 1e-9, int max_iter = 2000,
                             double level = 0.95) {
  detail::require_fit_preconditions(data);
  auto neg_l = [&](std::array<double, 2> x) {
    return -detail::loglik_raw(data, x[0], std::exp(x[1]));
  };
  std::array<double, 2> x{init.mu(), std::log(init.sigma2())};
  int total_iters = 0;
  bool converged = false;
  double step0 = std::max(0.05 * std::abs(x[0]), 0.1);
  double step1 = 0.1;
  for (int round = 0; round < 3; ++round) {
    const int budget = std::max(1, max_iter - total_iters);
    auto r = detail::nelder_mead(neg_l, x, {step0, step1}, tol, budget);
    x = r.x;
    total_iters += r.iterations;
    converged = r.converged;
    if (total_iters >= max_iter) break;
    step0 = std::max(1e-6, 1e-3 * std::max(std::abs(x[0]), 1.0));
    step1 = 1e-4;
  }
  const double mu = std::abs(x[0]);
  const double sigma2 = std::exp(x[1]);
  return detail::make_fit_result(data, mu, sigma2, FitMethod::simplex,
                                 total_iters, converged, false, level);
}

inline FitResult fit_simplex(const Dataset& data, double tol = 1e-9,
                             int max_iter = 2000, double level = 0.95) {
  detail::require_fit_preconditions(data);
  const double var = data.variance();
  const Params init(data.mean(), var > 0.0 ? var : data.second_moment());
  return fit_simplex(data, init, tol, max_iter, level);
}

/// Negative Hessian of the log-likelihood at p (the observed information).
inline std::array<std::array<double, 2>, 2> observed_information(
    const Dataset& data, const Params& p) {
  const auto H = detail::loglik_hessian(data, p.mu(), p.sigma2());
  const std::array<std::array<double, 2>, 2> info{
      {{-H[0][0], -H[0][1]}, {-H[0][1], -H[1][1]}}};
  const double det = info[0][0] * info[1][1] - info[0][1] * info[0][1];
  if (!(info[0][0] > 0.0) || !(det > 0.0))
    throw singular_matrix_error("observed_information: not positive definite");
  return info;
}

/// Asymptotic normal confidence intervals recomputed from a fit's standard
/// errors at the given level.
inline std::pair<std::pair<double, double>, std::pair<double, double>>
asymptotic_ci(const FitResult& fit, double level) {
  if (!(level > 0.0 && level < 1.0))
    throw std::domain_error("asymptotic_ci: level must lie in (0,1)");
  if (!fit.se_mu || !fit.se_sigma2)
    throw std::domain_error("asymptotic_ci: fit has no covariance");
  const double z = std_normal_quantile(0.5 * (1.0 + level));
  const double mu = fit.params_hat.mu(), s2 = fit.params_hat.sigma2();
  return {{mu - z * *fit.se_mu, mu + z * *fit.se_mu},
          {s2 - z * *fit.se_sigma2, s2 + z * *fit.se_sigma2}};
}

inline FitResult fit(const Dataset& data, FitMethod method, double level = 0.95) {
  switch (method) {
    case FitMethod::recursive: return fit_recursive(data, 1e-8, 500, level);
    case FitMethod::root_search: return fit_rootsearch(data, 1e-12, level);
    case FitMethod::simplex: return fit_simplex(data, 1e-9, 2000, level);
  }
  throw std::logic_error("fit: unknown method");
}

}  // namespace foldnorm
