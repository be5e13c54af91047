#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <utility>
#include <vector>

#include "foldnorm/estimation.hpp"
#include "foldnorm/rng.hpp"

// Percentile bootstrap confidence intervals for (mu, sigma^2). Resample
// index streams are keyed by (seed, replicate) and never look at the data
// values, so two datasets of equal size consume identical index sequences.
// Boundary (half-normal) fits are converged estimates and enter the
// replicate distribution as mu_hat = 0; only non-convergent or throwing
// fits count as failures.

namespace foldnorm {

struct BootstrapResult {
  int B;
  std::pair<double, double> ci_mu;
  std::pair<double, double> ci_sigma2;
  std::vector<Params> replicate_estimates;
  int failures;
};

/// Order-statistic quantile, type-7 convention: h = (m-1) q, linear
/// interpolation between the bracketing order statistics.
inline double empirical_quantile(std::vector<double> values, double q) {
  if (values.empty())
    throw std::invalid_argument("empirical_quantile: empty input");
  if (!(q >= 0.0 && q <= 1.0))
    throw std::invalid_argument("empirical_quantile: q outside [0,1]");
  std::sort(values.begin(), values.end());
  const double h = (static_cast<double>(values.size()) - 1.0) * q;
  const std::size_t lo = static_cast<std::size_t>(std::floor(h));
  const std::size_t hi = std::min(lo + 1, values.size() - 1);
  const double w = h - static_cast<double>(lo);
  return values[lo] + w * (values[hi] - values[lo]);
}

/// Resampling index stream for one bootstrap replicate; depends only on
/// (seed, replicate, n).
inline std::vector<std::uint32_t> resample_indices(std::uint64_t seed,
                                                   std::uint64_t replicate,
                                                   std::size_t n) {
  std::mt19937_64 eng(rng::derive_seed(seed, {0xB007ULL, replicate}));
  std::vector<std::uint32_t> idx(n);
  for (std::size_t i = 0; i < n; ++i)
    idx[i] = static_cast<std::uint32_t>(rng::uniform_index(eng, n));
  return idx;
}

inline BootstrapResult bootstrap_percentile(const Dataset& data, int B,
                                            double level, std::uint64_t seed,
                                            FitMethod fitter = FitMethod::root_search) {
  if (B < 100) throw std::invalid_argument("bootstrap_percentile: B must be >= 100");
  if (!(level > 0.0 && level < 1.0))
    throw std::invalid_argument("bootstrap_percentile: level outside (0,1)");
  const std::size_t n = data.n();
  std::vector<double> mus, sigma2s;
  mus.reserve(B);
  sigma2s.reserve(B);
  std::vector<Params> estimates;
  estimates.reserve(B);
  int failures = 0;
  std::vector<double> buf(n);
  for (int b = 0; b < B; ++b) {
    const auto idx = resample_indices(seed, static_cast<std::uint64_t>(b), n);
    for (std::size_t i = 0; i < n; ++i) buf[i] = data.values()[idx[i]];
    try {
      const Dataset resampled(buf);
      const FitResult f = fit(resampled, fitter);
      if (!f.converged) {
        ++failures;
        continue;
      }
      estimates.push_back(f.params_hat);
      mus.push_back(f.params_hat.mu());
      sigma2s.push_back(f.params_hat.sigma2());
    } catch (const std::exception&) {
      ++failures;
    }
  }
  if (failures > B / 2)
    throw std::runtime_error("bootstrap_percentile: more than half the replicates failed");
  const double qlo = 0.5 * (1.0 - level), qhi = 0.5 * (1.0 + level);
  return BootstrapResult{B,
                         {empirical_quantile(mus, qlo), empirical_quantile(mus, qhi)},
                         {empirical_quantile(sigma2s, qlo),
                          empirical_quantile(sigma2s, qhi)},
                         std::move(estimates),
                         failures};
}

}  // namespace foldnorm
