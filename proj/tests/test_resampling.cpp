#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "foldnorm/resampling.hpp"

using namespace foldnorm;

TEST_CASE("empirical quantile type-7") {
  CHECK(empirical_quantile({1.0, 2.0, 3.0, 4.0}, 0.5) == Catch::Approx(2.5));
  CHECK(empirical_quantile({4.0, 1.0, 3.0, 2.0}, 0.0) == 1.0);
  CHECK(empirical_quantile({4.0, 1.0, 3.0, 2.0}, 1.0) == 4.0);
  CHECK(empirical_quantile({5.0}, 0.37) == 5.0);
  CHECK_THROWS_AS(empirical_quantile({}, 0.5), std::invalid_argument);
  CHECK_THROWS_AS(empirical_quantile({1.0}, 1.5), std::invalid_argument);
}

TEST_CASE("empirical quantile Monte-Carlo sanity") {
  std::mt19937_64 eng(7);
  std::vector<double> u(100000);
  for (double& v : u) v = (eng() >> 11) * 0x1.0p-53;
  CHECK(empirical_quantile(u, 0.975) == Catch::Approx(0.975).margin(0.01));
}

TEST_CASE("resample index streams ignore the data") {
  const auto a = resample_indices(9, 3, 50);
  const auto b = resample_indices(9, 3, 50);
  CHECK(a == b);
  const auto c = resample_indices(9, 4, 50);
  CHECK(a != c);
  for (auto i : a) CHECK(i < 50);
}

TEST_CASE("bootstrap determinism") {
  const Dataset d(sample(Params(10.0, 25.0), 40, 123));
  const auto r1 = bootstrap_percentile(d, 200, 0.95, 77);
  const auto r2 = bootstrap_percentile(d, 200, 0.95, 77);
  CHECK(r1.ci_mu == r2.ci_mu);
  CHECK(r1.ci_sigma2 == r2.ci_sigma2);
  CHECK(r1.failures == r2.failures);
  CHECK(static_cast<int>(r1.replicate_estimates.size()) + r1.failures == r1.B);
  CHECK(r1.ci_mu.first <= r1.ci_mu.second);
  CHECK(r1.ci_sigma2.first <= r1.ci_sigma2.second);
}

TEST_CASE("bootstrap argument validation") {
  const Dataset d(sample(Params(10.0, 25.0), 40, 123));
  CHECK_THROWS_AS(bootstrap_percentile(d, 50, 0.95, 1), std::invalid_argument);
  CHECK_THROWS_AS(bootstrap_percentile(d, 200, 0.0, 1), std::invalid_argument);
}

TEST_CASE("bootstrap interval endpoints interpolate replicate estimates") {
  const Dataset d(sample(Params(10.0, 25.0), 60, 321));
  const auto r = bootstrap_percentile(d, 300, 0.90, 5);
  double lo = std::numeric_limits<double>::infinity(), hi = -lo;
  for (const auto& p : r.replicate_estimates) {
    lo = std::min(lo, p.mu());
    hi = std::max(hi, p.mu());
  }
  CHECK(r.ci_mu.first >= lo);
  CHECK(r.ci_mu.second <= hi);
}

TEST_CASE("bootstrap interval shifts with a location shift at theta = 4") {
  // at theta = 4 the model is effectively normal, so adding c to the data
  // moves the mu interval by about c
  const Params p(20.0, 25.0);
  const auto base = sample(p, 80, 99);
  std::vector<double> shifted = base;
  const double c = 3.0;
  for (double& v : shifted) v += c;
  const auto r0 = bootstrap_percentile(Dataset(base), 400, 0.95, 11);
  const auto r1 = bootstrap_percentile(Dataset(shifted), 400, 0.95, 11);
  // Monte-Carlo slack: 3 bootstrap standard errors of the endpoint
  const double halfwidth = 0.5 * (r0.ci_mu.second - r0.ci_mu.first);
  const double slack = 3.0 * halfwidth / std::sqrt(80.0);
  CHECK(r1.ci_mu.first - r0.ci_mu.first == Catch::Approx(c).margin(5.0 * slack));
  CHECK(r1.ci_mu.second - r0.ci_mu.second == Catch::Approx(c).margin(5.0 * slack));
}
