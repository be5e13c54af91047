#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <complex>
#include <random>

#include "foldnorm/distribution.hpp"
#include "oracles.hpp"

using namespace foldnorm;

namespace {

const double kInf = std::numeric_limits<double>::infinity();

// the 5x5 parameter grid used by the invariants
std::vector<Params> param_grid() {
  std::vector<Params> g;
  for (double mu : {0.0, 1.0, 2.0, 5.0, 20.0})
    for (double s2 : {0.25, 1.0, 4.0, 9.0, 25.0}) g.emplace_back(mu, s2);
  return g;
}

double quad_moment(const Params& p, int k, double rel = 1e-10) {
  return integrate([&](double x) { return std::pow(x, k) * pdf(x, p); }, 0.0,
                   kInf, rel)
      .value;
}

}  // namespace

TEST_CASE("Params canonicalization and validation") {
  Params p(-2.0, 9.0);
  CHECK(p.mu() == 2.0);
  CHECK(p.mu_was_negative());
  CHECK(p.theta() == Catch::Approx(2.0 / 3.0));
  CHECK_THROWS_AS(Params(1.0, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(Params(1.0, -1.0), std::invalid_argument);
  CHECK_THROWS_AS(Params(std::numeric_limits<double>::quiet_NaN(), 1.0),
                  std::invalid_argument);
}

TEST_CASE("pdf half-normal value and domain") {
  Params p(0.0, 1.0);
  CHECK(pdf(1.0, p) == Catch::Approx(std::sqrt(2.0 / kPi) * std::exp(-0.5)).epsilon(1e-14));
  CHECK(pdf(1.0, p) == Catch::Approx(0.48394).margin(5e-6));
  CHECK_THROWS_AS(pdf(-0.1, p), std::domain_error);
}

TEST_CASE("pdf sign symmetry in mu") {
  std::mt19937_64 eng(7);
  auto u = [&] { return (eng() >> 11) * 0x1.0p-53; };
  for (int i = 0; i < 100; ++i) {
    const double mu = 5.0 * u(), s2 = 0.25 + 4.0 * u(), x = 6.0 * u();
    CHECK(pdf(x, Params(mu, s2)) == pdf(x, Params(-mu, s2)));
  }
}

TEST_CASE("pdf equals the cosh form") {
  std::mt19937_64 eng(11);
  auto u = [&] { return (eng() >> 11) * 0x1.0p-53; };
  for (int i = 0; i < 200; ++i) {
    const double mu = 3.0 * u(), s2 = 0.5 + 3.5 * u(), x = 5.0 * u();
    const Params p(mu, s2);
    const double cosh_form = std::sqrt(2.0 / (kPi * s2)) *
                             std::exp(-(x * x + mu * mu) / (2.0 * s2)) *
                             std::cosh(mu * x / s2);
    CHECK(pdf(x, p) == Catch::Approx(cosh_form).margin(1e-12).epsilon(1e-12));
  }
}

TEST_CASE("pdf integrates to one") {
  for (auto [mu, s2] : {std::pair{2.0, 3.0}, {2.0, 4.0}, {2.0, 9.0}}) {
    const Params p(mu, s2);
    CHECK(quad_moment(p, 0, 1e-10) == Catch::Approx(1.0).margin(1e-8));
  }
}

TEST_CASE("normalization across the parameter grid") {
  for (const auto& p : param_grid())
    CHECK(quad_moment(p, 0, 1e-10) == Catch::Approx(1.0).margin(1e-8));
}

TEST_CASE("cdf values and quadrature agreement") {
  CHECK(cdf(0.0, Params(2.0, 9.0)) == 0.0);
  CHECK(cdf(1.0, Params(0.0, 1.0)) ==
        Catch::Approx(std::erf(1.0 * kInvSqrt2)).epsilon(1e-14));
  const Params p(2.0, 9.0);
  for (double x : {0.5, 2.0, 5.0, 10.0}) {
    const double want =
        integrate([&](double t) { return pdf(t, p); }, 0.0, x, 1e-11).value;
    CHECK(cdf(x, p) == Catch::Approx(want).margin(1e-8));
  }
  CHECK_THROWS_AS(cdf(-1.0, p), std::domain_error);
}

TEST_CASE("cdf reduces to chi_1 for mu = 0") {
  for (double s2 : {0.25, 1.0, 9.0}) {
    const Params p(0.0, s2);
    for (double x = 0.0; x < 6.0 * p.sigma(); x += 0.37 * p.sigma())
      CHECK(cdf(x, p) ==
            Catch::Approx(std::erf(x / (p.sigma() * kSqrt2))).margin(1e-12));
  }
}

TEST_CASE("cdf derivative matches pdf") {
  std::mt19937_64 eng(19);
  auto u = [&] { return (eng() >> 11) * 0x1.0p-53; };
  for (int i = 0; i < 100; ++i) {
    const Params p(4.0 * u(), 0.5 + 4.0 * u());
    const double x = 0.2 + 5.0 * u();
    const double h = 1e-6;
    const double deriv = (cdf(x + h, p) - cdf(x - h, p)) / (2.0 * h);
    CHECK(deriv == Catch::Approx(pdf(x, p)).margin(1e-5));
  }
}

TEST_CASE("quantile half-normal median and round trip") {
  CHECK(quantile(0.5, Params(0.0, 1.0)) ==
        Catch::Approx(0.674489750196082).margin(1e-10));
  std::mt19937_64 eng(23);
  auto u = [&] { return (eng() >> 11) * 0x1.0p-53; };
  for (int i = 0; i < 50; ++i) {
    const Params p(4.0 * u(), 0.5 + 4.0 * u());
    const double x = 0.1 + 4.0 * u();
    CHECK(quantile(cdf(x, p), p) == Catch::Approx(x).margin(1e-8));
  }
  CHECK_THROWS_AS(quantile(0.0, Params(1.0, 1.0)), std::domain_error);
  CHECK_THROWS_AS(quantile(1.0, Params(1.0, 1.0)), std::domain_error);
}

TEST_CASE("quantile against quadrature-CDF bisection") {
  const Params p(2.0, 9.0);
  auto cdf_quad = [&](double x) {
    return integrate([&](double t) { return pdf(t, p); }, 0.0, x, 1e-11).value;
  };
  double lo = 0.0, hi = 40.0;
  for (int i = 0; i < 100; ++i) {
    const double mid = 0.5 * (lo + hi);
    (cdf_quad(mid) < 0.975 ? lo : hi) = mid;
  }
  CHECK(quantile(0.975, p) == Catch::Approx(0.5 * (lo + hi)).margin(1e-7));
}

TEST_CASE("sampling determinism and support") {
  const Params p(2.0, 9.0);
  auto a = sample(p, 1000, 99);
  auto b = sample(p, 1000, 99);
  CHECK(a == b);
  auto c = sample(p, 1000, 100);
  CHECK(a != c);
  for (double v : a) CHECK(v >= 0.0);
}

TEST_CASE("sample mean matches closed-form mean") {
  const Params p(2.0, 9.0);
  const auto m = moments(p);
  const std::size_t n = 1000000;
  auto xs = sample(p, n, 2024);
  double sum = 0.0;
  for (double v : xs) sum += v;
  const double mean = sum / static_cast<double>(n);
  CHECK(std::abs(mean - m.mean_f) <= 4.0 * std::sqrt(m.var_f / n));
}

TEST_CASE("moments closed forms") {
  const auto m01 = moments(Params(0.0, 1.0));
  CHECK(m01.mean_f == Catch::Approx(std::sqrt(2.0 / kPi)).epsilon(1e-14));
  CHECK(m01.var_f == Catch::Approx(1.0 - 2.0 / kPi).epsilon(1e-13));

  // theta = 4: the folded-over mass is negligible and the folded mean sits
  // 7.1e-5 above mu, which the quadrature oracle confirms.
  const auto m = moments(Params(20.0, 25.0));
  CHECK(m.mean_f == Catch::Approx(quad_moment(Params(20.0, 25.0), 1)).margin(1e-8));
  CHECK(std::abs(m.mean_f - 20.0) < 1e-4);
  CHECK(m.mean_f > 20.0);

  const auto m29 = moments(Params(2.0, 9.0));
  CHECK(m29.mean_f == Catch::Approx(2.906717882946422).margin(1e-9));
  CHECK(m29.mean_f == Catch::Approx(quad_moment(Params(2.0, 9.0), 1)).margin(1e-8));
}

TEST_CASE("moment identities across the grid") {
  for (const auto& p : param_grid()) {
    const auto m = moments(p);
    CHECK(m.var_f ==
          Catch::Approx(p.mu() * p.mu() + p.sigma2() - m.mean_f * m.mean_f)
              .margin(1e-12));
    CHECK(m.mean_f >= p.mu());
    CHECK(m.mean_f >= std::sqrt(2.0 / kPi) * p.sigma() *
                          std::exp(-0.5 * p.theta() * p.theta()) - 1e-12);
  }
}

TEST_CASE("moments agree with large-sample statistics") {
  const Params p(1.0, 4.0);
  const auto m = moments(p);
  const std::size_t n = 1000000;
  auto xs = sample(p, n, 77);
  double s1 = 0.0, s2 = 0.0;
  for (double v : xs) { s1 += v; s2 += v * v; }
  const double mean = s1 / n;
  const double var = s2 / n - mean * mean;
  const double mu4 = quad_moment(p, 4) - 4.0 * m.mean_f * quad_moment(p, 3) +
                     6.0 * m.mean_f * m.mean_f * quad_moment(p, 2) -
                     3.0 * std::pow(m.mean_f, 4);
  CHECK(std::abs(mean - m.mean_f) <= 4.0 * std::sqrt(m.var_f / n));
  CHECK(std::abs(var - m.var_f) <=
        4.0 * std::sqrt((mu4 - m.var_f * m.var_f) / n));
}

TEST_CASE("mode shortcut and root") {
  CHECK(mode(Params(2.0, 9.0)) == 0.0);
  CHECK(mode(Params(0.0, 1.0)) == 0.0);

  // dense grid-search argmax oracle for (15, 25)
  const Params p(15.0, 25.0);
  double best_x = 0.0, best_f = -1.0;
  for (double x = 0.0; x <= 20.0; x += 1e-5) {
    const double f = pdf(x, p);
    if (f > best_f) { best_f = f; best_x = x; }
  }
  const double m = mode(p);
  CHECK(std::abs(m - best_x) <= 1e-4);
  CHECK(std::abs(m - 15.0) <= 0.2);
}

TEST_CASE("mode maximizes the density over the grid") {
  for (const auto& p : param_grid()) {
    const double m = mode(p);
    const double eps = 1e-4;
    CHECK(pdf(m, p) >= pdf(m + eps, p) - 1e-12);
    if (m > eps) CHECK(pdf(m, p) >= pdf(m - eps, p) - 1e-12);
  }
}

TEST_CASE("mgf normalization and oracle values") {
  for (const auto& p : param_grid()) CHECK(mgf(0.0, p) == Catch::Approx(1.0).epsilon(1e-13));

  const Params hn(0.0, 1.0);
  const double closed = 2.0 * std::exp(0.5) * std_normal_cdf(1.0);
  CHECK(mgf(1.0, hn) == Catch::Approx(closed).epsilon(1e-12));
  const double quad_hn =
      integrate(
          [&](double x) {
            const double f = pdf(x, hn);
            return f == 0.0 ? 0.0 : std::exp(x) * f;
          },
          0.0, kInf, 1e-10)
          .value;
  CHECK(mgf(1.0, hn) == Catch::Approx(quad_hn).margin(1e-8));

  const Params p(2.0, 9.0);
  const double quad =
      integrate([&](double x) { return std::exp(-0.5 * x) * pdf(x, p); }, 0.0,
                kInf, 1e-10)
          .value;
  CHECK(mgf(-0.5, p) == Catch::Approx(quad).margin(1e-8));
}

TEST_CASE("mgf overflow reporting") {
  CHECK_THROWS_AS(mgf(50.0, Params(2.0, 9.0)), std::overflow_error);
}

TEST_CASE("cf basics and real-part identity") {
  for (const auto& p : param_grid()) {
    const auto v = cf(0.0, p);
    CHECK(v.real() == Catch::Approx(1.0).epsilon(1e-13));
    CHECK(v.imag() == Catch::Approx(0.0).margin(1e-13));
  }
  std::mt19937_64 eng(31);
  auto u = [&] { return (eng() >> 11) * 0x1.0p-53; };
  for (int i = 0; i < 100; ++i) {
    const Params p(5.0 * u(), 0.5 + 4.0 * u());
    const double t = -3.0 + 6.0 * u();
    const auto v = cf(t, p);
    const double want = std::exp(-0.5 * p.sigma2() * t * t) * std::cos(p.mu() * t);
    CHECK(v.real() == Catch::Approx(want).margin(1e-12));
    CHECK(std::abs(v) <= 1.0 + 1e-12);
  }
}

TEST_CASE("cf imaginary part against quadrature") {
  const Params p(2.0, 9.0);
  const double want =
      integrate([&](double x) { return std::sin(0.7 * x) * pdf(x, p); }, 0.0,
                kInf, 1e-10, 1e-14)
          .value;
  CHECK(cf(0.7, p).imag() == Catch::Approx(want).margin(1e-7));
  CHECK_THROWS_AS(cf(100.0, Params(0.0, 25.0)), std::domain_error);
}

TEST_CASE("cumulant generating function derivatives") {
  for (const auto& p : param_grid()) CHECK(cumulant_gf(0.0, p) == Catch::Approx(0.0).margin(1e-13));
  const Params p(2.0, 9.0);
  const auto m = moments(p);
  const double h = 1e-5;
  const double d1 = (cumulant_gf(h, p) - cumulant_gf(-h, p)) / (2.0 * h);
  const double d2 =
      (cumulant_gf(h, p) - 2.0 * cumulant_gf(0.0, p) + cumulant_gf(-h, p)) / (h * h);
  CHECK(d1 == Catch::Approx(m.mean_f).margin(1e-5));
  CHECK(d2 == Catch::Approx(m.var_f).margin(1e-3));
}

TEST_CASE("laplace transform identities") {
  const Params p(2.0, 9.0);
  CHECK(laplace(0.0, p) == Catch::Approx(1.0).epsilon(1e-13));
  std::mt19937_64 eng(37);
  auto u = [&] { return (eng() >> 11) * 0x1.0p-53; };
  for (int i = 0; i < 50; ++i) {
    const double t = -2.0 + 4.0 * u();
    CHECK(laplace(t, p) == mgf(-t, p));  // bit-identical by definition
  }
  const double quad =
      integrate([&](double x) { return std::exp(-x) * pdf(x, p); }, 0.0, kInf, 1e-10)
          .value;
  CHECK(laplace(1.0, p) == Catch::Approx(quad).margin(1e-8));
}

TEST_CASE("fourier transform identities") {
  const Params p(2.0, 9.0);
  const auto at0 = fourier(0.0, p);
  CHECK(at0.real() == Catch::Approx(1.0).epsilon(1e-13));
  CHECK(at0.imag() == Catch::Approx(0.0).margin(1e-13));
  std::mt19937_64 eng(41);
  auto u = [&] { return (eng() >> 11) * 0x1.0p-53; };
  for (int i = 0; i < 50; ++i) {
    const double t = -1.5 + 3.0 * u();
    CHECK(fourier(t, p) == cf(-2.0 * kPi * t, p));
    const auto a = fourier(-t, p);
    const auto b = std::conj(fourier(t, p));
    CHECK(a.real() == Catch::Approx(b.real()).margin(1e-13));
    CHECK(a.imag() == Catch::Approx(b.imag()).margin(1e-13));
  }
}

TEST_CASE("mean residual life") {
  const Params p(2.0, 9.0);
  const auto m = moments(p);
  CHECK(mean_residual_life(0.0, p) == Catch::Approx(m.mean_f).epsilon(1e-13));

  const Params hn(0.0, 1.0);
  {
    const double num =
        integrate([&](double x) { return x * pdf(x, hn); }, 1.0, kInf, 1e-10).value;
    const double want = num / survival(1.0, hn) - 1.0;
    CHECK(mean_residual_life(1.0, hn) == Catch::Approx(want).margin(1e-7));
  }
  {
    const double num =
        integrate([&](double x) { return x * pdf(x, p); }, 3.0, kInf, 1e-10).value;
    const double want = num / survival(3.0, p) - 3.0;
    CHECK(mean_residual_life(3.0, p) == Catch::Approx(want).margin(1e-7));
  }
  for (const auto& g : param_grid())
    for (double t : {0.0, 0.5, 2.0, 5.0}) {
      if (survival(t, g) <= 1e-12) continue;
      CHECK(mean_residual_life(t, g) >= 0.0);
    }
  CHECK_THROWS_AS(mean_residual_life(1e6, p), std::domain_error);
}
