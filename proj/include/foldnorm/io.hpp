#pragma once

#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "foldnorm/estimation.hpp"
#include "foldnorm/information.hpp"

// Dataset file loading and CSV plot-data generation.

namespace foldnorm {

/// Reads a dataset of newline-separated non-negative decimals. Blank lines
/// and lines starting with '#' are skipped; a single non-numeric first
/// content line is accepted as a column header. Errors carry the 1-based
/// line number.
inline Dataset load_dataset(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open dataset file: " + path);
  std::vector<double> values;
  std::string line;
  long lineno = 0;
  bool header_allowed = true;
  auto trim = [](std::string s) {
    const char* ws = " \t\r\n\"";
    const auto b = s.find_first_not_of(ws);
    if (b == std::string::npos) return std::string{};
    const auto e = s.find_last_not_of(ws);
    return s.substr(b, e - b + 1);
  };
  while (std::getline(in, line)) {
    ++lineno;
    const std::string t = trim(line);
    if (t.empty() || t[0] == '#') continue;
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
    const bool parsed = ec == std::errc{} && ptr == t.data() + t.size();
    if (!parsed) {
      if (header_allowed) {
        header_allowed = false;
        continue;
      }
      throw std::runtime_error("dataset parse error at line " +
                               std::to_string(lineno) + ": '" + t + "'");
    }
    header_allowed = false;
    if (!std::isfinite(v))
      throw std::runtime_error("dataset parse error at line " +
                               std::to_string(lineno) + ": non-finite value");
    if (v < 0.0)
      throw std::runtime_error("negative value at line " +
                               std::to_string(lineno));
    values.push_back(v);
  }
  if (values.empty()) throw std::runtime_error("empty dataset: " + path);
  return Dataset(std::move(values));
}

enum class PlotKind { density, entropy_curve, kl_curve, profile_loglik };

struct GridSpec {
  double from;
  double to;
  double step;

  void validate() const {
    if (!(step > 0.0) || !(to >= from) || !std::isfinite(from) || !std::isfinite(to))
      throw std::invalid_argument("GridSpec: need finite from <= to and step > 0");
    if ((to - from) / step > 2e6)
      throw std::invalid_argument("GridSpec: more than 2e6 grid points");
  }

  std::vector<double> points() const {
    validate();
    std::vector<double> xs;
    const long count = static_cast<long>(std::floor((to - from) / step + 1e-9));
    for (long i = 0; i <= count; ++i) xs.push_back(from + step * i);
    return xs;
  }
};

namespace detail {

inline void csv_num(std::ostringstream& os, double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  os << buf;
}

}  // namespace detail

/// Folded normal density next to the underlying normal density over a grid.
inline std::string emit_plotdata_density(const Params& p, const GridSpec& grid) {
  std::ostringstream os;
  os << "x,foldnorm_pdf,normal_pdf\n";
  for (double x : grid.points()) {
    detail::csv_num(os, x);
    os << ',';
    detail::csv_num(os, x >= 0.0 ? pdf(x, p) : 0.0);
    os << ',';
    detail::csv_num(os, std_normal_pdf((x - p.mu()) / p.sigma()) / p.sigma());
    os << '\n';
  }
  return os.str();
}

/// Entropy over a theta grid: truncated-series columns per order, then the
/// quadrature value.
inline std::string emit_plotdata_entropy_curve(const GridSpec& theta_grid,
                                               double sigma,
                                               const std::vector<int>& orders) {
  std::ostringstream os;
  os << "theta";
  for (int k : orders) os << ",entropy_order_" << k;
  os << ",entropy_quadrature\n";
  for (double th : theta_grid.points()) {
    const Params p(th * sigma, sigma * sigma);
    const double mean_f = moments(p).mean_f;
    const double analytic = 0.5 * std::log(2.0 * kPi * p.sigma2()) + 0.5 +
                            (p.mu() * p.mu() - p.mu() * mean_f) / p.sigma2();
    detail::csv_num(os, th);
    for (int k : orders) {
      os << ',';
      detail::csv_num(os, analytic -
                              kl_from_normal_partial_sum(p, SeriesOrder(k)).value);
    }
    os << ',';
    detail::csv_num(os, entropy_quadrature(p));
    os << '\n';
  }
  return os.str();
}

/// KL(FN||N) over a theta grid, series orders next to quadrature.
inline std::string emit_plotdata_kl_curve(const GridSpec& theta_grid,
                                          double sigma,
                                          const std::vector<int>& orders,
                                          bool from_halfnormal = false) {
  std::ostringstream os;
  os << "theta";
  for (int k : orders) os << ",kl_order_" << k;
  os << ",kl_quadrature\n";
  for (double th : theta_grid.points()) {
    const Params p(th * sigma, sigma * sigma);
    detail::csv_num(os, th);
    const double shift =
        from_halfnormal
            ? -kLog2 + (2.0 * p.mu() * moments(p).mean_f - p.mu() * p.mu()) /
                           (2.0 * p.sigma2())
            : 0.0;
    for (int k : orders) {
      os << ',';
      detail::csv_num(os, shift + kl_from_normal_partial_sum(p, SeriesOrder(k)).value);
    }
    os << ',';
    detail::csv_num(os, shift + kl_from_normal_quadrature(p));
    os << '\n';
  }
  return os.str();
}

/// Log-likelihood along the variance-relation curve sigma^2 = m2 - mu^2,
/// traced over mu in (-sqrt(m2), sqrt(m2)); shows the critical point at 0
/// and the two maxima at +-mu_hat.
inline std::string emit_plotdata_profile_loglik(const Dataset& data,
                                                long points = 401) {
  if (points < 3) throw std::invalid_argument("profile plot needs >= 3 points");
  const double m2 = data.second_moment();
  const double cap = std::sqrt(m2) * 0.999;
  std::ostringstream os;
  os << "mu,profile_loglik\n";
  for (long i = 0; i < points; ++i) {
    const double mu = -cap + 2.0 * cap * static_cast<double>(i) /
                                 static_cast<double>(points - 1);
    detail::csv_num(os, mu);
    os << ',';
    detail::csv_num(os, detail::loglik_raw(data, mu, m2 - mu * mu));
    os << '\n';
  }
  return os.str();
}

}  // namespace foldnorm
