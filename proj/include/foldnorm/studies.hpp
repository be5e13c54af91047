#pragma once

#include <atomic>
#include <cstdint>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>

#include "foldnorm/resampling.hpp"

// Monte-Carlo coverage harness. For every (n, theta) cell it draws R
// datasets from FN(theta * sigma, sigma^2), fits each one, and records how
// often the asymptotic (and optionally bootstrap percentile) confidence
// intervals cover the simulation truth, plus the mean parameter correlation
// from the observed information. Replications are embarrassingly parallel;
// every replication derives its RNG substream from
// (master_seed, cell_index, replication_index), so results are bit-identical
// for any worker count.

namespace foldnorm {

struct StudyConfig {
  std::vector<int> sample_sizes{20, 30, 40, 50, 60, 70, 80, 90, 100};
  std::vector<double> thetas{0.5, 1.0, 1.5, 2.0, 2.5, 3.0, 3.5, 4.0};
  double sigma = 5.0;
  int R = 1000;
  int B = 1000;
  double level = 0.95;
  std::uint64_t master_seed = 97;
  bool enable_bootstrap = false;
  FitMethod fit_method = FitMethod::root_search;
  FitMethod boot_fit_method = FitMethod::root_search;
  int workers = 1;

  void validate() const {
    if (sample_sizes.empty() || thetas.empty())
      throw std::invalid_argument("StudyConfig: empty grid");
    for (int n : sample_sizes)
      if (n < 2) throw std::invalid_argument("StudyConfig: sample size < 2");
    if (!(sigma > 0.0)) throw std::invalid_argument("StudyConfig: sigma <= 0");
    if (R < 1 || B < 1) throw std::invalid_argument("StudyConfig: counts must be positive");
    if (!(level > 0.0 && level < 1.0))
      throw std::invalid_argument("StudyConfig: level outside (0,1)");
    if (workers < 1) throw std::invalid_argument("StudyConfig: workers < 1");
  }
};

struct CoverageCell {
  int n = 0;
  double theta = 0.0;
  double coverage_mu_asym = 0.0;
  double coverage_var_asym = 0.0;
  std::optional<double> coverage_mu_boot;
  std::optional<double> coverage_var_boot;
  double mean_corr = 0.0;
  int failures = 0;

  bool operator==(const CoverageCell&) const = default;
};

namespace detail {

struct RepOutcome {
  bool asym_ok = false;    // asymptotic CI usable (interior fit, PD information)
  bool boot_ok = false;    // bootstrap interval computed
  bool hard_fail = false;  // exception or non-convergence (not a boundary fit)
  bool hit_mu_asym = false;
  bool hit_var_asym = false;
  bool hit_mu_boot = false;
  bool hit_var_boot = false;
  double corr = 0.0;
};

inline RepOutcome run_replication(const StudyConfig& cfg, int cell_index,
                                  int rep, int n, double theta) {
  const double mu_true = theta * cfg.sigma;
  const double s2_true = cfg.sigma * cfg.sigma;
  const std::uint64_t rep_seed = rng::derive_seed(
      cfg.master_seed, {static_cast<std::uint64_t>(cell_index),
                        static_cast<std::uint64_t>(rep)});
  RepOutcome out;
  try {
    const Dataset data(sample(Params(mu_true, s2_true),
                              static_cast<std::size_t>(n), rep_seed));
    const FitResult f = [&] {
      switch (cfg.fit_method) {
        case FitMethod::recursive: return fit_recursive(data, 1e-8, 500, cfg.level);
        case FitMethod::root_search: return fit_rootsearch(data, 1e-12, cfg.level);
        case FitMethod::simplex: return fit_simplex(data, 1e-9, 2000, cfg.level);
      }
      throw std::logic_error("unknown fit method");
    }();
    if (!f.converged) {
      out.hard_fail = true;
      return out;
    }
    // boundary fits and non-invertible information leave no usable
    // asymptotic CI for mu; such replications drop out of the asymptotic
    // metrics but still contribute to the bootstrap ones. Estimates within
    // numerical-zero distance of the boundary (mu_hat far below the
    // estimator's resolution at these sample sizes) get the same treatment:
    // their information matrix is as degenerate as the boundary's.
    const bool effectively_boundary =
        f.boundary_half_normal ||
        f.params_hat.mu() <= 0.02 * f.params_hat.sigma();
    if (!effectively_boundary && f.ci_mu && f.ci_sigma2 && f.corr) {
      out.hit_mu_asym = f.ci_mu->first <= mu_true && mu_true <= f.ci_mu->second;
      out.hit_var_asym =
          f.ci_sigma2->first <= s2_true && s2_true <= f.ci_sigma2->second;
      out.corr = *f.corr;
      out.asym_ok = true;
    }
    if (cfg.enable_bootstrap) {
      const std::uint64_t boot_seed = rng::derive_seed(
          cfg.master_seed, {static_cast<std::uint64_t>(cell_index),
                            static_cast<std::uint64_t>(rep), 0xB00ULL});
      const BootstrapResult br = bootstrap_percentile(
          data, cfg.B, cfg.level, boot_seed, cfg.boot_fit_method);
      out.hit_mu_boot =
          br.ci_mu.first <= mu_true && mu_true <= br.ci_mu.second;
      out.hit_var_boot =
          br.ci_sigma2.first <= s2_true && s2_true <= br.ci_sigma2.second;
      out.boot_ok = true;
    }
  } catch (const std::exception&) {
    out.hard_fail = true;
  }
  return out;
}

}  // namespace detail

inline std::vector<CoverageCell> run_coverage(const StudyConfig& cfg) {
  cfg.validate();
  const int n_cells =
      static_cast<int>(cfg.sample_sizes.size() * cfg.thetas.size());
  const long total_tasks = static_cast<long>(n_cells) * cfg.R;
  std::vector<std::vector<detail::RepOutcome>> slots(
      n_cells, std::vector<detail::RepOutcome>(cfg.R));

  auto cell_of = [&](int cell_index) {
    const int row = cell_index / static_cast<int>(cfg.thetas.size());
    const int col = cell_index % static_cast<int>(cfg.thetas.size());
    return std::pair{cfg.sample_sizes[row], cfg.thetas[col]};
  };

  std::atomic<long> next{0};
  auto worker = [&] {
    for (;;) {
      const long task = next.fetch_add(1);
      if (task >= total_tasks) return;
      const int cell_index = static_cast<int>(task / cfg.R);
      const int rep = static_cast<int>(task % cfg.R);
      const auto [n, theta] = cell_of(cell_index);
      slots[cell_index][rep] =
          detail::run_replication(cfg, cell_index, rep, n, theta);
    }
  };
  if (cfg.workers == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(cfg.workers);
    for (int w = 0; w < cfg.workers; ++w) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }

  std::vector<CoverageCell> cells;
  cells.reserve(n_cells);
  for (int c = 0; c < n_cells; ++c) {
    const auto [n, theta] = cell_of(c);
    long asym_ok = 0, boot_ok = 0, hard = 0;
    long hm = 0, hv = 0, hmb = 0, hvb = 0;
    double corr_sum = 0.0;
    for (const auto& r : slots[c]) {
      hard += r.hard_fail;
      if (r.asym_ok) {
        ++asym_ok;
        hm += r.hit_mu_asym;
        hv += r.hit_var_asym;
        corr_sum += r.corr;
      }
      if (r.boot_ok) {
        ++boot_ok;
        hmb += r.hit_mu_boot;
        hvb += r.hit_var_boot;
      }
    }
    if (hard > cfg.R / 5)
      throw std::runtime_error("run_coverage: more than 20% fit failures in a cell");
    CoverageCell cell;
    cell.n = n;
    cell.theta = theta;
    cell.failures = cfg.R - static_cast<int>(asym_ok);
    if (asym_ok > 0) {
      cell.coverage_mu_asym = static_cast<double>(hm) / asym_ok;
      cell.coverage_var_asym = static_cast<double>(hv) / asym_ok;
      cell.mean_corr = corr_sum / static_cast<double>(asym_ok);
    }
    if (cfg.enable_bootstrap && boot_ok > 0) {
      cell.coverage_mu_boot = static_cast<double>(hmb) / boot_ok;
      cell.coverage_var_boot = static_cast<double>(hvb) / boot_ok;
    }
    cells.push_back(cell);
  }
  return cells;
}

/// Phi(-theta) per entry: the mass a normal with that theta puts below zero.
inline std::vector<double> negative_mass_table(const std::vector<double>& thetas) {
  std::vector<double> out;
  out.reserve(thetas.size());
  for (double th : thetas) {
    if (!std::isfinite(th))
      throw std::invalid_argument("negative_mass_table: non-finite theta");
    out.push_back(std_normal_cdf(-th));
  }
  return out;
}

enum class Metric {
  coverage_mu_asym,
  coverage_mu_boot,
  coverage_var_asym,
  coverage_var_boot,
  mean_corr,
};

inline const char* to_string(Metric m) {
  switch (m) {
    case Metric::coverage_mu_asym: return "coverage_mu_asym";
    case Metric::coverage_mu_boot: return "coverage_mu_boot";
    case Metric::coverage_var_asym: return "coverage_var_asym";
    case Metric::coverage_var_boot: return "coverage_var_boot";
    case Metric::mean_corr: return "mean_corr";
  }
  return "?";
}

namespace detail {

inline std::optional<double> metric_value(const CoverageCell& c, Metric m) {
  switch (m) {
    case Metric::coverage_mu_asym: return c.coverage_mu_asym;
    case Metric::coverage_var_asym: return c.coverage_var_asym;
    case Metric::coverage_mu_boot: return c.coverage_mu_boot;
    case Metric::coverage_var_boot: return c.coverage_var_boot;
    case Metric::mean_corr: return c.mean_corr;
  }
  return std::nullopt;
}

inline std::string format_double(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

}  // namespace detail

/// One metric pivoted into a table: rows are sample sizes, columns are
/// theta values. Header line plus one line per sample size.
inline std::string cell_table_csv(const std::vector<CoverageCell>& cells,
                                  Metric metric) {
  if (cells.empty()) throw std::invalid_argument("cell_table_csv: no cells");
  std::vector<int> ns;
  std::vector<double> thetas;
  for (const auto& c : cells) {
    if (std::find(ns.begin(), ns.end(), c.n) == ns.end()) ns.push_back(c.n);
    if (std::find(thetas.begin(), thetas.end(), c.theta) == thetas.end())
      thetas.push_back(c.theta);
  }
  auto find_cell = [&](int n, double th) -> const CoverageCell& {
    for (const auto& c : cells)
      if (c.n == n && c.theta == th) return c;
    throw std::invalid_argument("cell_table_csv: ragged cell grid");
  };
  std::ostringstream os;
  os << "sample_size";
  for (double th : thetas) os << ',' << detail::format_double(th);
  os << '\n';
  for (int n : ns) {
    os << n;
    for (double th : thetas) {
      const auto v = detail::metric_value(find_cell(n, th), metric);
      if (!v)
        throw std::invalid_argument(
            "cell_table_csv: metric absent (bootstrap disabled?)");
      os << ',' << detail::format_double(*v);
    }
    os << '\n';
  }
  return os.str();
}

inline nlohmann::json report_to_json(const StudyConfig& cfg,
                                     const std::vector<CoverageCell>& cells) {
  nlohmann::json j;
  j["config"] = {{"sample_sizes", cfg.sample_sizes},
                 {"thetas", cfg.thetas},
                 {"sigma", cfg.sigma},
                 {"R", cfg.R},
                 {"B", cfg.B},
                 {"level", cfg.level},
                 {"master_seed", cfg.master_seed},
                 {"enable_bootstrap", cfg.enable_bootstrap},
                 {"fit_method", to_string(cfg.fit_method)},
                 {"boot_fit_method", to_string(cfg.boot_fit_method)}};
  j["cells"] = nlohmann::json::array();
  for (const auto& c : cells) {
    nlohmann::json jc = {{"n", c.n},
                         {"theta", c.theta},
                         {"coverage_mu_asym", c.coverage_mu_asym},
                         {"coverage_var_asym", c.coverage_var_asym},
                         {"mean_corr", c.mean_corr},
                         {"failures", c.failures}};
    if (c.coverage_mu_boot) jc["coverage_mu_boot"] = *c.coverage_mu_boot;
    if (c.coverage_var_boot) jc["coverage_var_boot"] = *c.coverage_var_boot;
    j["cells"].push_back(std::move(jc));
  }
  return j;
}

enum class ReportFormat { csv, json };

/// Serializes a whole report: JSON with config and per-cell metadata, or
/// CSV as one pivoted table per available metric ('# <metric>' headers).
inline std::string emit_tables(const StudyConfig& cfg,
                               const std::vector<CoverageCell>& cells,
                               ReportFormat format) {
  if (cells.empty()) throw std::invalid_argument("emit_tables: no cells");
  if (format == ReportFormat::json) return report_to_json(cfg, cells).dump(2) + "\n";
  std::ostringstream os;
  bool first = true;
  for (Metric m : {Metric::coverage_mu_asym, Metric::coverage_var_asym,
                   Metric::coverage_mu_boot, Metric::coverage_var_boot,
                   Metric::mean_corr}) {
    if (!detail::metric_value(cells.front(), m)) continue;  // absent metric
    if (!first) os << '\n';
    os << "# " << to_string(m) << '\n' << cell_table_csv(cells, m);
    first = false;
  }
  return os.str();
}

inline std::vector<CoverageCell> cells_from_json(const nlohmann::json& j) {
  std::vector<CoverageCell> cells;
  for (const auto& jc : j.at("cells")) {
    CoverageCell c;
    c.n = jc.at("n").get<int>();
    c.theta = jc.at("theta").get<double>();
    c.coverage_mu_asym = jc.at("coverage_mu_asym").get<double>();
    c.coverage_var_asym = jc.at("coverage_var_asym").get<double>();
    c.mean_corr = jc.at("mean_corr").get<double>();
    c.failures = jc.at("failures").get<int>();
    if (jc.contains("coverage_mu_boot"))
      c.coverage_mu_boot = jc.at("coverage_mu_boot").get<double>();
    if (jc.contains("coverage_var_boot"))
      c.coverage_var_boot = jc.at("coverage_var_boot").get<double>();
    cells.push_back(c);
  }
  return cells;
}

}  // namespace foldnorm
