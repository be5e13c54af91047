#pragma once

#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "foldnorm/io.hpp"
#include "foldnorm/resampling.hpp"
#include "foldnorm/studies.hpp"

// Command-line front end. Subcommands: eval, fit, entropy, kl, sample,
// coverage, tables. JSON on stdout by default; CSV where tabular. Exit
// codes: 0 success, 2 usage error, 1 runtime error. Randomized subcommands
// take --seed and default to the fixed seed 97.

namespace foldnorm::cli {

inline constexpr std::uint64_t kDefaultSeed = 97;

namespace detail {

using nlohmann::json;

inline json interval_json(const std::pair<double, double>& ci) {
  return json::array({ci.first, ci.second});
}

inline json fit_to_json(const FitResult& f) {
  json j;
  j["mu_hat"] = f.params_hat.mu();
  j["sigma2_hat"] = f.params_hat.sigma2();
  j["loglik"] = f.loglik;
  j["method"] = to_string(f.method);
  j["iterations"] = f.iterations;
  j["converged"] = f.converged;
  j["boundary_half_normal"] = f.boundary_half_normal;
  j["se_mu"] = f.se_mu ? json(*f.se_mu) : json(nullptr);
  j["se_sigma2"] = f.se_sigma2 ? json(*f.se_sigma2) : json(nullptr);
  j["corr"] = f.corr ? json(*f.corr) : json(nullptr);
  j["ci_mu"] = f.ci_mu ? interval_json(*f.ci_mu) : json(nullptr);
  j["ci_sigma2"] = f.ci_sigma2 ? interval_json(*f.ci_sigma2) : json(nullptr);
  return j;
}

inline FitMethod parse_method(const std::string& s) {
  if (s == "recursive") return FitMethod::recursive;
  if (s == "root_search") return FitMethod::root_search;
  if (s == "simplex") return FitMethod::simplex;
  throw CLI::ValidationError("--method", "unknown method '" + s + "'");
}

inline void write_output(std::ostream& out, const std::string& text,
                         const std::string& path) {
  if (path.empty()) {
    out << text;
    return;
  }
  std::ofstream f(path);
  if (!f) throw std::runtime_error("cannot write output file: " + path);
  f << text;
}

}  // namespace detail

/// Runs the CLI against args (without the program name); output streams are
/// injectable for testing.
inline int run(const std::vector<std::string>& args, std::ostream& out,
               std::ostream& err) {
  using detail::json;
  CLI::App app{"folded normal distribution toolkit"};
  app.require_subcommand(1);

  // ---- eval ----------------------------------------------------------
  auto* eval = app.add_subcommand("eval", "evaluate distribution functions");
  double e_mu = 0.0, e_sigma2 = 1.0;
  eval->add_option("--mu", e_mu, "location of the underlying normal")->required();
  eval->add_option("--sigma2", e_sigma2, "variance of the underlying normal")
      ->required()
      ->check(CLI::PositiveNumber);
  std::optional<double> pdf_at, cdf_at, quantile_at, mgf_at, laplace_at,
      cumulant_at, cf_at, fourier_at, mrl_at;
  bool want_moments = false, want_mode = false;
  eval->add_option("--pdf-at", pdf_at, "density at x >= 0");
  eval->add_option("--cdf-at", cdf_at, "CDF at x >= 0");
  eval->add_option("--quantile-at", quantile_at, "quantile at q in (0,1)");
  eval->add_option("--mgf-at", mgf_at, "moment generating function at t");
  eval->add_option("--laplace-at", laplace_at, "Laplace transform at t");
  eval->add_option("--cumulant-at", cumulant_at, "cumulant generating function at t");
  eval->add_option("--cf-at", cf_at, "characteristic function at t");
  eval->add_option("--fourier-at", fourier_at, "Fourier transform at t");
  eval->add_option("--mrl-at", mrl_at, "mean residual life at t >= 0");
  eval->add_flag("--moments", want_moments, "folded mean and variance");
  eval->add_flag("--mode", want_mode, "density argmax");

  // ---- fit -----------------------------------------------------------
  auto* fitcmd = app.add_subcommand("fit", "maximum likelihood fit of a dataset");
  std::string f_data, f_method = "root_search";
  double f_level = 0.95;
  int f_boot = 0;
  std::uint64_t f_seed = kDefaultSeed;
  fitcmd->add_option("--data", f_data, "dataset file (one value per line)")
      ->required();
  fitcmd->add_option("--method", f_method,
                     "recursive | root_search | simplex");
  fitcmd->add_option("--level", f_level, "confidence level")
      ->check(CLI::Range(1e-6, 1.0 - 1e-6));
  fitcmd->add_option("--bootstrap", f_boot,
                     "bootstrap replicates for percentile intervals (>= 100)");
  fitcmd->add_option("--seed", f_seed, "bootstrap seed");

  // ---- entropy -------------------------------------------------------
  auto* ent = app.add_subcommand("entropy", "differential entropy");
  double n_mu = 0.0, n_sigma2 = 1.0;
  int n_order = kDefaultSeriesOrder;
  bool n_quad = false;
  ent->add_option("--mu", n_mu)->required();
  ent->add_option("--sigma2", n_sigma2)->required()->check(CLI::PositiveNumber);
  ent->add_option("--order", n_order, "series order (1..64)");
  ent->add_flag("--quadrature", n_quad, "integrate instead of the series");

  // ---- kl ------------------------------------------------------------
  auto* kl = app.add_subcommand("kl", "Kullback-Leibler divergence");
  double k_mu = 0.0, k_sigma2 = 1.0;
  int k_order = kDefaultSeriesOrder;
  bool k_quad = false;
  std::string k_from = "normal";
  kl->add_option("--mu", k_mu)->required();
  kl->add_option("--sigma2", k_sigma2)->required()->check(CLI::PositiveNumber);
  kl->add_option("--from", k_from, "normal | halfnormal");
  kl->add_option("--order", k_order, "series order (1..64)");
  kl->add_flag("--quadrature", k_quad, "integrate instead of the series");

  // ---- sample --------------------------------------------------------
  auto* smp = app.add_subcommand("sample", "draw from the distribution");
  double s_mu = 0.0, s_sigma2 = 1.0;
  std::size_t s_n = 1;
  std::uint64_t s_seed = kDefaultSeed;
  std::string s_format = "json", s_output;
  smp->add_option("--mu", s_mu)->required();
  smp->add_option("--sigma2", s_sigma2)->required()->check(CLI::PositiveNumber);
  smp->add_option("-n,--count", s_n, "number of draws")->required();
  smp->add_option("--seed", s_seed, "RNG seed");
  smp->add_option("--format", s_format)->check(CLI::IsMember({"json", "csv"}));
  smp->add_option("--output", s_output, "write to file instead of stdout");

  // ---- coverage ------------------------------------------------------
  auto* cov = app.add_subcommand("coverage", "Monte-Carlo coverage study");
  StudyConfig cfg;
  cfg.R = 300;  // desk-scale default
  bool full_scale = false;
  std::string c_format = "json", c_metric, c_output, c_fit = "root_search";
  cov->add_option("--sizes", cfg.sample_sizes, "sample sizes");
  cov->add_option("--thetas", cfg.thetas, "theta grid");
  cov->add_option("--sigma", cfg.sigma)->check(CLI::PositiveNumber);
  cov->add_option("--replications,--R", cfg.R, "replications per cell");
  cov->add_option("--bootstrap-reps,--B", cfg.B, "bootstrap replicates");
  cov->add_option("--level", cfg.level)->check(CLI::Range(1e-6, 1.0 - 1e-6));
  cov->add_option("--seed", cfg.master_seed, "master seed");
  cov->add_flag("--bootstrap", cfg.enable_bootstrap, "also bootstrap intervals");
  cov->add_option("--fit-method", c_fit, "per-replication fitter");
  cov->add_option("--workers", cfg.workers, "worker threads")
      ->check(CLI::PositiveNumber);
  cov->add_flag("--full-scale", full_scale, "R = B = 1000");
  cov->add_option("--format", c_format)->check(CLI::IsMember({"json", "csv"}));
  cov->add_option("--metric", c_metric, "single metric for csv output");
  cov->add_option("--output", c_output, "write to file instead of stdout");

  // ---- tables --------------------------------------------------------
  auto* tab = app.add_subcommand(
      "tables", "derived tables and plot data (negative mass, report pivots, curves)");
  bool t_negmass = false;
  std::vector<double> t_thetas{0.5, 1.0, 1.5, 2.0, 2.5, 3.0, 3.5, 4.0};
  std::string t_report, t_metric = "coverage_mu_asym", t_output;
  std::string t_plot;
  double t_mu = 0.0, t_sigma2 = 1.0, t_sigma = 5.0;
  double t_from = 0.0, t_to = 5.0, t_step = 0.1;
  std::vector<int> t_orders{2, 3};
  std::string t_data;
  std::string t_format = "csv";
  tab->add_flag("--negative-mass", t_negmass,
                "P(N(theta, 1) < 0) over the theta list");
  tab->add_option("--thetas", t_thetas, "theta list for --negative-mass");
  tab->add_option("--from-report", t_report, "pivot a coverage JSON report");
  tab->add_option("--metric", t_metric, "metric to pivot");
  tab->add_option("--plot", t_plot,
                  "density | entropy_curve | kl_curve | kl_halfnormal_curve | profile_loglik");
  tab->add_option("--mu", t_mu, "density plot location");
  tab->add_option("--sigma2", t_sigma2, "density plot variance")
      ->check(CLI::PositiveNumber);
  tab->add_option("--sigma", t_sigma, "curve plots: fixed sigma")
      ->check(CLI::PositiveNumber);
  tab->add_option("--grid-from", t_from);
  tab->add_option("--grid-to", t_to);
  tab->add_option("--grid-step", t_step);
  tab->add_option("--orders", t_orders, "series orders for curve plots");
  tab->add_option("--data", t_data, "dataset for profile_loglik");
  tab->add_option("--format", t_format)->check(CLI::IsMember({"json", "csv"}));
  tab->add_option("--output", t_output, "write to file instead of stdout");

  std::vector<const char*> argv;
  argv.reserve(args.size() + 1);
  argv.push_back("foldnorm");
  for (const auto& a : args) argv.push_back(a.c_str());

  try {
    app.parse(static_cast<int>(argv.size()),
              const_cast<char**>(argv.data()));
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "usage error: " << e.what() << '\n';
    return 2;
  }

  try {
    if (eval->parsed()) {
      const Params p(e_mu, e_sigma2);
      json j;
      j["mu"] = p.mu();
      j["sigma2"] = p.sigma2();
      if (pdf_at) j["pdf"] = pdf(*pdf_at, p);
      if (cdf_at) j["cdf"] = cdf(*cdf_at, p);
      if (quantile_at) j["quantile"] = quantile(*quantile_at, p);
      if (mgf_at) j["mgf"] = mgf(*mgf_at, p);
      if (laplace_at) j["laplace"] = laplace(*laplace_at, p);
      if (cumulant_at) j["cumulant_gf"] = cumulant_gf(*cumulant_at, p);
      if (cf_at) {
        const auto v = cf(*cf_at, p);
        j["cf_re"] = v.real();
        j["cf_im"] = v.imag();
      }
      if (fourier_at) {
        const auto v = fourier(*fourier_at, p);
        j["fourier_re"] = v.real();
        j["fourier_im"] = v.imag();
      }
      if (mrl_at) j["mean_residual_life"] = mean_residual_life(*mrl_at, p);
      if (want_moments) {
        const auto m = moments(p);
        j["mean_f"] = m.mean_f;
        j["var_f"] = m.var_f;
      }
      if (want_mode) j["mode"] = mode(p);
      out << j.dump(2) << '\n';
      return 0;
    }

    if (fitcmd->parsed()) {
      const Dataset data = load_dataset(f_data);
      const FitMethod method = detail::parse_method(f_method);
      FitResult fr = [&] {
        switch (method) {
          case FitMethod::recursive: return fit_recursive(data, 1e-8, 500, f_level);
          case FitMethod::root_search: return fit_rootsearch(data, 1e-12, f_level);
          case FitMethod::simplex: return fit_simplex(data, 1e-9, 2000, f_level);
        }
        throw std::logic_error("unreachable");
      }();
      json j = detail::fit_to_json(fr);
      j["n"] = data.n();
      j["level"] = f_level;
      if (f_boot > 0) {
        const auto br = bootstrap_percentile(data, f_boot, f_level, f_seed);
        j["bootstrap"] = {{"B", br.B},
                          {"ci_mu", detail::interval_json(br.ci_mu)},
                          {"ci_sigma2", detail::interval_json(br.ci_sigma2)},
                          {"failures", br.failures},
                          {"seed", f_seed}};
      }
      out << j.dump(2) << '\n';
      return 0;
    }

    if (ent->parsed()) {
      const Params p(n_mu, n_sigma2);
      json j;
      j["mu"] = p.mu();
      j["sigma2"] = p.sigma2();
      if (n_quad) {
        j["value"] = entropy_quadrature(p);
        j["method"] = "quadrature";
      } else {
        const auto v = entropy_series_info(p, SeriesOrder(n_order));
        j["value"] = v.value;
        j["method"] = "series";
        j["order"] = n_order;
        j["terms_used"] = v.terms_used;
        j["series_unreliable"] = v.series_unreliable;
      }
      out << j.dump(2) << '\n';
      return 0;
    }

    if (kl->parsed()) {
      const Params p(k_mu, k_sigma2);
      json j;
      j["mu"] = p.mu();
      j["sigma2"] = p.sigma2();
      j["from"] = k_from;
      if (k_from == "normal") {
        if (k_quad) {
          j["value"] = kl_from_normal_quadrature(p);
          j["method"] = "quadrature";
        } else {
          const auto v = kl_from_normal_series_info(p, SeriesOrder(k_order));
          j["value"] = v.value;
          j["method"] = "series";
          j["order"] = k_order;
          j["series_unreliable"] = v.series_unreliable;
        }
      } else if (k_from == "halfnormal") {
        const auto v = kl_from_halfnormal_info(p, SeriesOrder(k_order), k_quad);
        j["value"] = v.value;
        j["method"] = k_quad ? "quadrature" : "series";
        if (!k_quad) j["order"] = k_order;
        j["series_unreliable"] = v.series_unreliable;
      } else {
        err << "usage error: --from must be normal or halfnormal\n";
        return 2;
      }
      out << j.dump(2) << '\n';
      return 0;
    }

    if (smp->parsed()) {
      const Params p(s_mu, s_sigma2);
      const auto xs = sample(p, s_n, s_seed);
      if (s_format == "csv") {
        std::ostringstream os;
        os << "x\n";
        for (double v : xs) {
          char buf[32];
          std::snprintf(buf, sizeof buf, "%.17g", v);
          os << buf << '\n';
        }
        detail::write_output(out, os.str(), s_output);
      } else {
        json j;
        j["seed"] = s_seed;
        j["n"] = s_n;
        j["values"] = xs;
        detail::write_output(out, j.dump(2) + "\n", s_output);
      }
      return 0;
    }

    if (cov->parsed()) {
      cfg.fit_method = detail::parse_method(c_fit);
      if (full_scale) {
        cfg.R = 1000;
        cfg.B = 1000;
      }
      const auto cells = run_coverage(cfg);
      if (c_format == "csv") {
        std::ostringstream os;
        const std::vector<std::pair<std::string, Metric>> all = {
            {"coverage_mu_asym", Metric::coverage_mu_asym},
            {"coverage_var_asym", Metric::coverage_var_asym},
            {"coverage_mu_boot", Metric::coverage_mu_boot},
            {"coverage_var_boot", Metric::coverage_var_boot},
            {"mean_corr", Metric::mean_corr}};
        bool any = false;
        for (const auto& [name, metric] : all) {
          if (!c_metric.empty() && c_metric != name) continue;
          if (!cfg.enable_bootstrap &&
              (metric == Metric::coverage_mu_boot ||
               metric == Metric::coverage_var_boot))
            continue;
          if (any) os << '\n';
          os << "# " << name << '\n' << cell_table_csv(cells, metric);
          any = true;
        }
        if (!any) throw std::runtime_error("no metric matched --metric");
        detail::write_output(out, os.str(), c_output);
      } else {
        detail::write_output(out, report_to_json(cfg, cells).dump(2) + "\n",
                             c_output);
      }
      return 0;
    }

    if (tab->parsed()) {
      std::string text;
      if (t_negmass) {
        const auto row = negative_mass_table(t_thetas);
        if (t_format == "json") {
          json j;
          j["thetas"] = t_thetas;
          j["negative_mass"] = row;
          text = j.dump(2) + "\n";
        } else {
          std::ostringstream os;
          for (std::size_t i = 0; i < t_thetas.size(); ++i)
            os << (i ? "," : "") << t_thetas[i];
          os << '\n';
          for (std::size_t i = 0; i < row.size(); ++i) {
            char buf[32];
            std::snprintf(buf, sizeof buf, "%.3f", row[i]);
            os << (i ? "," : "") << buf;
          }
          os << '\n';
          text = os.str();
        }
      } else if (!t_report.empty()) {
        std::ifstream in(t_report);
        if (!in) throw std::runtime_error("cannot open report: " + t_report);
        json j = json::parse(in);
        const auto cells = cells_from_json(j);
        Metric metric = Metric::coverage_mu_asym;
        if (t_metric == "coverage_mu_asym") metric = Metric::coverage_mu_asym;
        else if (t_metric == "coverage_mu_boot") metric = Metric::coverage_mu_boot;
        else if (t_metric == "coverage_var_asym") metric = Metric::coverage_var_asym;
        else if (t_metric == "coverage_var_boot") metric = Metric::coverage_var_boot;
        else if (t_metric == "mean_corr") metric = Metric::mean_corr;
        else throw std::runtime_error("unknown metric: " + t_metric);
        text = cell_table_csv(cells, metric);
      } else if (!t_plot.empty()) {
        const GridSpec grid{t_from, t_to, t_step};
        if (t_plot == "density") {
          text = emit_plotdata_density(Params(t_mu, t_sigma2), grid);
        } else if (t_plot == "entropy_curve") {
          text = emit_plotdata_entropy_curve(grid, t_sigma, t_orders);
        } else if (t_plot == "kl_curve") {
          text = emit_plotdata_kl_curve(grid, t_sigma, t_orders, false);
        } else if (t_plot == "kl_halfnormal_curve") {
          text = emit_plotdata_kl_curve(grid, t_sigma, t_orders, true);
        } else if (t_plot == "profile_loglik") {
          if (t_data.empty())
            throw std::runtime_error("profile_loglik needs --data");
          text = emit_plotdata_profile_loglik(load_dataset(t_data));
        } else {
          err << "usage error: unknown --plot kind '" << t_plot << "'\n";
          return 2;
        }
      } else {
        err << "usage error: tables needs --negative-mass, --from-report or --plot\n";
        return 2;
      }
      detail::write_output(out, text, t_output);
      return 0;
    }
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  }
  err << "usage error: no subcommand\n";
  return 2;
}

}  // namespace foldnorm::cli
