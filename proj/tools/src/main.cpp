// histoband: histogram regression fits, uniform confidence bands, and the
// seeded experiment harness, on CSV data in [0,1]^p.

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <limits>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "histoband/bands.hpp"
#include "histoband/binomial_oracle.hpp"
#include "histoband/config_json.hpp"
#include "histoband/csv.hpp"
#include "histoband/estimators.hpp"
#include "histoband/experiments.hpp"
#include "histoband/grid.hpp"
#include "histoband/scenario.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitAssertionFailed = 1;
constexpr int kExitUsage = 2;

using nlohmann::json;

[[noreturn]] void die_usage(const std::string& message) {
  std::cerr << "histoband: " << message << "\n";
  std::exit(kExitUsage);
}

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) die_usage("cannot open \"" + path + "\"");
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void emit(const std::string& text, const std::string& out_path) {
  if (out_path.empty()) {
    std::cout << text;
    if (!text.empty() && text.back() != '\n') std::cout << '\n';
    return;
  }
  std::ofstream out(out_path, std::ios::binary);
  if (!out) die_usage("cannot write \"" + out_path + "\"");
  out << text;
  if (!text.empty() && text.back() != '\n') out << '\n';
}

histoband::Dataset load_csv(const std::string& path, bool allow_empty = false) {
  std::ifstream in(path, std::ios::binary);
  if (!in) die_usage("cannot open \"" + path + "\"");
  try {
    return histoband::read_dataset_csv(in, allow_empty);
  } catch (const std::exception& e) {
    std::cerr << "histoband: " << path << ": " << e.what() << "\n";
    std::exit(kExitUsage);
  }
}

/// HISTOBAND_THREADS beats the flag so wrappers can force a worker count.
int resolve_workers(int flag_workers) {
  if (const char* env = std::getenv("HISTOBAND_THREADS")) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end == env || *end != '\0' || v < 1) {
      die_usage("HISTOBAND_THREADS must be a positive integer");
    }
    return static_cast<int>(v);
  }
  return flag_workers;
}

json number_or_null(double v) {
  if (std::isfinite(v)) return v;
  return nullptr;
}

struct FitArgs {
  std::string csv_path;
  std::uint64_t inv_mesh = 1;
  std::string out_path;
};

int run_fit(const FitArgs& args) {
  const histoband::Dataset data = load_csv(args.csv_path, /*allow_empty=*/true);
  try {
    const histoband::Grid grid(data.dim, args.inv_mesh);

    json rows = json::array();
    if (data.size() == 0) {
      // Header-only input: the dimension is still known, so report every
      // cell as empty rather than failing.
      for (std::uint64_t c = 0; c < grid.cell_count(); ++c) {
        rows.push_back({{"cell", c},
                        {"count", 0},
                        {"m_hat", 0.0},
                        {"p_hat", json(nullptr)},
                        {"sigma2_local", json(nullptr)}});
      }
      const json doc{{"cells", rows},
                     {"dim", data.dim},
                     {"inv_mesh", grid.inv_mesh()},
                     {"n", 0},
                     {"schema", 1}};
      emit(doc.dump(2), args.out_path);
      return kExitOk;
    }

    const histoband::HistogramFit cells = histoband::fit(grid, data);
    const std::vector<double> freqs = histoband::p_hat(cells);
    const histoband::VarianceModel local = histoband::local_variance(cells);

    for (std::uint64_t c = 0; c < grid.cell_count(); ++c) {
      rows.push_back(
          {{"cell", c},
           {"count", cells.count[c]},
           {"m_hat", cells.mean_y[c]},
           {"p_hat", freqs[c]},
           {"sigma2_local",
            local.defined[c] ? json(local.local_sigma2[c]) : json(nullptr)}});
    }
    const json doc{{"cells", rows},
                   {"dim", data.dim},
                   {"inv_mesh", grid.inv_mesh()},
                   {"n", data.size()},
                   {"schema", 1}};
    emit(doc.dump(2), args.out_path);
    return kExitOk;
  } catch (const std::exception& e) {
    std::cerr << "histoband: " << e.what() << "\n";
    return kExitUsage;
  }
}

struct BandArgs {
  std::string csv_path;
  std::uint64_t inv_mesh = 1;
  double beta = 0.05;
  std::string variance = "local";
  std::string oracle_spec_path;
  std::string out_path;
  std::string csv_out_path;
};

int run_band(const BandArgs& args) {
  const histoband::Dataset data = load_csv(args.csv_path);
  try {
    const histoband::Grid grid(data.dim, args.inv_mesh);
    const histoband::HistogramFit cells = histoband::fit(grid, data);

    histoband::TauModel tau{grid, {}, {}};
    if (args.variance == "global") {
      tau = histoband::tau_plugin(cells, histoband::global_variance(cells, data));
    } else if (args.variance == "local") {
      tau = histoband::tau_plugin(cells, histoband::local_variance(cells));
    } else if (args.variance == "oracle") {
      if (args.oracle_spec_path.empty()) {
        die_usage("--variance oracle requires --oracle-spec");
      }
      const histoband::RunConfig spec =
          histoband::parse_run_config(slurp(args.oracle_spec_path));
      if (spec.scenario.dim != data.dim) {
        die_usage("oracle spec dim does not match the CSV");
      }
      tau = histoband::oracle_tau(spec.scenario, grid);
    } else {
      die_usage("--variance must be global, local, or oracle");
    }

    const histoband::ConfidenceBand band =
        histoband::build_band(cells, tau, args.beta);
    std::fprintf(stderr, "J=%llu c=%.6f beta=%g n=%zu\n",
                 static_cast<unsigned long long>(grid.cell_count()),
                 band.quantile, band.beta, band.n);

    json rows = json::array();
    for (std::uint64_t c = 0; c < grid.cell_count(); ++c) {
      const auto box = grid.cell_box(c);
      const bool degen = band.degenerate[c] != 0;
      rows.push_back({{"cell", c},
                      {"cell_box", {{"hi", box.second}, {"lo", box.first}}},
                      {"center", band.center[c]},
                      {"degenerate", degen},
                      {"lower", number_or_null(band.center[c] - band.radius[c])},
                      {"upper", number_or_null(band.center[c] + band.radius[c])}});
    }
    const json doc{{"beta", band.beta},
                   {"cells", rows},
                   {"dim", data.dim},
                   {"inv_mesh", grid.inv_mesh()},
                   {"n", band.n},
                   {"quantile", band.quantile},
                   {"schema", 1}};
    emit(doc.dump(2), args.out_path);

    if (!args.csv_out_path.empty()) {
      std::string csv = "cell";
      for (int d = 0; d < data.dim; ++d) csv += ",lo" + std::to_string(d + 1);
      for (int d = 0; d < data.dim; ++d) csv += ",hi" + std::to_string(d + 1);
      csv += ",center,lower,upper,degenerate\n";
      for (std::uint64_t c = 0; c < grid.cell_count(); ++c) {
        const auto box = grid.cell_box(c);
        csv += std::to_string(c);
        for (int d = 0; d < data.dim; ++d) {
          csv += ',' + histoband::format_double(box.first[d]);
        }
        for (int d = 0; d < data.dim; ++d) {
          csv += ',' + histoband::format_double(box.second[d]);
        }
        csv += ',' + histoband::format_double(band.center[c]);
        csv += ',' + histoband::format_double(band.center[c] - band.radius[c]);
        csv += ',' + histoband::format_double(band.center[c] + band.radius[c]);
        csv += band.degenerate[c] ? ",1\n" : ",0\n";
      }
      emit(csv, args.csv_out_path);
    }
    return kExitOk;
  } catch (const std::exception& e) {
    std::cerr << "histoband: " << e.what() << "\n";
    return kExitUsage;
  }
}

struct QuantileArgs {
  std::uint64_t cells = 0;
  double beta = 0.05;
};

int run_quantile(const QuantileArgs& args) {
  try {
    const double c =
        histoband::gaussian_max_quantile({args.cells, args.beta});
    std::printf("%.6f\n", c);
    return kExitOk;
  } catch (const std::exception& e) {
    std::cerr << "histoband: " << e.what() << "\n";
    return kExitUsage;
  }
}

struct SimulateArgs {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  int workers = 1;
  std::string out_path;
  std::string raw_csv_path;
};

void reject_assertion(const histoband::Assertions& a,
                      const std::string& subcommand,
                      bool coverage_ok = false, bool rate_ok = false,
                      bool gauss_ok = false, bool phat_ok = false,
                      bool binom_ok = false) {
  const auto reject = [&](bool present, bool allowed, const char* name) {
    if (present && !allowed) {
      die_usage("assertion \"" + std::string(name) + "\" does not apply to " +
                subcommand);
    }
  };
  reject(a.min_coverage.has_value(), coverage_ok, "min_coverage");
  reject(a.slope_min.has_value(), rate_ok, "slope_min");
  reject(a.slope_max.has_value(), rate_ok, "slope_max");
  reject(a.max_ks.has_value(), gauss_ok, "max_ks");
  reject(a.require_decreasing_tail.has_value(), phat_ok, "require_decreasing_tail");
  reject(a.max_identity_error.has_value(), binom_ok, "max_identity_error");
  reject(a.require_bounded_trend.has_value(), binom_ok, "require_bounded_trend");
}

int run_simulate(const std::string& subcommand, const SimulateArgs& args) {
  const bool is_binomial = subcommand == "verify-binomial";
  histoband::RunConfig run;
  if (!args.config_path.empty()) {
    try {
      run = histoband::parse_run_config(slurp(args.config_path));
    } catch (const std::exception& e) {
      std::cerr << "histoband: " << e.what() << "\n";
      return kExitUsage;
    }
  } else if (!is_binomial) {
    die_usage("simulate " + subcommand + " requires --config");
  }
  if (args.seed) run.scenario.seed = *args.seed;
  if (run.binomial && !is_binomial) {
    die_usage("\"binomial\" config block only applies to verify-binomial");
  }
  const int workers = resolve_workers(args.workers);

  try {
    if (is_binomial) {
      reject_assertion(run.assertions, subcommand, false, false, false, false, true);
      const histoband::BinomialSweepReport report =
          run.binomial ? histoband::binomial_sweep(run.binomial->ns,
                                                   run.binomial->ps,
                                                   run.binomial->qs)
                       : histoband::default_binomial_sweep();
      emit(histoband::to_json_string(report), args.out_path);
      // Default posture is to verify: no explicit thresholds means the
      // built-in ones (bounded trend, identity to 1e-10).
      const bool want_trend = run.assertions.any()
                                  ? run.assertions.require_bounded_trend.value_or(false)
                                  : true;
      const double max_identity = run.assertions.any()
                                      ? run.assertions.max_identity_error.value_or(
                                            std::numeric_limits<double>::infinity())
                                      : 1e-10;
      bool pass = true;
      if (want_trend) pass = pass && report.all_bounded;
      pass = pass && report.identity_max_rel_error <= max_identity;
      return pass ? kExitOk : kExitAssertionFailed;
    }

    if (subcommand == "coverage") {
      reject_assertion(run.assertions, subcommand, true);
      if (!run.n_values.empty()) {
        die_usage("\"n_values\" does not apply to simulate coverage");
      }
      const histoband::CoverageReport report =
          histoband::coverage_experiment(run.scenario, workers);
      emit(histoband::to_json_string(report), args.out_path);
      if (!args.raw_csv_path.empty()) {
        emit(histoband::raw_csv(report), args.raw_csv_path);
      }
      if (run.assertions.min_coverage &&
          report.coverage < *run.assertions.min_coverage) {
        std::cerr << "histoband: coverage " << report.coverage
                  << " below required " << *run.assertions.min_coverage << "\n";
        return kExitAssertionFailed;
      }
      return kExitOk;
    }

    if (subcommand == "rate") {
      reject_assertion(run.assertions, subcommand, false, true);
      if (run.n_values.empty()) {
        die_usage("simulate rate needs \"n_values\" in the config");
      }
      const histoband::RateReport report =
          histoband::rate_experiment(run.scenario, run.n_values, workers);
      emit(histoband::to_json_string(report), args.out_path);
      if (!args.raw_csv_path.empty()) {
        emit(histoband::raw_csv(report), args.raw_csv_path);
      }
      bool pass = true;
      if (run.assertions.slope_min) {
        pass = pass && report.slope >= *run.assertions.slope_min;
      }
      if (run.assertions.slope_max) {
        pass = pass && report.slope <= *run.assertions.slope_max;
      }
      if (!pass) {
        std::cerr << "histoband: slope " << report.slope
                  << " outside the required range\n";
        return kExitAssertionFailed;
      }
      return kExitOk;
    }

    if (subcommand == "gauss-approx") {
      reject_assertion(run.assertions, subcommand, false, false, true);
      if (!run.n_values.empty()) {
        die_usage("\"n_values\" does not apply to simulate gauss-approx");
      }
      const histoband::GaussApproxReport report =
          histoband::gauss_approx_experiment(run.scenario, workers);
      emit(histoband::to_json_string(report), args.out_path);
      if (!args.raw_csv_path.empty()) {
        emit(histoband::raw_csv(report), args.raw_csv_path);
      }
      if (run.assertions.max_ks && report.ks_distance > *run.assertions.max_ks) {
        std::cerr << "histoband: KS distance " << report.ks_distance
                  << " above allowed " << *run.assertions.max_ks << "\n";
        return kExitAssertionFailed;
      }
      return kExitOk;
    }

    if (subcommand == "phat") {
      reject_assertion(run.assertions, subcommand, false, false, false, true);
      if (run.n_values.empty()) {
        die_usage("simulate phat needs \"n_values\" in the config");
      }
      const histoband::PhatReport report =
          histoband::phat_experiment(run.scenario, run.n_values, workers);
      emit(histoband::to_json_string(report), args.out_path);
      if (!args.raw_csv_path.empty()) {
        emit(histoband::raw_csv(report), args.raw_csv_path);
      }
      if (run.assertions.require_decreasing_tail.value_or(false) &&
          !report.decreasing_tail) {
        std::cerr << "histoband: scaled max relative cell-frequency error is "
                     "not decreasing\n";
        return kExitAssertionFailed;
      }
      return kExitOk;
    }
  } catch (const std::invalid_argument& e) {
    std::cerr << "histoband: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "histoband: " << e.what() << "\n";
    return kExitUsage;
  }
  die_usage("unknown simulate subcommand");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Histogram regression with uniform confidence bands"};
  app.require_subcommand(1);

  FitArgs fit_args;
  CLI::App* fit_cmd = app.add_subcommand(
      "fit", "Fit cell means on CSV data (header x1,...,xp,y)");
  fit_cmd->add_option("csv", fit_args.csv_path, "Input CSV path")->required();
  fit_cmd->add_option("--inv-mesh", fit_args.inv_mesh,
                      "Cells per axis (grid is inv_mesh^p cells)")
      ->required()
      ->check(CLI::PositiveNumber);
  fit_cmd->add_option("--out", fit_args.out_path, "Write JSON here (default stdout)");

  BandArgs band_args;
  CLI::App* band_cmd = app.add_subcommand(
      "band", "Build a uniform confidence band around the fit");
  band_cmd->add_option("csv", band_args.csv_path, "Input CSV path")->required();
  band_cmd->add_option("--inv-mesh", band_args.inv_mesh, "Cells per axis")
      ->required()
      ->check(CLI::PositiveNumber);
  band_cmd->add_option("--beta", band_args.beta,
                       "Simultaneous miscoverage level in (0,1)");
  band_cmd
      ->add_option("--variance", band_args.variance,
                   "Variance source: global, local, or oracle")
      ->check(CLI::IsMember({"global", "local", "oracle"}));
  band_cmd->add_option("--oracle-spec", band_args.oracle_spec_path,
                       "Config JSON with the oracle covariate/noise laws");
  band_cmd->add_option("--out", band_args.out_path, "Write JSON here");
  band_cmd->add_option("--csv-out", band_args.csv_out_path,
                       "Also write a per-cell CSV here");

  QuantileArgs quantile_args;
  CLI::App* quantile_cmd = app.add_subcommand(
      "quantile", "Quantile of the max of J independent |N(0,1)| variables");
  quantile_cmd->add_option("--cells", quantile_args.cells, "Cell count J")
      ->required()
      ->check(CLI::PositiveNumber);
  quantile_cmd->add_option("--beta", quantile_args.beta, "Level in (0,1)")
      ->required();

  CLI::App* simulate_cmd =
      app.add_subcommand("simulate", "Run a seeded experiment");
  simulate_cmd->require_subcommand(1);
  SimulateArgs sim_args;
  std::vector<CLI::App*> sim_subs;
  for (const char* name : {"coverage", "rate", "gauss-approx", "phat",
                           "verify-binomial"}) {
    CLI::App* sub = simulate_cmd->add_subcommand(name);
    sub->add_option("--config", sim_args.config_path, "Run-config JSON file");
    sub->add_option("--seed", sim_args.seed, "Override the config seed");
    sub->add_option("--workers", sim_args.workers, "Worker threads")
        ->check(CLI::PositiveNumber);
    sub->add_option("--out", sim_args.out_path, "Write the report JSON here");
    sub->add_option("--raw-csv", sim_args.raw_csv_path,
                    "Also stream per-replication statistics to CSV");
    sim_subs.push_back(sub);
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }

  if (fit_cmd->parsed()) return run_fit(fit_args);
  if (band_cmd->parsed()) return run_band(band_args);
  if (quantile_cmd->parsed()) return run_quantile(quantile_args);
  if (simulate_cmd->parsed()) {
    for (CLI::App* sub : sim_subs) {
      if (sub->parsed()) return run_simulate(sub->get_name(), sim_args);
    }
  }
  die_usage("no subcommand given");
}
