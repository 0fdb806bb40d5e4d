#include "histoband/experiments.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <exception>
#include <limits>
#include <mutex>
#include <stdexcept>
#include <thread>

#include <json.hpp>

#include "histoband/bands.hpp"
#include "histoband/config_json.hpp"
#include "histoband/ks.hpp"

namespace histoband {
namespace {

using nlohmann::json;

class Stopwatch {
 public:
  double seconds() const {
    return std::chrono::duration<double>(
               std::chrono::steady_clock::now() - start_)
        .count();
  }

 private:
  std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

double median_of(std::vector<double> values) {
  if (values.empty()) throw std::invalid_argument("median of empty set");
  std::sort(values.begin(), values.end());
  const std::size_t mid = values.size() / 2;
  if (values.size() % 2 == 1) return values[mid];
  return 0.5 * (values[mid - 1] + values[mid]);
}

/// Two-sided 97.5% Student-t quantile for small residual degrees of freedom;
/// beyond the table the normal value is close enough.
double t_quantile_975(int df) {
  static const double table[] = {12.706, 4.303, 3.182, 2.776, 2.571, 2.447,
                                 2.365,  2.306, 2.262, 2.228, 2.201, 2.179,
                                 2.160,  2.145, 2.131, 2.120, 2.110, 2.101,
                                 2.093,  2.086};
  if (df < 1) return std::numeric_limits<double>::infinity();
  if (df <= 20) return table[df - 1];
  return 1.96;
}

struct SlopeFit {
  double slope = std::numeric_limits<double>::quiet_NaN();
  double ci_low = std::numeric_limits<double>::quiet_NaN();
  double ci_high = std::numeric_limits<double>::quiet_NaN();
};

SlopeFit ols_slope(const std::vector<double>& xs, const std::vector<double>& ys) {
  const std::size_t k = xs.size();
  SlopeFit out;
  if (k < 2) return out;
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < k; ++i) {
    mx += xs[i];
    my += ys[i];
  }
  mx /= static_cast<double>(k);
  my /= static_cast<double>(k);
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < k; ++i) {
    sxx += (xs[i] - mx) * (xs[i] - mx);
    sxy += (xs[i] - mx) * (ys[i] - my);
  }
  if (!(sxx > 0.0)) return out;
  out.slope = sxy / sxx;
  if (k < 3) return out;
  const double intercept = my - out.slope * mx;
  double rss = 0.0;
  for (std::size_t i = 0; i < k; ++i) {
    const double r = ys[i] - intercept - out.slope * xs[i];
    rss += r * r;
  }
  const double se = std::sqrt(rss / static_cast<double>(k - 2) / sxx);
  const double t = t_quantile_975(static_cast<int>(k) - 2);
  out.ci_low = out.slope - t * se;
  out.ci_high = out.slope + t * se;
  return out;
}

json number_or_null(double v) {
  if (std::isfinite(v)) return v;
  return nullptr;
}

json audit_to_json(const AssumptionAudit& a) {
  return json{{"alpha", a.alpha},
              {"c_h", a.c_h},
              {"density_bounds_ok", a.density_bounds_ok},
              {"density_lower", a.density_lower},
              {"density_upper", a.density_upper},
              {"grid_aligned_mean", a.grid_aligned_mean},
              {"holder_ok", a.holder_ok},
              {"moment_order", number_or_null(a.moment_order)},
              {"variance_bounds_ok", a.variance_bounds_ok},
              {"variance_lower", a.variance_lower},
              {"variance_upper", a.variance_upper}};
}

json undersmoothing_to_json(const UndersmoothingAudit& u) {
  return json{{"bias_small", u.bias_small},
              {"bias_term", u.bias_term},
              {"moment_small", u.moment_small},
              {"moment_term", u.moment_term}};
}

json meta_to_json(const ReportMeta& meta) {
  return json{{"wall_seconds", meta.wall_seconds}, {"workers", meta.workers}};
}

json flags_to_json(const std::vector<std::uint8_t>& flags) {
  json arr = json::array();
  for (auto f : flags) arr.push_back(f != 0);
  return arr;
}

void append_double(std::string& out, double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  out += buf;
}

}  // namespace

void run_indexed(std::size_t count, int workers,
                 const std::function<void(std::size_t)>& task) {
  if (workers < 1) workers = 1;
  if (static_cast<std::size_t>(workers) > count) {
    workers = static_cast<int>(count == 0 ? 1 : count);
  }
  if (workers == 1) {
    for (std::size_t i = 0; i < count; ++i) task(i);
    return;
  }

  std::atomic<std::size_t> next{0};
  std::mutex error_mutex;
  std::exception_ptr first_error;
  auto worker = [&] {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= count) return;
      try {
        task(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!first_error) first_error = std::current_exception();
        return;
      }
    }
  };
  std::vector<std::thread> pool;
  pool.reserve(static_cast<std::size_t>(workers));
  for (int w = 0; w < workers; ++w) pool.emplace_back(worker);
  for (auto& t : pool) t.join();
  if (first_error) std::rethrow_exception(first_error);
}

double probe_sup_error(const HistogramFit& fit,
                       const std::function<double(const double*)>& m,
                       int probe_points_per_axis) {
  if (probe_points_per_axis < 1) {
    throw std::invalid_argument("probe_points_per_axis must be >= 1");
  }
  const Grid& grid = fit.grid;
  const int dim = grid.dim();
  double sup = 0.0;
  std::vector<double> x(static_cast<std::size_t>(dim));
  std::vector<int> idx(static_cast<std::size_t>(dim));
  for (std::uint64_t c = 0; c < grid.cell_count(); ++c) {
    const auto box = grid.cell_box(c);
    const double center = fit.mean_y[c];
    std::fill(idx.begin(), idx.end(), 0);
    for (;;) {
      for (int d = 0; d < dim; ++d) {
        const double frac = (static_cast<double>(idx[d]) + 0.5) /
                            static_cast<double>(probe_points_per_axis);
        x[d] = box.first[d] + frac * (box.second[d] - box.first[d]);
      }
      sup = std::max(sup, std::abs(center - m(x.data())));
      int d = 0;
      for (; d < dim; ++d) {
        if (++idx[d] < probe_points_per_axis) break;
        idx[d] = 0;
      }
      if (d == dim) break;
    }
  }
  return sup;
}

CoverageReport coverage_experiment(const ScenarioConfig& config, int workers) {
  config.validate();
  Stopwatch clock;

  const Grid grid(config.dim, config.resolve_inv_mesh(config.n));
  const std::size_t r_total = config.replications;

  TauModel shared_tau{grid, {}, {}};
  if (config.tau_mode == TauMode::kOracle) shared_tau = oracle_tau(config, grid);

  const int probes = probe_points_per_axis(config, grid);
  const auto truth = [&](const double* x) {
    return regression_value(config, grid, x);
  };

  CoverageReport report;
  report.config = config;
  report.covered.assign(r_total, 0);
  report.degenerate.assign(r_total, 0);

  run_indexed(r_total, workers, [&](std::size_t r) {
    const GeneratedSample sample =
        generate(config, grid, static_cast<std::uint32_t>(r));
    const HistogramFit cells = fit(grid, sample.data);
    ConfidenceBand band = [&] {
      switch (config.tau_mode) {
        case TauMode::kOracle:
          return build_band(cells, shared_tau, config.beta);
        case TauMode::kPluginGlobal:
          return build_band(cells, tau_plugin(cells, global_variance(cells, sample.data)),
                            config.beta);
        case TauMode::kPluginLocal:
          return build_band(cells, tau_plugin(cells, local_variance(cells)),
                            config.beta);
      }
      throw std::logic_error("unreachable");
    }();
    report.degenerate[r] = band.degenerate_cells() > 0 ? 1 : 0;
    report.covered[r] =
        covers(band, truth, probes, DegeneratePolicy::kCoverTrivially) ? 1 : 0;
  });

  std::size_t hits = 0;
  for (std::size_t r = 0; r < r_total; ++r) {
    hits += report.covered[r];
    report.degenerate_count += report.degenerate[r];
  }
  report.coverage = static_cast<double>(hits) / static_cast<double>(r_total);
  const double half =
      1.96 * std::sqrt(report.coverage * (1.0 - report.coverage) /
                       static_cast<double>(r_total));
  report.ci_low = std::max(0.0, report.coverage - half);
  report.ci_high = std::min(1.0, report.coverage + half);

  report.assumptions = audit_assumptions(config);
  report.undersmoothing = audit_undersmoothing(config, config.n, grid.inv_mesh());
  report.meta.workers = workers < 1 ? 1 : workers;
  report.meta.wall_seconds = clock.seconds();
  return report;
}

RateReport rate_experiment(const ScenarioConfig& config,
                           const std::vector<std::size_t>& n_values, int workers) {
  config.validate();
  if (n_values.size() < 4) {
    throw std::invalid_argument("rate experiment needs >= 4 sample sizes");
  }
  for (std::size_t i = 1; i < n_values.size(); ++i) {
    if (n_values[i] <= n_values[i - 1]) {
      throw std::invalid_argument("rate experiment n_values must be increasing");
    }
  }
  if (static_cast<double>(n_values.back()) <
      100.0 * static_cast<double>(n_values.front())) {
    throw std::invalid_argument("rate experiment n_values must span >= 2 decades");
  }
  Stopwatch clock;

  const std::size_t k = n_values.size();
  const std::size_t r_total = config.replications;

  std::vector<Grid> grids;
  grids.reserve(k);
  std::vector<ScenarioConfig> configs(k, config);
  for (std::size_t i = 0; i < k; ++i) {
    configs[i].n = n_values[i];
    grids.emplace_back(config.dim, config.resolve_inv_mesh(n_values[i]));
  }

  RateReport report;
  report.config = config;
  report.n_values = n_values;
  for (const auto& g : grids) report.inv_meshes.push_back(g.inv_mesh());
  report.sup_errors.assign(k, std::vector<double>(r_total, 0.0));

  run_indexed(k * r_total, workers, [&](std::size_t t) {
    const std::size_t i = t / r_total;
    const std::size_t r = t % r_total;
    const GeneratedSample sample =
        generate(configs[i], grids[i], static_cast<std::uint32_t>(r));
    const HistogramFit cells = fit(grids[i], sample.data);
    const auto truth = [&](const double* x) {
      return regression_value(configs[i], grids[i], x);
    };
    report.sup_errors[i][r] =
        probe_sup_error(cells, truth, probe_points_per_axis(configs[i], grids[i]));
  });

  std::vector<double> xs, ys;
  for (std::size_t i = 0; i < k; ++i) {
    report.median_errors.push_back(median_of(report.sup_errors[i]));
    const double nn = static_cast<double>(n_values[i]);
    if (report.median_errors.back() > 0.0) {
      xs.push_back(std::log(nn / std::log(nn)));
      ys.push_back(std::log(report.median_errors.back()));
    }
  }
  if (xs.size() == k) {
    const SlopeFit line = ols_slope(xs, ys);
    report.slope = line.slope;
    report.slope_ci_low = line.ci_low;
    report.slope_ci_high = line.ci_high;
  } else {
    // Zero medians (noise-free runs) make the log-log fit meaningless.
    report.slope = std::numeric_limits<double>::quiet_NaN();
    report.slope_ci_low = report.slope;
    report.slope_ci_high = report.slope;
  }

  report.meta.workers = workers < 1 ? 1 : workers;
  report.meta.wall_seconds = clock.seconds();
  return report;
}

GaussApproxReport gauss_approx_experiment(const ScenarioConfig& config,
                                          int workers) {
  config.validate();
  Stopwatch clock;

  const Grid grid(config.dim, config.resolve_inv_mesh(config.n));
  const std::size_t r_total = config.replications;

  const std::vector<double> cell_probs = oracle_cell_probs(config, grid);
  const TauModel tau = oracle_tau(config, grid);
  const auto truth = [&](const double* x) {
    return regression_value(config, grid, x);
  };

  GaussApproxReport report;
  report.config = config;
  report.t_stats.assign(r_total, 0.0);

  run_indexed(r_total, workers, [&](std::size_t r) {
    const GeneratedSample sample =
        generate(config, grid, static_cast<std::uint32_t>(r));
    const Decomposition parts =
        decompose(grid, sample.data, truth, sample.noise, cell_probs);
    double stat = 0.0;
    for (std::uint64_t c = 0; c < grid.cell_count(); ++c) {
      stat = std::max(stat, std::sqrt(tau.tau[c]) * std::abs(parts.tilde_eps[c]));
    }
    report.t_stats[r] = std::sqrt(static_cast<double>(config.n)) * stat;
  });

  const std::uint64_t cells = grid.cell_count();
  report.ks_distance = ks_distance(
      report.t_stats, [cells](double t) { return max_abs_normal_cdf(t, cells); });

  report.meta.workers = workers < 1 ? 1 : workers;
  report.meta.wall_seconds = clock.seconds();
  return report;
}

PhatReport phat_experiment(const ScenarioConfig& config,
                           const std::vector<std::size_t>& n_values, int workers) {
  config.validate();
  if (n_values.size() < 2) {
    throw std::invalid_argument("phat experiment needs >= 2 sample sizes");
  }
  for (std::size_t i = 1; i < n_values.size(); ++i) {
    if (n_values[i] <= n_values[i - 1]) {
      throw std::invalid_argument("phat experiment n_values must be increasing");
    }
  }
  Stopwatch clock;

  const std::size_t k = n_values.size();
  const std::size_t r_total = config.replications;

  std::vector<Grid> grids;
  grids.reserve(k);
  std::vector<ScenarioConfig> configs(k, config);
  std::vector<std::vector<double>> probs(k);
  for (std::size_t i = 0; i < k; ++i) {
    configs[i].n = n_values[i];
    grids.emplace_back(config.dim, config.resolve_inv_mesh(n_values[i]));
    probs[i] = oracle_cell_probs(configs[i], grids[i]);
  }

  PhatReport report;
  report.config = config;
  report.n_values = n_values;
  for (const auto& g : grids) report.inv_meshes.push_back(g.inv_mesh());
  report.rel_errors.assign(k, std::vector<double>(r_total, 0.0));

  run_indexed(k * r_total, workers, [&](std::size_t t) {
    const std::size_t i = t / r_total;
    const std::size_t r = t % r_total;
    const GeneratedSample sample =
        generate(configs[i], grids[i], static_cast<std::uint32_t>(r));
    const HistogramFit cells = fit(grids[i], sample.data);
    const std::vector<double> hat = p_hat(cells);
    double worst = 0.0;
    for (std::uint64_t c = 0; c < grids[i].cell_count(); ++c) {
      worst = std::max(worst, std::abs(hat[c] / probs[i][c] - 1.0));
    }
    report.rel_errors[i][r] = worst;
  });

  for (std::size_t i = 0; i < k; ++i) {
    const double nn = static_cast<double>(n_values[i]);
    const double median = median_of(report.rel_errors[i]);
    report.median_rel_errors.push_back(median);
    report.scaled_stats.push_back(median * std::pow(std::log(nn), 1.5));
    const double delta_p =
        std::pow(grids[i].mesh(), static_cast<double>(config.dim));
    report.out_of_regime.push_back(nn * delta_p < 10.0 ? 1 : 0);
  }

  // Decreasing over the largest two decades of n.
  const double cutoff = static_cast<double>(n_values.back()) / 100.0;
  std::size_t checked = 0;
  bool decreasing = true;
  for (std::size_t i = 1; i < k; ++i) {
    if (static_cast<double>(n_values[i - 1]) < cutoff) continue;
    ++checked;
    decreasing = decreasing && report.scaled_stats[i] < report.scaled_stats[i - 1];
  }
  report.decreasing_tail = checked > 0 && decreasing;

  report.meta.workers = workers < 1 ? 1 : workers;
  report.meta.wall_seconds = clock.seconds();
  return report;
}

std::string to_json_string(const CoverageReport& report) {
  json doc{{"assumptions", audit_to_json(report.assumptions)},
           {"ci_high", report.ci_high},
           {"ci_low", report.ci_low},
           {"config", scenario_to_json_value(report.config)},
           {"coverage", report.coverage},
           {"covered", flags_to_json(report.covered)},
           {"degenerate", flags_to_json(report.degenerate)},
           {"degenerate_count", report.degenerate_count},
           {"kind", "coverage"},
           {"schema", 1},
           {"meta", meta_to_json(report.meta)},
           {"undersmoothing", undersmoothing_to_json(report.undersmoothing)}};
  return doc.dump(2);
}

std::string to_json_string(const RateReport& report) {
  json doc{{"config", scenario_to_json_value(report.config)},
           {"inv_meshes", report.inv_meshes},
           {"kind", "rate"},
           {"schema", 1},
           {"median_errors", report.median_errors},
           {"meta", meta_to_json(report.meta)},
           {"n_values", report.n_values},
           {"slope", number_or_null(report.slope)},
           {"slope_ci_high", number_or_null(report.slope_ci_high)},
           {"slope_ci_low", number_or_null(report.slope_ci_low)},
           {"sup_errors", report.sup_errors}};
  return doc.dump(2);
}

std::string to_json_string(const GaussApproxReport& report) {
  json doc{{"config", scenario_to_json_value(report.config)},
           {"kind", "gauss_approx"},
           {"schema", 1},
           {"ks_distance", report.ks_distance},
           {"meta", meta_to_json(report.meta)},
           {"t_stats", report.t_stats}};
  return doc.dump(2);
}

std::string to_json_string(const PhatReport& report) {
  json doc{{"config", scenario_to_json_value(report.config)},
           {"decreasing_tail", report.decreasing_tail},
           {"inv_meshes", report.inv_meshes},
           {"kind", "phat"},
           {"schema", 1},
           {"median_rel_errors", report.median_rel_errors},
           {"meta", meta_to_json(report.meta)},
           {"n_values", report.n_values},
           {"out_of_regime", flags_to_json(report.out_of_regime)},
           {"rel_errors", report.rel_errors},
           {"scaled_stats", report.scaled_stats}};
  return doc.dump(2);
}

std::string raw_csv(const CoverageReport& report) {
  std::string out = "replication,covered,degenerate\n";
  for (std::size_t r = 0; r < report.covered.size(); ++r) {
    out += std::to_string(r);
    out += report.covered[r] ? ",1," : ",0,";
    out += report.degenerate[r] ? "1\n" : "0\n";
  }
  return out;
}

std::string raw_csv(const RateReport& report) {
  std::string out = "n,inv_mesh,replication,sup_error\n";
  for (std::size_t i = 0; i < report.n_values.size(); ++i) {
    for (std::size_t r = 0; r < report.sup_errors[i].size(); ++r) {
      out += std::to_string(report.n_values[i]);
      out += ',';
      out += std::to_string(report.inv_meshes[i]);
      out += ',';
      out += std::to_string(r);
      out += ',';
      append_double(out, report.sup_errors[i][r]);
      out += '\n';
    }
  }
  return out;
}

std::string raw_csv(const GaussApproxReport& report) {
  std::string out = "replication,t_stat\n";
  for (std::size_t r = 0; r < report.t_stats.size(); ++r) {
    out += std::to_string(r);
    out += ',';
    append_double(out, report.t_stats[r]);
    out += '\n';
  }
  return out;
}

std::string raw_csv(const PhatReport& report) {
  std::string out = "n,inv_mesh,replication,max_rel_error\n";
  for (std::size_t i = 0; i < report.n_values.size(); ++i) {
    for (std::size_t r = 0; r < report.rel_errors[i].size(); ++r) {
      out += std::to_string(report.n_values[i]);
      out += ',';
      out += std::to_string(report.inv_meshes[i]);
      out += ',';
      out += std::to_string(r);
      out += ',';
      append_double(out, report.rel_errors[i][r]);
      out += '\n';
    }
  }
  return out;
}

}  // namespace histoband
