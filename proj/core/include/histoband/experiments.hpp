#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "histoband/scenario.hpp"

namespace histoband {

/// Runs task(0..count-1), spreading indices over `workers` threads. Each
/// task must write only to its own index's slot; reductions happen after the
/// pool drains, in index order, so results do not depend on scheduling.
void run_indexed(std::size_t count, int workers,
                 const std::function<void(std::size_t)>& task);

/// Wall time and scheduling facts. Excluded from the reproducibility
/// contract: reports are compared with "meta" stripped.
struct ReportMeta {
  double wall_seconds = 0.0;
  int workers = 1;
};

struct CoverageReport {
  ScenarioConfig config;
  std::vector<std::uint8_t> covered;     // by replication
  std::vector<std::uint8_t> degenerate;  // band had empty cells
  double coverage = 0.0;
  double ci_low = 0.0;   // 95% binomial CI, normal approximation
  double ci_high = 0.0;
  std::size_t degenerate_count = 0;
  AssumptionAudit assumptions;
  UndersmoothingAudit undersmoothing;
  ReportMeta meta;
};

struct RateReport {
  ScenarioConfig config;
  std::vector<std::size_t> n_values;
  std::vector<std::uint64_t> inv_meshes;
  std::vector<std::vector<double>> sup_errors;  // [n index][replication]
  std::vector<double> median_errors;
  double slope = 0.0;  // log(median error) vs log(n / log n)
  double slope_ci_low = 0.0;
  double slope_ci_high = 0.0;
  ReportMeta meta;
};

struct GaussApproxReport {
  ScenarioConfig config;
  std::vector<double> t_stats;  // by replication
  double ks_distance = 0.0;
  ReportMeta meta;
};

struct PhatReport {
  ScenarioConfig config;
  std::vector<std::size_t> n_values;
  std::vector<std::uint64_t> inv_meshes;
  std::vector<std::vector<double>> rel_errors;  // [n index][replication]
  std::vector<double> median_rel_errors;
  std::vector<double> scaled_stats;          // median * (log n)^{3/2}
  std::vector<std::uint8_t> out_of_regime;   // n * delta^p < 10
  bool decreasing_tail = false;  // scaled stat decreasing over largest two decades
  ReportMeta meta;
};

CoverageReport coverage_experiment(const ScenarioConfig& config, int workers);
RateReport rate_experiment(const ScenarioConfig& config,
                           const std::vector<std::size_t>& n_values, int workers);
GaussApproxReport gauss_approx_experiment(const ScenarioConfig& config, int workers);
PhatReport phat_experiment(const ScenarioConfig& config,
                           const std::vector<std::size_t>& n_values, int workers);

std::string to_json_string(const CoverageReport& report);
std::string to_json_string(const RateReport& report);
std::string to_json_string(const GaussApproxReport& report);
std::string to_json_string(const PhatReport& report);

/// Per-replication raw statistics as CSV, for external plotting.
std::string raw_csv(const CoverageReport& report);
std::string raw_csv(const RateReport& report);
std::string raw_csv(const GaussApproxReport& report);
std::string raw_csv(const PhatReport& report);

/// Probe-grid sup of |center(cell) - m(x)|, centers taken from a fitted
/// histogram (0 on empty cells).
double probe_sup_error(const HistogramFit& fit,
                       const std::function<double(const double*)>& m,
                       int probe_points_per_axis);

}  // namespace histoband
