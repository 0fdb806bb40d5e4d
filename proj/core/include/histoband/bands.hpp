#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "histoband/estimators.hpp"
#include "histoband/grid.hpp"

namespace histoband {

/// Quantile request for the maximum of J independent standard normals.
struct QuantileSpec {
  std::uint64_t cells = 1;  // J
  double beta = 0.05;       // in (0,1)
};

/// c > 0 with P(max_{j<=J} |Z_j| <= c) = 1 - beta. Since the Z_j are
/// independent the defining probability factorizes to (2*Phi(c)-1)^J, so
/// c = Phi^{-1}((1 + (1-beta)^{1/J})/2). The tail (1-(1-beta)^{1/J})/2 is
/// formed with expm1/log1p so large J loses no precision.
double gaussian_max_quantile(const QuantileSpec& spec);

/// CDF of max_{j<=J} |Z_j| at t, i.e. (2*Phi(t)-1)^J for t >= 0, else 0.
double max_abs_normal_cdf(double t, std::uint64_t cells);

/// Piecewise-constant envelope center(c) +- radius(c). Degenerate cells
/// (empty fit or undefined tau) get an infinite radius and a flag so that
/// callers can count them instead of crashing on them.
struct ConfidenceBand {
  Grid grid;
  double beta = 0.0;
  double quantile = 0.0;
  std::size_t n = 0;
  std::vector<double> center;
  std::vector<double> radius;
  std::vector<std::uint8_t> degenerate;

  std::size_t degenerate_cells() const;
};

ConfidenceBand build_band(const HistogramFit& fit, const TauModel& tau,
                          double beta);

/// What covers() does with degenerate cells: refuse (precondition), treat
/// them as automatic failures, or take the infinite radius at face value.
enum class DegeneratePolicy { kReject, kFail, kCoverTrivially };

/// True iff |m(x) - center| <= radius at every probe point of a tensor
/// subgrid with probe_points_per_axis points per axis inside each cell.
/// For m constant on each cell one probe per cell is exact.
bool covers(const ConfidenceBand& band,
            const std::function<double(const double*)>& m,
            int probe_points_per_axis,
            DegeneratePolicy policy = DegeneratePolicy::kReject);

}  // namespace histoband
