#include "histoband/bands.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "histoband/normal.hpp"

namespace histoband {

double gaussian_max_quantile(const QuantileSpec& spec) {
  if (spec.cells < 1) {
    throw std::invalid_argument("gaussian_max_quantile: cells must be >= 1");
  }
  if (!(spec.beta > 0.0 && spec.beta < 1.0)) {
    throw std::invalid_argument("gaussian_max_quantile: beta must be in (0,1)");
  }
  // tail = (1 - (1-beta)^(1/J)) / 2
  const double j = static_cast<double>(spec.cells);
  const double tail = -std::expm1(std::log1p(-spec.beta) / j) / 2.0;
  return normal_upper_quantile(tail);
}

double max_abs_normal_cdf(double t, std::uint64_t cells) {
  if (t <= 0.0) return 0.0;
  // (2*Phi(t)-1)^J = (1 - erfc(t/sqrt(2)))^J, kept in log space for large J.
  const double two_sided_tail = 2.0 * normal_sf(t);
  if (two_sided_tail >= 1.0) return 0.0;
  return std::exp(static_cast<double>(cells) * std::log1p(-two_sided_tail));
}

std::size_t ConfidenceBand::degenerate_cells() const {
  return static_cast<std::size_t>(
      std::count(degenerate.begin(), degenerate.end(), std::uint8_t{1}));
}

ConfidenceBand build_band(const HistogramFit& fit, const TauModel& tau,
                          double beta) {
  if (!(fit.grid == tau.grid)) {
    throw std::invalid_argument("build_band: fit and tau use different grids");
  }
  const std::size_t cells = fit.grid.cell_count();
  ConfidenceBand band{fit.grid,
                      beta,
                      gaussian_max_quantile({fit.grid.cell_count(), beta}),
                      fit.n,
                      std::vector<double>(cells, 0.0),
                      std::vector<double>(cells, 0.0),
                      std::vector<std::uint8_t>(cells, 0)};
  const auto n = static_cast<double>(fit.n);
  for (std::size_t c = 0; c < cells; ++c) {
    if (fit.count[c] > 0 && tau.defined[c] && tau.tau[c] > 0.0) {
      band.center[c] = fit.mean_y[c];
      band.radius[c] = band.quantile / std::sqrt(tau.tau[c] * n);
    } else {
      band.center[c] = fit.mean_y[c];
      band.radius[c] = std::numeric_limits<double>::infinity();
      band.degenerate[c] = 1;
    }
  }
  return band;
}

bool covers(const ConfidenceBand& band,
            const std::function<double(const double*)>& m,
            int probe_points_per_axis, DegeneratePolicy policy) {
  if (probe_points_per_axis < 1) {
    throw std::invalid_argument("covers: need at least one probe per axis");
  }
  const Grid& grid = band.grid;
  const int dim = grid.dim();
  const double delta = grid.mesh();
  const double step = delta / static_cast<double>(probe_points_per_axis);

  std::vector<double> point(static_cast<std::size_t>(dim));
  std::vector<int> idx(static_cast<std::size_t>(dim));
  for (std::uint64_t c = 0; c < grid.cell_count(); ++c) {
    if (band.degenerate[c]) {
      switch (policy) {
        case DegeneratePolicy::kReject:
          throw std::invalid_argument("covers: band has degenerate cells");
        case DegeneratePolicy::kFail:
          return false;
        case DegeneratePolicy::kCoverTrivially:
          continue;  // |m - center| <= inf
      }
    }
    const auto [lo, hi] = grid.cell_box(c);
    std::fill(idx.begin(), idx.end(), 0);
    for (;;) {
      for (int i = 0; i < dim; ++i) {
        point[static_cast<std::size_t>(i)] =
            lo[static_cast<std::size_t>(i)] +
            (static_cast<double>(idx[static_cast<std::size_t>(i)]) + 0.5) *
                step;
      }
      if (std::abs(m(point.data()) - band.center[c]) > band.radius[c]) {
        return false;
      }
      int i = 0;
      while (i < dim && ++idx[static_cast<std::size_t>(i)] ==
                            probe_points_per_axis) {
        idx[static_cast<std::size_t>(i)] = 0;
        ++i;
      }
      if (i == dim) break;
    }
  }
  return true;
}

}  // namespace histoband
