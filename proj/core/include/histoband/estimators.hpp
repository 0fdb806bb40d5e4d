#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "histoband/dataset.hpp"
#include "histoband/grid.hpp"

namespace histoband {

/// Lower clamp for estimated variances. A cell holding a single observation
/// (or exactly constant responses) would otherwise report variance zero and
/// produce zero-width bands downstream.
constexpr double kDefaultVarianceFloor = 1e-8;

/// Per-cell histogram regression fit: counts, response means and response
/// second moments. Empty cells carry value 0 by convention and are flagged;
/// consumers must branch on the flag, not on the value.
struct HistogramFit {
  Grid grid;
  std::size_t n = 0;
  std::vector<std::int64_t> count;
  std::vector<double> mean_y;
  std::vector<double> mean_y2;
  std::vector<std::uint8_t> empty;

  bool is_empty(std::uint64_t cell) const { return empty[cell] != 0; }
  std::size_t empty_cells() const;
};

enum class VarianceMode { kHomoscedastic, kLocal };

/// Estimated noise variance, either one global value (residual-based) or a
/// per-cell histogram estimate of the variance function.
struct VarianceModel {
  VarianceMode mode = VarianceMode::kHomoscedastic;
  double floor = kDefaultVarianceFloor;
  double global_sigma2 = 0.0;
  std::vector<double> local_sigma2;       // local mode, per cell
  std::vector<std::uint8_t> defined;      // local mode: cell nonempty
  std::vector<std::uint8_t> low_count;    // local mode: count < 2
};

/// Per-cell precision tau = p^2/s. The band radius for a cell is
/// quantile / sqrt(tau * n). Cells where the plug-in is degenerate are
/// flagged undefined rather than being given a silent placeholder.
struct TauModel {
  Grid grid;
  std::vector<double> tau;
  std::vector<std::uint8_t> defined;
};

/// One-pass cell-wise averaging of the responses. Deterministic: cells
/// accumulate in row order, so equal inputs give bit-equal outputs.
HistogramFit fit(const Grid& grid, const Dataset& data);

/// Empirical cell frequencies count/n; sums to 1.
std::vector<double> p_hat(const HistogramFit& fit);

/// Mean squared residual (1/n) sum (Y_i - mhat(X_i))^2, clamped below.
double sigma2_global(const HistogramFit& fit, const Dataset& data,
                     double floor = kDefaultVarianceFloor);

/// Per-cell variance estimate mean(Y^2) - mean(Y)^2, clamped below;
/// undefined on empty cells, low-count flagged when count < 2.
VarianceModel local_variance(const HistogramFit& fit,
                             double floor = kDefaultVarianceFloor);

/// Homoscedastic VarianceModel wrapping sigma2_global.
VarianceModel global_variance(const HistogramFit& fit, const Dataset& data,
                              double floor = kDefaultVarianceFloor);

/// Plug-in precision p_hat / sigma2. Empty cells are undefined.
TauModel tau_plugin(const HistogramFit& fit, const VarianceModel& var);

using DensityFn = std::function<double(const std::vector<double>&)>;

/// Cell probabilities p(c) = integral of f_X over the cell (8-node
/// Gauss-Legendre per axis). Throws std::runtime_error on a nonpositive
/// integral.
std::vector<double> oracle_cell_probabilities(const Grid& grid,
                                              const DensityFn& f_x);

/// Oracle precision tau(c) = p(c)^2 / s(c) with p(c) the covariate mass of
/// the cell and s(c) the integral of sigma2 * f_X over it.
TauModel tau_oracle(const Grid& grid, const DensityFn& f_x,
                    const DensityFn& sigma2);

/// Split of the fit into its regression part and its noise part, plus the
/// variant of the noise part whose denominator n*p(c) is deterministic.
/// On nonempty cells mean_m + mean_eps equals the fit's mean_y exactly in
/// real arithmetic.
struct Decomposition {
  std::vector<double> mean_m;
  std::vector<double> mean_eps;
  std::vector<double> tilde_eps;
  std::vector<std::uint8_t> empty;
};

Decomposition decompose(const Grid& grid, const Dataset& data,
                        const std::function<double(const double*)>& m,
                        std::span<const double> eps,
                        std::span<const double> cell_prob);

}  // namespace histoband
