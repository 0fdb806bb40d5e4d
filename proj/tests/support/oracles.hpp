#pragma once

// Independent reference implementations used only as test oracles. These
// deliberately avoid the library's own lookup/accumulation code paths.

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

#include "histoband/dataset.hpp"
#include "histoband/estimators.hpp"
#include "histoband/grid.hpp"

namespace histoband::testing {

/// Membership of x in the cell with the given per-axis indices, derived from
/// the box bounds (half-open; upper domain boundary closed on the last cell).
inline bool in_cell(const std::vector<std::uint64_t>& multi, std::uint64_t inv_mesh,
                    const double* x, int dim) {
  for (int d = 0; d < dim; ++d) {
    const double lo = static_cast<double>(multi[d]) / static_cast<double>(inv_mesh);
    const double hi =
        static_cast<double>(multi[d] + 1) / static_cast<double>(inv_mesh);
    const bool last = multi[d] + 1 == inv_mesh;
    if (!(x[d] >= lo && (x[d] < hi || (last && x[d] <= 1.0)))) return false;
  }
  return true;
}

/// O(nJ) double-loop histogram fit: scans every (cell, point) pair.
inline HistogramFit naive_fit(const Grid& grid, const Dataset& data) {
  HistogramFit out{grid};
  out.n = data.size();
  const auto cells = grid.cell_count();
  out.count.assign(cells, 0);
  out.mean_y.assign(cells, 0.0);
  out.mean_y2.assign(cells, 0.0);
  out.empty.assign(cells, 1);
  for (std::uint64_t c = 0; c < cells; ++c) {
    const auto multi = grid.decode(c);
    double sum = 0.0, sum2 = 0.0;
    std::int64_t count = 0;
    for (std::size_t i = 0; i < data.size(); ++i) {
      if (!in_cell(multi, grid.inv_mesh(), data.x(i), grid.dim())) continue;
      ++count;
      sum += data.ys[i];
      sum2 += data.ys[i] * data.ys[i];
    }
    out.count[c] = count;
    if (count > 0) {
      out.empty[c] = 0;
      out.mean_y[c] = sum / static_cast<double>(count);
      out.mean_y2[c] = sum2 / static_cast<double>(count);
    }
  }
  return out;
}

/// Brute-force cell lookup by scanning all J boxes.
inline std::uint64_t brute_force_cell(const Grid& grid, const double* x) {
  for (std::uint64_t c = 0; c < grid.cell_count(); ++c) {
    if (in_cell(grid.decode(c), grid.inv_mesh(), x, grid.dim())) return c;
  }
  return grid.cell_count();  // unreachable for x in [0,1]^p
}

/// Random dataset driven by the standard library generator (not the
/// library's own RNG).
inline Dataset random_dataset(std::mt19937& gen, int dim, std::size_t n) {
  std::uniform_real_distribution<double> ux(0.0, 1.0);
  std::normal_distribution<double> uy(0.0, 2.0);
  Dataset data;
  data.dim = dim;
  for (std::size_t i = 0; i < n; ++i) {
    for (int d = 0; d < dim; ++d) data.xs.push_back(ux(gen));
    data.ys.push_back(uy(gen));
  }
  return data;
}

}  // namespace histoband::testing
