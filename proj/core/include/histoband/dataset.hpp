#pragma once

#include <cstddef>
#include <vector>

namespace histoband {

/// Regression sample (X_i, Y_i), i = 1..n, with covariates in [0,1]^p.
/// Covariates are stored row-major: x(i) = &xs[i*dim].
struct Dataset {
  int dim = 0;
  std::vector<double> xs;  // n * dim
  std::vector<double> ys;  // n

  std::size_t size() const { return ys.size(); }
  const double* x(std::size_t i) const { return xs.data() + i * static_cast<std::size_t>(dim); }

  /// Throws std::invalid_argument unless n >= 1, the buffers are consistent
  /// and every coordinate lies in [0,1].
  void validate() const;
};

}  // namespace histoband
