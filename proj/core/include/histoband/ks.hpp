#pragma once

#include <algorithm>
#include <functional>
#include <stdexcept>
#include <vector>

namespace histoband {

/// Kolmogorov-Smirnov distance between the empirical CDF of `sample` and a
/// reference CDF, sup_x |F_n(x) - F(x)| evaluated at the jump points.
inline double ks_distance(std::vector<double> sample,
                          const std::function<double(double)>& cdf) {
  if (sample.empty()) throw std::invalid_argument("ks_distance: empty sample");
  std::sort(sample.begin(), sample.end());
  const double n = static_cast<double>(sample.size());
  double dist = 0.0;
  for (std::size_t i = 0; i < sample.size(); ++i) {
    const double f = cdf(sample[i]);
    dist = std::max(dist, std::max(std::abs(f - static_cast<double>(i) / n),
                                   std::abs(f - static_cast<double>(i + 1) / n)));
  }
  return dist;
}

}  // namespace histoband
