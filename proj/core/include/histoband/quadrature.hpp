#pragma once

#include <functional>
#include <vector>

namespace histoband {

/// Integral of f over the axis-aligned box [lo, hi] by a tensor-product
/// Gauss-Legendre rule with 8 nodes per axis (exact for per-axis polynomial
/// degree <= 15). f receives a point of the same dimension as lo/hi.
double integrate_box(const std::function<double(const std::vector<double>&)>& f,
                     const std::vector<double>& lo,
                     const std::vector<double>& hi);

}  // namespace histoband
