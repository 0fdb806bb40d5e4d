#include "histoband/normal.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace histoband {

namespace {
constexpr double kInvSqrt2 = 0.70710678118654752440;
constexpr double kInvSqrt2Pi = 0.39894228040143267794;
}  // namespace

double normal_pdf(double x) { return kInvSqrt2Pi * std::exp(-0.5 * x * x); }

double normal_cdf(double x) { return 0.5 * std::erfc(-x * kInvSqrt2); }

double normal_sf(double x) { return 0.5 * std::erfc(x * kInvSqrt2); }

double normal_upper_quantile(double tail) {
  if (!(tail > 0.0 && tail < 1.0)) {
    throw std::invalid_argument("normal_upper_quantile: tail must be in (0,1)");
  }
  if (tail == 0.5) return 0.0;
  if (tail > 0.5) return -normal_upper_quantile(1.0 - tail);

  // Root of f(x) = sf(x) - tail on [0, inf). f is decreasing and convex
  // there, so Newton with a shrinking bracket converges fast from the
  // asymptotic tail guess.
  double x = std::sqrt(std::max(0.0, -2.0 * std::log(2.0 * tail)));
  double lo = 0.0;
  double hi = std::max(1.0, x);
  while (normal_sf(hi) > tail) {
    lo = hi;
    hi *= 2.0;
    if (hi > 1e3) break;  // tail below representable range of sf
  }
  for (int iter = 0; iter < 200; ++iter) {
    const double f = normal_sf(x) - tail;
    if (f > 0.0) {
      lo = x;
    } else if (f < 0.0) {
      hi = x;
    } else {
      return x;
    }
    const double step = f / normal_pdf(x);
    double next = x + step;
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    if (std::abs(next - x) <= 1e-16 * std::max(1.0, std::abs(x))) return next;
    x = next;
  }
  return x;
}

double normal_quantile(double p) {
  if (!(p > 0.0 && p < 1.0)) {
    throw std::invalid_argument("normal_quantile: p must be in (0,1)");
  }
  if (p < 0.5) return -normal_upper_quantile(p);
  return normal_upper_quantile(1.0 - p);
}

}  // namespace histoband
