#include "histoband/quadrature.hpp"

#include <array>
#include <cstddef>
#include <stdexcept>

namespace histoband {

namespace {

// 8-point Gauss-Legendre rule on [-1,1].
constexpr std::array<double, 8> kNodes = {
    -0.9602898564975363, -0.7966664774136267, -0.5255324099163290,
    -0.1834346424956498, 0.1834346424956498,  0.5255324099163290,
    0.7966664774136267,  0.9602898564975363};
constexpr std::array<double, 8> kWeights = {
    0.1012285362903763, 0.2223810344533745, 0.3137066458778873,
    0.3626837833783620, 0.3626837833783620, 0.3137066458778873,
    0.2223810344533745, 0.1012285362903763};

}  // namespace

double integrate_box(const std::function<double(const std::vector<double>&)>& f,
                     const std::vector<double>& lo,
                     const std::vector<double>& hi) {
  const std::size_t dim = lo.size();
  if (dim == 0 || hi.size() != dim) {
    throw std::invalid_argument("integrate_box: inconsistent box");
  }

  std::vector<double> mid(dim), half(dim);
  double jac = 1.0;
  for (std::size_t i = 0; i < dim; ++i) {
    mid[i] = 0.5 * (lo[i] + hi[i]);
    half[i] = 0.5 * (hi[i] - lo[i]);
    jac *= half[i];
  }

  // Odometer over the 8^dim tensor nodes.
  std::vector<std::size_t> idx(dim, 0);
  std::vector<double> point(dim);
  double sum = 0.0;
  for (;;) {
    double w = 1.0;
    for (std::size_t i = 0; i < dim; ++i) {
      point[i] = mid[i] + half[i] * kNodes[idx[i]];
      w *= kWeights[idx[i]];
    }
    sum += w * f(point);

    std::size_t i = 0;
    while (i < dim && ++idx[i] == kNodes.size()) {
      idx[i] = 0;
      ++i;
    }
    if (i == dim) break;
  }
  return sum * jac;
}

}  // namespace histoband
