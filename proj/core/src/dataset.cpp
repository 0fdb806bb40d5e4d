#include "histoband/dataset.hpp"

#include <stdexcept>

namespace histoband {

void Dataset::validate() const {
  if (dim < 1) throw std::invalid_argument("dataset: dim must be >= 1");
  if (ys.empty()) throw std::invalid_argument("dataset: needs at least one row");
  if (xs.size() != ys.size() * static_cast<std::size_t>(dim)) {
    throw std::invalid_argument("dataset: xs/ys size mismatch");
  }
  for (double v : xs) {
    if (!(v >= 0.0 && v <= 1.0)) {
      throw std::invalid_argument("dataset: covariate outside [0,1]");
    }
  }
}

}  // namespace histoband
