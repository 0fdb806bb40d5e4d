#include "histoband/grid.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace histoband {

namespace {

// 2^48 cells; beyond that a desk-scale sample cannot populate the partition
// and per-cell arrays stop being addressable.
constexpr std::uint64_t kMaxCells = std::uint64_t{1} << 48;

std::uint64_t checked_pow(std::uint64_t base, int exp) {
  std::uint64_t result = 1;
  for (int i = 0; i < exp; ++i) {
    if (base != 0 && result > kMaxCells / base) {
      throw std::invalid_argument("grid: cell count inv_mesh^dim exceeds 2^48");
    }
    result *= base;
  }
  if (result > kMaxCells) {
    throw std::invalid_argument("grid: cell count inv_mesh^dim exceeds 2^48");
  }
  return result;
}

}  // namespace

Grid::Grid(int dim, std::uint64_t inv_mesh) : dim_(dim), inv_mesh_(inv_mesh) {
  if (dim < 1) throw std::invalid_argument("grid: dim must be >= 1");
  if (inv_mesh < 1) throw std::invalid_argument("grid: inv_mesh must be >= 1");
  cell_count_ = checked_pow(inv_mesh, dim);
}

double Grid::cell_volume() const {
  return 1.0 / static_cast<double>(cell_count_);
}

double Grid::cell_diameter() const {
  return std::sqrt(static_cast<double>(dim_)) / static_cast<double>(inv_mesh_);
}

std::uint64_t Grid::cell_index_of(const double* x) const {
  std::uint64_t linear = 0;
  const double scale = static_cast<double>(inv_mesh_);
  for (int i = 0; i < dim_; ++i) {
    const double xi = x[i];
    if (!(xi >= 0.0 && xi <= 1.0)) {
      throw std::invalid_argument("grid: coordinate " + std::to_string(i) +
                                  " outside [0,1]");
    }
    auto k = static_cast<std::uint64_t>(xi * scale);
    if (k >= inv_mesh_) k = inv_mesh_ - 1;  // x_i == 1 joins the last cell
    linear = linear * inv_mesh_ + k;
  }
  return linear;
}

CellId Grid::cell_of(const std::vector<double>& x) const {
  if (static_cast<int>(x.size()) != dim_) {
    throw std::invalid_argument("grid: point dimension mismatch");
  }
  CellId id;
  id.linear = cell_index_of(x.data());
  id.multi = decode(id.linear);
  return id;
}

std::vector<std::uint64_t> Grid::decode(std::uint64_t linear) const {
  if (linear >= cell_count_) {
    throw std::invalid_argument("grid: linear cell index out of range");
  }
  std::vector<std::uint64_t> multi(static_cast<std::size_t>(dim_));
  for (int i = dim_ - 1; i >= 0; --i) {
    multi[static_cast<std::size_t>(i)] = linear % inv_mesh_;
    linear /= inv_mesh_;
  }
  return multi;
}

std::uint64_t Grid::encode(const std::vector<std::uint64_t>& multi) const {
  if (static_cast<int>(multi.size()) != dim_) {
    throw std::invalid_argument("grid: multi-index dimension mismatch");
  }
  std::uint64_t linear = 0;
  for (int i = 0; i < dim_; ++i) {
    const std::uint64_t k = multi[static_cast<std::size_t>(i)];
    if (k >= inv_mesh_) {
      throw std::invalid_argument("grid: multi-index component out of range");
    }
    linear = linear * inv_mesh_ + k;
  }
  return linear;
}

std::pair<std::vector<double>, std::vector<double>> Grid::cell_box(
    std::uint64_t linear) const {
  const auto multi = decode(linear);
  std::vector<double> lo(static_cast<std::size_t>(dim_));
  std::vector<double> hi(static_cast<std::size_t>(dim_));
  const double scale = static_cast<double>(inv_mesh_);
  for (int i = 0; i < dim_; ++i) {
    const auto k = static_cast<double>(multi[static_cast<std::size_t>(i)]);
    lo[static_cast<std::size_t>(i)] = k / scale;
    hi[static_cast<std::size_t>(i)] = (k + 1.0) / scale;
  }
  return {lo, hi};
}

}  // namespace histoband
