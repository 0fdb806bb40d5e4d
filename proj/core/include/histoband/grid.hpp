#pragma once

#include <cstdint>
#include <utility>
#include <vector>

namespace histoband {

/// Multi-index of a grid cell together with its linearization.
///
/// The linear index uses the first coordinate as the most significant digit:
///   linear = sum_i multi[i] * inv_mesh^(p-1-i).
struct CellId {
  std::uint64_t linear = 0;
  std::vector<std::uint64_t> multi;
};

/// Equidistant partition of [0,1]^p into hypercubes of edge length
/// delta = 1/inv_mesh. The inverse mesh is stored as an integer so that no
/// floating-point comparison ever decides grid geometry; delta^p quantities
/// are formed as 1/inv_mesh^p only at the point of use.
class Grid {
 public:
  /// Throws std::invalid_argument if dim or inv_mesh is zero, or if the cell
  /// count inv_mesh^dim exceeds 2^48 (or overflows).
  Grid(int dim, std::uint64_t inv_mesh);

  int dim() const { return dim_; }
  std::uint64_t inv_mesh() const { return inv_mesh_; }
  std::uint64_t cell_count() const { return cell_count_; }

  double mesh() const { return 1.0 / static_cast<double>(inv_mesh_); }
  /// Lebesgue volume of one cell, delta^p.
  double cell_volume() const;
  /// Euclidean diameter of one cell, delta * sqrt(p).
  double cell_diameter() const;

  /// Cell containing x. Cells are half-open boxes [k*delta, (k+1)*delta);
  /// the upper domain boundary x_i = 1 belongs to the last cell along that
  /// axis. Throws std::invalid_argument if any coordinate is outside [0,1]
  /// or if the dimension does not match.
  CellId cell_of(const std::vector<double>& x) const;

  /// Same map, returning only the linear index.
  std::uint64_t cell_index_of(const double* x) const;

  /// Closed box [k_i*delta, (k_i+1)*delta] of a cell given by linear index.
  std::pair<std::vector<double>, std::vector<double>> cell_box(
      std::uint64_t linear) const;

  /// Decode a linear index into the per-axis multi-index.
  std::vector<std::uint64_t> decode(std::uint64_t linear) const;
  std::uint64_t encode(const std::vector<std::uint64_t>& multi) const;

  bool operator==(const Grid& other) const {
    return dim_ == other.dim_ && inv_mesh_ == other.inv_mesh_;
  }

 private:
  int dim_;
  std::uint64_t inv_mesh_;
  std::uint64_t cell_count_;
};

}  // namespace histoband
