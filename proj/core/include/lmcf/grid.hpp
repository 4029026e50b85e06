#pragma once

#include <array>
#include <cstddef>
#include <vector>

namespace lmcf {

inline constexpr int kMaxDim = 3;

/// Uniform periodic grid on an n-torus, n in {1, 2, 3}.
///
/// Axis 0 is the slowest-varying index in the flat (row-major) layout.
/// Point i_a along axis a sits at x_a = i_a * P_a / N_a.
class GridSpec {
 public:
  GridSpec() = default;

  /// Throws InvalidArgumentError unless 1 <= dim <= 3, every N_a is even and
  /// >= 8, and every P_a > 0.
  GridSpec(std::vector<int> sizes, std::vector<double> periods);

  /// Unit periods on every axis.
  static GridSpec cube(int dim, int n_per_axis, double period = 1.0);

  int dim() const noexcept { return dim_; }
  int size(int axis) const { return sizes_[axis]; }
  double period(int axis) const { return periods_[axis]; }
  double spacing(int axis) const { return periods_[axis] / sizes_[axis]; }
  double min_spacing() const;
  /// Product of the periods: flat volume of the torus.
  double flat_volume() const;
  /// Product of the spacings: quadrature weight of one grid point.
  double cell_volume() const;
  std::size_t point_count() const noexcept { return count_; }
  const std::vector<int>& sizes() const noexcept { return sizes_; }
  const std::vector<double>& periods() const noexcept { return periods_; }

  /// Stride of axis a in the flat layout.
  std::size_t stride(int axis) const { return strides_[axis]; }

  /// Multi-index of a flat position.
  std::array<int, kMaxDim> unflatten(std::size_t flat) const;

  /// Physical coordinate of a flat position along the given axis.
  double coordinate(std::size_t flat, int axis) const;

  friend bool operator==(const GridSpec& a, const GridSpec& b) {
    return a.sizes_ == b.sizes_ && a.periods_ == b.periods_;
  }

 private:
  int dim_ = 0;
  std::vector<int> sizes_;
  std::vector<double> periods_;
  std::vector<std::size_t> strides_;
  std::size_t count_ = 0;
};

/// Throws SpecMismatchError when the grids differ.
void require_same_grid(const GridSpec& a, const GridSpec& b);

}  // namespace lmcf
