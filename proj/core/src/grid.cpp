#include "lmcf/grid.hpp"

#include <algorithm>
#include <string>

#include "lmcf/errors.hpp"

namespace lmcf {

GridSpec::GridSpec(std::vector<int> sizes, std::vector<double> periods)
    : dim_(static_cast<int>(sizes.size())),
      sizes_(std::move(sizes)),
      periods_(std::move(periods)) {
  if (dim_ < 1 || dim_ > kMaxDim) {
    throw InvalidArgumentError("grid dimension must be 1, 2 or 3, got " +
                               std::to_string(dim_));
  }
  if (periods_.size() != sizes_.size()) {
    throw InvalidArgumentError("grid needs one period per axis");
  }
  for (int a = 0; a < dim_; ++a) {
    if (sizes_[a] < 8 || sizes_[a] % 2 != 0) {
      throw InvalidArgumentError("grid size along axis " + std::to_string(a) +
                                 " must be even and >= 8, got " +
                                 std::to_string(sizes_[a]));
    }
    if (!(periods_[a] > 0.0)) {
      throw InvalidArgumentError("grid period along axis " + std::to_string(a) +
                                 " must be positive");
    }
  }
  strides_.assign(dim_, 1);
  for (int a = dim_ - 2; a >= 0; --a) {
    strides_[a] = strides_[a + 1] * static_cast<std::size_t>(sizes_[a + 1]);
  }
  count_ = strides_[0] * static_cast<std::size_t>(sizes_[0]);
}

GridSpec GridSpec::cube(int dim, int n_per_axis, double period) {
  return GridSpec(std::vector<int>(std::max(dim, 0), n_per_axis),
                  std::vector<double>(std::max(dim, 0), period));
}

double GridSpec::min_spacing() const {
  double h = spacing(0);
  for (int a = 1; a < dim_; ++a) h = std::min(h, spacing(a));
  return h;
}

double GridSpec::flat_volume() const {
  double v = 1.0;
  for (double p : periods_) v *= p;
  return v;
}

double GridSpec::cell_volume() const {
  double v = 1.0;
  for (int a = 0; a < dim_; ++a) v *= spacing(a);
  return v;
}

std::array<int, kMaxDim> GridSpec::unflatten(std::size_t flat) const {
  std::array<int, kMaxDim> idx{};
  for (int a = 0; a < dim_; ++a) {
    idx[a] = static_cast<int>(flat / strides_[a]);
    flat %= strides_[a];
  }
  return idx;
}

double GridSpec::coordinate(std::size_t flat, int axis) const {
  return unflatten(flat)[axis] * spacing(axis);
}

void require_same_grid(const GridSpec& a, const GridSpec& b) {
  if (!(a == b)) throw SpecMismatchError("fields live on different grids");
}

}  // namespace lmcf
