#pragma once

#include <array>
#include <span>
#include <vector>

#include "lmcf/grid.hpp"

namespace lmcf::detail {

/// Fourier-side differentiation on one grid. Holds a forward transform of the
/// input so several derivatives can be taken from it.
class SpectralDifferentiator {
 public:
  SpectralDifferentiator(const GridSpec& spec, std::span<const double> values);
  ~SpectralDifferentiator();
  SpectralDifferentiator(const SpectralDifferentiator&) = delete;
  SpectralDifferentiator& operator=(const SpectralDifferentiator&) = delete;

  /// Partial derivative with the given per-axis orders. Odd orders drop the
  /// Nyquist coefficient of their axis.
  std::vector<double> partial(const std::array<int, kMaxDim>& orders) const;

  /// Trigonometric interpolant sampled on `fine` (same dimension and periods,
  /// no axis smaller). A Nyquist coefficient is split evenly between +-N/2.
  std::vector<double> prolongate(const GridSpec& fine) const;

 private:
  struct Impl;
  Impl* impl_;
};

}  // namespace lmcf::detail
