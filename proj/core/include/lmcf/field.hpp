#pragma once

#include <array>
#include <cstddef>
#include <functional>
#include <span>
#include <vector>

#include "lmcf/errors.hpp"
#include "lmcf/grid.hpp"

namespace lmcf {

/// Real function sampled on a periodic grid. Values are finite; the field is
/// immutable once built.
class ScalarField {
 public:
  ScalarField() = default;
  /// Throws InvalidArgumentError on a size mismatch or a non-finite value.
  ScalarField(GridSpec spec, std::vector<double> values);

  static ScalarField constant(const GridSpec& spec, double c);
  static ScalarField from_function(
      const GridSpec& spec,
      const std::function<double(const std::array<double, kMaxDim>&)>& f);

  const GridSpec& spec() const noexcept { return spec_; }
  std::span<const double> values() const noexcept { return values_; }
  double operator[](std::size_t i) const { return values_[i]; }
  std::size_t size() const noexcept { return values_.size(); }

  /// Moves the storage out; used by code that builds a new field from an old one.
  std::vector<double> release() && { return std::move(values_); }

  double mean() const;

 private:
  GridSpec spec_;
  std::vector<double> values_;
};

ScalarField operator+(const ScalarField& a, const ScalarField& b);
ScalarField operator-(const ScalarField& a, const ScalarField& b);
ScalarField operator*(const ScalarField& a, const ScalarField& b);
ScalarField operator*(double s, const ScalarField& a);
ScalarField map(const ScalarField& a, const std::function<double(double)>& f);

/// Sorted multi-index tables for fully symmetric rank-r tensors in dimension n.
///
/// Component c stores the entry for indices[c] (non-decreasing); multiplicity[c]
/// is the number of index tuples that are permutations of it.
struct SymIndexTable {
  int dim = 0;
  int rank = 0;
  std::vector<std::array<int, 4>> indices;
  std::vector<int> multiplicity;

  static const SymIndexTable& get(int dim, int rank);
  /// Component id of an arbitrary (unsorted) index tuple of length `rank`.
  int lookup(std::array<int, 4> tuple) const;
  /// Per-axis derivative counts of a component.
  std::array<int, kMaxDim> axis_orders(int component) const;
};

/// Field of fully symmetric rank-R tensors, stored one component array per
/// distinct sorted multi-index. Norms use the Frobenius convention, which is the
/// flat metric norm.
template <int Rank>
class SymTensorField {
  static_assert(Rank >= 1 && Rank <= 4);

 public:
  static constexpr int rank = Rank;

  SymTensorField() = default;
  SymTensorField(GridSpec spec, std::vector<std::vector<double>> components);
  static SymTensorField zeros(const GridSpec& spec);

  const GridSpec& spec() const noexcept { return spec_; }
  const SymIndexTable& table() const { return SymIndexTable::get(spec_.dim(), Rank); }
  int component_count() const noexcept { return static_cast<int>(components_.size()); }

  std::span<const double> component(int c) const { return components_[c]; }
  ScalarField component_field(int c) const { return {spec_, components_[c]}; }

  /// Entry T_{i1..iR} at a point; index order is irrelevant.
  double at(std::size_t point, std::array<int, 4> tuple) const {
    return components_[table().lookup(tuple)][point];
  }

  /// |T|^2 at a point, summed over all index tuples.
  double norm2_at(std::size_t point) const;
  ScalarField norm2() const;
  ScalarField norm() const;

 private:
  GridSpec spec_;
  std::vector<std::vector<double>> components_;
};

using VectorField = SymTensorField<1>;
using SymMatrixField = SymTensorField<2>;
using SymTensor3Field = SymTensorField<3>;
using SymTensor4Field = SymTensorField<4>;

extern template class SymTensorField<1>;
extern template class SymTensorField<2>;
extern template class SymTensorField<3>;
extern template class SymTensorField<4>;

/// Small dense symmetric matrix at one point (n <= 3).
struct SymMat {
  int n = 0;
  std::array<std::array<double, kMaxDim>, kMaxDim> a{};

  static SymMat zero(int n);
  static SymMat identity(int n);
  double operator()(int i, int j) const { return a[i][j]; }
  double& operator()(int i, int j) { return a[i][j]; }
};

/// Gathers the symmetric matrix stored in a SymMatrixField at one point.
SymMat matrix_at(const SymMatrixField& m, std::size_t point);

}  // namespace lmcf
