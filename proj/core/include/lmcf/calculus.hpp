#pragma once

#include <optional>
#include <span>
#include <string_view>
#include <variant>

#include "lmcf/field.hpp"

namespace lmcf {

/// Differentiation scheme. The flat torus has vanishing Christoffel symbols in
/// Cartesian coordinates, so every covariant derivative here is a partial one.
enum class Scheme { spectral, central4 };

std::string_view to_string(Scheme s);
/// Accepts "spectral" or "central4"; throws InvalidArgumentError otherwise.
Scheme parse_scheme(std::string_view text);

/// All distinct partial derivatives of order Rank.
template <int Rank>
SymTensorField<Rank> derivative(const ScalarField& f, Scheme scheme = Scheme::spectral);

using AnyDerivative =
    std::variant<VectorField, SymMatrixField, SymTensor3Field, SymTensor4Field>;

/// Runtime-order front end; throws UnsupportedOrderError unless 1 <= order <= 4.
AnyDerivative derivative(const ScalarField& f, int order, Scheme scheme = Scheme::spectral);

/// Derivatives of orders 1..max_order sharing one forward transform.
struct Jets {
  VectorField du;
  SymMatrixField d2u;
  std::optional<SymTensor3Field> d3u;
  std::optional<SymTensor4Field> d4u;
};

Jets compute_jets(const ScalarField& f, int max_order, Scheme scheme = Scheme::spectral);

/// Single partial derivative of arbitrary per-axis orders (each 0..4).
ScalarField partial(const ScalarField& f, const std::array<int, kMaxDim>& orders,
                    Scheme scheme = Scheme::spectral);
ScalarField partial(const ScalarField& f, int axis, Scheme scheme = Scheme::spectral);

/// Trigonometric interpolant of f sampled on a finer grid with the same
/// dimension and periods. Throws SpecMismatchError otherwise.
ScalarField prolongate(const ScalarField& f, const GridSpec& fine);

/// Sum of unmixed second partials.
ScalarField laplacian_flat(const ScalarField& f, Scheme scheme = Scheme::spectral);

double sup_norm(const ScalarField& f);
template <int Rank>
double sup_norm(const SymTensorField<Rank>& t);

/// Pairwise-tree sum; the association order depends only on the length.
double pairwise_sum(std::span<const double> v);

/// Sum over grid of f * g * weight * cell volume. Throws SpecMismatchError.
double l2_pairing(const ScalarField& f, const ScalarField& g,
                  const ScalarField* weight = nullptr);

}  // namespace lmcf
