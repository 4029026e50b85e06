#pragma once

#include <array>

#include "lmcf/calculus.hpp"
#include "lmcf/field.hpp"

namespace lmcf {

// Geometry of the graph of du inside T*T^n with the flat structure. Writing
// Q = D^2 u, the induced metric is mu = I + Q^2 and the Lagrangian angle is the
// sum of arctangents of the eigenvalues of Q.

/// Eigenvalues of a symmetric matrix, ascending; entries past n are zero.
/// Closed form for n <= 2, cyclic Jacobi for n = 3.
std::array<double, kMaxDim> symmetric_eigenvalues(const SymMat& q);

/// Lagrangian angle at one point: sum of arctan of the eigenvalues of Q.
/// Continuous in Q everywhere and odd under Q -> -Q.
double angle_at(const SymMat& q);

struct AngleOracleResult {
  double angle;
  /// False when Re det(I + iQ) <= 0: the principal branch no longer tracks the
  /// arctan sum and the caller must not compare.
  bool branch_valid;
};

/// Independent route to the angle: arg det(I + iQ), principal branch.
AngleOracleResult angle_oracle(const SymMat& q);

struct InducedMetricField {
  SymMatrixField mu;
  SymMatrixField mu_inv;
  ScalarField sqrt_det;
};

struct AngleField {
  ScalarField theta;
};

/// mu = I + Q^2 with its inverse and volume density.
InducedMetricField induced_metric(const SymMatrixField& q);

AngleField lagrangian_angle(const SymMatrixField& q);

/// alpha = -d(theta(D^2 u) + kappa u). Any kappa is accepted.
VectorField mean_curvature_one_form(const ScalarField& u, double kappa,
                                    Scheme scheme = Scheme::spectral);

enum class LaplaceRoute { divergence, christoffel };

/// Laplace-Beltrami operator of mu. The divergence route is
/// (1/sqrt det mu) d_i(sqrt det mu mu^{ij} d_j f); the Christoffel route is
/// mu^{ij}(d_i d_j f - Gamma^k_ij d_k f), Gamma computed from derivatives of mu.
ScalarField laplace_beltrami(const ScalarField& f, const InducedMetricField& metric,
                             LaplaceRoute route = LaplaceRoute::divergence,
                             Scheme scheme = Scheme::spectral);

/// tr_mu(Hess f) = mu^{ij} d_i d_j f.
ScalarField trace_hessian(const ScalarField& f, const InducedMetricField& metric,
                          Scheme scheme = Scheme::spectral);

/// Pointwise mu^{ij} a_i b_j.
ScalarField metric_pairing(const VectorField& a, const VectorField& b,
                           const InducedMetricField& metric);

/// Riemannian volume of the graph.
double volume(const InducedMetricField& metric);

/// volume minus the flat volume, from sqrt(det(I + Q^2)) - 1 evaluated through
/// the eigenvalues of Q so that no cancellation occurs for small Q.
double excess_volume(const SymMatrixField& q);

}  // namespace lmcf
