#include "lmcf/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <complex>

namespace lmcf {
namespace {

std::array<double, kMaxDim> jacobi_eigenvalues(SymMat m) {
  constexpr double kTol = 1e-13;
  constexpr int kMaxSweeps = 30;
  const int n = m.n;
  double scale = 0.0;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) scale = std::max(scale, std::abs(m.a[i][j]));

  for (int sweep = 0; sweep < kMaxSweeps; ++sweep) {
    double off = 0.0;
    for (int i = 0; i < n; ++i)
      for (int j = i + 1; j < n; ++j) off = std::max(off, std::abs(m.a[i][j]));
    if (off <= kTol * scale || off == 0.0) break;

    for (int p = 0; p < n; ++p) {
      for (int q = p + 1; q < n; ++q) {
        const double apq = m.a[p][q];
        if (apq == 0.0) continue;
        const double theta = (m.a[q][q] - m.a[p][p]) / (2.0 * apq);
        const double t = (theta >= 0.0 ? 1.0 : -1.0) /
                         (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        for (int k = 0; k < n; ++k) {
          const double akp = m.a[k][p];
          const double akq = m.a[k][q];
          m.a[k][p] = c * akp - s * akq;
          m.a[k][q] = s * akp + c * akq;
        }
        for (int k = 0; k < n; ++k) {
          const double apk = m.a[p][k];
          const double aqk = m.a[q][k];
          m.a[p][k] = c * apk - s * aqk;
          m.a[q][k] = s * apk + c * aqk;
        }
      }
    }
  }
  std::array<double, kMaxDim> ev{};
  for (int i = 0; i < n; ++i) ev[i] = m.a[i][i];
  std::sort(ev.begin(), ev.begin() + n);
  return ev;
}

double determinant(const SymMat& m) {
  switch (m.n) {
    case 1: return m.a[0][0];
    case 2: return m.a[0][0] * m.a[1][1] - m.a[0][1] * m.a[1][0];
    default:
      return m.a[0][0] * (m.a[1][1] * m.a[2][2] - m.a[1][2] * m.a[2][1]) -
             m.a[0][1] * (m.a[1][0] * m.a[2][2] - m.a[1][2] * m.a[2][0]) +
             m.a[0][2] * (m.a[1][0] * m.a[2][1] - m.a[1][1] * m.a[2][0]);
  }
}

SymMat inverse(const SymMat& m, double det) {
  SymMat r = SymMat::zero(m.n);
  switch (m.n) {
    case 1:
      r.a[0][0] = 1.0 / m.a[0][0];
      break;
    case 2:
      r.a[0][0] = m.a[1][1] / det;
      r.a[1][1] = m.a[0][0] / det;
      r.a[0][1] = r.a[1][0] = -m.a[0][1] / det;
      break;
    default:
      for (int i = 0; i < 3; ++i) {
        for (int j = 0; j < 3; ++j) {
          // Cofactor of (j, i).
          const int r0 = (j + 1) % 3, r1 = (j + 2) % 3;
          const int c0 = (i + 1) % 3, c1 = (i + 2) % 3;
          r.a[i][j] = (m.a[r0][c0] * m.a[r1][c1] - m.a[r0][c1] * m.a[r1][c0]) / det;
        }
      }
  }
  return r;
}

SymMat square_plus_identity(const SymMat& q) {
  SymMat mu = SymMat::identity(q.n);
  for (int i = 0; i < q.n; ++i)
    for (int j = 0; j < q.n; ++j)
      for (int k = 0; k < q.n; ++k) mu.a[i][j] += q.a[i][k] * q.a[k][j];
  return mu;
}

SymMatrixField pack(const GridSpec& spec, const std::vector<SymMat>& mats) {
  const auto& t = SymIndexTable::get(spec.dim(), 2);
  std::vector<std::vector<double>> comps(t.indices.size(),
                                         std::vector<double>(spec.point_count()));
  for (std::size_t c = 0; c < t.indices.size(); ++c) {
    const int i = t.indices[c][0], j = t.indices[c][1];
    for (std::size_t p = 0; p < mats.size(); ++p) comps[c][p] = mats[p].a[i][j];
  }
  return {spec, std::move(comps)};
}

}  // namespace

std::array<double, kMaxDim> symmetric_eigenvalues(const SymMat& q) {
  std::array<double, kMaxDim> ev{};
  if (q.n == 1) {
    ev[0] = q.a[0][0];
  } else if (q.n == 2) {
    const double a = q.a[0][0], b = q.a[0][1], c = q.a[1][1];
    const double m = 0.5 * (a + c);
    const double d = std::hypot(0.5 * (a - c), b);
    const double det = a * c - b * b;
    // The larger-magnitude root is formed without cancellation; the other
    // comes from the determinant. Symmetric under q -> -q.
    if (m >= 0.0) {
      const double big = m + d;
      ev[1] = big;
      ev[0] = big != 0.0 ? det / big : 0.0;
    } else {
      const double big = m - d;
      ev[0] = big;
      ev[1] = det / big;
    }
    if (ev[0] > ev[1]) std::swap(ev[0], ev[1]);
  } else {
    ev = jacobi_eigenvalues(q);
  }
  return ev;
}

double angle_at(const SymMat& q) {
  auto ev = symmetric_eigenvalues(q);
  // Summing in order of magnitude makes the result exactly odd in q.
  std::sort(ev.begin(), ev.begin() + q.n, [](double x, double y) {
    const double ax = std::abs(x), ay = std::abs(y);
    return ax != ay ? ax < ay : x < y;
  });
  double theta = 0.0;
  for (int i = 0; i < q.n; ++i) theta += std::atan(ev[i]);
  return theta;
}

AngleOracleResult angle_oracle(const SymMat& q) {
  using cplx = std::complex<double>;
  const int n = q.n;
  std::array<std::array<cplx, kMaxDim>, kMaxDim> m{};
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) m[i][j] = cplx(i == j ? 1.0 : 0.0, q.a[i][j]);
  cplx det;
  if (n == 1) {
    det = m[0][0];
  } else if (n == 2) {
    det = m[0][0] * m[1][1] - m[0][1] * m[1][0];
  } else {
    det = m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) -
          m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0]) +
          m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0]);
  }
  return {std::arg(det), det.real() > 0.0};
}

InducedMetricField induced_metric(const SymMatrixField& q) {
  const GridSpec& spec = q.spec();
  const std::size_t np = spec.point_count();
  std::vector<SymMat> mu(np), mu_inv(np);
  std::vector<double> sqrt_det(np);
  for (std::size_t p = 0; p < np; ++p) {
    const SymMat qp = matrix_at(q, p);
    mu[p] = square_plus_identity(qp);
    const double det = determinant(mu[p]);
    mu_inv[p] = inverse(mu[p], det);
    sqrt_det[p] = std::sqrt(det);
  }
  return {pack(spec, mu), pack(spec, mu_inv), ScalarField(spec, std::move(sqrt_det))};
}

AngleField lagrangian_angle(const SymMatrixField& q) {
  std::vector<double> theta(q.spec().point_count());
  for (std::size_t p = 0; p < theta.size(); ++p) theta[p] = angle_at(matrix_at(q, p));
  return {ScalarField(q.spec(), std::move(theta))};
}

VectorField mean_curvature_one_form(const ScalarField& u, double kappa, Scheme scheme) {
  const auto q = derivative<2>(u, scheme);
  const auto theta = lagrangian_angle(q).theta;
  std::vector<double> potential(u.size());
  for (std::size_t p = 0; p < potential.size(); ++p) potential[p] = -(theta[p] + kappa * u[p]);
  return derivative<1>(ScalarField(u.spec(), std::move(potential)), scheme);
}

ScalarField trace_hessian(const ScalarField& f, const InducedMetricField& metric, Scheme scheme) {
  require_same_grid(f.spec(), metric.mu.spec());
  const auto hess = derivative<2>(f, scheme);
  const auto& t = hess.table();
  std::vector<double> out(f.size(), 0.0);
  for (int c = 0; c < hess.component_count(); ++c) {
    const double mult = t.multiplicity[c];
    const auto h = hess.component(c);
    const auto mi = metric.mu_inv.component(c);
    for (std::size_t p = 0; p < out.size(); ++p) out[p] += mult * mi[p] * h[p];
  }
  return {f.spec(), std::move(out)};
}

ScalarField metric_pairing(const VectorField& a, const VectorField& b,
                           const InducedMetricField& metric) {
  require_same_grid(a.spec(), b.spec());
  require_same_grid(a.spec(), metric.mu.spec());
  const int n = a.spec().dim();
  std::vector<double> out(a.spec().point_count(), 0.0);
  for (std::size_t p = 0; p < out.size(); ++p) {
    double s = 0.0;
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        s += metric.mu_inv.at(p, {i, j}) * a.component(i)[p] * b.component(j)[p];
    out[p] = s;
  }
  return {a.spec(), std::move(out)};
}

ScalarField laplace_beltrami(const ScalarField& f, const InducedMetricField& metric,
                             LaplaceRoute route, Scheme scheme) {
  require_same_grid(f.spec(), metric.mu.spec());
  const GridSpec& spec = f.spec();
  const int n = spec.dim();
  const std::size_t np = spec.point_count();

  if (route == LaplaceRoute::divergence) {
    const auto df = derivative<1>(f, scheme);
    std::vector<double> result(np, 0.0);
    for (int i = 0; i < n; ++i) {
      std::vector<double> flux(np, 0.0);
      for (std::size_t p = 0; p < np; ++p) {
        double s = 0.0;
        for (int j = 0; j < n; ++j) s += metric.mu_inv.at(p, {i, j}) * df.component(j)[p];
        flux[p] = metric.sqrt_det[p] * s;
      }
      const auto div = partial(ScalarField(spec, std::move(flux)), i, scheme);
      for (std::size_t p = 0; p < np; ++p) result[p] += div[p];
    }
    for (std::size_t p = 0; p < np; ++p) result[p] /= metric.sqrt_det[p];
    return {spec, std::move(result)};
  }

  // Christoffel route: Gamma^k_ij = 1/2 mu^{kl}(d_i mu_jl + d_j mu_il - d_l mu_ij).
  const auto df = derivative<1>(f, scheme);
  const auto hess = derivative<2>(f, scheme);
  const auto& t2 = metric.mu.table();
  // dmu[c][l] = d_l of the c-th stored component of mu.
  std::vector<std::vector<ScalarField>> dmu(t2.indices.size());
  for (std::size_t c = 0; c < t2.indices.size(); ++c) {
    const auto grad = derivative<1>(metric.mu.component_field(static_cast<int>(c)), scheme);
    for (int l = 0; l < n; ++l) dmu[c].push_back(grad.component_field(l));
  }
  auto dmu_at = [&](std::size_t p, int i, int j, int l) {
    return dmu[t2.lookup({i, j})][l][p];
  };

  std::vector<double> result(np, 0.0);
  for (std::size_t p = 0; p < np; ++p) {
    // Contract Gamma with mu^{ij} first: g^k = mu^{ij} Gamma^k_ij.
    std::array<double, kMaxDim> lower{};  // mu^{ij} [d_i mu_jl + d_j mu_il - d_l mu_ij] / 2
    for (int l = 0; l < n; ++l) {
      double s = 0.0;
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
          s += metric.mu_inv.at(p, {i, j}) *
               (dmu_at(p, j, l, i) + dmu_at(p, i, l, j) - dmu_at(p, i, j, l));
      lower[l] = 0.5 * s;
    }
    double s = 0.0;
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) s += metric.mu_inv.at(p, {i, j}) * hess.at(p, {i, j});
    for (int k = 0; k < n; ++k) {
      double gk = 0.0;
      for (int l = 0; l < n; ++l) gk += metric.mu_inv.at(p, {k, l}) * lower[l];
      s -= gk * df.component(k)[p];
    }
    result[p] = s;
  }
  return {spec, std::move(result)};
}

double excess_volume(const SymMatrixField& q) {
  std::vector<double> density(q.spec().point_count());
  for (std::size_t p = 0; p < density.size(); ++p) {
    const SymMat qp = matrix_at(q, p);
    const auto ev = symmetric_eigenvalues(qp);
    // prod(1 + lambda_i^2) - 1 accumulated with positive terms only.
    double det_minus_one = 0.0;
    for (int i = 0; i < qp.n; ++i) {
      const double x = ev[i] * ev[i];
      det_minus_one += x + det_minus_one * x;
    }
    density[p] = det_minus_one / (std::sqrt(1.0 + det_minus_one) + 1.0);
  }
  return pairwise_sum(density) * q.spec().cell_volume();
}

double volume(const InducedMetricField& metric) {
  return l2_pairing(metric.sqrt_det, ScalarField::constant(metric.sqrt_det.spec(), 1.0));
}

}  // namespace lmcf
