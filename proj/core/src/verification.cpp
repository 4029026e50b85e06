#include "lmcf/verification.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <ostream>
#include <random>

namespace lmcf {
namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

SymMat random_symmetric(int n, double max_norm, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  std::uniform_real_distribution<double> radius(0.0, 1.0);
  SymMat q = SymMat::zero(n);
  double frob2 = 0.0;
  for (int i = 0; i < n; ++i) {
    for (int j = i; j < n; ++j) {
      q.a[i][j] = q.a[j][i] = unit(rng);
      frob2 += (i == j ? 1.0 : 2.0) * q.a[i][j] * q.a[i][j];
    }
  }
  const double s = frob2 > 0.0 ? max_norm * radius(rng) / std::sqrt(frob2) : 0.0;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) q.a[i][j] *= s;
  return q;
}

SymMat inverse_metric_at(const SymMat& q) {
  // Gauss-Jordan, independent of the closed forms used by the metric fields.
  const int n = std::clamp(q.n, 1, kMaxDim);
  SymMat mu = SymMat::identity(n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k) mu.a[i][j] += q.a[i][k] * q.a[k][j];
  std::array<std::array<double, 2 * kMaxDim>, kMaxDim> aug{};
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) aug[i][j] = mu.a[i][j];
    aug[i][n + i] = 1.0;
  }
  for (int c = 0; c < n; ++c) {
    const double pivot = aug[c][c];
    for (int j = 0; j < 2 * n; ++j) aug[c][j] /= pivot;
    for (int r = 0; r < n; ++r) {
      if (r == c) continue;
      const double f = aug[r][c];
      for (int j = 0; j < 2 * n; ++j) aug[r][j] -= f * aug[c][j];
    }
  }
  SymMat inv = SymMat::zero(n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) inv.a[i][j] = aug[i][n + j];
  return inv;
}

double max_of(const ScalarField& f) {
  return *std::max_element(f.values().begin(), f.values().end());
}

double sup_of(const std::vector<double>& v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::abs(x));
  return m;
}

ScalarField scaled(const ScalarField& f, double s) { return s * f; }

}  // namespace

void write_report(std::ostream& out, const ResidualReport& r) {
  char buf[512];
  for (const auto& s : r.samples) {
    const double ratio = s.bound != 0.0 ? s.residual / s.bound : kNaN;
    std::snprintf(buf, sizeof buf, "%s,%.17g,%.17g,%.17g,%.17g\n", r.name.c_str(), s.x,
                  s.residual, s.bound, ratio);
    out << buf;
  }
  std::snprintf(buf, sizeof buf, "%s,%.17g,%.17g,%s\n", r.name.c_str(), r.fitted_constant,
                r.fitted_order, r.pass ? "true" : "false");
  out << buf;
}

double loglog_slope(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2) {
    throw InvalidArgumentError("log-log fit needs at least two matching points");
  }
  const double n = static_cast<double>(x.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double lx = std::log(x[i]), ly = std::log(y[i]);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

// --- pointwise geometry ----------------------------------------------------

ResidualReport check_angle_oracle(int dim, int count, double max_norm, std::uint64_t seed,
                                  double tolerance) {
  ResidualReport r;
  r.name = "angle_oracle_n" + std::to_string(dim);
  std::mt19937_64 rng(seed);
  r.pass = true;
  int skipped = 0;
  for (int k = 0; k < count; ++k) {
    const SymMat q = random_symmetric(dim, max_norm, rng);
    const auto oracle = angle_oracle(q);
    if (!oracle.branch_valid) {
      ++skipped;
      continue;
    }
    const double diff = std::abs(angle_at(q) - oracle.angle);
    r.samples.push_back({static_cast<double>(k), diff, tolerance});
    r.fitted_constant = std::max(r.fitted_constant, diff);
    if (!(diff <= tolerance)) r.pass = false;
  }
  r.note = "skipped " + std::to_string(skipped) + " off-branch samples";
  return r;
}

ResidualReport check_angle_gradient(int dim, int count, double max_norm, std::uint64_t seed,
                                    double step, double tolerance) {
  ResidualReport r;
  r.name = "angle_gradient_n" + std::to_string(dim);
  std::mt19937_64 rng(seed);
  r.pass = true;
  for (int k = 0; k < count; ++k) {
    const SymMat q = random_symmetric(dim, max_norm, rng);
    const SymMat inv = inverse_metric_at(q);
    double err2 = 0.0, ref2 = 0.0;
    for (int i = 0; i < dim; ++i) {
      for (int j = i; j < dim; ++j) {
        SymMat plus = q, minus = q;
        plus.a[i][j] += step;
        minus.a[i][j] -= step;
        if (i != j) {
          plus.a[j][i] += step;
          minus.a[j][i] -= step;
        }
        const double fd = (angle_at(plus) - angle_at(minus)) / (2.0 * step);
        const double exact = (i == j ? 1.0 : 2.0) * inv.a[i][j];
        const double w = i == j ? 1.0 : 0.5;  // back to per-entry derivative
        err2 += (i == j ? 1.0 : 2.0) * (w * (fd - exact)) * (w * (fd - exact));
        ref2 += (i == j ? 1.0 : 2.0) * inv.a[i][j] * inv.a[i][j];
      }
    }
    const double rel = std::sqrt(err2 / ref2);
    r.samples.push_back({static_cast<double>(k), rel, tolerance});
    r.fitted_constant = std::max(r.fitted_constant, rel);
    if (!(rel <= tolerance)) r.pass = false;
  }
  r.note = "relative Frobenius error of the finite-difference gradient";
  return r;
}

ResidualReport check_orthogonal_invariance(int count, std::uint64_t seed, double tolerance) {
  ResidualReport r;
  r.name = "angle_rotation_n2";
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> angle(0.0, 2.0 * std::numbers::pi);
  r.pass = true;
  for (int k = 0; k < count; ++k) {
    const SymMat q = random_symmetric(2, 2.0, rng);
    const double phi = angle(rng);
    const double c = std::cos(phi), s = std::sin(phi);
    const double rot[2][2] = {{c, -s}, {s, c}};
    SymMat rq = SymMat::zero(2);
    for (int i = 0; i < 2; ++i)
      for (int j = 0; j < 2; ++j)
        for (int a = 0; a < 2; ++a)
          for (int b = 0; b < 2; ++b) rq.a[i][j] += rot[i][a] * q.a[a][b] * rot[j][b];
    rq.a[1][0] = rq.a[0][1];
    const double diff = std::abs(angle_at(rq) - angle_at(q));
    r.samples.push_back({static_cast<double>(k), diff, tolerance});
    r.fitted_constant = std::max(r.fitted_constant, diff);
    if (!(diff <= tolerance)) r.pass = false;
  }
  return r;
}

ResidualReport check_laplace_routes(const ScalarField& u, const ScalarField& f, Scheme scheme,
                                    double tolerance) {
  require_same_grid(u.spec(), f.spec());
  ResidualReport r;
  r.name = "laplace_routes_n" + std::to_string(u.spec().dim());
  const auto metric = induced_metric(derivative<2>(u, scheme));
  const auto div = laplace_beltrami(f, metric, LaplaceRoute::divergence, scheme);
  const auto chr = laplace_beltrami(f, metric, LaplaceRoute::christoffel, scheme);
  const double scale = sup_norm(div);
  const double rel = scale > 0.0 ? sup_norm(div - chr) / scale : sup_norm(div - chr);
  r.samples.push_back({sup_norm(derivative<2>(u, scheme)), rel, tolerance});
  r.fitted_constant = rel;
  r.pass = rel <= tolerance;
  r.note = "x = sup|D^2u|; residual = relative sup difference";
  return r;
}

// --- expansion estimates ---------------------------------------------------

ScalarField normalize_base(const ScalarField& base, Scheme scheme) {
  const auto jets = compute_jets(base, 2, scheme);
  const double size = std::max({1.0, sup_norm(jets.du), sup_norm(jets.d2u)});
  return scaled(base, 1.0 / size);
}

ResidualReport check_angle_expansion(const std::vector<ScalarField>& bases,
                                     const std::vector<double>& amplitudes, Scheme scheme) {
  if (amplitudes.size() < 3) {
    throw InvalidArgumentError("angle expansion check needs at least 3 amplitudes");
  }
  ResidualReport r;
  r.name = "angle_expansion";
  double order = std::numeric_limits<double>::infinity();
  for (const auto& raw : bases) {
    const ScalarField base = normalize_base(raw, scheme);
    std::vector<double> eps, res;
    for (double e : amplitudes) {
      const ScalarField u = scaled(base, e);
      const auto jets = compute_jets(u, 2, scheme);
      const auto theta = lagrangian_angle(jets.d2u).theta;
      const auto lap = laplacian_flat(u, scheme);
      const double R = sup_norm(theta - lap);
      double B = 0.0;
      for (std::size_t p = 0; p < u.size(); ++p) {
        B = std::max(B, jets.du.norm2_at(p) + jets.d2u.norm2_at(p));
      }
      r.samples.push_back({e, R, B});
      if (B > 0.0) r.fitted_constant = std::max(r.fitted_constant, R / B);
      if (R > 0.0) {
        eps.push_back(e);
        res.push_back(R);
      }
    }
    if (res.size() == amplitudes.size()) order = std::min(order, loglog_slope(eps, res));
  }
  r.fitted_order = order;
  r.pass = order >= 2.0 - 0.1;
  for (const auto& s : r.samples) {
    if (s.residual > r.fitted_constant * s.bound * (1.0 + 1e-12) && s.residual > 0.0) r.pass = false;
  }
  r.note = "residual sup|theta - Laplacian u|; bound sup(|du|^2 + |D^2u|^2)";
  return r;
}

ResidualReport check_laplacian_difference(const ScalarField& u_raw, const ScalarField& f,
                                          const std::vector<double>& amplitudes, Scheme scheme) {
  require_same_grid(u_raw.spec(), f.spec());
  if (amplitudes.size() < 2) {
    throw InvalidArgumentError("Laplacian difference check needs at least 2 amplitudes");
  }
  ResidualReport r;
  r.name = "laplacian_difference";
  const ScalarField base = normalize_base(u_raw, scheme);
  const double sup_df = sup_norm(derivative<1>(f, scheme));
  std::vector<double> eps, res;
  for (double e : amplitudes) {
    const ScalarField u = scaled(base, e);
    const auto jets = compute_jets(u, 3, scheme);
    const auto metric = induced_metric(jets.d2u);
    const double R =
        sup_norm(laplace_beltrami(f, metric, LaplaceRoute::divergence, scheme) -
                 trace_hessian(f, metric, scheme));
    const double B =
        sup_df * (sup_norm(*jets.d3u) + sup_norm(jets.d2u) + sup_norm(jets.du));
    r.samples.push_back({e, R, B});
    if (B > 0.0) r.fitted_constant = std::max(r.fitted_constant, R / B);
    if (R > 0.0) {
      eps.push_back(e);
      res.push_back(R);
    }
  }
  r.pass = true;
  if (res.size() == amplitudes.size()) {
    r.fitted_order = loglog_slope(eps, res);
    r.pass = r.fitted_order >= 1.0 - 0.1;
  } else {
    r.fitted_order = std::numeric_limits<double>::infinity();
  }
  r.note = "residual sup|Delta_mu f - tr_mu Hess f|; bound sup|df|(|D^3u|+|D^2u|+|du|)";
  return r;
}

// --- evolution inequalities ------------------------------------------------

std::string to_string(Inequality which) {
  switch (which) {
    case Inequality::u2: return "u2";
    case Inequality::du2: return "du2";
    case Inequality::d2u2: return "d2u2";
    case Inequality::d3u2: return "d3u2";
    case Inequality::psi: return "psi";
  }
  return "unknown";
}

Trajectory record_trajectory(const ScalarField& u0, const FlowConfig& cfg,
                             const std::vector<double>& sample_times) {
  cfg.validate();
  require_same_grid(u0.spec(), cfg.grid);
  const double dt = time_step(cfg);
  Trajectory out;
  FlowState prev = FlowState::at(0.0, u0, cfg.scheme);
  FlowState cur = step_rk4(prev, cfg, dt);
  long cur_index = 1;
  for (double ts : sample_times) {
    const long target = std::max(1L, std::lround(ts / dt));
    if (target < cur_index) {
      throw InvalidArgumentError("sample times must be increasing and at least one step apart");
    }
    while (cur_index < target) {
      prev = std::move(cur);
      cur = step_rk4(prev, cfg, dt);
      ++cur_index;
    }
    FlowState next = step_rk4(cur, cfg, dt);
    out.push_back({prev, cur, next});
    prev = std::move(cur);
    cur = std::move(next);
    ++cur_index;
  }
  return out;
}

Trajectory prolongate(const Trajectory& trajectory, const GridSpec& fine, Scheme scheme) {
  auto lift = [&](const FlowState& s) {
    return FlowState::at(s.t, prolongate(s.u, fine), scheme, s.last_dt);
  };
  Trajectory out;
  out.reserve(trajectory.size());
  for (const auto& tri : trajectory) out.push_back({lift(tri.prev), lift(tri.cur), lift(tri.next)});
  return out;
}

namespace {

double max_psi(const FlowState& s, const FlowConfig& cfg) {
  return max_of(psi(s.u, s.du, s.d2u, cfg.c0, cfg.c1));
}

std::vector<double> quantity(Inequality which, const FlowState& s, const FlowConfig& cfg) {
  const std::size_t np = s.u.size();
  std::vector<double> out(np);
  for (std::size_t p = 0; p < np; ++p) {
    switch (which) {
      case Inequality::u2: out[p] = s.u[p] * s.u[p]; break;
      case Inequality::du2: out[p] = s.du.norm2_at(p); break;
      case Inequality::d2u2: out[p] = s.d2u.norm2_at(p); break;
      case Inequality::d3u2: out[p] = s.d3u.norm2_at(p); break;
      case Inequality::psi:
        out[p] = cfg.c0 * s.u[p] * s.u[p] + cfg.c1 * s.du.norm2_at(p) + s.d2u.norm2_at(p);
        break;
    }
  }
  return out;
}

}  // namespace

ResidualReport check_evolution_inequality(Inequality which, const Trajectory& trajectory,
                                          const FlowConfig& cfg) {
  ResidualReport r;
  r.name = "evolution_" + to_string(which);
  r.pass = true;
  const double limit = cfg.eps1 * cfg.eps1;
  double c_fit = 0.0;

  for (const auto& tri : trajectory) {
    for (const FlowState* s : {&tri.prev, &tri.cur, &tri.next}) {
      if (max_psi(*s, cfg) >= limit) {
        throw RegionViolationError("trajectory state at t = " + std::to_string(s->t) +
                                   " has max psi >= eps1^2");
      }
    }
    const FlowState& c = tri.cur;
    const GridSpec& spec = c.u.spec();
    const std::size_t np = spec.point_count();
    const double two_dt = tri.next.t - tri.prev.t;

    const auto phi_prev = quantity(which, tri.prev, cfg);
    const auto phi_next = quantity(which, tri.next, cfg);
    const ScalarField phi_cur(spec, quantity(which, c, cfg));
    const auto metric = induced_metric(c.d2u);
    const auto lap = laplace_beltrami(phi_cur, metric, LaplaceRoute::divergence, cfg.scheme);
    std::optional<SymTensor4Field> d4u;
    if (which == Inequality::d3u2) d4u = derivative<4>(c.u, cfg.scheme);

    std::vector<double> dphi(np), main(np), bracket(np), excess(np);
    for (std::size_t p = 0; p < np; ++p) {
      dphi[p] = (phi_next[p] - phi_prev[p]) / two_dt;
      const double u = c.u[p];
      const double du2 = c.du.norm2_at(p), d2u2 = c.d2u.norm2_at(p), d3u2 = c.d3u.norm2_at(p);
      const double du = std::sqrt(du2), d2u = std::sqrt(d2u2), d3u = std::sqrt(d3u2);
      switch (which) {
        case Inequality::u2:
          main[p] = -du2 + 2.0 * cfg.kappa * u * u;
          bracket[p] = std::abs(u) * (d3u2 + d2u2 + du2);
          break;
        case Inequality::du2:
          main[p] = -0.5 * d2u2;
          bracket[p] = d3u * du + du2;
          break;
        case Inequality::d2u2:
          main[p] = -0.5 * d3u2;
          bracket[p] = d3u2 * d2u + d2u2 + du2;
          break;
        case Inequality::d3u2:
          main[p] = -0.5 * d4u->norm2_at(p);
          bracket[p] = d3u2 * d3u2 + d3u2 + d2u2 + du2;
          break;
        case Inequality::psi:
          main[p] = 2.0 * cfg.c0 * cfg.kappa * u * u;
          bracket[p] = 0.0;
          break;
      }
      excess[p] = dphi[p] - lap[p] - main[p];
    }
    const double scale = std::max({sup_of(dphi), sup_norm(lap), sup_of(main)});
    const double slack = 1e-6 * scale;
    const double worst = *std::max_element(excess.begin(), excess.end());

    if (which == Inequality::psi) {
      r.samples.push_back({c.t, worst, slack});
      if (worst > slack) r.pass = false;
      continue;
    }
    const double bmax = *std::max_element(bracket.begin(), bracket.end());
    const double threshold = 1e-8 * bmax;
    for (std::size_t p = 0; p < np; ++p) {
      if (bracket[p] > threshold && bracket[p] > 0.0) {
        c_fit = std::max(c_fit, (excess[p] - slack) / bracket[p]);
      } else if (excess[p] > slack) {
        r.pass = false;  // no constant can absorb a positive excess here
      }
    }
    r.samples.push_back({c.t, worst, bmax});
  }
  r.fitted_constant = c_fit;
  r.note = which == Inequality::psi
               ? "residual max(LHS - 2 c0 kappa u^2); bound 1e-6 scale"
               : "residual max(LHS - leading term); bound max bracket; c = max ratio";
  return r;
}

ResidualReport compare_resolutions(const ResidualReport& coarse, const ResidualReport& fine,
                                   double floor) {
  ResidualReport r;
  r.name = coarse.name + "_resolution";
  const double a = std::max(coarse.fitted_constant, floor);
  const double b = std::max(fine.fitted_constant, floor);
  const double factor = std::max(a, b) / std::min(a, b);
  r.samples.push_back({0.0, coarse.fitted_constant, fine.fitted_constant});
  r.fitted_constant = factor;
  r.pass = factor < 2.0 && coarse.pass && fine.pass;
  r.note = "residual = coarse c, bound = fine c, fitted = change factor";
  return r;
}

ResidualReport check_log_d3u_monotone(const std::vector<FlowState>& samples, double K,
                                const FlowConfig& cfg, double slack) {
  if (!(K >= 1.0)) throw InvalidArgumentError("psi weight K must be >= 1");
  ResidualReport r;
  r.name = "log_d3u_monotone";
  r.pass = true;
  double prev = kNaN;
  for (const auto& s : samples) {
    const auto ps = psi(s.u, s.du, s.d2u, cfg.c0, cfg.c1);
    double q = -std::numeric_limits<double>::infinity();
    for (std::size_t p = 0; p < s.u.size(); ++p) {
      q = std::max(q, std::log1p(s.d3u.norm2_at(p)) + K * ps[p]);
    }
    const double bound = std::isnan(prev) ? q : prev + slack;
    r.samples.push_back({s.t, q, bound});
    if (q > bound) r.pass = false;
    prev = q;
  }
  r.fitted_constant = K;
  r.note = "residual = max(log(1+|D^3u|^2) + K psi); bound = previous + slack";
  return r;
}

ResidualReport check_psi_monotone(const std::vector<MonitorRecord>& records, double slack) {
  ResidualReport r;
  r.name = "psi_monotone";
  r.pass = true;
  for (std::size_t k = 0; k < records.size(); ++k) {
    const double bound = k == 0 ? records[k].psi_max : records[k - 1].psi_max + slack;
    r.samples.push_back({records[k].t, records[k].psi_max, bound});
    if (records[k].psi_max > bound) r.pass = false;
  }
  if (!records.empty()) r.fitted_constant = records.front().psi_max;
  r.note = "residual = psi_max; bound = previous psi_max + slack";
  return r;
}

double volume_rate(const ScalarField& u, double kappa, Scheme scheme) {
  const auto q = derivative<2>(u, scheme);
  const auto metric = induced_metric(q);
  const auto theta = lagrangian_angle(q).theta;
  const auto f = theta + kappa * u;
  const auto integrand =
      metric_pairing(derivative<1>(theta, scheme), derivative<1>(f, scheme), metric) *
      metric.sqrt_det;
  return -l2_pairing(integrand, ScalarField::constant(u.spec(), 1.0));
}

ResidualReport check_volume_lyapunov(const Trajectory& trajectory, const FlowConfig& cfg) {
  ResidualReport r;
  r.name = "volume_lyapunov";
  r.pass = true;
  constexpr double kIncreaseSlack = 1e-10;
  double worst = 0.0;
  for (const auto& tri : trajectory) {
    const double e_prev = excess_volume(tri.prev.d2u);
    const double e_cur = excess_volume(tri.cur.d2u);
    const double e_next = excess_volume(tri.next.d2u);
    const double dt = 0.5 * (tri.next.t - tri.prev.t);
    const double observed = (e_next - e_prev) / (tri.next.t - tri.prev.t);
    const double predicted = volume_rate(tri.cur.u, cfg.kappa, cfg.scheme);

    const auto theta = lagrangian_angle(tri.cur.d2u).theta;
    const auto f = theta + cfg.kappa * tri.cur.u;
    const auto f0 = f - ScalarField::constant(f.spec(), f.mean());
    const auto lap = laplacian_flat(f0, cfg.scheme);
    const double norm_f = l2_pairing(f0, f0);
    const double lambda =
        (norm_f > 0.0 ? std::sqrt(l2_pairing(lap, lap) / norm_f) : 0.0) + std::abs(cfg.kappa);
    const double tol = 5.0 * dt * dt * std::abs(predicted) * lambda * lambda;
    const double err = std::abs(observed - predicted);
    r.samples.push_back({tri.cur.t, err, tol});
    if (tol > 0.0) worst = std::max(worst, err / tol);
    if (!(err <= tol)) r.pass = false;
    if (e_cur > e_prev + kIncreaseSlack || e_next > e_cur + kIncreaseSlack) r.pass = false;
  }
  r.fitted_constant = worst;
  r.note = "residual |centred dVol/dt - predicted|; bound 5 dt^2 |rate| Lambda^2";
  return r;
}

// --- decay and second variation ---------------------------------------------

double fit_decay_rate(const std::vector<MonitorRecord>& series, MonitorQuantity which, double t1,
                      double t2) {
  std::vector<double> ts, ys;
  for (const auto& rec : series) {
    if (rec.t < t1 || rec.t > t2) continue;
    double v = 0.0;
    switch (which) {
      case MonitorQuantity::psi_max: v = rec.psi_max; break;
      case MonitorQuantity::sup_du: v = rec.max_du; break;
      case MonitorQuantity::sup_u: v = rec.max_u; break;
    }
    if (!(v > 0.0)) {
      throw NonPositiveSeriesError("non-positive value at t = " + std::to_string(rec.t) +
                                   " in decay-fit window");
    }
    ts.push_back(rec.t);
    ys.push_back(std::log(v));
  }
  if (ts.size() < 2) throw InvalidArgumentError("decay fit needs at least two samples in window");
  const double n = static_cast<double>(ts.size());
  double st = 0, sy = 0, stt = 0, sty = 0;
  for (std::size_t i = 0; i < ts.size(); ++i) {
    st += ts[i];
    sy += ys[i];
    stt += ts[i] * ts[i];
    sty += ts[i] * ys[i];
  }
  return (n * sty - st * sy) / (n * stt - st * st);
}

ResidualReport check_second_variation(const ScalarField& h, const std::vector<double>& epsilons,
                                      Scheme scheme, double tolerance) {
  if (epsilons.empty()) throw InvalidArgumentError("second variation needs step sizes");
  const auto q = derivative<2>(h, scheme);
  if (sup_norm(derivative<1>(h, scheme)) <= 1e-13 * std::max(1.0, sup_norm(h))) {
    throw DegenerateDirectionError("second variation along a constant direction");
  }
  ResidualReport r;
  r.name = "second_variation";
  const auto lap = laplacian_flat(h, scheme);
  const double target = l2_pairing(lap, lap);

  // Central second difference of Vol(eps dh). The excess volume vanishes at
  // eps = 0 and keeps the numerator free of cancellation.
  std::vector<double> s2, d;
  for (double e : epsilons) {
    const auto plus = excess_volume(derivative<2>(scaled(h, e), scheme));
    const auto minus = excess_volume(derivative<2>(scaled(h, -e), scheme));
    const double second = (plus + minus) / (e * e);
    s2.push_back(e * e);
    d.push_back(second);
    r.samples.push_back({e, second, target});
  }
  // Neville extrapolation in eps^2 to eps = 0.
  std::vector<double> p = d;
  for (std::size_t m = 1; m < p.size(); ++m) {
    for (std::size_t i = 0; i + m < p.size(); ++i) {
      p[i] = (s2[i + m] * p[i] - s2[i] * p[i + 1]) / (s2[i + m] - s2[i]);
    }
  }
  const double extrapolated = p[0];
  r.fitted_constant = extrapolated;
  if (d.size() >= 2) {
    std::vector<double> es, errs;
    for (std::size_t i = 0; i < d.size(); ++i) {
      if (d[i] != target) {
        es.push_back(epsilons[i]);
        errs.push_back(std::abs(d[i] - target));
      }
    }
    if (es.size() >= 2) r.fitted_order = loglog_slope(es, errs);
  }
  const double rel = std::abs(extrapolated - target) / std::abs(target);
  r.pass = rel <= tolerance && extrapolated >= 0.0;
  r.note = "fitted_c = extrapolated second variation; bound column = integral (Delta h)^2";
  return r;
}

ScalarField random_bandlimited(const GridSpec& grid, int max_mode, std::uint64_t seed) {
  if (max_mode < 1) throw InvalidArgumentError("band limit must be >= 1");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  const int n = grid.dim();
  struct Mode {
    std::array<int, kMaxDim> k;
    double a, b;
  };
  std::vector<Mode> modes;
  std::array<int, kMaxDim> k{};
  auto recurse = [&](auto&& self, int axis) -> void {
    if (axis == n) {
      // Keep one representative of each +-k pair: first non-zero entry positive.
      int first = 0;
      for (int a = 0; a < n; ++a) {
        if (k[a] != 0) {
          first = k[a];
          break;
        }
      }
      if (first <= 0) return;
      double k2 = 0.0;
      for (int a = 0; a < n; ++a) k2 += static_cast<double>(k[a]) * k[a];
      const double a = unit(rng) / k2;
      const double b = unit(rng) / k2;
      modes.push_back({k, a, b});
      return;
    }
    for (int v = -max_mode; v <= max_mode; ++v) {
      k[axis] = v;
      self(self, axis + 1);
    }
  };
  recurse(recurse, 0);

  auto field = ScalarField::from_function(grid, [&](const std::array<double, kMaxDim>& x) {
    double s = 0.0;
    for (const auto& m : modes) {
      double phase = 0.0;
      for (int a = 0; a < n; ++a) phase += 2.0 * std::numbers::pi * m.k[a] * x[a] / grid.period(a);
      s += m.a * std::cos(phase) + m.b * std::sin(phase);
    }
    return s;
  });
  const double sup = sup_norm(field);
  return sup > 0.0 ? scaled(field, 1.0 / sup) : field;
}

}  // namespace lmcf
