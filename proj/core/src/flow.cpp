#include "lmcf/flow.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "lmcf/geometry.hpp"

namespace lmcf {

void FlowConfig::validate() const {
  if (grid.dim() < 1) throw ConfigError("grid is not set");
  if (!std::isfinite(kappa)) throw ConfigError("kappa must be finite");
  if (!(cfl > 0.0 && cfl <= 0.5)) throw ConfigError("cfl must lie in (0, 0.5]");
  if (!(t_max > 0.0) || !std::isfinite(t_max)) throw ConfigError("t_max must be positive");
  if (!(conv_tol > 0.0)) throw ConfigError("conv_tol must be positive");
  if (!(c0 >= 1.0) || !(c1 >= 1.0)) throw ConfigError("c0 and c1 must be >= 1");
  if (!(eps1 > 0.0 && eps1 <= 1.0)) throw ConfigError("eps1 must lie in (0, 1]");
  if (checkpoint_every < 0) throw ConfigError("checkpoint_every must be >= 0");
}

double time_step(const FlowConfig& cfg) {
  const double h = cfg.grid.min_spacing();
  return cfg.cfl * h * h / (2.0 * cfg.grid.dim());
}

FlowState FlowState::at(double t, ScalarField u, Scheme scheme, double last_dt) {
  auto jets = compute_jets(u, 3, scheme);
  return {t, std::move(u), std::move(jets.du), std::move(jets.d2u), std::move(*jets.d3u),
          last_dt};
}

ScalarField rhs(const ScalarField& u, double kappa, Scheme scheme) {
  const auto theta = lagrangian_angle(derivative<2>(u, scheme)).theta;
  std::vector<double> out(u.size());
  for (std::size_t p = 0; p < out.size(); ++p) out[p] = theta[p] + kappa * u[p];
  return {u.spec(), std::move(out)};
}

namespace {

/// Wraps a stage vector, turning a non-finite entry into BlowupError carrying
/// the time and sup|u| of the state the step started from.
ScalarField checked_field(const GridSpec& spec, std::vector<double> v, double t, double sup_u) {
  for (double x : v) {
    if (!std::isfinite(x)) {
      throw BlowupError("non-finite value in Runge-Kutta stage at t = " + std::to_string(t), t,
                        sup_u);
    }
  }
  return {spec, std::move(v)};
}

}  // namespace

FlowState step_rk4(const FlowState& state, const FlowConfig& cfg) {
  return step_rk4(state, cfg, time_step(cfg));
}

FlowState step_rk4(const FlowState& state, const FlowConfig& cfg, double dt) {
  const GridSpec& spec = state.u.spec();
  const std::size_t np = spec.point_count();
  const auto u0 = state.u.values();

  auto stage_input = [&](const ScalarField& k, double w) {
    std::vector<double> v(np);
    for (std::size_t p = 0; p < np; ++p) v[p] = u0[p] + w * k[p];
    return checked_field(spec, std::move(v), state.t, sup_norm(state.u));
  };

  const ScalarField k1 = rhs(state.u, cfg.kappa, cfg.scheme);
  const ScalarField k2 = rhs(stage_input(k1, 0.5 * dt), cfg.kappa, cfg.scheme);
  const ScalarField k3 = rhs(stage_input(k2, 0.5 * dt), cfg.kappa, cfg.scheme);
  const ScalarField k4 = rhs(stage_input(k3, dt), cfg.kappa, cfg.scheme);

  std::vector<double> next(np);
  for (std::size_t p = 0; p < np; ++p) {
    next[p] = u0[p] + dt / 6.0 * (k1[p] + 2.0 * k2[p] + 2.0 * k3[p] + k4[p]);
  }
  const double t_next = state.t + dt;
  return FlowState::at(t_next, checked_field(spec, std::move(next), state.t, sup_norm(state.u)),
                       cfg.scheme, dt);
}

ScalarField psi(const ScalarField& u, const VectorField& du, const SymMatrixField& d2u,
                double c0, double c1) {
  require_same_grid(u.spec(), du.spec());
  require_same_grid(u.spec(), d2u.spec());
  std::vector<double> out(u.size());
  for (std::size_t p = 0; p < out.size(); ++p) {
    out[p] = c0 * u[p] * u[p] + c1 * du.norm2_at(p) + d2u.norm2_at(p);
  }
  return {u.spec(), std::move(out)};
}

ScalarField psi(const ScalarField& u, const FlowConfig& cfg) {
  const auto jets = compute_jets(u, 2, cfg.scheme);
  return psi(u, jets.du, jets.d2u, cfg.c0, cfg.c1);
}

MonitorRecord make_monitor_record(const FlowState& s, const FlowConfig& cfg) {
  MonitorRecord r;
  r.t = s.t;
  r.max_u = sup_norm(s.u);
  r.max_du = sup_norm(s.du);
  r.max_d2u = sup_norm(s.d2u);
  r.max_d3u = sup_norm(s.d3u);
  const auto p = psi(s.u, s.du, s.d2u, cfg.c0, cfg.c1);
  r.psi_max = *std::max_element(p.values().begin(), p.values().end());
  const auto theta = lagrangian_angle(s.d2u).theta;
  const auto [lo, hi] = std::minmax_element(theta.values().begin(), theta.values().end());
  r.theta_min = *lo;
  r.theta_max = *hi;
  r.volume = volume(induced_metric(s.d2u));
  r.dt = s.last_dt;
  return r;
}

bool is_converged(const FlowState& s, const FlowConfig& cfg) {
  if (!(sup_norm(s.du) < cfg.conv_tol && sup_norm(s.d2u) < cfg.conv_tol)) return false;
  // Constants are stationary only when kappa vanishes.
  if (cfg.kappa != 0.0 && !(sup_norm(s.u) < cfg.conv_tol)) return false;
  return true;
}

IntegrationResult integrate(const ScalarField& u0, const FlowConfig& cfg, const MonitorSink& sink) {
  require_same_grid(u0.spec(), cfg.grid);
  return integrate(FlowState::at(0.0, u0, cfg.scheme), cfg, sink);
}

IntegrationResult integrate(const FlowState& start, const FlowConfig& cfg, const MonitorSink& sink) {
  cfg.validate();
  require_same_grid(start.u.spec(), cfg.grid);
  const double dt0 = time_step(cfg);
  const double psi_limit = cfg.eps1 * cfg.eps1;

  IntegrationResult result{TimedOut{start}, 0, false};
  FlowState state = start;
  long step = 0;
  long last_emitted = -1;

  auto emit = [&] {
    if (sink && last_emitted != step) {
      sink(make_monitor_record(state, cfg), state);
      last_emitted = step;
    }
  };
  auto note_psi = [&] {
    const auto p = psi(state.u, state.du, state.d2u, cfg.c0, cfg.c1);
    if (*std::max_element(p.values().begin(), p.values().end()) >= psi_limit) {
      result.psi_left_small_data = true;
    }
  };
  auto blowup = [&](std::string reason, double t, double su, double sd) {
    result.outcome = BlowupReport{t, su, sd, std::move(reason)};
    result.steps = step;
    return result;
  };

  emit();
  note_psi();
  if (sup_norm(state.d2u) > kBlowupHessianBound) {
    return blowup("sup|D^2u| exceeds the graph-regime bound", state.t, sup_norm(state.u),
                  sup_norm(state.d2u));
  }

  while (true) {
    if (is_converged(state, cfg)) {
      emit();
      result.outcome = Converged{state};
      break;
    }
    const double remaining = cfg.t_max - state.t;
    if (remaining <= 1e-12 * dt0) {
      emit();
      result.outcome = TimedOut{state};
      break;
    }
    const double dt = std::min(dt0, remaining);
    try {
      state = step_rk4(state, cfg, dt);
    } catch (const BlowupError& e) {
      return blowup(e.what(), e.t(), e.sup_u(), INFINITY);
    }
    ++step;
    const double sd = sup_norm(state.d2u);
    if (sd > kBlowupHessianBound) {
      emit();
      return blowup("sup|D^2u| exceeds the graph-regime bound", state.t, sup_norm(state.u), sd);
    }
    note_psi();
    if (cfg.checkpoint_every > 0 && step % cfg.checkpoint_every == 0) emit();
  }
  result.steps = step;
  return result;
}

}  // namespace lmcf
