#pragma once

#include <functional>
#include <optional>
#include <string>
#include <variant>

#include "lmcf/calculus.hpp"
#include "lmcf/field.hpp"

namespace lmcf {

/// Parameters of one run of the potential flow du/dt = theta(D^2 u) + kappa u.
struct FlowConfig {
  GridSpec grid;
  /// Kahler-Einstein constant. Positive values run but are outside the
  /// certified regime.
  double kappa = 0.0;
  double cfl = 0.2;
  Scheme scheme = Scheme::spectral;
  double t_max = 1.0;
  double conv_tol = 1e-8;
  /// Weights of the composite monitor psi = c0 u^2 + c1 |du|^2 + |D^2 u|^2.
  double c0 = 100.0;
  double c1 = 10.0;
  /// Small-data radius: the certified regime is max psi < eps1^2.
  double eps1 = 0.1;
  /// Emit a monitor record every this many steps; 0 emits only the first and
  /// last records.
  int checkpoint_every = 0;

  /// Throws ConfigError on an out-of-range field.
  void validate() const;
  bool experimental() const noexcept { return kappa > 0.0; }
};

/// Heat-equation stability step cfl * min(h)^2 / (2n). The linearized operator
/// mu^{ij} d_i d_j has 0 < mu^{-1} <= I, so the flat bound holds uniformly.
double time_step(const FlowConfig& cfg);

/// Solution at one time with its derivative jets (kept consistent with u).
struct FlowState {
  double t = 0.0;
  ScalarField u;
  VectorField du;
  SymMatrixField d2u;
  SymTensor3Field d3u;
  double last_dt = 0.0;

  static FlowState at(double t, ScalarField u, Scheme scheme, double last_dt = 0.0);
};

/// theta(D^2 u) + kappa u; the time-dependent constant is fixed at zero.
ScalarField rhs(const ScalarField& u, double kappa, Scheme scheme = Scheme::spectral);

/// One classical Runge-Kutta step. Throws BlowupError when a stage turns
/// non-finite.
FlowState step_rk4(const FlowState& state, const FlowConfig& cfg);
FlowState step_rk4(const FlowState& state, const FlowConfig& cfg, double dt);

/// One time sample of every tracked scalar.
struct MonitorRecord {
  double t = 0.0;
  double max_u = 0.0;
  double max_du = 0.0;
  double max_d2u = 0.0;
  double max_d3u = 0.0;
  double psi_max = 0.0;
  double theta_min = 0.0;
  double theta_max = 0.0;
  double volume = 0.0;
  double dt = 0.0;

  friend bool operator==(const MonitorRecord&, const MonitorRecord&) = default;
};

/// psi = c0 u^2 + c1 |du|^2 + |D^2 u|^2 pointwise.
ScalarField psi(const ScalarField& u, const VectorField& du, const SymMatrixField& d2u,
                double c0, double c1);
ScalarField psi(const ScalarField& u, const FlowConfig& cfg);

MonitorRecord make_monitor_record(const FlowState& state, const FlowConfig& cfg);

using MonitorSink = std::function<void(const MonitorRecord&, const FlowState&)>;

struct Converged {
  FlowState state;
};
struct TimedOut {
  FlowState state;
};
struct BlowupReport {
  double t = 0.0;
  double sup_u = 0.0;
  double sup_d2u = 0.0;
  std::string reason;
};

struct IntegrationResult {
  std::variant<Converged, TimedOut, BlowupReport> outcome;
  long steps = 0;
  /// Set when max psi reached eps1^2 at some step: the run left the regime
  /// where monotonicity of max psi is expected.
  bool psi_left_small_data = false;
};

/// Sup-norm test of the stationary limit: du and D^2u below conv_tol, and u
/// itself when kappa != 0.
bool is_converged(const FlowState& state, const FlowConfig& cfg);

/// Steps until convergence or t_max. The final step is shortened to land on
/// t_max. Blowup when a field goes non-finite or sup|D^2 u| > 10.
IntegrationResult integrate(const ScalarField& u0, const FlowConfig& cfg,
                            const MonitorSink& sink = {});
IntegrationResult integrate(const FlowState& start, const FlowConfig& cfg,
                            const MonitorSink& sink = {});

inline constexpr double kBlowupHessianBound = 10.0;

}  // namespace lmcf
