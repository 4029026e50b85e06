#pragma once

#include <cstdint>
#include <iosfwd>
#include <limits>
#include <string>
#include <vector>

#include "lmcf/flow.hpp"
#include "lmcf/geometry.hpp"

namespace lmcf {

// Numerical certification of the small-data estimates. The estimates only
// assert that some constant c exists; reports therefore carry fitted
// constants and scaling orders, and only sign structure, order and
// monotonicity decide pass/fail.

struct ResidualSample {
  /// Amplitude epsilon or sample time t, depending on the check.
  double x = 0.0;
  double residual = 0.0;
  double bound = 0.0;
};

struct ResidualReport {
  std::string name;
  std::vector<ResidualSample> samples;
  double fitted_constant = 0.0;
  double fitted_order = std::numeric_limits<double>::quiet_NaN();
  bool pass = false;
  std::string note;
};

/// One line per sample "name,x,residual,bound,ratio", then the summary line
/// "name,fitted_c,fitted_order,pass".
void write_report(std::ostream& out, const ResidualReport& report);

/// Least-squares slope of log(y) against log(x).
double loglog_slope(const std::vector<double>& x, const std::vector<double>& y);

// --- pointwise geometry ----------------------------------------------------

/// Random symmetric Q with |Q|_F <= max_norm; compares the arctan sum with
/// arg det(I + iQ). Residual per sample is the absolute difference.
ResidualReport check_angle_oracle(int dim, int count, double max_norm, std::uint64_t seed,
                                  double tolerance = 1e-10);

/// d theta / d Q_ij = mu^{ij} by central differences with step `step` in each
/// independent entry (an off-diagonal entry moves Q_ij and Q_ji together, so
/// its derivative is 2 mu^{ij}).
ResidualReport check_angle_gradient(int dim, int count, double max_norm, std::uint64_t seed,
                                    double step = 1e-6, double tolerance = 1e-5);

/// theta(R Q R^T) = theta(Q) for random rotations (n = 2).
ResidualReport check_orthogonal_invariance(int count, std::uint64_t seed,
                                           double tolerance = 1e-12);

/// Divergence and Christoffel routes of the Laplace-Beltrami operator.
/// Residual is sup|difference| / sup|divergence route|.
ResidualReport check_laplace_routes(const ScalarField& u, const ScalarField& f,
                                    Scheme scheme = Scheme::spectral, double tolerance = 1e-8);

// --- expansion estimates ---------------------------------------------------

/// Rescales a base field so sup|du| and sup|D^2u| are at most one, the
/// precondition of the expansion checks.
ScalarField normalize_base(const ScalarField& base, Scheme scheme = Scheme::spectral);

/// sup|theta(D^2(eps u*)) - Laplacian(eps u*)| against sup(|du|^2 + |D^2u|^2)
/// over an amplitude sweep. Pass iff the log-log order is >= 1.9 and every
/// residual sits under the fitted constant times its bound. Base fields are
/// normalized first. Throws InvalidArgumentError for fewer than 3 amplitudes.
ResidualReport check_angle_expansion(const std::vector<ScalarField>& bases,
                                     const std::vector<double>& amplitudes,
                                     Scheme scheme = Scheme::spectral);

/// sup|Delta_mu f - tr_mu Hess f| against
/// sup|df| (sup|D^3u| + sup|D^2u| + sup|du|) with u scaled by each amplitude.
/// Pass iff the residual scales with order >= 0.9.
ResidualReport check_laplacian_difference(const ScalarField& u, const ScalarField& f,
                                          const std::vector<double>& amplitudes = {1e-1, 1e-2,
                                                                                   1e-3},
                                          Scheme scheme = Scheme::spectral);

// --- evolution inequalities ------------------------------------------------

enum class Inequality { u2, du2, d2u2, d3u2, psi };
std::string to_string(Inequality which);

/// Three consecutive states t - dt, t, t + dt.
struct StateTriple {
  FlowState prev;
  FlowState cur;
  FlowState next;
};
using Trajectory = std::vector<StateTriple>;

/// Integrates from u0 with the configured step and stores a triple centred on
/// the step nearest each sample time (times must be increasing and >= dt).
Trajectory record_trajectory(const ScalarField& u0, const FlowConfig& cfg,
                             const std::vector<double>& sample_times);

/// Every state of the trajectory interpolated spectrally onto `fine`. Lets a
/// coarse solve be checked on the same points as a fine one.
Trajectory prolongate(const Trajectory& trajectory, const GridSpec& fine,
                      Scheme scheme = Scheme::spectral);

/// Evaluates (phi(t+dt) - phi(t-dt)) / (2dt) - Delta_mu phi(t) pointwise.
///
/// For psi the check is parameter-free: LHS <= 2 c0 kappa u^2 + 1e-6 scale at
/// every point, scale being the largest of the sup norms of the time
/// derivative, the Laplacian term and 2 c0 kappa u^2. For the other quantities
/// the leading negative term and the same 1e-6 scale noise floor are
/// subtracted and the remainder divided by the estimate's bracket; the fitted
/// constant is the largest such ratio (clamped at zero) over points whose
/// bracket exceeds 1e-8 of the sample maximum.
/// Throws RegionViolationError when any stored state has max psi >= eps1^2.
ResidualReport check_evolution_inequality(Inequality which, const Trajectory& trajectory,
                                          const FlowConfig& cfg);

/// Pass iff the fitted constants differ by less than a factor 2. Constants
/// below `floor` count as zero, so two vanishing constants agree.
ResidualReport compare_resolutions(const ResidualReport& coarse, const ResidualReport& fine,
                                   double floor = 1e-6);

/// Max over the grid of log(1 + |D^3u|^2) + K psi must not increase between
/// consecutive samples by more than `slack`. K >= 1.
ResidualReport check_log_d3u_monotone(const std::vector<FlowState>& samples, double K,
                                const FlowConfig& cfg, double slack = 1e-8);

/// Recorded psi_max never increases by more than `slack`.
ResidualReport check_psi_monotone(const std::vector<MonitorRecord>& records,
                                  double slack = 1e-8);

/// Compares the centred difference of the volume over each triple with
/// -integral <d theta, d(theta + kappa u)>_mu dV at the middle state.
/// Tolerance 5 dt^2 scale with scale = |rate| Lambda^2, Lambda being
/// ||Laplacian f|| / ||f|| + |kappa| for f = theta + kappa u minus its mean.
/// Also requires each step to raise the volume by at most 1e-10.
ResidualReport check_volume_lyapunov(const Trajectory& trajectory, const FlowConfig& cfg);

/// Volume dissipation rate -integral <d theta, d(theta + kappa u)>_mu dV.
double volume_rate(const ScalarField& u, double kappa, Scheme scheme = Scheme::spectral);

// --- decay and second variation ---------------------------------------------

enum class MonitorQuantity { psi_max, sup_du, sup_u };

/// Least-squares slope of log(quantity) against t over records with
/// t in [t1, t2]. Throws NonPositiveSeriesError for a non-positive value and
/// InvalidArgumentError when fewer than two records fall in the window.
double fit_decay_rate(const std::vector<MonitorRecord>& series, MonitorQuantity which, double t1,
                      double t2);

/// Second difference of the graph volume along eps -> graph of eps dh,
/// Richardson-extrapolated over `epsilons`, against integral (Delta h)^2.
/// Pass iff relative error <= 1e-4 and the value is non-negative.
/// Throws DegenerateDirectionError when h is constant.
ResidualReport check_second_variation(const ScalarField& h,
                                      const std::vector<double>& epsilons = {4e-3, 2e-3, 1e-3},
                                      Scheme scheme = Scheme::spectral, double tolerance = 1e-4);

/// Zero-mean random trigonometric polynomial with wavenumbers |k_a| <= max_mode.
ScalarField random_bandlimited(const GridSpec& grid, int max_mode, std::uint64_t seed);

}  // namespace lmcf
