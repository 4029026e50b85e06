#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <numbers>

#include "lmcf/experiments.hpp"
#include "lmcf/verification.hpp"

namespace lmcf {
namespace {

constexpr double kPi = std::numbers::pi;

class Battery {
 public:
  Battery(std::string name, const std::filesystem::path& dir, std::ostream& log)
      : name_(std::move(name)), csv_(dir / (name_ + ".csv"), std::ios::trunc), log_(log) {
    if (!csv_) throw ConfigError("cannot write " + (dir / (name_ + ".csv")).string());
  }

  void add(const ResidualReport& r) {
    write_report(csv_, r);
    char buf[256];
    std::snprintf(buf, sizeof buf, "%s %-28s c=%.6g order=%.4g", r.pass ? "PASS" : "FAIL",
                  r.name.c_str(), r.fitted_constant, r.fitted_order);
    log_ << "[" << name_ << "] " << buf << (r.note.empty() ? "" : "  (" + r.note + ")") << "\n";
    if (!r.pass) ok_ = false;
  }

  /// Runs a check, turning a library error into a failed report.
  void guard(const std::string& name, const std::function<void()>& body) {
    try {
      body();
    } catch (const Error& e) {
      ResidualReport r;
      r.name = name;
      r.note = std::string("error: ") + e.what();
      add(r);
    }
  }

  bool ok() const { return ok_; }

 private:
  std::string name_;
  std::ofstream csv_;
  std::ostream& log_;
  bool ok_ = true;
};

ResidualReport bound_check(std::string name, double x, double residual, double bound) {
  ResidualReport r;
  r.name = std::move(name);
  r.samples.push_back({x, residual, bound});
  r.fitted_constant = residual;
  r.pass = residual <= bound;
  return r;
}

ScalarField with_hessian_sup(ScalarField u, double target) {
  return (target / sup_norm(derivative<2>(u))) * u;
}

bool suite_geometry(const std::filesystem::path& dir, std::ostream& log) {
  Battery b("geometry", dir, log);
  for (int n = 1; n <= 3; ++n) b.add(check_angle_oracle(n, 1000, 0.5, 100 + n));
  for (int n = 1; n <= 3; ++n) b.add(check_angle_gradient(n, 100, 0.5, 200 + n));
  b.add(check_orthogonal_invariance(200, 300));

  b.guard("laplace_routes", [&] {
    const auto g = GridSpec::cube(2, 128);
    const auto u = with_hessian_sup(random_bandlimited(g, 3, 401), 0.3);
    b.add(check_laplace_routes(u, random_bandlimited(g, 3, 402)));
    const auto g3 = GridSpec::cube(3, 48);
    const auto u3 = with_hessian_sup(random_bandlimited(g3, 2, 403), 0.3);
    b.add(check_laplace_routes(u3, random_bandlimited(g3, 2, 404)));
  });

  b.guard("angle_expansion", [&] {
    const auto g = GridSpec::cube(1, 128);
    const auto base = ScalarField::from_function(
        g, [](const std::array<double, kMaxDim>& x) { return std::sin(2.0 * kPi * x[0]); });
    b.add(check_angle_expansion({base}, {1e-1, 1e-2, 1e-3}));
    const auto g2 = GridSpec::cube(2, 32);
    auto r = check_angle_expansion({random_bandlimited(g2, 3, 501), random_bandlimited(g2, 2, 502)},
                                   {1e-1, 1e-2, 1e-3});
    r.name += "_random";
    b.add(r);
  });

  b.guard("laplacian_difference", [&] {
    const auto g = GridSpec::cube(2, 32);
    b.add(check_laplacian_difference(random_bandlimited(g, 3, 601), random_bandlimited(g, 3, 602)));
  });
  return b.ok();
}

/// Seeds and grids shared by the monotonicity and inequality checks.
struct SmallDataCase {
  int dim;
  int n;
  double kappa;
  std::uint64_t seed;
};

std::vector<SmallDataCase> small_data_cases() {
  std::vector<SmallDataCase> cases;
  for (int i = 0; i < 16; ++i) cases.push_back({1, 64, i % 2 ? -1.0 : 0.0, 1000u + i});
  for (int i = 0; i < 4; ++i) cases.push_back({2, 32, i % 2 ? -1.0 : 0.0, 2000u + i});
  return cases;
}

RunConfig small_data_config(const SmallDataCase& c, double t_max) {
  RunConfig cfg;
  cfg.flow.grid = GridSpec::cube(c.dim, c.n);
  cfg.flow.kappa = c.kappa;
  cfg.flow.t_max = t_max;
  cfg.flow.checkpoint_every = 1;
  cfg.initial = {"random_bandlimited", 0.09, c.seed, 3};
  return cfg;
}

bool suite_inequalities(const std::filesystem::path& dir, std::ostream& log) {
  Battery b("inequalities", dir, log);
  constexpr double kPsiWeight = 10.0;

  for (const auto& c : small_data_cases()) {
    const std::string tag = "_n" + std::to_string(c.dim) + "_s" + std::to_string(c.seed);
    b.guard("psi_monotone" + tag, [&] {
      const auto cfg = small_data_config(c, c.dim == 1 ? 0.05 : 0.02);
      std::vector<MonitorRecord> records;
      std::vector<FlowState> states;
      integrate(initial_field(cfg), cfg.flow, [&](const MonitorRecord& r, const FlowState& s) {
        records.push_back(r);
        if (records.size() % 10 == 1) states.push_back(s);
      });
      auto r = check_psi_monotone(records);
      r.name += tag;
      b.add(r);
      auto w = check_log_d3u_monotone(states, kPsiWeight, cfg.flow);
      w.name += tag;
      b.add(w);
    });
  }

  // u^2, |du|^2, |D^2u|^2, |D^3u|^2 inequalities at two resolutions, psi inequality and volume on both.
  for (const auto& c : small_data_cases()) {
    if (c.dim != 1 || c.seed % 4 != 0) continue;
    const std::string tag = "_s" + std::to_string(c.seed);
    b.guard("evolution" + tag, [&] {
      const std::vector<double> times = {2e-3, 5e-3, 1e-2, 2e-2};
      // Both grids share one time step so only the spatial resolution changes.
      auto coarse_cfg = small_data_config(c, 1.0);
      coarse_cfg.flow.cfl = 0.05;
      auto fine_cfg = coarse_cfg;
      fine_cfg.flow.grid = GridSpec::cube(1, 128);
      fine_cfg.flow.cfl = 0.2;
      const auto u0 = initial_field(coarse_cfg);
      const GridSpec& fine = fine_cfg.flow.grid;
      const auto tc = record_trajectory(u0, coarse_cfg.flow, times);
      const auto tf = record_trajectory(prolongate(u0, fine), fine_cfg.flow, times);
      // The coarse solve is read on the fine points so both fits range over
      // the same sample set.
      const auto tc_fine = prolongate(tc, fine);
      for (auto which : {Inequality::u2, Inequality::du2, Inequality::d2u2, Inequality::d3u2}) {
        const auto rc = check_evolution_inequality(which, tc_fine, coarse_cfg.flow);
        const auto rf = check_evolution_inequality(which, tf, fine_cfg.flow);
        auto r = compare_resolutions(rc, rf);
        r.name += tag;
        b.add(r);
      }
      for (const auto* t : {&tc, &tf}) {
        auto r = check_evolution_inequality(Inequality::psi, *t, coarse_cfg.flow);
        r.name += tag + (t == &tc ? "_N64" : "_N128");
        b.add(r);
        auto v = check_volume_lyapunov(*t, coarse_cfg.flow);
        v.name += tag + (t == &tc ? "_N64" : "_N128");
        b.add(v);
      }
    });
  }
  return b.ok();
}

bool suite_decay(const std::filesystem::path& dir, std::ostream& log) {
  Battery b("decay", dir, log);

  b.guard("constant_ode", [&] {
    FlowConfig cfg;
    cfg.grid = GridSpec::cube(1, 16);
    cfg.kappa = -1.0;
    cfg.t_max = 5.0;
    cfg.checkpoint_every = 50;
    std::vector<MonitorRecord> records;
    double worst = 0.0;
    integrate(ScalarField::constant(cfg.grid, 0.01), cfg,
              [&](const MonitorRecord& r, const FlowState& s) {
                records.push_back(r);
                for (double v : s.u.values()) {
                  worst = std::max(worst, std::abs(v - 0.01 * std::exp(-s.t)));
                }
              });
    b.add(bound_check("constant_ode_error", 5.0, worst, 1e-9));
    const double psi_rate = fit_decay_rate(records, MonitorQuantity::psi_max, 0.0, 5.0);
    b.add(bound_check("constant_psi_rate", -2.0, std::abs(psi_rate + 2.0), 1e-4));
    const double u_rate = fit_decay_rate(records, MonitorQuantity::sup_u, 0.0, 5.0);
    b.add(bound_check("constant_u_rate", -1.0, std::abs(u_rate + 1.0), 1e-6));
  });

  b.guard("linearized_decay", [&] {
    FlowConfig cfg;
    cfg.grid = GridSpec::cube(1, 128);
    cfg.t_max = 2.0;
    cfg.checkpoint_every = 200;
    const auto u0 = ScalarField::from_function(
        cfg.grid, [](const std::array<double, kMaxDim>& x) { return 1e-3 * std::cos(2 * kPi * x[0]); });
    const double psi0 = *std::ranges::max_element(psi(u0, cfg).values());
    std::vector<MonitorRecord> records;
    const auto res = integrate(u0, cfg, [&](const MonitorRecord& r, const FlowState&) {
      records.push_back(r);
    });
    const double rate = fit_decay_rate(records, MonitorQuantity::sup_du, 0.01, 0.1);
    const double expected = 4.0 * kPi * kPi;
    b.add(bound_check("linearized_du_rate", -expected, std::abs(-rate - expected), 0.01 * expected));
    const auto* c = std::get_if<Converged>(&res.outcome);
    auto r = bound_check("linearized_limit", psi0,
                         c ? std::abs(c->state.u.mean() - u0.mean()) : INFINITY, 10.0 * psi0);
    if (!c) r.note = "flow did not converge";
    b.add(r);
  });

  b.guard("kappa_rates", [&] {
    for (double kappa : {-0.5, -1.0}) {
      FlowConfig cfg;
      cfg.grid = GridSpec::cube(1, 16);
      cfg.kappa = kappa;
      cfg.t_max = 1.0;
      cfg.checkpoint_every = 20;
      std::vector<MonitorRecord> records;
      integrate(ScalarField::constant(cfg.grid, 0.01), cfg,
                [&](const MonitorRecord& r, const FlowState&) { records.push_back(r); });
      const double rate = fit_decay_rate(records, MonitorQuantity::sup_u, 0.0, 1.0);
      b.add(bound_check("kappa_rate_" + std::to_string(kappa).substr(0, 4), kappa,
                        std::abs(rate - kappa), 1e-6));
    }
  });
  return b.ok();
}

bool suite_variation(const std::filesystem::path& dir, std::ostream& log) {
  Battery b("variation", dir, log);
  b.guard("second_variation_sin", [&] {
    const auto g = GridSpec::cube(1, 128);
    const auto h = ScalarField::from_function(
        g, [](const std::array<double, kMaxDim>& x) { return std::sin(2.0 * kPi * x[0]); });
    auto r = check_second_variation(h);
    r.samples.push_back({0.0, r.fitted_constant, 8.0 * std::pow(kPi, 4)});
    r.pass = r.pass && std::abs(r.fitted_constant - 8.0 * std::pow(kPi, 4)) <=
                           1e-4 * 8.0 * std::pow(kPi, 4);
    b.add(r);
  });
  for (int i = 0; i < 20; ++i) {
    b.guard("second_variation_random", [&] {
      const auto g = i < 14 ? GridSpec::cube(1, 64) : GridSpec::cube(2, 32);
      auto r = check_second_variation(random_bandlimited(g, 3, 700 + i));
      r.name += "_" + std::to_string(i);
      b.add(r);
    });
  }
  return b.ok();
}

}  // namespace

std::vector<std::string> verify_suite_names() {
  return {"all", "geometry", "inequalities", "decay", "variation"};
}

ExitCode run_verify(std::string_view suite, const std::filesystem::path& out_dir,
                    std::ostream& log) {
  const auto names = verify_suite_names();
  if (std::find(names.begin(), names.end(), suite) == names.end()) {
    throw InvalidArgumentError("unknown verification suite '" + std::string(suite) + "'");
  }
  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  if (ec || !std::filesystem::is_directory(out_dir)) {
    throw ConfigError("cannot create output directory " + out_dir.string());
  }
  const bool all = suite == "all";
  bool ok = true;
  if (all || suite == "geometry") ok = suite_geometry(out_dir, log) && ok;
  if (all || suite == "decay") ok = suite_decay(out_dir, log) && ok;
  if (all || suite == "variation") ok = suite_variation(out_dir, log) && ok;
  if (all || suite == "inequalities") ok = suite_inequalities(out_dir, log) && ok;
  log << (ok ? "verify: all reports passed\n" : "verify: some reports failed\n");
  return ok ? ExitCode::converged : ExitCode::verification_failed;
}

}  // namespace lmcf
