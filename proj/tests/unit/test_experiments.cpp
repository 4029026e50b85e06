#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <gtest/gtest.h>

#include "lmcf/checkpoint.hpp"
#include "lmcf/experiments.hpp"

using namespace lmcf;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const auto p = fs::temp_directory_path() / ("lmcf_exp_" + name);
  fs::remove_all(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

TEST(Config, ParsesAllKeys) {
  const auto c = parse_config(
      "# comment\n"
      "dim = 2\n sizes = 16, 32\nperiods = 1, 2.5\nkappa = -0.5\ncfl = 0.1\nscheme = central4\n"
      "t_max = 0.25\nconv_tol = 1e-9\nc0 = 200\nc1 = 20\neps1 = 0.05\ncheckpoint_every = 7\n"
      "u0_preset = random_bandlimited  # trailing\nu0_amplitude = 0.03\nu0_seed = 9\nu0_modes = 2\n");
  EXPECT_EQ(c.flow.grid.size(1), 32);
  EXPECT_EQ(c.flow.grid.period(1), 2.5);
  EXPECT_EQ(c.flow.kappa, -0.5);
  EXPECT_EQ(c.flow.cfl, 0.1);
  EXPECT_EQ(c.flow.scheme, Scheme::central4);
  EXPECT_EQ(c.flow.t_max, 0.25);
  EXPECT_EQ(c.flow.conv_tol, 1e-9);
  EXPECT_EQ(c.flow.c0, 200);
  EXPECT_EQ(c.flow.c1, 20);
  EXPECT_EQ(c.flow.eps1, 0.05);
  EXPECT_EQ(c.flow.checkpoint_every, 7);
  EXPECT_EQ(c.initial.preset, "random_bandlimited");
  EXPECT_EQ(c.initial.amplitude, 0.03);
  EXPECT_EQ(c.initial.seed, 9u);
  EXPECT_EQ(c.initial.modes, 2);
}

TEST(Config, FormatRoundTrips) {
  for (const auto& name : builtin_preset_names()) {
    const auto c = *builtin_preset(name);
    const auto back = parse_config(format_config(c));
    EXPECT_EQ(format_config(back), format_config(c)) << name;
  }
}

TEST(Config, BroadcastsSingleSize) {
  const auto c = parse_config("dim = 3\nsizes = 8\n");
  EXPECT_EQ(c.flow.grid.dim(), 3);
  EXPECT_EQ(c.flow.grid.size(2), 8);
}

TEST(Config, RejectsMalformedInput) {
  for (const char* text : {"", "dim = 1\n", "sizes = 16\nfoo = 1\n", "sizes = 16\nkappa = abc\n",
                           "sizes = 15\n", "sizes = 16\nsizes = 16\n", "sizes 16\n",
                           "sizes = 16\ncfl = 2\n", "sizes = 16\nscheme = euler\n",
                           "sizes = 16\nu0_preset = gaussian\n", "dim = 2\nsizes = 16, 16, 16\n",
                           "sizes = 16\nkappa = nan\n", "sizes = 16\nt_max =\n"}) {
    EXPECT_THROW(parse_config(text), ConfigError) << text;
  }
}

TEST(Presets, Lookup) {
  EXPECT_TRUE(builtin_preset("stability_kappa0"));
  EXPECT_FALSE(builtin_preset("nope"));
  EXPECT_THROW(resolve_config("/nonexistent/path.cfg"), ConfigError);
  const auto c = *builtin_preset("stability_kappa0");
  EXPECT_EQ(c.flow.grid.size(0), 128);
  EXPECT_EQ(c.flow.t_max, 2.0);
}

TEST(InitialData, Presets) {
  RunConfig c;
  c.flow.grid = GridSpec::cube(1, 64);
  c.initial = {"constant", 0.25, 1, 0};
  EXPECT_EQ(sup_norm(initial_field(c) - ScalarField::constant(c.flow.grid, 0.25)), 0.0);
  c.initial = {"single_mode", 1e-3, 1, 2};
  const auto u = initial_field(c);
  EXPECT_NEAR(u[8], 1e-3 * std::cos(2 * M_PI * 2 * 8.0 / 64), 1e-18);
  c.initial = {"random_bandlimited", 0.05, 3, 3};
  const auto r = initial_field(c);
  EXPECT_NEAR(sup_norm(psi(r, c.flow)), 0.05 * 0.05, 1e-15);
}

TEST(Monitors, CsvRoundTripIsExact) {
  MonitorRecord r{0.1, 1.0 / 3.0, 2e-300, 5.5, 0.0, 1e-8, -0.7, 0.7, 1.0000000001, 6.1e-6};
  std::stringstream ss;
  write_monitor_header(ss);
  write_monitor_row(ss, r);
  const auto back = read_monitors(ss);
  ASSERT_EQ(back.size(), 1u);
  EXPECT_TRUE(back[0] == r);
  std::stringstream bad("t,max_u\n1,2\n");
  EXPECT_THROW(read_monitors(bad), InvalidArgumentError);
  std::stringstream short_row(std::string(kMonitorHeader) + "\n1,2,3\n");
  EXPECT_THROW(read_monitors(short_row), InvalidArgumentError);
}

TEST(Run, ConstantDecayWritesOutputs) {
  auto c = *builtin_preset("constant_decay");
  const auto dir = scratch("run");
  std::ostringstream log;
  const auto out = run_experiment(c, dir, log);
  EXPECT_EQ(out.code, ExitCode::converged);
  const auto rows = read_monitors(dir / "monitors.csv");
  ASSERT_GT(rows.size(), 10u);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    EXPECT_NEAR(rows[i].max_u, 0.01 * std::exp(-rows[i].t), 1e-9);
    if (i) EXPECT_GT(rows[i].t, rows[i - 1].t);
  }
  EXPECT_TRUE(fs::exists(dir / "checkpoint.bin"));
  EXPECT_NE(slurp(dir / "run_summary.txt").find("outcome = converged"), std::string::npos);
  fs::remove_all(dir);
}

TEST(Run, RepeatedRunsAreBitIdentical) {
  auto c = *builtin_preset("small_data_2d");
  c.flow.t_max = 0.01;
  const auto a = scratch("rep_a"), b = scratch("rep_b");
  std::ostringstream log;
  run_experiment(c, a, log);
  run_experiment(c, b, log);
  for (const char* f : {"monitors.csv", "checkpoint.bin", "run_summary.txt"}) {
    EXPECT_EQ(slurp(a / f), slurp(b / f)) << f;
  }
  fs::remove_all(a);
  fs::remove_all(b);
}

TEST(Run, TimeoutAndBlowupCodes) {
  std::ostringstream log;
  auto c = *builtin_preset("constant_decay");
  c.flow.t_max = 0.1;
  const auto d1 = scratch("timeout");
  EXPECT_EQ(run_experiment(c, d1, log).code, ExitCode::timed_out);
  c = *builtin_preset("stability_kappa0");
  c.initial.amplitude = 0.5;
  const auto d2 = scratch("blowup");
  EXPECT_EQ(run_experiment(c, d2, log).code, ExitCode::blowup);
  EXPECT_NE(slurp(d2 / "run_summary.txt").find("blowup_reason"), std::string::npos);
  fs::remove_all(d1);
  fs::remove_all(d2);
}

TEST(Resume, ContinuesFromCheckpoint) {
  auto c = *builtin_preset("constant_decay");
  c.flow.t_max = 1.0;
  const auto d1 = scratch("res1"), d2 = scratch("res2");
  std::ostringstream log;
  run_experiment(c, d1, log);
  const auto out = resume_experiment(d1 / "checkpoint.bin", d2, log, c, 2.0);
  EXPECT_EQ(out.code, ExitCode::timed_out);
  const auto rows = read_monitors(d2 / "monitors.csv");
  EXPECT_DOUBLE_EQ(rows.front().t, 1.0);
  EXPECT_DOUBLE_EQ(rows.back().t, 2.0);
  EXPECT_NEAR(rows.back().max_u, 0.01 * std::exp(-2.0), 1e-12);
  auto other = c;
  other.flow.grid = GridSpec::cube(1, 64);
  EXPECT_THROW(resume_experiment(d1 / "checkpoint.bin", d2, log, other), ConfigError);
  fs::remove_all(d1);
  fs::remove_all(d2);
}

TEST(Sweep, KappaRatesOnConstantData) {
  auto c = *builtin_preset("constant_decay");
  c.flow.t_max = 1.0;
  c.flow.checkpoint_every = 50;
  const auto dir = scratch("sweep_kappa");
  std::ostringstream log;
  const auto out = run_sweep(c, SweepParam::kappa, {0.0, -0.5, -1.0}, dir, log);
  ASSERT_EQ(out.rows.size(), 3u);
  EXPECT_EQ(out.rows[0].code, ExitCode::converged);
  EXPECT_NEAR(out.rows[0].fitted_rate, 0.0, 1e-6);
  EXPECT_NEAR(out.rows[1].fitted_rate, -0.5, 1e-6);
  EXPECT_NEAR(out.rows[2].fitted_rate, -1.0, 1e-6);
  EXPECT_EQ(out.code, ExitCode::timed_out);
  EXPECT_TRUE(fs::exists(dir / "sweep.csv"));
  fs::remove_all(dir);
}

TEST(Sweep, EpsilonMonotoneAndAllConverge) {
  auto c = *builtin_preset("stability_kappa0");
  c.flow.grid = GridSpec::cube(1, 32);
  c.flow.conv_tol = 1e-6;
  const auto dir = scratch("sweep_eps");
  std::ostringstream log;
  const auto out = run_sweep(c, SweepParam::epsilon, {1e-3, 1e-2, 1e-1}, dir, log);
  EXPECT_EQ(out.code, ExitCode::converged);
  for (std::size_t i = 1; i < out.rows.size(); ++i) {
    EXPECT_GT(out.rows[i].final_psi_max, out.rows[i - 1].final_psi_max);
  }
  fs::remove_all(dir);
}

TEST(Sweep, GridSizesAgree) {
  auto c = *builtin_preset("stability_kappa0");
  c.initial.amplitude = 1e-2;
  c.flow.t_max = 0.05;
  const auto dir = scratch("sweep_n");
  std::ostringstream log;
  const auto out = run_sweep(c, SweepParam::grid_size, {64, 128}, dir, log);
  ASSERT_EQ(out.rows.size(), 2u);
  const auto a = checkpoint_load(dir / "N_0" / "checkpoint.bin").state;
  const auto b = checkpoint_load(dir / "N_1" / "checkpoint.bin").state;
  // dt differs by 4x between the grids; compare the coarse points at t_max.
  ASSERT_EQ(a.t, b.t);
  double diff = 0;
  for (std::size_t i = 0; i < a.u.size(); ++i) diff = std::max(diff, std::abs(a.u[i] - b.u[2 * i]));
  EXPECT_LT(diff, 1e-8);
  fs::remove_all(dir);
}

TEST(Sweep, WorstExitCodeAndBadValues) {
  auto c = *builtin_preset("constant_decay");
  c.flow.t_max = 0.05;
  const auto dir = scratch("sweep_bad");
  std::ostringstream log;
  const auto out = run_sweep(c, SweepParam::grid_size, {16, 15}, dir, log);
  EXPECT_EQ(out.rows[1].code, ExitCode::config_error);
  EXPECT_EQ(out.code, ExitCode::config_error);
  EXPECT_THROW(parse_sweep_param("gamma"), ConfigError);
  EXPECT_THROW(parse_value_list(""), ConfigError);
  EXPECT_EQ(parse_value_list("1e-3, 1e-2,0.1").size(), 3u);
  fs::remove_all(dir);
}

TEST(Verify, UnknownSuite) {
  std::ostringstream log;
  EXPECT_THROW(run_verify("everything", scratch("v"), log), InvalidArgumentError);
}

TEST(Verify, GeometrySuitePasses) {
  const auto dir = scratch("verify_geometry");
  std::ostringstream log;
  EXPECT_EQ(run_verify("geometry", dir, log), ExitCode::converged) << log.str();
  EXPECT_TRUE(fs::exists(dir / "geometry.csv"));
  fs::remove_all(dir);
}

TEST(Verify, DecaySuitePasses) {
  const auto dir = scratch("verify_decay");
  std::ostringstream log;
  EXPECT_EQ(run_verify("decay", dir, log), ExitCode::converged) << log.str();
  fs::remove_all(dir);
}
