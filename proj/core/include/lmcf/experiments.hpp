#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "lmcf/flow.hpp"

namespace lmcf {

/// Process exit codes of the command-line front end.
enum class ExitCode : int {
  converged = 0,
  config_error = 1,
  timed_out = 2,
  blowup = 3,
  verification_failed = 4,
};

/// Initial data. Presets:
///   constant            u0 = amplitude
///   single_mode         u0 = amplitude cos(2 pi modes x_0 / P_0)
///   random_bandlimited  zero-mean trigonometric polynomial with |k_a| <= modes,
///                       scaled so that the initial max psi equals amplitude^2
struct InitialData {
  std::string preset = "single_mode";
  double amplitude = 1e-3;
  std::uint64_t seed = 1;
  int modes = 1;
};

struct RunConfig {
  FlowConfig flow;
  InitialData initial;
};

/// Flat "key = value" text. Blank lines and '#' comments are ignored. Unknown
/// or repeated keys, bad numbers and a missing grid raise ConfigError.
RunConfig parse_config(std::string_view text);
RunConfig load_config(const std::filesystem::path& path);
/// Inverse of parse_config; every key is written.
std::string format_config(const RunConfig& cfg);

/// Built-in experiment presets by name, or nullopt.
std::optional<RunConfig> builtin_preset(std::string_view name);
std::vector<std::string> builtin_preset_names();

/// Reads `source` as a config file, falling back to a built-in preset of that
/// name when no such file exists.
RunConfig resolve_config(const std::string& source);

ScalarField initial_field(const RunConfig& cfg);

inline constexpr std::string_view kMonitorHeader =
    "t,max_u,max_du,max_d2u,max_d3u,psi_max,theta_min,theta_max,volume,dt";

void write_monitor_header(std::ostream& out);
void write_monitor_row(std::ostream& out, const MonitorRecord& r);
/// Throws InvalidArgumentError on a wrong header or a malformed row.
std::vector<MonitorRecord> read_monitors(std::istream& in);
std::vector<MonitorRecord> read_monitors(const std::filesystem::path& path);

struct RunOutcome {
  ExitCode code = ExitCode::converged;
  IntegrationResult result;
  std::vector<MonitorRecord> records;
};

/// Integrates and writes monitors.csv, checkpoint.bin (last accepted state)
/// and run_summary.txt into `out_dir`, creating it if needed. Log lines go to
/// `log`. Throws on I/O problems.
RunOutcome run_experiment(const RunConfig& cfg, const std::filesystem::path& out_dir,
                          std::ostream& log);

/// Continues from a checkpoint. The grid and kappa come from the file; the
/// remaining parameters come from `base` when given (its grid must match),
/// otherwise from the defaults. `t_max` overrides the final time.
RunOutcome resume_experiment(const std::filesystem::path& checkpoint,
                             const std::filesystem::path& out_dir, std::ostream& log,
                             const std::optional<RunConfig>& base = std::nullopt,
                             std::optional<double> t_max = std::nullopt);

ExitCode exit_code_of(const IntegrationResult& result);
std::string_view outcome_name(ExitCode code);

// --- verification suites ------------------------------------------------------

std::vector<std::string> verify_suite_names();

/// Runs a named battery ("all", "geometry", "inequalities", "decay",
/// "variation"), writing <suite>.csv per battery into `out_dir` and one
/// PASS/FAIL line per report to `log`. Returns verification_failed when any
/// report fails. Throws InvalidArgumentError for an unknown suite.
ExitCode run_verify(std::string_view suite, const std::filesystem::path& out_dir,
                    std::ostream& log);

// --- parameter sweeps ---------------------------------------------------------

enum class SweepParam { epsilon, kappa, grid_size };
SweepParam parse_sweep_param(std::string_view text);
/// Comma-separated reals. Throws ConfigError on an empty or malformed list.
std::vector<double> parse_value_list(std::string_view text);

struct SweepRow {
  double value = 0.0;
  ExitCode code = ExitCode::converged;
  double final_psi_max = 0.0;
  /// Slope of log sup|u| (constant data) or log sup|du| (otherwise) against
  /// t over the recorded series; 0 for a run that starts stationary.
  double fitted_rate = 0.0;
};

struct SweepOutcome {
  ExitCode code = ExitCode::converged;
  std::vector<SweepRow> rows;
};

/// One run per value into <out_dir>/<param>_<index>/, then sweep.csv with
/// "value,outcome,final_psi_max,fitted_rate". The exit code is the worst
/// over runs: config error, then blowup, then timeout.
SweepOutcome run_sweep(const RunConfig& base, SweepParam param, const std::vector<double>& values,
                       const std::filesystem::path& out_dir, std::ostream& log);

}  // namespace lmcf
