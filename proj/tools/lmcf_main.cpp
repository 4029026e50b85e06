#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "lmcf/experiments.hpp"

namespace {

int code(lmcf::ExitCode c) { return static_cast<int>(c); }

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Lagrangian mean curvature flow of potential graphs on flat tori"};
  app.require_subcommand(1);

  std::string config, out_dir, suite, param, values, checkpoint, resume_config;
  std::optional<double> t_max;

  auto* run = app.add_subcommand("run", "integrate one configuration or built-in preset");
  run->add_option("config", config, "config file or preset name")->required();
  run->add_option("-o,--output", out_dir, "output directory")->required();

  auto* verify = app.add_subcommand("verify", "run a verification battery");
  verify->add_option("suite", suite, "all, geometry, inequalities, decay or variation")
      ->required()
      ->check(CLI::IsMember(lmcf::verify_suite_names()));
  verify->add_option("-o,--output", out_dir, "output directory")->required();

  auto* sweep = app.add_subcommand("sweep", "one run per parameter value");
  sweep->add_option("config", config, "config file or preset name")->required();
  sweep->add_option("--param", param, "epsilon, kappa or N")->required();
  sweep->add_option("--values", values, "comma-separated values")->required();
  sweep->add_option("-o,--output", out_dir, "output directory")->required();

  auto* resume = app.add_subcommand("resume", "continue from a checkpoint");
  resume->add_option("checkpoint", checkpoint, "checkpoint.bin of an earlier run")->required();
  resume->add_option("-o,--output", out_dir, "output directory")->required();
  resume->add_option("--config", resume_config, "parameters other than grid and kappa");
  resume->add_option("--t-max", t_max, "final time");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : code(lmcf::ExitCode::config_error);
  }

  try {
    if (*run) {
      return code(lmcf::run_experiment(lmcf::resolve_config(config), out_dir, std::cerr).code);
    }
    if (*verify) return code(lmcf::run_verify(suite, out_dir, std::cout));
    if (*sweep) {
      const auto base = lmcf::resolve_config(config);
      const auto p = lmcf::parse_sweep_param(param);
      const auto list = lmcf::parse_value_list(values);
      return code(lmcf::run_sweep(base, p, list, out_dir, std::cerr).code);
    }
    if (*resume) {
      std::optional<lmcf::RunConfig> base;
      if (!resume_config.empty()) base = lmcf::resolve_config(resume_config);
      return code(lmcf::resume_experiment(checkpoint, out_dir, std::cerr, base, t_max).code);
    }
  } catch (const lmcf::Error& e) {
    std::cerr << "lmcf: " << e.what() << "\n";
    return code(lmcf::ExitCode::config_error);
  } catch (const std::exception& e) {
    std::cerr << "lmcf: " << e.what() << "\n";
    return code(lmcf::ExitCode::config_error);
  }
  return code(lmcf::ExitCode::config_error);
}
