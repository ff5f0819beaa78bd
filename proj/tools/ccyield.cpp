#include <CLI11.hpp>
#include <cstdint>
#include <iostream>
#include <optional>

#include "ccyopt/parallel.hpp"
#include "ccyopt/pipeline.hpp"

namespace {

struct CommonArgs {
  std::string config_positional;
  std::string config_flag;
  std::string out_dir;
  int workers = 0;
  std::optional<std::uint64_t> seed;
};

void add_common(CLI::App* cmd, CommonArgs& args, bool positional_config = true) {
  if (positional_config) {
    cmd->add_option("config", args.config_positional, "run configuration (JSON)");
  }
  cmd->add_option("--config", args.config_flag, "run configuration (JSON)");
  cmd->add_option("--out", args.out_dir, "output directory (overrides the config)");
  cmd->add_option("--workers", args.workers, "worker threads (default: machine parallelism)");
  cmd->add_option("--seed", args.seed, "master seed overriding every stage seed");
}

ccyopt::RunConfig load_config(const CommonArgs& args) {
  const std::string path =
      !args.config_flag.empty() ? args.config_flag : args.config_positional;
  if (path.empty()) throw ccyopt::ConfigError("missing config file (positional or --config)");
  ccyopt::RunConfig cfg = ccyopt::RunConfig::from_file(path);
  if (!args.out_dir.empty()) cfg.output_dir = args.out_dir;
  if (args.seed) cfg.override_seed(*args.seed);
  if (args.workers > 0) ccyopt::set_default_workers(args.workers);
  return cfg;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"ccyield: chance-constrained yield-aware optimization"};
  app.require_subcommand(1);

  CommonArgs quad_args, surr_args, opt_args, yield_args, byo_args;
  auto* quadrature = app.add_subcommand("quadrature", "compute and cache the quadrature rules");
  add_common(quadrature, quad_args);
  auto* surrogate = app.add_subcommand("surrogate", "build and cache the surrogate model");
  add_common(surrogate, surr_args);
  auto* optimize = app.add_subcommand("optimize", "run the full optimization pipeline");
  add_common(optimize, opt_args);
  auto* yield_cmd = app.add_subcommand("yield", "Monte Carlo yield at a fixed design");
  add_common(yield_cmd, yield_args);
  auto* byo = app.add_subcommand("byo", "Bayesian yield optimization baseline");
  add_common(byo, byo_args);

  std::vector<std::string> compare_inputs;
  std::string compare_out = "compare.csv";
  auto* compare = app.add_subcommand("compare", "tabulate results side by side");
  compare->add_option("inputs", compare_inputs, "results.json or config files (two or more)");
  compare->add_option("--out", compare_out, "comparison CSV path");

  CLI11_PARSE(app, argc, argv);

  try {
    if (quadrature->parsed()) {
      std::cout << ccyopt::run_quadrature(load_config(quad_args)).dump(2) << std::endl;
      return ccyopt::exit_ok;
    }
    if (surrogate->parsed()) {
      std::cout << ccyopt::run_surrogate_build(load_config(surr_args)).dump(2) << std::endl;
      return ccyopt::exit_ok;
    }
    if (optimize->parsed()) {
      const auto outcome = ccyopt::run_optimize(load_config(opt_args));
      std::cout << outcome.results.dump(2) << std::endl;
      return outcome.exit_code;
    }
    if (yield_cmd->parsed()) {
      const auto outcome = ccyopt::run_yield(load_config(yield_args));
      std::cout << outcome.results.dump(2) << std::endl;
      return outcome.exit_code;
    }
    if (byo->parsed()) {
      const auto outcome = ccyopt::run_byo(load_config(byo_args));
      std::cout << outcome.results.dump(2) << std::endl;
      return outcome.exit_code;
    }
    if (compare->parsed()) {
      std::cout << ccyopt::run_compare(compare_inputs, compare_out);
      return ccyopt::exit_ok;
    }
  } catch (const ccyopt::ConfigError& err) {
    std::cerr << "config error: " << err.what() << std::endl;
    return ccyopt::exit_config_error;
  } catch (const ccyopt::SimulationError& err) {
    std::cerr << "simulation error: " << err.what() << std::endl;
    return ccyopt::exit_simulation_error;
  } catch (const std::exception& err) {
    std::cerr << "error: " << err.what() << std::endl;
    return 1;
  }
  return ccyopt::exit_ok;
}
