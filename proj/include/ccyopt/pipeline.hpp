#pragma once

#include <string>
#include <vector>

#include "ccyopt/config.hpp"
#include "ccyopt/evaluation.hpp"

namespace ccyopt {

// Exit codes shared with the CLI.
inline constexpr int exit_ok = 0;
inline constexpr int exit_config_error = 2;
inline constexpr int exit_simulation_error = 3;
inline constexpr int exit_infeasible = 4;

struct PipelineOutcome {
  int exit_code = exit_ok;
  Json results;  // contents of results.json when one was written
};

// Subcommand drivers. Each writes its artifacts under cfg.output_dir and
// throws ConfigError / SimulationError for the corresponding exit codes.
Json run_quadrature(const RunConfig& cfg);
Json run_surrogate_build(const RunConfig& cfg);
PipelineOutcome run_optimize(const RunConfig& cfg);
PipelineOutcome run_byo(const RunConfig& cfg);
PipelineOutcome run_yield(const RunConfig& cfg);

// Inputs are results.json files (or config files, which are run first).
// Writes the comparison table to `csv_path` and returns its text.
std::string run_compare(const std::vector<std::string>& inputs, const std::string& csv_path);

std::string format_g17(double value);
void write_text(const std::string& path, const std::string& text);

}  // namespace ccyopt
