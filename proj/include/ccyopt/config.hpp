#pragma once

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "ccyopt/chance.hpp"
#include "ccyopt/external_sim.hpp"
#include "ccyopt/polyopt.hpp"
#include "ccyopt/quadrature.hpp"
#include "ccyopt/serialize.hpp"

namespace ccyopt {

struct ProblemConfig {
  std::string name;  // "synthetic", "microring", "mzi", or "external"
  std::optional<ExternalSimulator::Options> external;
  std::vector<std::pair<double, double>> bounds;
  std::optional<GaussianMixture> mixture;
  ChanceSpec chance;
};

struct SurrogateConfig {
  int order = 2;
  QuadratureOptions quadrature;
};

struct SolverConfig {
  SolveOptions solve;
  bool grid_check = false;
  int grid_points_per_dim = 401;
  std::string reformulation = "cantelli";  // or "mean-only"
};

struct ValidationConfig {
  Index samples = 10000;
  std::uint64_t seed = 2024;
  int bins = 60;
  int spectrum_draws = 50;
};

// Parsed and validated run configuration. Unknown JSON keys are rejected;
// built-in problems supply defaults for any omitted problem fields.
struct RunConfig {
  ProblemConfig problem;
  SurrogateConfig surrogate;
  SolverConfig solver;
  ValidationConfig validation;
  std::string output_dir = "out";
  std::optional<Vector> evaluate_x;  // design point for the `yield` subcommand

  static RunConfig from_json(const Json& j);
  static RunConfig from_file(const std::string& path);

  // Applies the CLI master seed: every stage seed is derived from it.
  void override_seed(std::uint64_t master);

  std::unique_ptr<Simulator> make_simulator() const;
  const GaussianMixture& mixture() const { return *problem.mixture; }

  // Uniform risk level if all constraints share one; NaN otherwise.
  double uniform_epsilon() const;

  // Canonical sign/bound form of the yield criteria.
  std::vector<CanonConstraint> criteria() const;

  // Canonical string of everything a cached rule/surrogate depends on.
  std::string cache_fingerprint() const;
};

}  // namespace ccyopt
