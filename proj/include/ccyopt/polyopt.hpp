#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include "ccyopt/chance.hpp"

namespace ccyopt {

enum class SolveStatus { optimal, feasible_local, infeasible };

std::string to_string(SolveStatus status);

struct SolveResult {
  Vector x_star;
  double objective_value = 0.0;      // reported in the user's sense
  double feasibility_residual = 0.0; // max scaled constraint value; <= 0 is feasible
  SolveStatus status = SolveStatus::infeasible;
  int starts_used = 0;
  std::optional<double> oracle_agreement;  // |objective - grid oracle objective|
};

struct SolveOptions {
  int starts = 64;
  std::uint64_t seed = 777;
  double feasibility_tol = 1e-6;
  double penalty_init = 10.0;
  double penalty_mult = 5.0;
  double inner_tol = 1e-8;
  int max_outer = 50;
  int max_inner = 400;
  int workers = 0;  // 0: use the global default
};

// Multi-start augmented-Lagrangian solve of the box-constrained polynomial
// program. Starts come from a seeded, scrambled low-discrepancy sequence and
// run independently; the reduction picks the best feasible local optimum with
// a deterministic tie-break by start index.
SolveResult solve(const ChanceProblem& problem, const SolveOptions& options = {});

// Exhaustive evaluation on a uniform grid; the brute-force global reference
// for small design dimensions (points_per_dim^d capped at 5e6).
SolveResult grid_oracle(const ChanceProblem& problem, int points_per_dim);

}  // namespace ccyopt
