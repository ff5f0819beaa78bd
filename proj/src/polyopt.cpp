#include "ccyopt/polyopt.hpp"

#include <cmath>
#include <limits>

#include "ccyopt/parallel.hpp"
#include "ccyopt/rng.hpp"

namespace ccyopt {

std::string to_string(SolveStatus status) {
  switch (status) {
    case SolveStatus::optimal: return "optimal";
    case SolveStatus::feasible_local: return "feasible-local";
    case SolveStatus::infeasible: return "infeasible";
  }
  return "unknown";
}

namespace {

struct LocalOutcome {
  Vector x;
  double objective = std::numeric_limits<double>::infinity();
  double violation = std::numeric_limits<double>::infinity();
};

// Augmented-Lagrangian value and gradient for inequality constraints c <= 0:
// f + (rho/2) sum_i ( max(0, lambda_i/rho + c_i)^2 - (lambda_i/rho)^2 ).
class AugmentedLagrangian {
 public:
  AugmentedLagrangian(const ChanceProblem& problem, const Vector& multipliers, double rho)
      : problem_(problem), multipliers_(multipliers), rho_(rho) {}

  double value(const Vector& x) const {
    const double f = problem_.objective_value(x);
    problem_.constraint_values(x, scratch_);
    double penalty = 0.0;
    for (Index i = 0; i < scratch_.size(); ++i) {
      const double shifted = multipliers_[i] / rho_ + scratch_[i];
      if (shifted > 0.0) penalty += shifted * shifted;
      penalty -= (multipliers_[i] / rho_) * (multipliers_[i] / rho_);
    }
    return f + 0.5 * rho_ * penalty;
  }

  double value_and_gradient(const Vector& x, Vector& gradient) const {
    double f;
    problem_.objective_with_gradient(x, f, gradient);
    problem_.constraints_with_gradient(x, scratch_, jac_);
    double penalty = 0.0;
    for (Index i = 0; i < scratch_.size(); ++i) {
      const double shifted = multipliers_[i] / rho_ + scratch_[i];
      if (shifted > 0.0) {
        penalty += shifted * shifted;
        gradient += rho_ * shifted * jac_.row(i).transpose();
      }
      penalty -= (multipliers_[i] / rho_) * (multipliers_[i] / rho_);
    }
    return f + 0.5 * rho_ * penalty;
  }

 private:
  const ChanceProblem& problem_;
  const Vector& multipliers_;
  double rho_;
  mutable Vector scratch_;
  mutable Matrix jac_;
};

// Projected gradient descent with Barzilai-Borwein steps and Armijo backtracking.
Vector minimize_box(const AugmentedLagrangian& lagrangian, Vector x, const Vector& lo,
                    const Vector& hi, double tol, int max_iter) {
  Vector gradient, prev_x, prev_gradient;
  double value = lagrangian.value_and_gradient(x, gradient);
  double step = 1.0 / (1.0 + gradient.norm());
  for (int iter = 0; iter < max_iter; ++iter) {
    const Vector projected = (x - gradient).cwiseMax(lo).cwiseMin(hi);
    if ((projected - x).lpNorm<Eigen::Infinity>() <= tol) break;

    if (iter > 0) {
      const Vector s = x - prev_x;
      const Vector y = gradient - prev_gradient;
      const double sy = s.dot(y);
      if (sy > 1e-300) step = s.dot(s) / sy;
      step = std::min(std::max(step, 1e-12), 1e12);
    }

    double alpha = step;
    Vector candidate;
    double candidate_value = value;
    bool accepted = false;
    for (int bt = 0; bt < 60; ++bt) {
      candidate = (x - alpha * gradient).cwiseMax(lo).cwiseMin(hi);
      candidate_value = lagrangian.value(candidate);
      const double decrease = gradient.dot(x - candidate);
      if (candidate_value <= value - 1e-4 * decrease + 1e-30) {
        accepted = true;
        break;
      }
      alpha *= 0.5;
    }
    if (!accepted) break;
    prev_x = x;
    prev_gradient = gradient;
    x = candidate;
    value = lagrangian.value_and_gradient(x, gradient);
  }
  return x;
}

LocalOutcome solve_from(const ChanceProblem& problem, Vector x, const SolveOptions& options) {
  const Vector lo = problem.lower();
  const Vector hi = problem.upper();
  const int n_con = problem.scalar_constraint_count();
  Vector multipliers = Vector::Zero(n_con);
  double rho = options.penalty_init;
  Vector constraint_values;
  double prev_violation = std::numeric_limits<double>::infinity();
  for (int outer = 0; outer < options.max_outer; ++outer) {
    AugmentedLagrangian lagrangian(problem, multipliers, rho);
    x = minimize_box(lagrangian, std::move(x), lo, hi, options.inner_tol, options.max_inner);
    if (n_con == 0) break;
    problem.constraint_values(x, constraint_values);
    const double violation = std::max(0.0, constraint_values.maxCoeff());
    for (Index i = 0; i < n_con; ++i) {
      multipliers[i] = std::max(0.0, multipliers[i] + rho * constraint_values[i]);
    }
    if (violation <= options.feasibility_tol) break;
    if (violation > 0.25 * prev_violation) rho *= options.penalty_mult;
    prev_violation = violation;
  }
  LocalOutcome outcome;
  outcome.x = x;
  outcome.objective = problem.objective_value(x);
  if (n_con > 0) {
    problem.constraint_values(x, constraint_values);
    outcome.violation = std::max(0.0, constraint_values.maxCoeff());
  } else {
    outcome.violation = 0.0;
  }
  return outcome;
}

}  // namespace

SolveResult solve(const ChanceProblem& problem, const SolveOptions& options) {
  if (options.starts < 1) throw std::invalid_argument("solve: starts must be >= 1");
  const int dim = problem.dim();
  const Vector lo = problem.lower();
  const Vector hi = problem.upper();

  // scrambled Kronecker sequence over the box
  static const double primes[] = {2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37};
  Xoshiro256pp rng(options.seed);
  Vector shift(dim), alpha(dim);
  for (int i = 0; i < dim; ++i) {
    shift[i] = rng.uniform();
    double a = std::sqrt(primes[i % 12]);
    alpha[i] = a - std::floor(a);
  }

  std::vector<LocalOutcome> outcomes(static_cast<size_t>(options.starts));
  parallel_for(
      options.starts,
      [&](Index s) {
        Vector x(dim);
        for (int i = 0; i < dim; ++i) {
          double u = shift[i] + static_cast<double>(s) * alpha[i];
          u -= std::floor(u);
          x[i] = lo[i] + (hi[i] - lo[i]) * u;
        }
        outcomes[static_cast<size_t>(s)] = solve_from(problem, std::move(x), options);
      },
      options.workers);

  SolveResult result;
  result.starts_used = options.starts;
  int best = -1;
  bool best_feasible = false;
  for (int s = 0; s < options.starts; ++s) {
    const auto& out = outcomes[static_cast<size_t>(s)];
    const bool feasible = out.violation <= options.feasibility_tol;
    if (best < 0) {
      best = s;
      best_feasible = feasible;
      continue;
    }
    const auto& incumbent = outcomes[static_cast<size_t>(best)];
    if (feasible && !best_feasible) {
      best = s;
      best_feasible = true;
    } else if (feasible == best_feasible) {
      const bool better = feasible ? out.objective < incumbent.objective
                                   : out.violation < incumbent.violation;
      if (better) best = s;
    }
  }
  const auto& chosen = outcomes[static_cast<size_t>(best)];
  result.x_star = chosen.x;
  result.feasibility_residual = chosen.violation;
  result.objective_value = problem.objective_negated() ? -chosen.objective : chosen.objective;
  result.status = best_feasible ? SolveStatus::feasible_local : SolveStatus::infeasible;
  return result;
}

SolveResult grid_oracle(const ChanceProblem& problem, int points_per_dim) {
  const int dim = problem.dim();
  if (dim > 4) throw std::invalid_argument("grid_oracle: design dimension above 4");
  if (points_per_dim < 2) throw std::invalid_argument("grid_oracle: need >= 2 points per dim");
  const double total = std::pow(static_cast<double>(points_per_dim), dim);
  if (total > 5e6) throw std::invalid_argument("grid_oracle: evaluation budget exceeded");

  const Vector lo = problem.lower();
  const Vector hi = problem.upper();
  const Index count = static_cast<Index>(total + 0.5);

  SolveResult result;
  result.starts_used = 0;
  double best_objective = std::numeric_limits<double>::infinity();
  double least_violation = std::numeric_limits<double>::infinity();
  Vector best_x, least_x;
  Vector x(dim), constraint_values;
  for (Index k = 0; k < count; ++k) {
    Index rem = k;
    for (int i = 0; i < dim; ++i) {
      const Index pos = rem % points_per_dim;
      rem /= points_per_dim;
      x[i] = lo[i] + (hi[i] - lo[i]) * static_cast<double>(pos) /
                         static_cast<double>(points_per_dim - 1);
    }
    double violation = 0.0;
    if (problem.scalar_constraint_count() > 0) {
      problem.constraint_values(x, constraint_values);
      violation = std::max(0.0, constraint_values.maxCoeff());
    }
    if (violation <= 1e-6) {
      const double objective = problem.objective_value(x);
      if (objective < best_objective) {
        best_objective = objective;
        best_x = x;
      }
    } else if (violation < least_violation) {
      least_violation = violation;
      least_x = x;
    }
  }
  if (best_x.size() > 0) {
    result.x_star = best_x;
    result.objective_value = problem.objective_negated() ? -best_objective : best_objective;
    result.feasibility_residual = 0.0;
    result.status = SolveStatus::feasible_local;
  } else {
    result.x_star = least_x;
    result.objective_value = std::numeric_limits<double>::quiet_NaN();
    result.feasibility_residual = least_violation;
    result.status = SolveStatus::infeasible;
  }
  return result;
}

}  // namespace ccyopt
