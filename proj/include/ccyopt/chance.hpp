#pragma once

#include <memory>
#include <vector>

#include "ccyopt/surrogate.hpp"

namespace ccyopt {

// kappa_eps = sqrt((1-eps)/eps); valid for 0 < eps <= 0.5 so kappa >= 1.
double kappa(double epsilon);

struct ChanceConstraintSpec {
  int metric = 0;
  bool upper_bound = true;   // y <= threshold; false means y >= threshold
  double threshold = 0.0;
  double epsilon = 0.05;
};

struct ChanceObjectiveSpec {
  int metric = 0;
  bool maximize = true;
};

struct ChanceSpec {
  std::vector<ChanceConstraintSpec> constraints;
  ChanceObjectiveSpec objective;
  bool bonferroni = false;  // divide each epsilon by the constraint count
};

// The deterministic polynomial program: minimize the mean objective over the
// box subject to, per constraint i,
//   kappa_i^2 sum_beta g_{i,beta}(x)^2 <= (u_i - m_i(x))^2   and   m_i(x) <= u_i,
// every polynomial expressed over the shared design Legendre basis. Lower
// bound metrics enter negated, so Cantelli applies in one direction only.
class ChanceProblem {
 public:
  struct Constraint {
    Vector mean;        // m_i coefficients over Phi_alpha
    Matrix var_inner;   // row per beta != 0: g_{i,beta} coefficients
    double threshold = 0.0;
    double kappa = 1.0;
    double scale = 1.0;       // constraint values are divided by this
    bool mean_only = false;   // drop the variance side (Eq. mean-relaxation)
  };

  ChanceProblem(std::shared_ptr<const LegendreBasis> basis, Vector objective,
                bool objective_negated, std::vector<Constraint> constraints);

  const LegendreBasis& basis() const { return *basis_; }
  std::shared_ptr<const LegendreBasis> basis_ptr() const { return basis_; }
  int dim() const { return basis_->dim(); }
  Vector lower() const { return basis_->lower(); }
  Vector upper() const { return basis_->upper(); }
  const std::vector<Constraint>& constraints() const { return constraints_; }
  const Vector& objective_coefficients() const { return objective_; }
  bool objective_negated() const { return objective_negated_; }

  // Number of scalar inequality constraints in <= 0 form (two per chance
  // constraint, one per mean-only constraint).
  int scalar_constraint_count() const;

  // Internal minimization objective; to report in the user's sense negate
  // when objective_negated().
  double objective_value(const Vector& x) const;
  void objective_with_gradient(const Vector& x, double& value, Vector& gradient) const;

  // Scaled constraint values c_j(x) <= 0 and gradients.
  void constraint_values(const Vector& x, Vector& values) const;
  void constraints_with_gradient(const Vector& x, Vector& values, Matrix& gradients) const;

 private:
  std::shared_ptr<const LegendreBasis> basis_;
  Vector objective_;
  bool objective_negated_;
  std::vector<Constraint> constraints_;
};

// Builds the Cantelli-reformulated program from fitted surrogates.
ChanceProblem assemble(const SurrogateModel& model, const ChanceSpec& spec);

// Baseline with the chance constraints replaced by mean constraints only.
ChanceProblem mean_only_assemble(const SurrogateModel& model, const ChanceSpec& spec);

}  // namespace ccyopt
