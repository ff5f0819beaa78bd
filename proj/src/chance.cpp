#include "ccyopt/chance.hpp"

#include <cmath>

namespace ccyopt {

double kappa(double epsilon) {
  if (!(epsilon > 0.0) || epsilon > 0.5) {
    throw ConfigError("kappa: risk level must lie in (0, 0.5]");
  }
  return std::sqrt((1.0 - epsilon) / epsilon);
}

ChanceProblem::ChanceProblem(std::shared_ptr<const LegendreBasis> basis, Vector objective,
                             bool objective_negated, std::vector<Constraint> constraints)
    : basis_(std::move(basis)),
      objective_(std::move(objective)),
      objective_negated_(objective_negated),
      constraints_(std::move(constraints)) {}

int ChanceProblem::scalar_constraint_count() const {
  int count = 0;
  for (const auto& con : constraints_) count += con.mean_only ? 1 : 2;
  return count;
}

double ChanceProblem::objective_value(const Vector& x) const {
  Vector phi;
  basis_->evaluate(x, phi);
  return objective_.dot(phi.head(objective_.size()));
}

void ChanceProblem::objective_with_gradient(const Vector& x, double& value,
                                            Vector& gradient) const {
  Vector phi;
  Matrix dphi;
  basis_->evaluate_with_gradient(x, phi, dphi);
  value = objective_.dot(phi.head(objective_.size()));
  gradient = dphi.topRows(objective_.size()).transpose() * objective_;
}

void ChanceProblem::constraint_values(const Vector& x, Vector& values) const {
  Vector phi;
  basis_->evaluate(x, phi);
  values.resize(scalar_constraint_count());
  Index j = 0;
  for (const auto& con : constraints_) {
    const double mean = con.mean.dot(phi.head(con.mean.size()));
    const double slack = con.threshold - mean;
    values[j++] = (mean - con.threshold) / con.scale;
    if (con.mean_only) continue;
    const Vector inner = con.var_inner * phi.head(con.var_inner.cols());
    values[j++] = (con.kappa * con.kappa * inner.squaredNorm() - slack * slack) / con.scale;
  }
}

void ChanceProblem::constraints_with_gradient(const Vector& x, Vector& values,
                                              Matrix& gradients) const {
  Vector phi;
  Matrix dphi;
  basis_->evaluate_with_gradient(x, phi, dphi);
  values.resize(scalar_constraint_count());
  gradients.resize(scalar_constraint_count(), dim());
  Index j = 0;
  for (const auto& con : constraints_) {
    const Index nm = con.mean.size();
    const double mean = con.mean.dot(phi.head(nm));
    const Vector mean_grad = dphi.topRows(nm).transpose() * con.mean;
    const double slack = con.threshold - mean;
    values[j] = (mean - con.threshold) / con.scale;
    gradients.row(j) = mean_grad.transpose() / con.scale;
    ++j;
    if (con.mean_only) continue;
    const Index nv = con.var_inner.cols();
    const Vector inner = con.var_inner * phi.head(nv);
    const Matrix inner_grad = con.var_inner * dphi.topRows(nv);  // rows x dim
    values[j] = (con.kappa * con.kappa * inner.squaredNorm() - slack * slack) / con.scale;
    gradients.row(j) =
        (2.0 * con.kappa * con.kappa * (inner_grad.transpose() * inner) + 2.0 * slack * mean_grad)
            .transpose() /
        con.scale;
    ++j;
  }
}

namespace {

ChanceProblem assemble_impl(const SurrogateModel& model, const ChanceSpec& spec,
                            bool mean_only) {
  for (const auto& con : spec.constraints) {
    if (con.metric < 0 || con.metric >= model.metric_count()) {
      throw ConfigError("assemble: constraint metric index out of range");
    }
  }
  if (spec.objective.metric < 0 || spec.objective.metric >= model.metric_count()) {
    throw ConfigError("assemble: objective metric index out of range");
  }

  Vector objective = model.mean_in_x(spec.objective.metric);
  if (spec.objective.maximize) objective = -objective;

  const double eps_divisor = spec.bonferroni ? static_cast<double>(spec.constraints.size()) : 1.0;
  std::vector<ChanceProblem::Constraint> constraints;
  constraints.reserve(spec.constraints.size());
  for (const auto& con : spec.constraints) {
    ChanceProblem::Constraint built;
    const double sign = con.upper_bound ? 1.0 : -1.0;  // canonical form y <= u
    built.mean = sign * model.mean_in_x(con.metric);
    built.var_inner = sign * model.variance_inner(con.metric);
    built.threshold = sign * con.threshold;
    built.kappa = kappa(con.epsilon / eps_divisor);
    built.scale = std::max(1.0, std::abs(built.threshold));
    built.mean_only = mean_only;
    constraints.push_back(std::move(built));
  }
  return ChanceProblem(model.design_basis_ptr(), std::move(objective), spec.objective.maximize,
                       std::move(constraints));
}

}  // namespace

ChanceProblem assemble(const SurrogateModel& model, const ChanceSpec& spec) {
  return assemble_impl(model, spec, false);
}

ChanceProblem mean_only_assemble(const SurrogateModel& model, const ChanceSpec& spec) {
  return assemble_impl(model, spec, true);
}

}  // namespace ccyopt
