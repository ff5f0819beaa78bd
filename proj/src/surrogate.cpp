#include "ccyopt/surrogate.hpp"

#include <cmath>

namespace ccyopt {

SurrogateModel::SurrogateModel(std::shared_ptr<const LegendreBasis> design_basis,
                               std::shared_ptr<const GramSchmidtBasis> noise_basis, int order,
                               std::vector<std::string> metric_names)
    : design_basis_(std::move(design_basis)),
      noise_basis_(std::move(noise_basis)),
      order_(order),
      pair_set_(design_basis_->dim() + noise_basis_->dim(), order),
      metric_names_(std::move(metric_names)) {
  if (design_basis_->order() < order_ || noise_basis_->order() < order_) {
    throw std::invalid_argument("SurrogateModel: basis order below surrogate order");
  }
  const int d1 = design_basis_->dim();
  const int d2 = noise_basis_->dim();
  IntVector alpha(d1), beta(d2);
  pairs_.reserve(static_cast<size_t>(pair_set_.size()));
  for (Index g = 0; g < pair_set_.size(); ++g) {
    alpha = pair_set_[g].head(d1).transpose();
    beta = pair_set_[g].tail(d2).transpose();
    pairs_.emplace_back(design_basis_->indices().find(alpha), noise_basis_->indices().find(beta));
  }
  coefficients_ = Matrix::Zero(pair_count(), metric_count());
}

SurrogateModel SurrogateModel::fit(const QuadratureRule& rule, const Matrix& outputs,
                                   std::shared_ptr<const LegendreBasis> design_basis,
                                   std::shared_ptr<const GramSchmidtBasis> noise_basis,
                                   int order, std::vector<std::string> metric_names) {
  if (outputs.rows() != rule.size()) {
    throw std::invalid_argument("SurrogateModel::fit: one output row per quadrature point required");
  }
  for (Index k = 0; k < outputs.rows(); ++k) {
    if (!outputs.row(k).allFinite()) {
      throw SimulationError("SurrogateModel::fit: non-finite simulator output at quadrature point " +
                            std::to_string(k));
    }
  }
  SurrogateModel model(std::move(design_basis), std::move(noise_basis), order,
                       std::move(metric_names));
  if (static_cast<int>(outputs.cols()) != model.metric_count()) {
    throw std::invalid_argument("SurrogateModel::fit: metric count mismatch");
  }

  const int d1 = model.design_dim();
  const int d2 = model.noise_dim();
  Vector phi, psi;
  Vector pair_values(model.pair_count());
  for (Index k = 0; k < rule.size(); ++k) {
    model.design_basis_->evaluate(rule.points.row(k).head(d1).transpose(), phi);
    model.noise_basis_->evaluate(rule.points.row(k).tail(d2).transpose(), psi);
    for (Index g = 0; g < model.pair_count(); ++g) {
      const auto& [ia, ib] = model.pairs_[static_cast<size_t>(g)];
      pair_values[g] = phi[ia] * psi[ib];
    }
    model.coefficients_.noalias() += rule.weights[k] * pair_values * outputs.row(k);
  }
  model.simulation_count_ = rule.size();
  return model;
}

double SurrogateModel::evaluate(int metric, const Vector& x, const Vector& xi) const {
  Vector phi, psi;
  design_basis_->evaluate(x, phi);
  noise_basis_->evaluate(xi, psi);
  double value = 0.0;
  for (Index g = 0; g < pair_count(); ++g) {
    const auto& [ia, ib] = pairs_[static_cast<size_t>(g)];
    value += coefficients_(g, metric) * phi[ia] * psi[ib];
  }
  return value;
}

Vector SurrogateModel::mean_in_x(int metric) const {
  Vector mean = Vector::Zero(MultiIndexSet::count(design_dim(), order_));
  for (Index g = 0; g < pair_count(); ++g) {
    const auto& [ia, ib] = pairs_[static_cast<size_t>(g)];
    if (ib == 0) mean[ia] += coefficients_(g, metric);
  }
  return mean;
}

Matrix SurrogateModel::variance_inner(int metric) const {
  const Index design_count = MultiIndexSet::count(design_dim(), order_);
  const Index noise_count = MultiIndexSet::count(noise_dim(), order_);
  Matrix inner = Matrix::Zero(noise_count - 1, design_count);
  for (Index g = 0; g < pair_count(); ++g) {
    const auto& [ia, ib] = pairs_[static_cast<size_t>(g)];
    if (ib == 0) continue;
    inner(ib - 1, ia) += coefficients_(g, metric);
  }
  return inner;
}

}  // namespace ccyopt
