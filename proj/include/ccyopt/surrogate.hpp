#pragma once

#include <memory>
#include <string>
#include <vector>

#include "ccyopt/quadrature.hpp"

namespace ccyopt {

// Polynomial-chaos surrogate y_i(x, xi) ~= sum c^i_{alpha,beta} Phi_alpha(x)
// Psi_beta(xi) over all pairs with |alpha| + |beta| <= p, one coefficient
// column per simulator metric. Fitted by weighted projection on a quadrature
// rule; the summation order is fixed so refits are bit-reproducible.
class SurrogateModel {
 public:
  SurrogateModel(std::shared_ptr<const LegendreBasis> design_basis,
                 std::shared_ptr<const GramSchmidtBasis> noise_basis, int order,
                 std::vector<std::string> metric_names);

  // c^i_{alpha,beta} = sum_k y_i(x_k, xi_k) Phi_alpha(x_k) Psi_beta(xi_k) w_k,
  // with `outputs` holding one metric row per quadrature point.
  static SurrogateModel fit(const QuadratureRule& rule,
                            const Matrix& outputs,
                            std::shared_ptr<const LegendreBasis> design_basis,
                            std::shared_ptr<const GramSchmidtBasis> noise_basis, int order,
                            std::vector<std::string> metric_names);

  int order() const { return order_; }
  int design_dim() const { return design_basis_->dim(); }
  int noise_dim() const { return noise_basis_->dim(); }
  Index pair_count() const { return static_cast<Index>(pairs_.size()); }
  int metric_count() const { return static_cast<int>(metric_names_.size()); }
  const std::vector<std::string>& metric_names() const { return metric_names_; }
  Index simulation_count() const { return simulation_count_; }
  const LegendreBasis& design_basis() const { return *design_basis_; }
  const GramSchmidtBasis& noise_basis() const { return *noise_basis_; }
  std::shared_ptr<const LegendreBasis> design_basis_ptr() const { return design_basis_; }

  // Coefficient table: pair_count() x metric_count().
  const Matrix& coefficients() const { return coefficients_; }
  Matrix& coefficients() { return coefficients_; }
  void set_simulation_count(Index count) { simulation_count_ = count; }

  // Pair (position of alpha in the design basis ordering, position of beta in
  // the noise basis ordering) for each coefficient row.
  const std::vector<std::pair<Index, Index>>& pairs() const { return pairs_; }

  double evaluate(int metric, const Vector& x, const Vector& xi) const;

  // E_xi[y_metric](x) as coefficients over Phi_alpha, |alpha| <= p
  // (positions align with the design-basis graded-lex ordering).
  Vector mean_in_x(int metric) const;

  // var_xi[y_metric](x) = sum_beta ( g_beta(x) )^2; row per nonzero beta with
  // the coefficients of g_beta over Phi_alpha.
  Matrix variance_inner(int metric) const;

 private:
  std::shared_ptr<const LegendreBasis> design_basis_;
  std::shared_ptr<const GramSchmidtBasis> noise_basis_;
  int order_;
  MultiIndexSet pair_set_;                       // dim d1+d2, order p
  std::vector<std::pair<Index, Index>> pairs_;
  std::vector<std::string> metric_names_;
  Matrix coefficients_;
  Index simulation_count_ = 0;
};

}  // namespace ccyopt
