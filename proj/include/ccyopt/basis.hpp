#pragma once

#include <utility>
#include <vector>

#include "ccyopt/gaussian_mixture.hpp"
#include "ccyopt/multi_index.hpp"
#include "ccyopt/types.hpp"

namespace ccyopt {

// Tensor-product Legendre basis, orthonormal under the uniform probability
// density on a box: E[Phi_a Phi_b] = delta_ab with the expectation taken over
// U([a1,b1] x ... x [ad,bd]). The 1-D factors are sqrt(2k+1) P_k(t) on the
// affinely mapped interval.
class LegendreBasis {
 public:
  LegendreBasis(std::vector<std::pair<double, double>> bounds, int order);

  int dim() const { return static_cast<int>(bounds_.size()); }
  int order() const { return order_; }
  const MultiIndexSet& indices() const { return indices_; }
  const std::vector<std::pair<double, double>>& bounds() const { return bounds_; }
  Vector lower() const;
  Vector upper() const;

  // Values of every Phi_alpha at x, ordered as indices(). Entry 0 is 1.
  Vector evaluate(const Vector& x) const;
  void evaluate(const Vector& x, Vector& values) const;

  // Values plus d/dx_i gradients (size() x dim).
  void evaluate_with_gradient(const Vector& x, Vector& values, Matrix& gradients) const;

  // 1-D orthonormal factor phi_k for dimension i, exposed for tests.
  double evaluate_1d(int i, int k, double x) const;

 private:
  void tabulate_1d(const Vector& x, Matrix& values, Matrix* derivatives) const;

  std::vector<std::pair<double, double>> bounds_;
  int order_;
  MultiIndexSet indices_;
};

// Polynomials orthonormal under a Gaussian-mixture measure, built by
// Gram-Schmidt over graded-lex monomials with analytically computed mixture
// moments. coefficients() is lower triangular; Psi_1 = 1 exactly.
class GramSchmidtBasis {
 public:
  GramSchmidtBasis(const GaussianMixture& measure, int order);

  int dim() const { return indices_.dim(); }
  int order() const { return order_; }
  const MultiIndexSet& indices() const { return indices_; }
  const GaussianMixture& measure() const { return measure_; }

  // Psi_j expressed over monomials: row j holds the monomial coefficients.
  const Matrix& coefficients() const { return coefficients_; }

  // max_{i,j} |E[Psi_i Psi_j] - delta_ij| under the analytic moments.
  double gram_residual() const { return gram_residual_; }

  Vector evaluate(const Vector& xi) const;
  void evaluate(const Vector& xi, Vector& values) const;
  void evaluate_with_gradient(const Vector& xi, Vector& values, Matrix& gradients) const;

 private:
  void monomials(const Vector& xi, Vector& values, Matrix* derivatives) const;

  int order_;
  MultiIndexSet indices_;
  GaussianMixture measure_;
  Matrix coefficients_;
  double gram_residual_;
};

}  // namespace ccyopt
