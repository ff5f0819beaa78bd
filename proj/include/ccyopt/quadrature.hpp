#pragma once

#include <cstdint>
#include <vector>

#include "ccyopt/basis.hpp"
#include "ccyopt/types.hpp"

namespace ccyopt {

// Points and nonnegative weights matching the expectations of a set of basis
// functions. Either block of the point matrix may be empty (stage-1 rules
// carry only design columns, stage-2 rules only noise columns).
struct QuadratureRule {
  Matrix points;       // M x (design_dim + noise_dim)
  Vector weights;      // M, all >= 0
  double residual_l1 = 0.0;
  int order = 0;       // p
  int design_dim = 0;
  int noise_dim = 0;
  bool warning_capped = false;  // pruning stopped above the theoretical upper bound

  Index size() const { return points.rows(); }
};

// The moment-matching equations sum_k B_j(p_k) w_k = E[B_j] = delta_1j, where
// B_j runs over design-basis functions, noise-basis functions, or products
// Phi_alpha(x) Psi_beta(xi) with |alpha|+|beta| <= 2p for the joint rule.
class MomentSystem {
 public:
  static MomentSystem design(const LegendreBasis& basis, int p);
  static MomentSystem noise(const GramSchmidtBasis& basis, const GaussianMixture& mixture,
                            int p);
  static MomentSystem joint(const LegendreBasis& design_basis,
                            const GramSchmidtBasis& noise_basis,
                            const GaussianMixture& mixture, int p);

  Index rows() const { return static_cast<Index>(pairs_.size()); }
  int point_dim() const { return design_dim_ + noise_dim_; }
  int design_dim() const { return design_dim_; }
  int noise_dim() const { return noise_dim_; }
  int order() const { return order_; }

  // Projection box for the point step: the design block stays inside the
  // basis box, the noise block inside the mixture's mean +/- 6 sigma box.
  const Vector& lower() const { return lower_; }
  const Vector& upper() const { return upper_; }

  void row_values(const Vector& point, Vector& out) const;
  void row_values_with_gradient(const Vector& point, Vector& out, Matrix& grad) const;

  // rows() x M matrix of basis values, column per point.
  Matrix vandermonde(const Matrix& points) const;

  // Right-hand side of the moment equations: e_1.
  Vector target() const;

 private:
  MomentSystem() = default;

  const LegendreBasis* design_basis_ = nullptr;
  const GramSchmidtBasis* noise_basis_ = nullptr;
  std::vector<std::pair<Index, Index>> pairs_;  // (design index, noise index)
  int design_dim_ = 0;
  int noise_dim_ = 0;
  int order_ = 0;
  Vector lower_, upper_;
};

struct BcdOptions {
  double rel_decrease_tol = 1e-10;  // stop when the squared residual stalls
  int max_outer = 500;
  int max_damping_tries = 12;
};

struct BcdResult {
  Matrix points;
  Vector weights;
  double residual_sq = 0.0;
  double residual_l1 = 0.0;
  int outer_iterations = 0;
  std::vector<double> residual_history;  // squared residual after each outer pass
};

// min ||A x - b||^2 subject to x >= 0 (active-set method with warm start).
Vector nnls(const Matrix& A, const Vector& b, const Vector* warm_start = nullptr);

// Alternates an exact nonnegative-least-squares weight step with damped
// Gauss-Newton moves of one point at a time, projected into the box. The
// squared residual is non-increasing across outer iterations.
BcdResult bcd_solve(const MomentSystem& system, Matrix points, Vector weights,
                    const BcdOptions& options = {});

struct QuadratureOptions {
  double design_tol_sq = 1e-16;   // stage-1 squared-residual requirement
  double noise_tol_sq = 1e-14;    // stage-2 squared-residual requirement
  double joint_l1_tol = 1e-6;     // joint-rule l1 requirement
  double weight_prune_tol = 1e-6; // eager deletion below this fraction of max weight
  std::uint64_t seed = 20230815;  // stage-2 candidate draws
  int candidate_factor = 10;      // candidates per moment equation in stage 2
  double tensor_budget = 1e4;     // stage-1 tensor grid cap; Smolyak beyond it
  BcdOptions bcd;                 // initial full solve
  int prune_max_outer = 80;       // BCD cap during prune re-solves
};

QuadratureRule design_rule(const LegendreBasis& basis, int p,
                           const QuadratureOptions& options = {});
QuadratureRule noise_rule(const GramSchmidtBasis& basis, const GaussianMixture& mixture,
                          int p, const QuadratureOptions& options = {});
QuadratureRule joint_rule(const QuadratureRule& design, const QuadratureRule& noise,
                          const LegendreBasis& design_basis,
                          const GramSchmidtBasis& noise_basis,
                          const GaussianMixture& mixture, int p,
                          const QuadratureOptions& options = {});

// Deletes the smallest-weight point, re-solves, and keeps the deletion while
// the l1 residual stays within tolerance; never goes below `floor` points.
QuadratureRule prune(const MomentSystem& system, QuadratureRule rule, double weight_tol,
                     double l1_tol, Index floor, const BcdOptions& options = {});

// l1 moment defect of a rule, recomputed from its stored points and weights.
double residual_l1(const MomentSystem& system, const Matrix& points, const Vector& weights);

}  // namespace ccyopt
