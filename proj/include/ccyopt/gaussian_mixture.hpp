#pragma once

#include <cstdint>
#include <vector>

#include "ccyopt/multi_index.hpp"
#include "ccyopt/types.hpp"

namespace ccyopt {

struct MixtureComponent {
  double weight = 0.0;
  Vector mean;
  Matrix covariance;
};

// Weighted sum of multivariate Gaussians. Immutable after construction;
// sampling takes an explicit seed so parallel callers use split streams.
class GaussianMixture {
 public:
  explicit GaussianMixture(std::vector<MixtureComponent> components);

  int dim() const { return dim_; }
  const std::vector<MixtureComponent>& components() const { return components_; }

  double density(const Vector& xi) const;

  // count x dim matrix of i.i.d. draws; bitwise reproducible for a fixed seed.
  Matrix sample(Index count, std::uint64_t seed) const;

  // E[prod_i xi_i^beta_i] via the per-component Gaussian moment recurrence
  // m_{beta+e_i} = mu_i m_beta + sum_j Sigma_ij beta_j m_{beta-e_j}.
  double raw_moment(const IntVector& beta) const;

  // Table of raw moments for every index of `set` (one recurrence pass).
  Vector raw_moments(const MultiIndexSet& set) const;

  Vector mean() const;
  Matrix covariance() const;

 private:
  int dim_;
  std::vector<MixtureComponent> components_;
  std::vector<Matrix> cholesky_;        // lower factors, one per component
  std::vector<double> log_norm_;        // -0.5*log(det(2*pi*Sigma))
  std::vector<Matrix> cov_inverse_;
};

}  // namespace ccyopt
