#include "ccyopt/gaussian_mixture.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>
#include <cmath>

#include "ccyopt/rng.hpp"

namespace ccyopt {

GaussianMixture::GaussianMixture(std::vector<MixtureComponent> components)
    : components_(std::move(components)) {
  if (components_.empty()) throw ConfigError("mixture: at least one component required");
  dim_ = static_cast<int>(components_[0].mean.size());
  double weight_sum = 0.0;
  for (const auto& comp : components_) {
    if (comp.weight < 0.0) throw ConfigError("mixture: negative component weight");
    weight_sum += comp.weight;
    if (comp.mean.size() != dim_ || comp.covariance.rows() != dim_ ||
        comp.covariance.cols() != dim_) {
      throw ConfigError("mixture: inconsistent component dimensions");
    }
    if (!comp.covariance.isApprox(comp.covariance.transpose(), 1e-12)) {
      throw ConfigError("mixture: covariance not symmetric");
    }
    Eigen::SelfAdjointEigenSolver<Matrix> eig(comp.covariance);
    if (eig.eigenvalues().minCoeff() <= 0.0) {
      throw ConfigError("mixture: covariance not positive definite");
    }
  }
  if (std::abs(weight_sum - 1.0) > 1e-12) {
    throw ConfigError("mixture: weights must sum to 1");
  }

  const double log2pi = std::log(2.0 * 3.14159265358979323846);
  for (const auto& comp : components_) {
    Eigen::LLT<Matrix> llt(comp.covariance);
    cholesky_.push_back(llt.matrixL());
    double logdet = 0.0;
    for (int i = 0; i < dim_; ++i) logdet += 2.0 * std::log(cholesky_.back()(i, i));
    log_norm_.push_back(-0.5 * (dim_ * log2pi + logdet));
    cov_inverse_.push_back(comp.covariance.inverse());
  }
}

double GaussianMixture::density(const Vector& xi) const {
  if (xi.size() != dim_) throw std::invalid_argument("density: dimension mismatch");
  double value = 0.0;
  for (size_t c = 0; c < components_.size(); ++c) {
    const Vector centered = xi - components_[c].mean;
    const double quad = centered.dot(cov_inverse_[c] * centered);
    value += components_[c].weight * std::exp(log_norm_[c] - 0.5 * quad);
  }
  return value;
}

Matrix GaussianMixture::sample(Index count, std::uint64_t seed) const {
  if (count < 1) throw std::invalid_argument("sample: count must be >= 1");
  Xoshiro256pp rng(seed);
  Matrix out(count, dim_);
  Vector normals(dim_);
  for (Index i = 0; i < count; ++i) {
    const double u = rng.uniform();
    size_t comp = components_.size() - 1;
    double cumulative = 0.0;
    for (size_t c = 0; c < components_.size(); ++c) {
      cumulative += components_[c].weight;
      if (u < cumulative) {
        comp = c;
        break;
      }
    }
    for (int j = 0; j < dim_; ++j) normals[j] = rng.normal();
    out.row(i) = (components_[comp].mean + cholesky_[comp] * normals).transpose();
  }
  return out;
}

double GaussianMixture::raw_moment(const IntVector& beta) const {
  if (beta.size() != dim_) throw std::invalid_argument("raw_moment: dimension mismatch");
  const int order = beta.sum();
  MultiIndexSet set(dim_, order);
  const Vector table = raw_moments(set);
  const Index pos = set.find(beta);
  return table[pos];
}

Vector GaussianMixture::raw_moments(const MultiIndexSet& set) const {
  if (set.dim() != dim_) throw std::invalid_argument("raw_moments: dimension mismatch");
  const Index n = set.size();
  // position lookup for beta - e_i within the same graded-lex set
  Vector total = Vector::Zero(n);
  Vector comp_moments(n);
  IntVector gamma(dim_);
  for (const auto& comp : components_) {
    comp_moments[0] = 1.0;
    for (Index i = 1; i < n; ++i) {
      // write beta = gamma + e_k with k the first positive coordinate
      int k = 0;
      while (set[i][k] == 0) ++k;
      gamma = set[i].transpose();
      gamma[k] -= 1;
      const Index gpos = set.find(gamma);
      double value = comp.mean[k] * comp_moments[gpos];
      for (int j = 0; j < dim_; ++j) {
        if (gamma[j] == 0) continue;
        gamma[j] -= 1;
        const Index g2 = set.find(gamma);
        gamma[j] += 1;
        value += comp.covariance(k, j) * gamma[j] * comp_moments[g2];
      }
      comp_moments[i] = value;
    }
    total += comp.weight * comp_moments;
  }
  return total;
}

Vector GaussianMixture::mean() const {
  Vector mu = Vector::Zero(dim_);
  for (const auto& comp : components_) mu += comp.weight * comp.mean;
  return mu;
}

Matrix GaussianMixture::covariance() const {
  const Vector mu = mean();
  Matrix cov = Matrix::Zero(dim_, dim_);
  for (const auto& comp : components_) {
    cov += comp.weight * (comp.covariance + comp.mean * comp.mean.transpose());
  }
  return cov - mu * mu.transpose();
}

}  // namespace ccyopt
