#include "ccyopt/basis.hpp"

#include <cmath>

namespace ccyopt {

LegendreBasis::LegendreBasis(std::vector<std::pair<double, double>> bounds, int order)
    : bounds_(std::move(bounds)),
      order_(order),
      indices_(static_cast<int>(bounds_.size()), order) {
  for (const auto& [lo, hi] : bounds_) {
    if (!(lo < hi)) throw std::invalid_argument("LegendreBasis: degenerate interval");
  }
}

Vector LegendreBasis::lower() const {
  Vector lo(dim());
  for (int i = 0; i < dim(); ++i) lo[i] = bounds_[static_cast<size_t>(i)].first;
  return lo;
}

Vector LegendreBasis::upper() const {
  Vector hi(dim());
  for (int i = 0; i < dim(); ++i) hi[i] = bounds_[static_cast<size_t>(i)].second;
  return hi;
}

void LegendreBasis::tabulate_1d(const Vector& x, Matrix& values, Matrix* derivatives) const {
  const int d = dim();
  values.resize(d, order_ + 1);
  if (derivatives) derivatives->resize(d, order_ + 1);
  for (int i = 0; i < d; ++i) {
    const auto [lo, hi] = bounds_[static_cast<size_t>(i)];
    const double t = (2.0 * x[i] - lo - hi) / (hi - lo);
    const double dt_dx = 2.0 / (hi - lo);
    values(i, 0) = 1.0;
    if (derivatives) (*derivatives)(i, 0) = 0.0;
    if (order_ >= 1) {
      values(i, 1) = t;
      if (derivatives) (*derivatives)(i, 1) = 1.0;
    }
    for (int k = 1; k < order_; ++k) {
      values(i, k + 1) = ((2 * k + 1) * t * values(i, k) - k * values(i, k - 1)) / (k + 1);
      if (derivatives) {
        // P'_{k+1} = (2k+1) P_k + P'_{k-1}
        (*derivatives)(i, k + 1) = (2 * k + 1) * values(i, k) + (*derivatives)(i, k - 1);
      }
    }
    for (int k = 0; k <= order_; ++k) {
      const double scale = std::sqrt(2.0 * k + 1.0);
      values(i, k) *= scale;
      if (derivatives) (*derivatives)(i, k) *= scale * dt_dx;
    }
  }
}

Vector LegendreBasis::evaluate(const Vector& x) const {
  Vector values;
  evaluate(x, values);
  return values;
}

void LegendreBasis::evaluate(const Vector& x, Vector& values) const {
  if (x.size() != dim()) throw std::invalid_argument("LegendreBasis: dimension mismatch");
  Matrix table;
  tabulate_1d(x, table, nullptr);
  values.resize(indices_.size());
  for (Index j = 0; j < indices_.size(); ++j) {
    double prod = 1.0;
    for (int i = 0; i < dim(); ++i) prod *= table(i, indices_[j][i]);
    values[j] = prod;
  }
}

void LegendreBasis::evaluate_with_gradient(const Vector& x, Vector& values,
                                           Matrix& gradients) const {
  if (x.size() != dim()) throw std::invalid_argument("LegendreBasis: dimension mismatch");
  Matrix table, dtable;
  tabulate_1d(x, table, &dtable);
  values.resize(indices_.size());
  gradients.resize(indices_.size(), dim());
  for (Index j = 0; j < indices_.size(); ++j) {
    double prod = 1.0;
    for (int i = 0; i < dim(); ++i) prod *= table(i, indices_[j][i]);
    values[j] = prod;
    for (int i = 0; i < dim(); ++i) {
      double g = dtable(i, indices_[j][i]);
      for (int k = 0; k < dim(); ++k) {
        if (k != i) g *= table(k, indices_[j][k]);
      }
      gradients(j, i) = g;
    }
  }
}

double LegendreBasis::evaluate_1d(int i, int k, double x) const {
  const auto [lo, hi] = bounds_[static_cast<size_t>(i)];
  const double t = (2.0 * x - lo - hi) / (hi - lo);
  double prev = 1.0, curr = t;
  if (k == 0) return 1.0;
  for (int m = 1; m < k; ++m) {
    const double next = ((2 * m + 1) * t * curr - m * prev) / (m + 1);
    prev = curr;
    curr = next;
  }
  return std::sqrt(2.0 * k + 1.0) * curr;
}

GramSchmidtBasis::GramSchmidtBasis(const GaussianMixture& measure, int order)
    : order_(order), indices_(measure.dim(), order), measure_(measure) {
  const Index n = indices_.size();

  // Monomial moment matrix G_ij = E[p_i p_j] from analytic mixture moments.
  MultiIndexSet double_set(measure.dim(), 2 * order);
  const Vector moments = measure.raw_moments(double_set);
  Matrix gram(n, n);
  IntVector sum(measure.dim());
  for (Index i = 0; i < n; ++i) {
    for (Index j = i; j < n; ++j) {
      sum = (indices_[i] + indices_[j]).transpose();
      const double value = moments[double_set.find(sum)];
      gram(i, j) = value;
      gram(j, i) = value;
    }
  }

  coefficients_ = Matrix::Zero(n, n);
  Vector work(n);
  auto orthogonalize = [&](Index j) {
    for (Index i = 0; i < j; ++i) {
      const double proj = coefficients_.row(i) * gram * work;
      work -= proj * coefficients_.row(i).transpose();
    }
  };
  for (Index j = 0; j < n; ++j) {
    work.setZero();
    work[j] = 1.0;
    orthogonalize(j);
    double norm_sq = work.dot(gram * work);
    if (!(norm_sq > 1e-24)) {
      throw std::runtime_error("GramSchmidtBasis: degenerate measure (basis function " +
                               std::to_string(j + 1) + " has vanishing norm)");
    }
    coefficients_.row(j) = work.transpose() / std::sqrt(norm_sq);
  }

  auto residual = [&]() {
    const Matrix check = coefficients_ * gram * coefficients_.transpose();
    return (check - Matrix::Identity(n, n)).cwiseAbs().maxCoeff();
  };
  gram_residual_ = residual();
  if (gram_residual_ > 1e-10) {
    // single re-orthogonalization pass
    for (Index j = 0; j < n; ++j) {
      work = coefficients_.row(j).transpose();
      orthogonalize(j);
      const double norm_sq = work.dot(gram * work);
      if (!(norm_sq > 1e-24)) {
        throw std::runtime_error("GramSchmidtBasis: degenerate measure");
      }
      coefficients_.row(j) = work.transpose() / std::sqrt(norm_sq);
    }
    gram_residual_ = residual();
  }
}

void GramSchmidtBasis::monomials(const Vector& xi, Vector& values, Matrix* derivatives) const {
  const int d = dim();
  // power table per dimension
  Matrix powers(d, order_ + 1);
  for (int i = 0; i < d; ++i) {
    powers(i, 0) = 1.0;
    for (int k = 1; k <= order_; ++k) powers(i, k) = powers(i, k - 1) * xi[i];
  }
  const Index n = indices_.size();
  values.resize(n);
  if (derivatives) derivatives->resize(n, d);
  for (Index j = 0; j < n; ++j) {
    double prod = 1.0;
    for (int i = 0; i < d; ++i) prod *= powers(i, indices_[j][i]);
    values[j] = prod;
    if (derivatives) {
      for (int i = 0; i < d; ++i) {
        const int e = indices_[j][i];
        if (e == 0) {
          (*derivatives)(j, i) = 0.0;
          continue;
        }
        double g = e * powers(i, e - 1);
        for (int k = 0; k < d; ++k) {
          if (k != i) g *= powers(k, indices_[j][k]);
        }
        (*derivatives)(j, i) = g;
      }
    }
  }
}

Vector GramSchmidtBasis::evaluate(const Vector& xi) const {
  Vector values;
  evaluate(xi, values);
  return values;
}

void GramSchmidtBasis::evaluate(const Vector& xi, Vector& values) const {
  if (xi.size() != dim()) throw std::invalid_argument("GramSchmidtBasis: dimension mismatch");
  Vector mono;
  monomials(xi, mono, nullptr);
  values.noalias() = coefficients_ * mono;
}

void GramSchmidtBasis::evaluate_with_gradient(const Vector& xi, Vector& values,
                                              Matrix& gradients) const {
  if (xi.size() != dim()) throw std::invalid_argument("GramSchmidtBasis: dimension mismatch");
  Vector mono;
  Matrix dmono;
  monomials(xi, mono, &dmono);
  values.noalias() = coefficients_ * mono;
  gradients.noalias() = coefficients_ * dmono;
}

}  // namespace ccyopt
