#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "ccyopt/basis.hpp"
#include "ccyopt/rng.hpp"

using namespace ccyopt;

namespace {

GaussianMixture standard_normal_1d() {
  MixtureComponent comp{1.0, Vector::Zero(1), Matrix::Identity(1, 1)};
  return GaussianMixture({comp});
}

GaussianMixture synthetic_mixture() {
  Matrix cov(2, 2);
  cov << 1.0, 0.75, 0.75, 1.0;
  cov *= 1e-4;
  MixtureComponent plus{0.5, Vector::Constant(2, 0.01), cov};
  MixtureComponent minus{0.5, Vector::Constant(2, -0.01), cov};
  return GaussianMixture({plus, minus});
}

// Analytic monomial moments of the uniform density on a box.
double uniform_monomial_moment(const std::vector<std::pair<double, double>>& bounds,
                               const IntVector& alpha) {
  double value = 1.0;
  for (Index i = 0; i < alpha.size(); ++i) {
    const auto [lo, hi] = bounds[static_cast<size_t>(i)];
    const int k = alpha[i];
    value *= (std::pow(hi, k + 1) - std::pow(lo, k + 1)) / ((k + 1) * (hi - lo));
  }
  return value;
}

}  // namespace

TEST_CASE("normalized Legendre on [-1,1]: first order factor is sqrt(3)x") {
  LegendreBasis basis({{-1.0, 1.0}}, 1);
  Vector x(1);
  x << 0.37;
  const Vector values = basis.evaluate(x);
  CHECK(values[0] == doctest::Approx(1.0));
  CHECK(values[1] == doctest::Approx(std::sqrt(3.0) * 0.37).epsilon(1e-14));

  // E[phi_1^2] = 1 under the uniform probability density, by fine quadrature
  double integral = 0.0;
  const int n = 20001;
  for (int i = 0; i < n; ++i) {
    const double t = -1.0 + 2.0 * i / (n - 1);
    x << t;
    const double phi = basis.evaluate(x)[1];
    const double w = (i == 0 || i == n - 1) ? 0.5 : 1.0;
    integral += w * phi * phi;
  }
  integral *= 2.0 / (n - 1) / 2.0;
  CHECK(integral == doctest::Approx(1.0).epsilon(1e-6));
}

TEST_CASE("order zero basis is the constant 1") {
  LegendreBasis basis({{-1.0, 1.0}}, 0);
  Vector x(1);
  x << 0.9;
  CHECK(basis.evaluate(x)[0] == 1.0);
}

TEST_CASE("Monte Carlo orthonormality on the microring box") {
  LegendreBasis basis({{0.3, 0.6}, {0.3, 0.6}, {0.3, 0.6}, {0.3, 0.6}}, 2);
  const Index n = 1000000;
  Xoshiro256pp rng(99);
  const Index size = basis.indices().size();
  Matrix gram = Matrix::Zero(size, size);
  Vector x(4), values;
  for (Index s = 0; s < n; ++s) {
    for (int i = 0; i < 4; ++i) x[i] = 0.3 + 0.3 * rng.uniform();
    basis.evaluate(x, values);
    gram.noalias() += values * values.transpose();
  }
  gram /= static_cast<double>(n);
  const double err = (gram - Matrix::Identity(size, size)).cwiseAbs().maxCoeff();
  CHECK(err <= 1e-3 * 10);  // 10^-3-scale agreement at 10^6 samples
  CHECK(err <= 1.2e-2);
}

TEST_CASE("Gram-Schmidt basis of the standard normal matches normalized Hermite") {
  GramSchmidtBasis basis(standard_normal_1d(), 2);
  // Psi_1 = 1, Psi_2 = xi, Psi_3 = (xi^2 - 1)/sqrt(2)
  Vector xi(1);
  for (double value : {-1.7, -0.3, 0.0, 0.8, 2.4}) {
    xi << value;
    const Vector psi = basis.evaluate(xi);
    CHECK(psi[0] == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(psi[1] == doctest::Approx(value).epsilon(1e-12));
    CHECK(psi[2] == doctest::Approx((value * value - 1.0) / std::sqrt(2.0)).epsilon(1e-12));
  }
}

TEST_CASE("Psi_1 is exactly 1 for any measure") {
  GramSchmidtBasis basis(synthetic_mixture(), 3);
  CHECK(basis.coefficients()(0, 0) == 1.0);
  for (Index j = 1; j < basis.indices().size(); ++j) CHECK(basis.coefficients()(0, j) == 0.0);
}

TEST_CASE("analytic Gram matrix is the identity to 1e-10") {
  GramSchmidtBasis basis(synthetic_mixture(), 2);
  CHECK(basis.gram_residual() <= 1e-10);
  GramSchmidtBasis wide(synthetic_mixture(), 4);  // order 2p used by quadrature
  CHECK(wide.gram_residual() <= 1e-10);
}

TEST_CASE("empirical Gram matrix within 5e-3 under one million draws") {
  const auto mixture = synthetic_mixture();
  GramSchmidtBasis basis(mixture, 2);
  const Index n = 1000000;
  const Matrix draws = mixture.sample(n, 4321);
  const Index size = basis.indices().size();
  Matrix gram = Matrix::Zero(size, size);
  Vector values;
  for (Index s = 0; s < n; ++s) {
    basis.evaluate(draws.row(s).transpose(), values);
    gram.noalias() += values * values.transpose();
  }
  gram /= static_cast<double>(n);
  CHECK((gram - Matrix::Identity(size, size)).cwiseAbs().maxCoeff() <= 5e-3);
}

TEST_CASE("coefficient matrix is lower triangular in graded-lex order") {
  GramSchmidtBasis basis(synthetic_mixture(), 3);
  const Matrix& coeff = basis.coefficients();
  for (Index i = 0; i < coeff.rows(); ++i) {
    for (Index j = i + 1; j < coeff.cols(); ++j) CHECK(coeff(i, j) == 0.0);
  }
}

TEST_CASE("evaluate_basis: odd Legendre entries vanish at the box center") {
  LegendreBasis basis({{-1.0, 1.0}}, 3);
  Vector x(1);
  x << 0.0;
  const Vector values = basis.evaluate(x);
  CHECK(values[0] == 1.0);
  CHECK(values[1] == doctest::Approx(0.0));
  CHECK(values[3] == doctest::Approx(0.0));
}

TEST_CASE("evaluate_basis: Legendre endpoint identity phi_k(1) = sqrt(2k+1)") {
  LegendreBasis basis({{-1.0, 1.0}}, 4);
  Vector x(1);
  x << 1.0;
  const Vector values = basis.evaluate(x);
  for (int k = 0; k <= 4; ++k) {
    CHECK(values[k] == doctest::Approx(std::sqrt(2.0 * k + 1.0)).epsilon(1e-12));
  }
}

TEST_CASE("evaluate_basis: Gram-Schmidt first entry is 1 anywhere") {
  GramSchmidtBasis basis(synthetic_mixture(), 2);
  Vector xi(2);
  xi << 0.3, -0.7;
  CHECK(basis.evaluate(xi)[0] == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("completeness: degree-p polynomials are exactly representable") {
  // expansion coefficients from analytic inner products, then re-evaluation
  Xoshiro256pp rng(5);

  SUBCASE("Legendre on a shifted box") {
    std::vector<std::pair<double, double>> bounds{{0.2, 0.9}, {-0.4, 0.3}};
    LegendreBasis basis(bounds, 3);
    MultiIndexSet monomials(2, 3);
    Vector mono_coeffs(monomials.size());
    for (Index i = 0; i < mono_coeffs.size(); ++i) mono_coeffs[i] = 2.0 * rng.uniform() - 1.0;
    // c_j = E[g * Phi_j]: expand Phi_j over monomials via sampling-free route:
    // evaluate both sides on a tensor grid with the uniform measure replaced
    // by high-order Gauss quadrature per dimension (exact for polynomials).
    // 6-point Gauss-Legendre is exact through degree 11 > 3 + 3.
    const double nodes[6] = {-0.932469514203152, -0.661209386466265, -0.238619186083197,
                             0.238619186083197, 0.661209386466265, 0.932469514203152};
    const double weights[6] = {0.171324492379170, 0.360761573048139, 0.467913934572691,
                               0.467913934572691, 0.360761573048139, 0.171324492379170};
    Vector coeffs = Vector::Zero(basis.indices().size());
    Vector x(2), values;
    for (int a = 0; a < 6; ++a) {
      for (int b = 0; b < 6; ++b) {
        x[0] = bounds[0].first + (bounds[0].second - bounds[0].first) * (nodes[a] + 1) / 2;
        x[1] = bounds[1].first + (bounds[1].second - bounds[1].first) * (nodes[b] + 1) / 2;
        double g = 0.0;
        for (Index m = 0; m < monomials.size(); ++m) {
          g += mono_coeffs[m] * std::pow(x[0], monomials[m][0]) * std::pow(x[1], monomials[m][1]);
        }
        basis.evaluate(x, values);
        coeffs += (weights[a] / 2.0) * (weights[b] / 2.0) * g * values;
      }
    }
    double max_err = 0.0;
    for (int trial = 0; trial < 100; ++trial) {
      x[0] = bounds[0].first + (bounds[0].second - bounds[0].first) * rng.uniform();
      x[1] = bounds[1].first + (bounds[1].second - bounds[1].first) * rng.uniform();
      double g = 0.0;
      for (Index m = 0; m < monomials.size(); ++m) {
        g += mono_coeffs[m] * std::pow(x[0], monomials[m][0]) * std::pow(x[1], monomials[m][1]);
      }
      basis.evaluate(x, values);
      max_err = std::max(max_err, std::abs(g - coeffs.dot(values)));
    }
    CHECK(max_err <= 1e-9);
  }

  SUBCASE("Gram-Schmidt under the benchmark mixture") {
    const auto mixture = synthetic_mixture();
    GramSchmidtBasis basis(mixture, 2);
    MultiIndexSet monomials(2, 2);
    Vector mono_coeffs(monomials.size());
    for (Index i = 0; i < mono_coeffs.size(); ++i) mono_coeffs[i] = 2.0 * rng.uniform() - 1.0;
    // c_j = E[g Psi_j] via analytic mixture moments of monomial products
    MultiIndexSet double_set(2, 4);
    const Vector moments = mixture.raw_moments(double_set);
    Vector coeffs = Vector::Zero(basis.indices().size());
    for (Index j = 0; j < basis.indices().size(); ++j) {
      double inner = 0.0;
      for (Index m = 0; m < monomials.size(); ++m) {
        for (Index q = 0; q < basis.indices().size(); ++q) {
          if (basis.coefficients()(j, q) == 0.0) continue;
          IntVector sum = (monomials[m] + basis.indices()[q]).transpose();
          inner += mono_coeffs[m] * basis.coefficients()(j, q) * moments[double_set.find(sum)];
        }
      }
      coeffs[j] = inner;
    }
    const Matrix draws = mixture.sample(100, 17);
    double max_err = 0.0;
    Vector values;
    for (Index s = 0; s < draws.rows(); ++s) {
      const Vector xi = draws.row(s).transpose();
      double g = 0.0;
      for (Index m = 0; m < monomials.size(); ++m) {
        g += mono_coeffs[m] * std::pow(xi[0], monomials[m][0]) * std::pow(xi[1], monomials[m][1]);
      }
      basis.evaluate(xi, values);
      max_err = std::max(max_err, std::abs(g - coeffs.dot(values)));
    }
    CHECK(max_err <= 1e-9);
  }
}

TEST_CASE("degenerate interval is rejected") {
  CHECK_THROWS_AS(LegendreBasis({{0.5, 0.5}}, 2), std::invalid_argument);
}

TEST_CASE("numerically singular Gram step reports a degenerate measure") {
  Matrix cov(2, 2);
  cov << 1.0, 1.0, 1.0, 1.0;
  cov.diagonal().array() += 1e-16;  // passes the positive-definite gate
  MixtureComponent comp{1.0, Vector::Zero(2), cov};
  GaussianMixture mixture({comp});
  CHECK_THROWS_WITH_AS(GramSchmidtBasis(mixture, 2), doctest::Contains("degenerate"),
                       std::runtime_error);
}

TEST_CASE("basis gradients match finite differences") {
  LegendreBasis leg({{0.3, 0.6}, {0.3, 0.6}}, 3);
  GramSchmidtBasis gs(synthetic_mixture(), 3);
  Vector x(2), values, vp, vm;
  Matrix grad;
  x << 0.44, 0.52;
  leg.evaluate_with_gradient(x, values, grad);
  const double h = 1e-6;
  for (int i = 0; i < 2; ++i) {
    Vector xp = x, xm = x;
    xp[i] += h;
    xm[i] -= h;
    leg.evaluate(xp, vp);
    leg.evaluate(xm, vm);
    for (Index j = 0; j < values.size(); ++j) {
      CHECK(grad(j, i) == doctest::Approx((vp[j] - vm[j]) / (2 * h)).epsilon(1e-5));
    }
  }
  Vector xi(2);
  xi << 0.012, -0.007;
  gs.evaluate_with_gradient(xi, values, grad);
  for (int i = 0; i < 2; ++i) {
    Vector xp = xi, xm = xi;
    xp[i] += 1e-8;
    xm[i] -= 1e-8;
    gs.evaluate(xp, vp);
    gs.evaluate(xm, vm);
    for (Index j = 0; j < values.size(); ++j) {
      CHECK(grad(j, i) == doctest::Approx((vp[j] - vm[j]) / 2e-8).epsilon(1e-4).scale(
                              std::max(1.0, std::abs(grad(j, i)))));
    }
  }
}
