#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "ccyopt/quadrature.hpp"
#include "ccyopt/rng.hpp"

using namespace ccyopt;

namespace {

GaussianMixture synthetic_mixture() {
  Matrix cov(2, 2);
  cov << 1.0, 0.75, 0.75, 1.0;
  cov *= 1e-4;
  MixtureComponent plus{0.5, Vector::Constant(2, 0.01), cov};
  MixtureComponent minus{0.5, Vector::Constant(2, -0.01), cov};
  return GaussianMixture({plus, minus});
}

GaussianMixture microring_mixture() {
  Matrix corr(4, 4);
  corr << 1.0, 0.4, 0.1, 0.4,
          0.4, 1.0, 0.4, 0.1,
          0.1, 0.4, 1.0, 0.4,
          0.4, 0.1, 0.4, 1.0;
  const Matrix cov = 0.006 * 0.006 * corr;
  MixtureComponent plus{0.5, Vector::Constant(4, 0.006), cov};
  MixtureComponent minus{0.5, Vector::Constant(4, -0.006), cov};
  return GaussianMixture({plus, minus});
}

}  // namespace

TEST_CASE("one-dimensional design rule recovers two-point Gauss-Legendre") {
  LegendreBasis basis({{-1.0, 1.0}}, 2);
  const QuadratureRule rule = design_rule(basis, 1);
  REQUIRE(rule.size() == 2);
  CHECK(rule.residual_l1 < 1e-12);
  Vector points = rule.points.col(0);
  std::sort(points.data(), points.data() + points.size());
  CHECK(points[0] == doctest::Approx(-1.0 / std::sqrt(3.0)).epsilon(1e-9));
  CHECK(points[1] == doctest::Approx(1.0 / std::sqrt(3.0)).epsilon(1e-9));
  CHECK(rule.weights[0] == doctest::Approx(0.5).epsilon(1e-9));
  CHECK(rule.weights[1] == doctest::Approx(0.5).epsilon(1e-9));
}

TEST_CASE("design rule sizes for the photonic boxes") {
  SUBCASE("microring box, four dimensions") {
    LegendreBasis basis({{0.3, 0.6}, {0.3, 0.6}, {0.3, 0.6}, {0.3, 0.6}}, 4);
    const QuadratureRule rule = design_rule(basis, 2);
    CHECK(rule.size() >= 14);
    CHECK(rule.size() <= 20);
    CHECK(rule.size() >= MultiIndexSet::count(4, 2));  // theoretical floor 15
    CHECK(rule.weights.minCoeff() >= 0.0);
    CHECK(std::abs(rule.weights.sum() - 1.0) <= 1e-6);
  }
  SUBCASE("interferometer box, three dimensions") {
    LegendreBasis basis({{100.0, 300.0}, {100.0, 300.0}, {100.0, 300.0}}, 4);
    const QuadratureRule rule = design_rule(basis, 2);
    CHECK(rule.size() >= 8);
    CHECK(rule.size() <= 14);
  }
}

TEST_CASE("noise rule sizes") {
  SUBCASE("two-dimensional benchmark mixture") {
    const auto mixture = synthetic_mixture();
    GramSchmidtBasis basis(mixture, 4);
    const QuadratureRule rule = noise_rule(basis, mixture, 2);
    CHECK(rule.size() >= 4);
    CHECK(rule.size() <= 8);
    CHECK(rule.weights.minCoeff() >= 0.0);
  }
  SUBCASE("degenerate order zero gives a single unit-weight point") {
    const auto mixture = synthetic_mixture();
    GramSchmidtBasis basis(mixture, 0);
    const QuadratureRule rule = noise_rule(basis, mixture, 0);
    REQUIRE(rule.size() == 1);
    CHECK(rule.weights[0] == doctest::Approx(1.0).epsilon(1e-12));
  }
}

TEST_CASE("noise rule size for the four-dimensional microring mixture") {
  const auto mixture = microring_mixture();
  GramSchmidtBasis basis(mixture, 4);
  const QuadratureRule rule = noise_rule(basis, mixture, 2);
  CHECK(rule.size() >= 12);
  CHECK(rule.size() <= 20);
}

TEST_CASE("joint rule on the synthetic problem stays within the Theorem-1 bounds") {
  const auto mixture = synthetic_mixture();
  LegendreBasis design_basis({{-1.0, 1.0}, {-1.0, 1.0}}, 4);
  GramSchmidtBasis noise_basis(mixture, 4);
  const QuadratureRule dr = design_rule(design_basis, 2);
  const QuadratureRule nr = noise_rule(noise_basis, mixture, 2);
  const QuadratureRule joint = joint_rule(dr, nr, design_basis, noise_basis, mixture, 2);

  CHECK(joint.size() >= 15);  // N^4_2
  CHECK(joint.size() <= 25);  // paper reports 19 after pruning
  CHECK(joint.size() <= 70);  // N^4_4
  CHECK(joint.residual_l1 <= 1e-6);
  CHECK(joint.weights.minCoeff() >= 0.0);
  CHECK(std::abs(joint.weights.sum() - 1.0) <= 1e-6);
  CHECK(!joint.warning_capped);

  // design block within the box
  for (Index k = 0; k < joint.size(); ++k) {
    CHECK(joint.points(k, 0) >= -1.0);
    CHECK(joint.points(k, 0) <= 1.0);
    CHECK(joint.points(k, 1) >= -1.0);
    CHECK(joint.points(k, 1) <= 1.0);
  }

  // residual is recomputable from the stored rule
  const MomentSystem system = MomentSystem::joint(design_basis, noise_basis, mixture, 2);
  CHECK(residual_l1(system, joint.points, joint.weights) ==
        doctest::Approx(joint.residual_l1).epsilon(1e-9));

  // exactness transfer: random polynomial in the tensor basis span
  Xoshiro256pp rng(3);
  Vector coeffs(system.rows());
  for (Index i = 0; i < coeffs.size(); ++i) coeffs[i] = 2.0 * rng.uniform() - 1.0;
  double quad_value = 0.0;
  Vector row;
  for (Index k = 0; k < joint.size(); ++k) {
    system.row_values(joint.points.row(k).transpose(), row);
    quad_value += joint.weights[k] * coeffs.dot(row);
  }
  const double exact = coeffs[0];  // E[basis_j] = delta_1j
  CHECK(std::abs(quad_value - exact) <= joint.residual_l1 * coeffs.cwiseAbs().sum() + 1e-12);
}

TEST_CASE("bcd_solve leaves an already-exact rule unchanged") {
  LegendreBasis basis({{-1.0, 1.0}}, 2);
  const MomentSystem system = MomentSystem::design(basis, 1);
  Matrix points(2, 1);
  points << -1.0 / std::sqrt(3.0), 1.0 / std::sqrt(3.0);
  Vector weights = Vector::Constant(2, 0.5);
  const BcdResult result = bcd_solve(system, points, weights);
  CHECK(result.residual_sq <= 1e-28);
  CHECK((result.points - points).cwiseAbs().maxCoeff() <= 1e-12);
  CHECK((result.weights - weights).cwiseAbs().maxCoeff() <= 1e-12);
}

TEST_CASE("bcd_solve converges from a random overcomplete candidate set") {
  LegendreBasis basis({{-1.0, 1.0}}, 4);
  const MomentSystem system = MomentSystem::design(basis, 2);
  Xoshiro256pp rng(8);
  Matrix points(15, 1);  // 3x overcomplete for p=2
  for (Index i = 0; i < points.rows(); ++i) points(i, 0) = 2.0 * rng.uniform() - 1.0;
  Vector weights = Vector::Constant(15, 1.0 / 15.0);
  const BcdResult result = bcd_solve(system, points, weights);
  CHECK(result.residual_sq <= 1e-20);

  // squared residual history is non-increasing
  for (size_t i = 1; i < result.residual_history.size(); ++i) {
    CHECK(result.residual_history[i] <=
          result.residual_history[i - 1] * (1.0 + 1e-12) + 1e-18);
  }
}

TEST_CASE("weight step alone recovers Gauss weights exactly") {
  LegendreBasis basis({{-1.0, 1.0}}, 4);
  const MomentSystem system = MomentSystem::design(basis, 2);
  // 3-point Gauss-Legendre nodes; probability weights 5/18, 8/18, 5/18
  Matrix points(3, 1);
  points << -std::sqrt(3.0 / 5.0), 0.0, std::sqrt(3.0 / 5.0);
  const Matrix v = system.vandermonde(points);
  const Vector weights = nnls(v, system.target());
  CHECK(weights[0] == doctest::Approx(5.0 / 18.0).epsilon(1e-12));
  CHECK(weights[1] == doctest::Approx(8.0 / 18.0).epsilon(1e-12));
  CHECK(weights[2] == doctest::Approx(5.0 / 18.0).epsilon(1e-12));
}

TEST_CASE("prune removes zero-weight points without touching the residual") {
  LegendreBasis basis({{-1.0, 1.0}}, 2);
  const MomentSystem system = MomentSystem::design(basis, 1);
  Matrix points(3, 1);
  points << -1.0 / std::sqrt(3.0), 1.0 / std::sqrt(3.0), 0.3;
  Vector weights(3);
  weights << 0.5, 0.5, 0.0;
  QuadratureRule rule;
  rule.points = points;
  rule.weights = weights;
  rule.residual_l1 = residual_l1(system, points, weights);
  rule.order = 1;
  rule.design_dim = 1;
  const QuadratureRule pruned = prune(system, rule, 1e-6, 1e-8, 2);
  CHECK(pruned.size() == 2);
  CHECK(pruned.residual_l1 <= 1e-10);
}

TEST_CASE("prune returns a rule already at the theoretical floor unchanged") {
  LegendreBasis basis({{-1.0, 1.0}}, 2);
  const MomentSystem system = MomentSystem::design(basis, 1);
  Matrix points(2, 1);
  points << -1.0 / std::sqrt(3.0), 1.0 / std::sqrt(3.0);
  Vector weights = Vector::Constant(2, 0.5);
  QuadratureRule rule;
  rule.points = points;
  rule.weights = weights;
  rule.residual_l1 = residual_l1(system, points, weights);
  rule.order = 1;
  rule.design_dim = 1;
  const QuadratureRule pruned = prune(system, rule, 1e-6, 1e-8, 2);
  CHECK(pruned.size() == 2);
  CHECK((pruned.points - points).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("sparse-grid initialization path stays exact") {
  // force the Smolyak branch with a tiny tensor budget
  LegendreBasis basis({{-1.0, 1.0}, {-1.0, 1.0}, {-1.0, 1.0}}, 4);
  QuadratureOptions options;
  options.tensor_budget = 2;
  const QuadratureRule rule = design_rule(basis, 2, options);
  CHECK(rule.residual_l1 <= 1e-8);
  CHECK(rule.size() >= MultiIndexSet::count(3, 2));
}

TEST_CASE("initial negative weights are rejected") {
  LegendreBasis basis({{-1.0, 1.0}}, 2);
  const MomentSystem system = MomentSystem::design(basis, 1);
  Matrix points(2, 1);
  points << -0.5, 0.5;
  Vector weights(2);
  weights << 0.7, -0.2;
  CHECK_THROWS_AS(bcd_solve(system, points, weights), std::invalid_argument);
}
