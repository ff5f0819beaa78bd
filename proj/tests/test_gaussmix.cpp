#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "ccyopt/gaussian_mixture.hpp"

using namespace ccyopt;

namespace {

GaussianMixture standard_normal_1d() {
  MixtureComponent comp;
  comp.weight = 1.0;
  comp.mean = Vector::Zero(1);
  comp.covariance = Matrix::Identity(1, 1);
  return GaussianMixture({comp});
}

// positive-correlated two-component benchmark mixture
GaussianMixture synthetic_mixture() {
  Matrix cov(2, 2);
  cov << 1.0, 0.75, 0.75, 1.0;
  cov *= 1e-4;
  MixtureComponent plus{0.5, Vector::Constant(2, 0.01), cov};
  MixtureComponent minus{0.5, Vector::Constant(2, -0.01), cov};
  return GaussianMixture({plus, minus});
}

}  // namespace

TEST_CASE("density of the standard normal at the origin") {
  const auto mixture = standard_normal_1d();
  CHECK(mixture.density(Vector::Zero(1)) ==
        doctest::Approx(1.0 / std::sqrt(2.0 * 3.14159265358979323846)).epsilon(1e-12));
}

TEST_CASE("well-separated equal mixture halves the peak") {
  MixtureComponent a{0.5, Vector::Constant(1, 0.0), Matrix::Identity(1, 1)};
  MixtureComponent b{0.5, Vector::Constant(1, 60.0), Matrix::Identity(1, 1)};
  GaussianMixture mixture({a, b});
  const double peak = 1.0 / std::sqrt(2.0 * 3.14159265358979323846);
  CHECK(mixture.density(Vector::Zero(1)) == doctest::Approx(0.5 * peak).epsilon(1e-12));
}

TEST_CASE("benchmark mixture density at the origin against the direct formula") {
  const auto mixture = synthetic_mixture();
  // direct two-component formula evaluated independently
  Matrix cov(2, 2);
  cov << 1.0, 0.75, 0.75, 1.0;
  cov *= 1e-4;
  const double det = cov.determinant();
  const Matrix inv = cov.inverse();
  Vector mu = Vector::Constant(2, 0.01);
  const double quad = mu.dot(inv * mu);
  const double expected = std::exp(-0.5 * quad) / (2.0 * 3.14159265358979323846 * std::sqrt(det));
  CHECK(mixture.density(Vector::Zero(2)) == doctest::Approx(expected).epsilon(1e-12));

  // cross-check: total mass over a 6-sigma box by (coarse) Simpson quadrature
  const Vector mean = mixture.mean();
  const Vector sigma = mixture.covariance().diagonal().cwiseSqrt();
  const int n = 121;  // odd for Simpson
  const double lo0 = mean[0] - 6 * sigma[0], hi0 = mean[0] + 6 * sigma[0];
  const double lo1 = mean[1] - 6 * sigma[1], hi1 = mean[1] + 6 * sigma[1];
  const double h0 = (hi0 - lo0) / (n - 1), h1 = (hi1 - lo1) / (n - 1);
  auto simpson_weight = [n](int i) { return i == 0 || i == n - 1 ? 1.0 : (i % 2 ? 4.0 : 2.0); };
  double mass = 0.0;
  Vector point(2);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      point << lo0 + i * h0, lo1 + j * h1;
      mass += simpson_weight(i) * simpson_weight(j) * mixture.density(point);
    }
  }
  mass *= h0 * h1 / 9.0;
  CHECK(mass > 0.999);
  CHECK(mass < 1.0 + 1e-6);
}

TEST_CASE("sampling: law of large numbers for the standard normal") {
  const auto mixture = standard_normal_1d();
  const Matrix draws = mixture.sample(1000000, 42);
  const double mean = draws.col(0).mean();
  const double var = (draws.col(0).array() - mean).square().sum() / (draws.rows() - 1.0);
  CHECK(std::abs(mean) < 4e-3);
  CHECK(std::abs(var - 1.0) < 0.01);
}

TEST_CASE("sampling is bitwise reproducible for a fixed seed") {
  const auto mixture = synthetic_mixture();
  const Matrix a = mixture.sample(512, 7);
  const Matrix b = mixture.sample(512, 7);
  CHECK((a.array() == b.array()).all());
  const Matrix c = mixture.sample(512, 8);
  CHECK(!(a.array() == c.array()).all());
}

TEST_CASE("sample correlation matches the analytic mixture covariance") {
  const auto mixture = synthetic_mixture();
  const Matrix cov = mixture.covariance();
  const double rho_analytic = cov(0, 1) / std::sqrt(cov(0, 0) * cov(1, 1));
  const Matrix draws = mixture.sample(1000000, 11);
  const Vector mean = draws.colwise().mean().transpose();
  Matrix centered = draws.rowwise() - mean.transpose();
  const Matrix sample_cov = centered.transpose() * centered / (draws.rows() - 1.0);
  const double rho_sample = sample_cov(0, 1) / std::sqrt(sample_cov(0, 0) * sample_cov(1, 1));
  CHECK(std::abs(rho_sample - rho_analytic) < 0.02);
}

TEST_CASE("raw moments of a single Gaussian") {
  MixtureComponent comp{1.0, Vector::Constant(1, 0.4), Matrix::Identity(1, 1) * 0.09};
  GaussianMixture mixture({comp});
  IntVector beta(1);
  beta << 2;
  CHECK(mixture.raw_moment(beta) == doctest::Approx(0.4 * 0.4 + 0.09).epsilon(1e-12));
}

TEST_CASE("closed-form moments of the symmetric two-component margin") {
  Matrix cov = Matrix::Identity(1, 1) * 1e-4;
  MixtureComponent plus{0.5, Vector::Constant(1, 0.01), cov};
  MixtureComponent minus{0.5, Vector::Constant(1, -0.01), cov};
  GaussianMixture mixture({plus, minus});
  IntVector beta(1);
  beta << 1;
  CHECK(mixture.raw_moment(beta) == doctest::Approx(0.0).epsilon(1e-15));
  beta << 2;
  CHECK(mixture.raw_moment(beta) == doctest::Approx(2e-4).epsilon(1e-12));
}

TEST_CASE("odd moments of a zero-mean Gaussian vanish") {
  Matrix cov(2, 2);
  cov << 2.0, 0.3, 0.3, 1.0;
  MixtureComponent comp{1.0, Vector::Zero(2), cov};
  GaussianMixture mixture({comp});
  IntVector beta(2);
  beta << 2, 1;
  CHECK(std::abs(mixture.raw_moment(beta)) < 1e-14);
  beta << 1, 0;
  CHECK(std::abs(mixture.raw_moment(beta)) < 1e-14);
}

TEST_CASE("analytic moments agree with sample moments within five standard errors") {
  const auto mixture = synthetic_mixture();
  const Index n = 1000000;
  const Matrix draws = mixture.sample(n, 1234);
  MultiIndexSet set(2, 4);
  const Vector analytic = mixture.raw_moments(set);
  for (Index j = 0; j < set.size(); ++j) {
    Vector products = Vector::Ones(n);
    for (int d = 0; d < 2; ++d) {
      for (int e = 0; e < set[j][d]; ++e) products.array() *= draws.col(d).array();
    }
    const double sample_mean = products.mean();
    const double sample_var = (products.array() - sample_mean).square().sum() / (n - 1.0);
    const double se = std::sqrt(sample_var / static_cast<double>(n));
    CHECK(std::abs(sample_mean - analytic[j]) <= 5.0 * se + 1e-14);
  }
}

TEST_CASE("invalid mixtures are rejected before use") {
  MixtureComponent comp{0.7, Vector::Zero(1), Matrix::Identity(1, 1)};
  CHECK_THROWS_AS(GaussianMixture({comp}), ConfigError);  // weights must sum to 1

  Matrix bad(2, 2);
  bad << 1.0, 2.0, 2.0, 1.0;  // indefinite
  MixtureComponent indefinite{1.0, Vector::Zero(2), bad};
  CHECK_THROWS_AS(GaussianMixture({indefinite}), ConfigError);
}
