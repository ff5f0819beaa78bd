#include "ccyopt/quadrature.hpp"

#include <Eigen/Cholesky>
#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>

namespace ccyopt {

namespace {

// Gauss-Legendre nodes and weights on [-1,1] under the classical weight;
// Newton iteration on P_n.
void gauss_legendre_1d(int n, Vector& nodes, Vector& weights) {
  nodes.resize(n);
  weights.resize(n);
  const double pi = 3.14159265358979323846;
  for (int i = 0; i < n; ++i) {
    double x = std::cos(pi * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int iter = 0; iter < 100; ++iter) {
      double p0 = 1.0, p1 = x;
      for (int k = 1; k < n; ++k) {
        const double p2 = ((2 * k + 1) * x * p1 - k * p0) / (k + 1);
        p0 = p1;
        p1 = p2;
      }
      dp = n * (x * p1 - p0) / (x * x - 1.0);
      const double step = p1 / dp;
      x -= step;
      if (std::abs(step) < 1e-15) break;
    }
    nodes[i] = x;
    weights[i] = 2.0 / ((1.0 - x * x) * dp * dp);
  }
}

long binomial_long(int n, int k) {
  long v = 1;
  for (int i = 1; i <= k; ++i) v = v * (n - k + i) / i;
  return v;
}

// Isotropic Smolyak combination of Gauss-Legendre rules with l points at
// level l, exact for total degree >= 2p+1 at q = d+p. Negative combined
// weights are clamped to zero; the BCD refinement repairs the defect.
void smolyak_rule(int d, int p, Matrix& points, Vector& weights) {
  const int q = d + p;
  std::map<std::vector<double>, double> acc;
  std::vector<int> level(static_cast<size_t>(d), 1);
  std::vector<Vector> nodes_by_level(static_cast<size_t>(q + 1)), weights_by_level(static_cast<size_t>(q + 1));
  for (int l = 1; l <= q; ++l) gauss_legendre_1d(l, nodes_by_level[static_cast<size_t>(l)], weights_by_level[static_cast<size_t>(l)]);

  // enumerate level vectors with max(d, q-d+1) <= |l| <= q
  auto process = [&](const std::vector<int>& lv) {
    int sum = std::accumulate(lv.begin(), lv.end(), 0);
    if (sum < q - d + 1 || sum > q) return;
    const double coeff = ((q - sum) % 2 == 0 ? 1.0 : -1.0) * static_cast<double>(binomial_long(d - 1, q - sum));
    std::vector<int> counter(static_cast<size_t>(d), 0);
    while (true) {
      std::vector<double> pt(static_cast<size_t>(d));
      double w = coeff;
      for (int i = 0; i < d; ++i) {
        const auto& nd = nodes_by_level[static_cast<size_t>(lv[static_cast<size_t>(i)])];
        const auto& wt = weights_by_level[static_cast<size_t>(lv[static_cast<size_t>(i)])];
        pt[static_cast<size_t>(i)] = nd[counter[static_cast<size_t>(i)]];
        w *= wt[counter[static_cast<size_t>(i)]] / 2.0;  // probability normalization
      }
      acc[pt] += w;
      int carry = 0;
      while (carry < d) {
        if (++counter[static_cast<size_t>(carry)] < lv[static_cast<size_t>(carry)]) break;
        counter[static_cast<size_t>(carry)] = 0;
        ++carry;
      }
      if (carry == d) break;
    }
  };
  // recursive enumeration of level vectors
  std::function<void(int, int)> rec = [&](int pos, int remaining_max) {
    if (pos == d) {
      process(level);
      return;
    }
    for (int l = 1; l <= remaining_max - (d - pos - 1); ++l) {
      level[static_cast<size_t>(pos)] = l;
      rec(pos + 1, remaining_max - l);
    }
  };
  rec(0, q);

  std::vector<std::pair<std::vector<double>, double>> kept;
  for (auto& [pt, w] : acc) {
    const double clamped = std::max(w, 0.0);
    if (clamped > 0.0) kept.emplace_back(pt, clamped);
  }
  points.resize(static_cast<Index>(kept.size()), d);
  weights.resize(static_cast<Index>(kept.size()));
  for (Index i = 0; i < points.rows(); ++i) {
    for (int j = 0; j < d; ++j) points(i, j) = kept[static_cast<size_t>(i)].first[static_cast<size_t>(j)];
    weights[i] = kept[static_cast<size_t>(i)].second;
  }
}

}  // namespace

MomentSystem MomentSystem::design(const LegendreBasis& basis, int p) {
  if (basis.order() < 2 * p) {
    throw std::invalid_argument("MomentSystem::design: basis order must be >= 2p");
  }
  MomentSystem sys;
  sys.design_basis_ = &basis;
  sys.design_dim_ = basis.dim();
  sys.order_ = p;
  const Index n = MultiIndexSet::count(basis.dim(), 2 * p);
  sys.pairs_.reserve(static_cast<size_t>(n));
  for (Index j = 0; j < n; ++j) sys.pairs_.emplace_back(j, -1);
  sys.lower_ = basis.lower();
  sys.upper_ = basis.upper();
  return sys;
}

MomentSystem MomentSystem::noise(const GramSchmidtBasis& basis, const GaussianMixture& mixture,
                                 int p) {
  if (basis.order() < 2 * p) {
    throw std::invalid_argument("MomentSystem::noise: basis order must be >= 2p");
  }
  MomentSystem sys;
  sys.noise_basis_ = &basis;
  sys.noise_dim_ = basis.dim();
  sys.order_ = p;
  const Index n = MultiIndexSet::count(basis.dim(), 2 * p);
  sys.pairs_.reserve(static_cast<size_t>(n));
  for (Index j = 0; j < n; ++j) sys.pairs_.emplace_back(-1, j);
  const Vector mu = mixture.mean();
  const Vector sigma = mixture.covariance().diagonal().cwiseSqrt();
  sys.lower_ = mu - 6.0 * sigma;
  sys.upper_ = mu + 6.0 * sigma;
  return sys;
}

MomentSystem MomentSystem::joint(const LegendreBasis& design_basis,
                                 const GramSchmidtBasis& noise_basis,
                                 const GaussianMixture& mixture, int p) {
  if (design_basis.order() < 2 * p || noise_basis.order() < 2 * p) {
    throw std::invalid_argument("MomentSystem::joint: basis orders must be >= 2p");
  }
  MomentSystem sys;
  sys.design_basis_ = &design_basis;
  sys.noise_basis_ = &noise_basis;
  sys.design_dim_ = design_basis.dim();
  sys.noise_dim_ = noise_basis.dim();
  sys.order_ = p;
  const int d1 = design_basis.dim();
  const int d2 = noise_basis.dim();
  MultiIndexSet joint_set(d1 + d2, 2 * p);
  IntVector alpha(d1), beta(d2);
  for (Index g = 0; g < joint_set.size(); ++g) {
    alpha = joint_set[g].head(d1).transpose();
    beta = joint_set[g].tail(d2).transpose();
    const Index ia = design_basis.indices().find(alpha);
    const Index ib = noise_basis.indices().find(beta);
    sys.pairs_.emplace_back(ia, ib);
  }
  const Vector mu = mixture.mean();
  const Vector sigma = mixture.covariance().diagonal().cwiseSqrt();
  sys.lower_.resize(d1 + d2);
  sys.upper_.resize(d1 + d2);
  sys.lower_ << design_basis.lower(), mu - 6.0 * sigma;
  sys.upper_ << design_basis.upper(), mu + 6.0 * sigma;
  return sys;
}

void MomentSystem::row_values(const Vector& point, Vector& out) const {
  Vector phi, psi;
  if (design_basis_) design_basis_->evaluate(point.head(design_dim_), phi);
  if (noise_basis_) noise_basis_->evaluate(point.tail(noise_dim_), psi);
  out.resize(rows());
  for (Index r = 0; r < rows(); ++r) {
    const auto& [ia, ib] = pairs_[static_cast<size_t>(r)];
    double v = 1.0;
    if (ia >= 0) v *= phi[ia];
    if (ib >= 0) v *= psi[ib];
    out[r] = v;
  }
}

void MomentSystem::row_values_with_gradient(const Vector& point, Vector& out,
                                            Matrix& grad) const {
  Vector phi, psi;
  Matrix dphi, dpsi;
  if (design_basis_) design_basis_->evaluate_with_gradient(point.head(design_dim_), phi, dphi);
  if (noise_basis_) noise_basis_->evaluate_with_gradient(point.tail(noise_dim_), psi, dpsi);
  out.resize(rows());
  grad.resize(rows(), point_dim());
  for (Index r = 0; r < rows(); ++r) {
    const auto& [ia, ib] = pairs_[static_cast<size_t>(r)];
    const double pval = ia >= 0 ? phi[ia] : 1.0;
    const double qval = ib >= 0 ? psi[ib] : 1.0;
    out[r] = pval * qval;
    for (int i = 0; i < design_dim_; ++i) grad(r, i) = dphi(ia, i) * qval;
    for (int i = 0; i < noise_dim_; ++i) grad(r, design_dim_ + i) = pval * dpsi(ib, i);
  }
}

Matrix MomentSystem::vandermonde(const Matrix& points) const {
  Matrix v(rows(), points.rows());
  Vector row;
  for (Index k = 0; k < points.rows(); ++k) {
    row_values(points.row(k).transpose(), row);
    v.col(k) = row;
  }
  return v;
}

Vector MomentSystem::target() const {
  Vector e1 = Vector::Zero(rows());
  e1[0] = 1.0;
  return e1;
}

Vector nnls(const Matrix& A, const Vector& b, const Vector* warm_start) {
  const Index n = A.cols();
  const Matrix AtA = A.transpose() * A;
  const Vector Atb = A.transpose() * b;
  const double tol = 1e-12 * std::max(1.0, Atb.cwiseAbs().maxCoeff());

  std::vector<char> passive(static_cast<size_t>(n), 0);
  std::vector<char> banned(static_cast<size_t>(n), 0);
  Vector x = Vector::Zero(n);
  if (warm_start && warm_start->size() == n) {
    for (Index i = 0; i < n; ++i) {
      if ((*warm_start)[i] > 0.0) {
        passive[static_cast<size_t>(i)] = 1;
        x[i] = (*warm_start)[i];
      }
    }
  }

  std::vector<Index> idx;
  auto solve_passive = [&](Vector& z) -> bool {
    idx.clear();
    for (Index i = 0; i < n; ++i) {
      if (passive[static_cast<size_t>(i)]) idx.push_back(i);
    }
    const Index m = static_cast<Index>(idx.size());
    if (m == 0) {
      z.setZero(n);
      return true;
    }
    Matrix sub(m, m);
    Vector rhs(m);
    for (Index a = 0; a < m; ++a) {
      rhs[a] = Atb[idx[static_cast<size_t>(a)]];
      for (Index c = 0; c < m; ++c) sub(a, c) = AtA(idx[static_cast<size_t>(a)], idx[static_cast<size_t>(c)]);
    }
    const Vector sol = sub.ldlt().solve(rhs);
    if (!sol.allFinite()) return false;
    z.setZero(n);
    for (Index a = 0; a < m; ++a) z[idx[static_cast<size_t>(a)]] = sol[a];
    return true;
  };

  Vector z(n);
  bool dirty = warm_start != nullptr;
  const int max_outer = static_cast<int>(10 * n + 100);
  for (int outer = 0; outer < max_outer; ++outer) {
    if (dirty) {
      // restore feasibility of the passive-set solution
      for (int inner = 0; inner < max_outer; ++inner) {
        if (!solve_passive(z)) {
          // numerically singular passive set: drop the smallest-weight member
          Index worst = -1;
          double wmin = std::numeric_limits<double>::infinity();
          for (Index i = 0; i < n; ++i) {
            if (passive[static_cast<size_t>(i)] && x[i] < wmin) {
              wmin = x[i];
              worst = i;
            }
          }
          if (worst < 0) break;
          passive[static_cast<size_t>(worst)] = 0;
          banned[static_cast<size_t>(worst)] = 1;
          x[worst] = 0.0;
          continue;
        }
        double zmin = 0.0;
        for (Index i = 0; i < n; ++i) {
          if (passive[static_cast<size_t>(i)]) zmin = std::min(zmin, z[i]);
        }
        if (zmin >= 0.0) {
          x = z;
          break;
        }
        double alpha = 1.0;
        for (Index i = 0; i < n; ++i) {
          if (passive[static_cast<size_t>(i)] && z[i] <= 0.0 && x[i] > z[i]) {
            alpha = std::min(alpha, x[i] / (x[i] - z[i]));
          }
        }
        x += alpha * (z - x);
        for (Index i = 0; i < n; ++i) {
          if (passive[static_cast<size_t>(i)] && x[i] <= 1e-14 * std::max(1.0, x.maxCoeff())) {
            passive[static_cast<size_t>(i)] = 0;
            x[i] = 0.0;
          }
        }
      }
      dirty = false;
    }
    const Vector gradient = Atb - AtA * x;
    Index best = -1;
    double best_value = tol;
    for (Index i = 0; i < n; ++i) {
      if (!passive[static_cast<size_t>(i)] && !banned[static_cast<size_t>(i)] && gradient[i] > best_value) {
        best_value = gradient[i];
        best = i;
      }
    }
    if (best < 0) break;
    passive[static_cast<size_t>(best)] = 1;
    dirty = true;
  }
  return x;
}

BcdResult bcd_solve(const MomentSystem& system, Matrix points, Vector weights,
                    const BcdOptions& options) {
  const Index m = points.rows();
  if (weights.size() != m) throw std::invalid_argument("bcd_solve: weight/point count mismatch");
  if (m > 0 && weights.minCoeff() < 0.0) {
    throw std::invalid_argument("bcd_solve: initial weights must be nonnegative");
  }
  const int dim = system.point_dim();
  const Vector e1 = system.target();
  Matrix v = system.vandermonde(points);
  Vector w = weights;
  Vector residual(system.rows());
  Vector vals, v_new;
  Matrix grads;
  Vector lo = system.lower(), hi = system.upper();

  BcdResult result;
  double prev = std::numeric_limits<double>::infinity();
  int outer = 0;
  for (; outer < options.max_outer; ++outer) {
    w = nnls(v, e1, &w);
    residual = v * w - e1;
    if (!residual.allFinite()) {
      throw std::runtime_error("bcd_solve: non-finite residual in weight step");
    }

    for (Index l = 0; l < m; ++l) {
      if (w[l] <= 0.0) continue;
      Vector pt = points.row(l).transpose();
      system.row_values_with_gradient(pt, vals, grads);
      const Matrix jac = w[l] * grads;
      const Matrix hess = jac.transpose() * jac;
      const Vector grad_step = jac.transpose() * residual;
      double damping = 1e-8 * (1.0 + hess.diagonal().maxCoeff());
      const double res_sq = residual.squaredNorm();
      for (int attempt = 0; attempt < options.max_damping_tries; ++attempt) {
        Matrix damped = hess;
        damped.diagonal().array() += damping;
        const Vector step = damped.ldlt().solve(-grad_step);
        if (!step.allFinite()) break;
        Vector candidate = (pt + step).cwiseMax(lo).cwiseMin(hi);
        system.row_values(candidate, v_new);
        const Vector r_new = residual + w[l] * (v_new - v.col(l));
        if (r_new.squaredNorm() < res_sq) {
          points.row(l) = candidate.transpose();
          v.col(l) = v_new;
          residual = r_new;
          break;
        }
        damping *= 10.0;
      }
    }

    residual = v * w - e1;
    if (!residual.allFinite()) {
      throw std::runtime_error("bcd_solve: non-finite residual in point step");
    }
    const double res = residual.squaredNorm();
    result.residual_history.push_back(res);
    if (prev - res < options.rel_decrease_tol * std::max(prev, 1e-300)) {
      prev = res;
      ++outer;
      break;
    }
    prev = res;
  }

  w = nnls(v, e1, &w);
  residual = v * w - e1;
  result.points = std::move(points);
  result.weights = std::move(w);
  result.residual_sq = residual.squaredNorm();
  result.residual_l1 = residual.lpNorm<1>();
  result.outer_iterations = outer;
  return result;
}

namespace {

QuadratureRule make_rule(const MomentSystem& system, const BcdResult& solution, int p) {
  QuadratureRule rule;
  rule.points = solution.points;
  rule.weights = solution.weights;
  rule.residual_l1 = solution.residual_l1;
  rule.order = p;
  rule.design_dim = system.design_dim();
  rule.noise_dim = system.noise_dim();
  return rule;
}

}  // namespace

QuadratureRule prune(const MomentSystem& system, QuadratureRule rule, double weight_tol,
                     double l1_tol, Index floor, const BcdOptions& options) {
  auto drop_rows = [](const Matrix& mat, const std::vector<Index>& keep) {
    Matrix out(static_cast<Index>(keep.size()), mat.cols());
    for (Index i = 0; i < out.rows(); ++i) out.row(i) = mat.row(keep[static_cast<size_t>(i)]);
    return out;
  };
  auto drop_entries = [](const Vector& vec, const std::vector<Index>& keep) {
    Vector out(static_cast<Index>(keep.size()));
    for (Index i = 0; i < out.size(); ++i) out[i] = vec[keep[static_cast<size_t>(i)]];
    return out;
  };

  while (rule.size() > floor) {
    const double wmax = rule.weights.maxCoeff();
    std::vector<Index> keep;
    for (Index i = 0; i < rule.size(); ++i) {
      if (rule.weights[i] >= weight_tol * wmax) keep.push_back(i);
    }
    if (static_cast<Index>(keep.size()) < floor) {
      // keep the `floor` largest weights
      std::vector<Index> all(static_cast<size_t>(rule.size()));
      std::iota(all.begin(), all.end(), Index{0});
      std::sort(all.begin(), all.end(),
                [&](Index a, Index b) { return rule.weights[a] > rule.weights[b]; });
      keep.assign(all.begin(), all.begin() + floor);
      std::sort(keep.begin(), keep.end());
    }
    if (static_cast<Index>(keep.size()) < rule.size()) {
      BcdResult refit = bcd_solve(system, drop_rows(rule.points, keep),
                                  drop_entries(rule.weights, keep), options);
      if (refit.residual_l1 <= l1_tol) {
        rule.points = std::move(refit.points);
        rule.weights = std::move(refit.weights);
        rule.residual_l1 = refit.residual_l1;
        continue;
      }
    }
    if (rule.size() <= floor) break;

    Index smallest = 0;
    rule.weights.minCoeff(&smallest);
    std::vector<Index> subset;
    for (Index i = 0; i < rule.size(); ++i) {
      if (i != smallest) subset.push_back(i);
    }
    BcdResult refit = bcd_solve(system, drop_rows(rule.points, subset),
                                drop_entries(rule.weights, subset), options);
    if (refit.residual_l1 <= l1_tol) {
      rule.points = std::move(refit.points);
      rule.weights = std::move(refit.weights);
      rule.residual_l1 = refit.residual_l1;
    } else {
      break;
    }
  }
  return rule;
}

QuadratureRule design_rule(const LegendreBasis& basis, int p, const QuadratureOptions& options) {
  const int d = basis.dim();
  const MomentSystem system = MomentSystem::design(basis, p);

  Matrix init_points;
  Vector init_weights;
  double tensor_count = std::pow(static_cast<double>(p + 1), d);
  if (tensor_count <= options.tensor_budget) {
    Vector nodes, weights_1d;
    gauss_legendre_1d(p + 1, nodes, weights_1d);
    const Index m = static_cast<Index>(tensor_count + 0.5);
    init_points.resize(m, d);
    init_weights.resize(m);
    std::vector<int> counter(static_cast<size_t>(d), 0);
    for (Index k = 0; k < m; ++k) {
      double w = 1.0;
      for (int i = 0; i < d; ++i) {
        const auto [lo, hi] = basis.bounds()[static_cast<size_t>(i)];
        init_points(k, i) = lo + (hi - lo) * (nodes[counter[static_cast<size_t>(i)]] + 1.0) / 2.0;
        w *= weights_1d[counter[static_cast<size_t>(i)]] / 2.0;
      }
      init_weights[k] = w;
      int carry = 0;
      while (carry < d && ++counter[static_cast<size_t>(carry)] == p + 1) {
        counter[static_cast<size_t>(carry)] = 0;
        ++carry;
      }
    }
  } else {
    smolyak_rule(d, p, init_points, init_weights);
    for (Index k = 0; k < init_points.rows(); ++k) {
      for (int i = 0; i < d; ++i) {
        const auto [lo, hi] = basis.bounds()[static_cast<size_t>(i)];
        init_points(k, i) = lo + (hi - lo) * (init_points(k, i) + 1.0) / 2.0;
      }
    }
  }

  BcdResult solved = bcd_solve(system, std::move(init_points), std::move(init_weights), options.bcd);
  if (solved.residual_sq > options.design_tol_sq) {
    throw std::runtime_error("design_rule: squared residual " + std::to_string(solved.residual_sq) +
                             " above tolerance with " + std::to_string(solved.points.rows()) +
                             " points");
  }
  QuadratureRule rule = make_rule(system, solved, p);
  BcdOptions prune_bcd = options.bcd;
  prune_bcd.max_outer = options.prune_max_outer;
  return prune(system, std::move(rule), options.weight_prune_tol,
               std::sqrt(options.design_tol_sq), MultiIndexSet::count(d, p), prune_bcd);
}

QuadratureRule noise_rule(const GramSchmidtBasis& basis, const GaussianMixture& mixture, int p,
                          const QuadratureOptions& options) {
  const int d = basis.dim();
  const MomentSystem system = MomentSystem::noise(basis, mixture, p);
  const Index candidates = options.candidate_factor * system.rows();
  Matrix init_points = mixture.sample(candidates, options.seed);
  Vector init_weights = Vector::Constant(candidates, 1.0 / static_cast<double>(candidates));

  BcdResult solved = bcd_solve(system, std::move(init_points), std::move(init_weights), options.bcd);
  if (solved.residual_sq > options.noise_tol_sq) {
    throw std::runtime_error("noise_rule: squared residual " + std::to_string(solved.residual_sq) +
                             " above tolerance with " + std::to_string(solved.points.rows()) +
                             " points");
  }
  QuadratureRule rule = make_rule(system, solved, p);
  BcdOptions prune_bcd = options.bcd;
  prune_bcd.max_outer = options.prune_max_outer;
  return prune(system, std::move(rule), options.weight_prune_tol,
               std::sqrt(options.noise_tol_sq), MultiIndexSet::count(d, p), prune_bcd);
}

QuadratureRule joint_rule(const QuadratureRule& design, const QuadratureRule& noise,
                          const LegendreBasis& design_basis, const GramSchmidtBasis& noise_basis,
                          const GaussianMixture& mixture, int p,
                          const QuadratureOptions& options) {
  const int d1 = design_basis.dim();
  const int d2 = noise_basis.dim();
  const MomentSystem system = MomentSystem::joint(design_basis, noise_basis, mixture, p);

  const Index m = design.size() * noise.size();
  Matrix init_points(m, d1 + d2);
  Vector init_weights(m);
  Index k = 0;
  for (Index a = 0; a < design.size(); ++a) {
    for (Index b = 0; b < noise.size(); ++b, ++k) {
      init_points.row(k).head(d1) = design.points.row(a);
      init_points.row(k).tail(d2) = noise.points.row(b);
      init_weights[k] = design.weights[a] * noise.weights[b];
    }
  }

  BcdResult solved = bcd_solve(system, std::move(init_points), std::move(init_weights), options.bcd);
  QuadratureRule rule = make_rule(system, solved, p);
  BcdOptions prune_bcd = options.bcd;
  prune_bcd.max_outer = options.prune_max_outer;
  rule = prune(system, std::move(rule), options.weight_prune_tol, options.joint_l1_tol,
               MultiIndexSet::count(d1 + d2, p), prune_bcd);
  const Index upper = MultiIndexSet::count(d1 + d2, 2 * p);
  if (rule.size() > upper || rule.residual_l1 > options.joint_l1_tol) {
    rule.warning_capped = true;
  }
  return rule;
}

double residual_l1(const MomentSystem& system, const Matrix& points, const Vector& weights) {
  const Matrix v = system.vandermonde(points);
  return (v * weights - system.target()).lpNorm<1>();
}

}  // namespace ccyopt
