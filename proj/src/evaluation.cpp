#include "ccyopt/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "ccyopt/parallel.hpp"
#include "ccyopt/rng.hpp"

namespace ccyopt {

int indicator(const Vector& metrics, const std::vector<CanonConstraint>& criteria) {
  for (const auto& criterion : criteria) {
    if (!(criterion.sign * metrics[criterion.metric] <= criterion.bound)) return 0;
  }
  return 1;
}

// Evaluates the simulator at (x, xi_r) for every row of `noise`, converting
// failures into an error that names the first offending sample.
Matrix simulate_noise_batch(const Simulator& simulator, const Vector& x, const Matrix& noise,
                            int workers) {
  Matrix metrics(noise.rows(), static_cast<Index>(simulator.metric_names().size()));
  std::vector<std::string> failures(static_cast<size_t>(noise.rows()));
  parallel_for(
      noise.rows(),
      [&](Index r) {
        try {
          metrics.row(r) = simulator.evaluate(x, noise.row(r).transpose()).transpose();
        } catch (const std::exception& err) {
          failures[static_cast<size_t>(r)] = err.what();
        }
      },
      workers);
  for (Index r = 0; r < noise.rows(); ++r) {
    if (!failures[static_cast<size_t>(r)].empty()) {
      throw SimulationError("sample " + std::to_string(r) + ": " + failures[static_cast<size_t>(r)]);
    }
  }
  return metrics;
}

YieldEstimate mc_yield(const Simulator& simulator, const Vector& x,
                       const GaussianMixture& mixture, Index samples, std::uint64_t seed,
                       const std::vector<CanonConstraint>& criteria, int workers) {
  if (samples < 100) throw std::invalid_argument("mc_yield: need at least 100 samples");
  const Matrix noise = mixture.sample(samples, seed);
  const Matrix metrics = simulate_noise_batch(simulator, x, noise, workers);
  return yield_from_metrics(x, metrics, criteria, seed);
}

YieldEstimate yield_from_metrics(const Vector& x, const Matrix& metrics,
                                 const std::vector<CanonConstraint>& criteria,
                                 std::uint64_t seed) {
  const Index samples = metrics.rows();
  YieldEstimate estimate;
  estimate.x = x;
  estimate.samples = samples;
  estimate.seed = seed;
  estimate.violation_rates = Vector::Zero(static_cast<Index>(criteria.size()));
  Index pass_count = 0;
  for (Index r = 0; r < samples; ++r) {
    bool all_ok = true;
    for (size_t c = 0; c < criteria.size(); ++c) {
      const auto& criterion = criteria[c];
      if (!(criterion.sign * metrics(r, criterion.metric) <= criterion.bound)) {
        estimate.violation_rates[static_cast<Index>(c)] += 1.0;
        all_ok = false;
      }
    }
    if (all_ok) ++pass_count;
  }
  estimate.violation_rates /= static_cast<double>(samples);
  estimate.yield = static_cast<double>(pass_count) / static_cast<double>(samples);
  return estimate;
}

std::vector<MetricPdf> metric_pdf(const Simulator& simulator, const Vector& x,
                                  const GaussianMixture& mixture, Index samples,
                                  std::uint64_t seed, int bins, int workers) {
  if (samples < 500) throw std::invalid_argument("metric_pdf: need at least 500 samples");
  const Matrix noise = mixture.sample(samples, seed);
  const Matrix metrics = simulate_noise_batch(simulator, x, noise, workers);
  return pdf_from_metrics(metrics, simulator.metric_names(), bins);
}

std::vector<MetricPdf> pdf_from_metrics(const Matrix& metrics,
                                        const std::vector<std::string>& names, int bins) {
  if (bins < 1) throw std::invalid_argument("metric_pdf: need at least one bin");
  const Index samples = metrics.rows();
  std::vector<MetricPdf> out;
  for (Index m = 0; m < metrics.cols(); ++m) {
    MetricPdf pdf;
    pdf.name = names[static_cast<size_t>(m)];
    const double lo = metrics.col(m).minCoeff();
    const double hi = metrics.col(m).maxCoeff();
    const bool degenerate = !(hi > lo);
    const int n_bins = degenerate ? 1 : bins;
    const double width = degenerate ? std::max(1e-9, std::abs(lo) * 1e-9) : (hi - lo) / n_bins;
    const double left = degenerate ? lo - width / 2.0 : lo;
    pdf.bin_edges.resize(n_bins + 1);
    for (int b = 0; b <= n_bins; ++b) pdf.bin_edges[b] = left + b * width;
    pdf.bin_density = Vector::Zero(n_bins);
    for (Index r = 0; r < samples; ++r) {
      int b = degenerate ? 0 : static_cast<int>((metrics(r, m) - left) / width);
      b = std::clamp(b, 0, n_bins - 1);
      pdf.bin_density[b] += 1.0;
    }
    pdf.bin_density /= static_cast<double>(samples) * width;

    // Gaussian-kernel smooth with Silverman's bandwidth
    const double mean = metrics.col(m).mean();
    const double sd = std::sqrt((metrics.col(m).array() - mean).square().sum() /
                                std::max<double>(1.0, static_cast<double>(samples - 1)));
    const double h = std::max(1.06 * sd * std::pow(static_cast<double>(samples), -0.2),
                              degenerate ? width : 1e-12 * std::max(1.0, std::abs(mean)));
    const int curve_points = 201;
    pdf.curve_x.resize(curve_points);
    pdf.curve_density.resize(curve_points);
    const double clo = lo - 3.0 * h;
    const double chi = hi + 3.0 * h;
    for (int i = 0; i < curve_points; ++i) {
      const double v = clo + (chi - clo) * i / (curve_points - 1);
      pdf.curve_x[i] = v;
      double density = 0.0;
      for (Index r = 0; r < samples; ++r) {
        const double z = (v - metrics(r, m)) / h;
        density += std::exp(-0.5 * z * z);
      }
      pdf.curve_density[i] =
          density / (static_cast<double>(samples) * h * std::sqrt(2.0 * 3.14159265358979323846));
    }
    out.push_back(std::move(pdf));
  }
  return out;
}

double byo_kde(const Vector& x, const std::vector<Vector>& pass_designs, double bandwidth) {
  // Appendix-style estimate, implemented verbatim: the exponent uses 1/(2h)
  // and the per-sample normalizer 1/(sqrt(2*pi)*h) regardless of dimension.
  const double norm = 1.0 / (std::sqrt(2.0 * 3.14159265358979323846) * bandwidth);
  double value = 0.0;
  for (const auto& mu : pass_designs) {
    value += norm * std::exp(-(x - mu).squaredNorm() / (2.0 * bandwidth));
  }
  return value / static_cast<double>(pass_designs.size());
}

namespace {

Vector byo_kde_gradient(const Vector& x, const std::vector<Vector>& pass_designs,
                        double bandwidth) {
  const double norm = 1.0 / (std::sqrt(2.0 * 3.14159265358979323846) * bandwidth);
  Vector gradient = Vector::Zero(x.size());
  for (const auto& mu : pass_designs) {
    const double weight = norm * std::exp(-(x - mu).squaredNorm() / (2.0 * bandwidth));
    gradient -= weight / bandwidth * (x - mu);
  }
  return gradient / static_cast<double>(pass_designs.size());
}

Vector ascend_kde(Vector x, const std::vector<Vector>& pass_designs, double bandwidth,
                  const Vector& lo, const Vector& hi) {
  double value = byo_kde(x, pass_designs, bandwidth);
  for (int iter = 0; iter < 200; ++iter) {
    const Vector gradient = byo_kde_gradient(x, pass_designs, bandwidth);
    double step = bandwidth;
    bool moved = false;
    for (int bt = 0; bt < 40; ++bt) {
      const Vector candidate = (x + step * gradient).cwiseMax(lo).cwiseMin(hi);
      const double candidate_value = byo_kde(candidate, pass_designs, bandwidth);
      if (candidate_value > value + 1e-14 * std::abs(value)) {
        x = candidate;
        value = candidate_value;
        moved = true;
        break;
      }
      step *= 0.5;
    }
    if (!moved) break;
  }
  return x;
}

}  // namespace

ByoResult byo_optimize(const Simulator& simulator, const GaussianMixture& mixture,
                       const Vector& lower, const Vector& upper,
                       const std::vector<CanonConstraint>& criteria, int objective_metric,
                       bool maximize, const ByoOptions& options) {
  if (lower.size() == 0 || lower.size() != upper.size()) {
    throw std::invalid_argument("byo_optimize: invalid bounds");
  }
  const int dim = static_cast<int>(lower.size());
  ByoResult result;
  std::vector<Vector> pass_designs;
  Vector previous;
  bool enlarged = false;
  int draw_count = options.samples_per_iteration;

  for (int iteration = 0; iteration < options.max_iterations; ++iteration) {
    // E-step: joint samples, x uniform over the box, xi from the mixture
    Xoshiro256pp uniform_rng(derive_seed(options.seed, 2 * static_cast<std::uint64_t>(iteration)));
    const Matrix noise =
        mixture.sample(draw_count, derive_seed(options.seed, 2 * static_cast<std::uint64_t>(iteration) + 1));
    Matrix designs(draw_count, dim);
    for (Index r = 0; r < draw_count; ++r) {
      for (int i = 0; i < dim; ++i) {
        designs(r, i) = lower[i] + (upper[i] - lower[i]) * uniform_rng.uniform();
      }
    }
    std::vector<Vector> batch_metrics(static_cast<size_t>(draw_count));
    std::vector<char> failed(static_cast<size_t>(draw_count), 0);
    parallel_for(
        draw_count,
        [&](Index r) {
          try {
            batch_metrics[static_cast<size_t>(r)] =
                simulator.evaluate(designs.row(r).transpose(), noise.row(r).transpose());
          } catch (const std::exception&) {
            failed[static_cast<size_t>(r)] = 1;  // counts as a non-pass sample
          }
        },
        options.workers);
    result.simulation_count += draw_count;
    for (Index r = 0; r < draw_count; ++r) {
      if (failed[static_cast<size_t>(r)]) continue;
      const Vector& metrics = batch_metrics[static_cast<size_t>(r)];
      if (metrics.allFinite() && indicator(metrics, criteria) == 1) {
        pass_designs.push_back(designs.row(r).transpose());
      }
    }

    if (pass_designs.empty()) {
      if (enlarged) {
        throw SimulationError("byo_optimize: no passing samples after enlarging the draw");
      }
      enlarged = true;
      draw_count *= 2;
      continue;  // skip the maximization step
    }
    draw_count = options.samples_per_iteration;

    // M-step: maximize the kernel density over the box
    std::vector<Index> ranked(pass_designs.size());
    std::iota(ranked.begin(), ranked.end(), Index{0});
    std::sort(ranked.begin(), ranked.end(), [&](Index a, Index b) {
      const double va = byo_kde(pass_designs[static_cast<size_t>(a)], pass_designs, options.kde_bandwidth);
      const double vb = byo_kde(pass_designs[static_cast<size_t>(b)], pass_designs, options.kde_bandwidth);
      if (va != vb) return va > vb;
      return a < b;
    });
    std::vector<Vector> starts;
    const int from_samples = std::min<int>(options.ascent_starts / 2, static_cast<int>(ranked.size()));
    for (int s = 0; s < from_samples; ++s) {
      starts.push_back(pass_designs[static_cast<size_t>(ranked[static_cast<size_t>(s)])]);
    }
    static const double primes[] = {2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37};
    Xoshiro256pp shift_rng(derive_seed(options.seed, 0x5eedull));
    Vector shift(dim);
    for (int i = 0; i < dim; ++i) shift[i] = shift_rng.uniform();
    for (int s = static_cast<int>(starts.size()); s < options.ascent_starts; ++s) {
      Vector x(dim);
      for (int i = 0; i < dim; ++i) {
        double a = std::sqrt(primes[i % 12]);
        double u = shift[i] + s * (a - std::floor(a));
        u -= std::floor(u);
        x[i] = lower[i] + (upper[i] - lower[i]) * u;
      }
      starts.push_back(std::move(x));
    }
    std::vector<Vector> ascended(starts.size());
    parallel_for(
        static_cast<Index>(starts.size()),
        [&](Index s) {
          ascended[static_cast<size_t>(s)] = ascend_kde(starts[static_cast<size_t>(s)], pass_designs,
                                                        options.kde_bandwidth, lower, upper);
        },
        options.workers);
    Vector best = ascended[0];
    double best_value = byo_kde(best, pass_designs, options.kde_bandwidth);
    for (size_t s = 1; s < ascended.size(); ++s) {
      const double value = byo_kde(ascended[s], pass_designs, options.kde_bandwidth);
      if (value > best_value) {
        best_value = value;
        best = ascended[s];
      }
    }

    // one check simulation at the new iterate
    const Matrix check_noise =
        mixture.sample(1, derive_seed(options.seed, 0x1000ull + static_cast<std::uint64_t>(iteration)));
    ByoRecord record;
    record.x = best;
    try {
      const Vector metrics = simulator.evaluate(best, check_noise.row(0).transpose());
      record.objective = metrics[objective_metric];
      record.pass = metrics.allFinite() && indicator(metrics, criteria) == 1;
    } catch (const std::exception&) {
      record.objective = std::numeric_limits<double>::quiet_NaN();
      record.pass = false;
    }
    result.simulation_count += 1;
    result.history.push_back(record);

    if (previous.size() > 0 && (best - previous).norm() < options.residue_tol) break;
    previous = best;
  }

  for (const auto& record : result.history) {
    if (!record.pass) continue;
    const bool better = !result.found_pass ||
                        (maximize ? record.objective > result.objective
                                  : record.objective < result.objective);
    if (better) {
      result.found_pass = true;
      result.x = record.x;
      result.objective = record.objective;
    }
  }
  return result;
}

}  // namespace ccyopt
