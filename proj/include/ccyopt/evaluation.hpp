#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "ccyopt/gaussian_mixture.hpp"
#include "ccyopt/simulators.hpp"

namespace ccyopt {

// Canonicalized yield criterion sign * y_metric <= bound.
struct CanonConstraint {
  int metric = 0;
  double sign = 1.0;
  double bound = 0.0;
};

// 1 iff every criterion holds (inclusive comparison).
int indicator(const Vector& metrics, const std::vector<CanonConstraint>& criteria);

struct YieldEstimate {
  Vector x;
  Index samples = 0;
  double yield = 0.0;
  Vector violation_rates;  // one entry per criterion
  std::uint64_t seed = 0;
};

// Monte Carlo yield at a fixed design: draws M noise samples, evaluates the
// simulator, and averages the indicator. Simulator failures carry the index
// of the offending sample.
YieldEstimate mc_yield(const Simulator& simulator, const Vector& x,
                       const GaussianMixture& mixture, Index samples, std::uint64_t seed,
                       const std::vector<CanonConstraint>& criteria, int workers = 0);

// The same reduction over an existing metric matrix (row per sample).
YieldEstimate yield_from_metrics(const Vector& x, const Matrix& metrics,
                                 const std::vector<CanonConstraint>& criteria,
                                 std::uint64_t seed);

// Batch of simulator evaluations at a fixed design; failures carry the
// sample index.
Matrix simulate_noise_batch(const Simulator& simulator, const Vector& x, const Matrix& noise,
                            int workers = 0);

struct MetricPdf {
  std::string name;
  Vector bin_edges;     // bins+1 edges
  Vector bin_density;   // normalized histogram, integrates to 1
  Vector curve_x;       // Gaussian-kernel smooth, for plotting
  Vector curve_density;
};

std::vector<MetricPdf> metric_pdf(const Simulator& simulator, const Vector& x,
                                  const GaussianMixture& mixture, Index samples,
                                  std::uint64_t seed, int bins, int workers = 0);

std::vector<MetricPdf> pdf_from_metrics(const Matrix& metrics,
                                        const std::vector<std::string>& names, int bins);

// Bayesian yield optimization baseline: an expectation-maximization loop that
// draws joint samples, keeps the passing designs, fits the kernel density
// written with exponent 1/(2h), and maximizes it over the box.
struct ByoOptions {
  int samples_per_iteration = 100;
  double kde_bandwidth = 0.3;
  int max_iterations = 20;
  double residue_tol = 1e-6;
  std::uint64_t seed = 99;
  int ascent_starts = 32;
  int workers = 0;
};

struct ByoRecord {
  Vector x;
  double objective = 0.0;
  bool pass = false;
};

struct ByoResult {
  Vector x;                   // best passing design
  double objective = 0.0;     // its recorded objective draw
  bool found_pass = false;
  Index simulation_count = 0;
  std::vector<ByoRecord> history;
};

double byo_kde(const Vector& x, const std::vector<Vector>& pass_designs, double bandwidth);

ByoResult byo_optimize(const Simulator& simulator, const GaussianMixture& mixture,
                       const Vector& lower, const Vector& upper,
                       const std::vector<CanonConstraint>& criteria, int objective_metric,
                       bool maximize, const ByoOptions& options = {});

}  // namespace ccyopt
