#include "ccyopt/pipeline.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>

#include "ccyopt/parallel.hpp"
#include "ccyopt/rng.hpp"

namespace ccyopt {

namespace fs = std::filesystem;

std::string format_g17(double value) {
  char buffer[64];
  std::snprintf(buffer, sizeof(buffer), "%.17g", value);
  return buffer;
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write '" + path + "'");
  out << text;
}

namespace {

std::string timestamp_utc() {
  const auto now = std::chrono::system_clock::now();
  const std::time_t tt = std::chrono::system_clock::to_time_t(now);
  char buffer[32];
  std::tm tm_utc{};
  gmtime_r(&tt, &tm_utc);
  std::strftime(buffer, sizeof(buffer), "%Y-%m-%dT%H:%M:%SZ", &tm_utc);
  return buffer;
}

struct Bases {
  std::shared_ptr<LegendreBasis> design;
  std::shared_ptr<GramSchmidtBasis> noise;
};

Bases build_bases(const RunConfig& cfg) {
  const int p = cfg.surrogate.order;
  return {std::make_shared<LegendreBasis>(cfg.problem.bounds, 2 * p),
          std::make_shared<GramSchmidtBasis>(cfg.mixture(), 2 * p)};
}

struct Rules {
  QuadratureRule design;
  QuadratureRule noise;
  QuadratureRule joint;
};

std::string rule_path(const RunConfig& cfg) { return cfg.output_dir + "/rule.json"; }
std::string surrogate_path(const RunConfig& cfg) { return cfg.output_dir + "/surrogate.json"; }

Rules compute_rules(const RunConfig& cfg, const Bases& bases) {
  const std::string print = cfg.cache_fingerprint();
  const std::uint64_t print_hash = fingerprint(print);
  const std::string path = rule_path(cfg);
  if (fs::exists(path)) {
    std::ifstream in(path);
    Json j;
    if (in && (in >> j, j.value("fingerprint", std::uint64_t{0}) == print_hash)) {
      return {quadrature_rule_from_json(j.at("design")), quadrature_rule_from_json(j.at("noise")),
              quadrature_rule_from_json(j.at("joint"))};
    }
  }
  const int p = cfg.surrogate.order;
  Rules rules;
  rules.design = design_rule(*bases.design, p, cfg.surrogate.quadrature);
  rules.noise = noise_rule(*bases.noise, cfg.mixture(), p, cfg.surrogate.quadrature);
  rules.joint = joint_rule(rules.design, rules.noise, *bases.design, *bases.noise, cfg.mixture(),
                           p, cfg.surrogate.quadrature);
  Json j{{"fingerprint", print_hash},
         {"design", to_json(rules.design)},
         {"noise", to_json(rules.noise)},
         {"joint", to_json(rules.joint)}};
  write_text(path, j.dump(2) + "\n");
  return rules;
}

SurrogateModel build_surrogate(const RunConfig& cfg, const Bases& bases, const Rules& rules,
                               const Simulator& simulator) {
  const std::uint64_t print_hash = fingerprint(cfg.cache_fingerprint());
  const std::string path = surrogate_path(cfg);
  if (fs::exists(path)) {
    std::ifstream in(path);
    Json j;
    if (in && (in >> j, j.value("fingerprint", std::uint64_t{0}) == print_hash)) {
      return surrogate_from_json(j.at("model"));
    }
  }
  const Matrix outputs = simulator.evaluate_batch(rules.joint.points);
  SurrogateModel model = SurrogateModel::fit(rules.joint, outputs, bases.design, bases.noise,
                                             cfg.surrogate.order, simulator.metric_names());
  Json j{{"fingerprint", print_hash}, {"model", to_json(model)}};
  write_text(path, j.dump(2) + "\n");
  return model;
}

std::string sanitize(const std::string& name) {
  std::string out;
  for (const char c : name) out += (std::isalnum(static_cast<unsigned char>(c)) ? c : '_');
  return out;
}

void write_pdf_csvs(const RunConfig& cfg, const std::vector<MetricPdf>& pdfs) {
  for (const auto& pdf : pdfs) {
    std::string text = "value,density\n";
    for (Index i = 0; i < pdf.curve_x.size(); ++i) {
      text += format_g17(pdf.curve_x[i]) + "," + format_g17(pdf.curve_density[i]) + "\n";
    }
    write_text(cfg.output_dir + "/pdf_" + sanitize(pdf.name) + ".csv", text);
  }
}

// Fig. 6/9-style data: nominal spectrum plus noisy draws at the chosen design.
void write_spectrum_csv(const RunConfig& cfg, const Vector& x_star) {
  if (cfg.problem.name != "microring" && cfg.problem.name != "mzi") return;
  const bool ring = cfg.problem.name == "microring";
  const Matrix draws = cfg.mixture().sample(cfg.validation.spectrum_draws,
                                            derive_seed(cfg.validation.seed, 51));
  std::string text = "draw,frequency,through,drop\n";
  auto respond = [&](const Vector& xi) {
    if (ring) {
      const Vector kappa = (x_star + xi).cwiseMax(1e-3).cwiseMin(1.0 - 1e-3);
      return microring_response(kappa);
    }
    const Vector gaps = (x_star + xi).cwiseMax(10.0).cwiseMin(600.0);
    Vector kappa(3);
    for (int i = 0; i < 3; ++i) kappa[i] = std::exp(-gaps[i] / device::mzi_gap_decay_nm);
    return mzi_response(kappa);
  };
  auto append = [&](int draw, const SpectralResponse& response) {
    for (Index i = 0; i < response.frequency.size(); ++i) {
      text += std::to_string(draw) + "," + format_g17(response.frequency[i]) + "," +
              format_g17(response.through[i]) + "," + format_g17(response.drop[i]) + "\n";
    }
  };
  append(0, respond(Vector::Zero(x_star.size())));
  for (Index d = 0; d < draws.rows(); ++d) append(static_cast<int>(d) + 1, respond(draws.row(d).transpose()));
  write_text(cfg.output_dir + "/spectrum.csv", text);
}

Json constraints_json(const RunConfig& cfg) {
  Json arr = Json::array();
  for (const auto& con : cfg.problem.chance.constraints) {
    arr.push_back(Json{{"metric", con.metric},
                       {"sense", con.upper_bound ? "le" : "ge"},
                       {"threshold", con.threshold},
                       {"epsilon", con.epsilon}});
  }
  return arr;
}

Json base_results(const RunConfig& cfg, const std::string& method) {
  return Json{{"method", method},
              {"problem", cfg.problem.name},
              {"constraints", constraints_json(cfg)},
              {"epsilon", cfg.uniform_epsilon()},
              {"order", cfg.surrogate.order},
              {"seeds",
               Json{{"quadrature", cfg.surrogate.quadrature.seed},
                    {"solver", cfg.solver.solve.seed},
                    {"validation", cfg.validation.seed}}},
              {"timestamp", timestamp_utc()}};
}

void finalize_results(const RunConfig& cfg, const Json& results) {
  write_text(cfg.output_dir + "/results.json", results.dump(2) + "\n");
}

}  // namespace

Json run_quadrature(const RunConfig& cfg) {
  fs::create_directories(cfg.output_dir);
  const Bases bases = build_bases(cfg);
  const Rules rules = compute_rules(cfg, bases);
  return Json{{"design_points", rules.design.size()},
              {"noise_points", rules.noise.size()},
              {"joint_points", rules.joint.size()},
              {"design_residual_l1", rules.design.residual_l1},
              {"noise_residual_l1", rules.noise.residual_l1},
              {"joint_residual_l1", rules.joint.residual_l1},
              {"warning_capped", rules.joint.warning_capped}};
}

Json run_surrogate_build(const RunConfig& cfg) {
  fs::create_directories(cfg.output_dir);
  const Bases bases = build_bases(cfg);
  const Rules rules = compute_rules(cfg, bases);
  const auto simulator = cfg.make_simulator();
  const SurrogateModel model = build_surrogate(cfg, bases, rules, *simulator);
  return Json{{"joint_points", rules.joint.size()},
              {"simulations", model.simulation_count()},
              {"metrics", model.metric_names()},
              {"coefficients", model.pair_count()}};
}

PipelineOutcome run_optimize(const RunConfig& cfg) {
  fs::create_directories(cfg.output_dir);
  const Bases bases = build_bases(cfg);
  const Rules rules = compute_rules(cfg, bases);
  const auto simulator = cfg.make_simulator();
  const SurrogateModel model = build_surrogate(cfg, bases, rules, *simulator);

  const bool mean_only = cfg.solver.reformulation == "mean-only";
  const ChanceProblem problem = mean_only ? mean_only_assemble(model, cfg.problem.chance)
                                          : assemble(model, cfg.problem.chance);
  SolveResult solution = solve(problem, cfg.solver.solve);
  if (cfg.solver.grid_check && problem.dim() <= 4 &&
      std::pow(cfg.solver.grid_points_per_dim, problem.dim()) <= 5e6 &&
      solution.status != SolveStatus::infeasible) {
    const SolveResult reference = grid_oracle(problem, cfg.solver.grid_points_per_dim);
    if (reference.status != SolveStatus::infeasible) {
      const double gap = std::abs(reference.objective_value - solution.objective_value);
      solution.oracle_agreement = gap;
      // Lipschitz slack of one grid cell, from the objective gradient at x*
      double value;
      Vector gradient;
      problem.objective_with_gradient(solution.x_star, value, gradient);
      Vector cell = (problem.upper() - problem.lower()) /
                    static_cast<double>(cfg.solver.grid_points_per_dim - 1);
      const double slack = gradient.cwiseAbs().dot(cell) + 1e-9;
      if (gap <= slack) solution.status = SolveStatus::optimal;
    }
  }

  Json results = base_results(cfg, mean_only ? "mean-only" : "proposed");
  results["quadrature"] = Json{{"design_points", rules.design.size()},
                               {"noise_points", rules.noise.size()},
                               {"joint_points", rules.joint.size()},
                               {"residual_l1", rules.joint.residual_l1},
                               {"warning_capped", rules.joint.warning_capped}};
  results["solver"] = to_json(solution);
  results["simulations"] =
      Json{{"surrogate_build", model.simulation_count()}, {"validation_mc", 0}};

  if (solution.status == SolveStatus::infeasible) {
    results["x_star"] = to_json(solution.x_star);
    results["objective"] = nullptr;
    results["yield"] = nullptr;
    finalize_results(cfg, results);
    return {exit_infeasible, results};
  }

  // single validation batch: yield, violation rates, MC objective, PDFs
  const Matrix noise = cfg.mixture().sample(cfg.validation.samples, cfg.validation.seed);
  const Matrix metrics = simulate_noise_batch(*simulator, solution.x_star, noise);
  const YieldEstimate estimate =
      yield_from_metrics(solution.x_star, metrics, cfg.criteria(), cfg.validation.seed);
  const double objective_mc = metrics.col(cfg.problem.chance.objective.metric).mean();
  write_pdf_csvs(cfg, pdf_from_metrics(metrics, simulator->metric_names(), cfg.validation.bins));
  write_spectrum_csv(cfg, solution.x_star);

  results["x_star"] = to_json(solution.x_star);
  results["objective"] = solution.objective_value;
  results["objective_mc"] = objective_mc;
  results["yield"] = estimate.yield;
  results["violation_rates"] = to_json(estimate.violation_rates);
  results["simulations"]["validation_mc"] = cfg.validation.samples;
  finalize_results(cfg, results);
  return {exit_ok, results};
}

PipelineOutcome run_byo(const RunConfig& cfg) {
  fs::create_directories(cfg.output_dir);
  auto simulator = cfg.make_simulator();
  if (auto* external = dynamic_cast<ExternalSimulator*>(simulator.get())) {
    external->set_cache_enabled(false);  // honest simulation accounting
  }
  const auto& bounds = cfg.problem.bounds;
  Vector lo(static_cast<Index>(bounds.size())), hi(static_cast<Index>(bounds.size()));
  for (size_t i = 0; i < bounds.size(); ++i) {
    lo[static_cast<Index>(i)] = bounds[i].first;
    hi[static_cast<Index>(i)] = bounds[i].second;
  }
  ByoOptions options;
  options.seed = cfg.solver.solve.seed;
  const ByoResult byo = byo_optimize(*simulator, cfg.mixture(), lo, hi, cfg.criteria(),
                                     cfg.problem.chance.objective.metric,
                                     cfg.problem.chance.objective.maximize, options);

  Json results = base_results(cfg, "byo");
  results["simulations"] = Json{{"byo", byo.simulation_count}, {"validation_mc", 0}};
  results["byo_iterations"] = byo.history.size();

  if (!byo.found_pass) {
    results["x_star"] = nullptr;
    results["objective"] = nullptr;
    results["yield"] = nullptr;
    finalize_results(cfg, results);
    return {exit_infeasible, results};
  }

  const Matrix noise = cfg.mixture().sample(cfg.validation.samples, cfg.validation.seed);
  const Matrix metrics = simulate_noise_batch(*simulator, byo.x, noise);
  const YieldEstimate estimate = yield_from_metrics(byo.x, metrics, cfg.criteria(), cfg.validation.seed);
  const double objective_mc = metrics.col(cfg.problem.chance.objective.metric).mean();
  write_pdf_csvs(cfg, pdf_from_metrics(metrics, simulator->metric_names(), cfg.validation.bins));
  write_spectrum_csv(cfg, byo.x);

  results["x_star"] = to_json(byo.x);
  results["objective"] = objective_mc;  // the baseline has no surrogate prediction
  results["objective_mc"] = objective_mc;
  results["yield"] = estimate.yield;
  results["violation_rates"] = to_json(estimate.violation_rates);
  results["simulations"]["validation_mc"] = cfg.validation.samples;
  finalize_results(cfg, results);
  return {exit_ok, results};
}

PipelineOutcome run_yield(const RunConfig& cfg) {
  if (!cfg.evaluate_x) throw ConfigError("yield: config needs an 'evaluate' block with 'x'");
  fs::create_directories(cfg.output_dir);
  const auto simulator = cfg.make_simulator();
  const Matrix noise = cfg.mixture().sample(cfg.validation.samples, cfg.validation.seed);
  const Matrix metrics = simulate_noise_batch(*simulator, *cfg.evaluate_x, noise);
  const YieldEstimate estimate =
      yield_from_metrics(*cfg.evaluate_x, metrics, cfg.criteria(), cfg.validation.seed);
  write_pdf_csvs(cfg, pdf_from_metrics(metrics, simulator->metric_names(), cfg.validation.bins));

  Json results = base_results(cfg, "yield");
  results["x_star"] = to_json(*cfg.evaluate_x);
  results["objective_mc"] = metrics.col(cfg.problem.chance.objective.metric).mean();
  results["yield"] = estimate.yield;
  results["violation_rates"] = to_json(estimate.violation_rates);
  results["simulations"] = Json{{"validation_mc", cfg.validation.samples}};
  finalize_results(cfg, results);
  return {exit_ok, results};
}

std::string run_compare(const std::vector<std::string>& inputs, const std::string& csv_path) {
  if (inputs.size() < 2) throw ConfigError("compare: need at least two result or config files");
  std::vector<Json> rows;
  for (const auto& path : inputs) {
    std::ifstream in(path);
    if (!in) throw ConfigError("compare: cannot open '" + path + "'");
    Json j;
    try {
      in >> j;
    } catch (const std::exception& err) {
      throw ConfigError("compare: parse error in '" + path + "': " + err.what());
    }
    if (j.contains("method") && j.contains("x_star")) {
      rows.push_back(std::move(j));
    } else {
      RunConfig cfg = RunConfig::from_json(j);
      rows.push_back(run_optimize(cfg).results);
    }
  }
  const std::string problem = rows.front().value("problem", std::string{});
  for (const auto& row : rows) {
    if (row.value("problem", std::string{}) != problem) {
      throw ConfigError("compare: results refer to different problems");
    }
  }
  std::string text = "method,epsilon,simulations,expected_objective,mc_yield\n";
  for (const auto& row : rows) {
    const Json& sims = row.at("simulations");
    Index total = 0;
    if (sims.contains("surrogate_build")) total = sims.at("surrogate_build").get<Index>();
    if (sims.contains("byo")) total = sims.at("byo").get<Index>();
    const double objective = row.contains("objective") && !row.at("objective").is_null()
                                 ? row.at("objective").get<double>()
                                 : std::numeric_limits<double>::quiet_NaN();
    const double yield_value = row.contains("yield") && !row.at("yield").is_null()
                                   ? row.at("yield").get<double>()
                                   : std::numeric_limits<double>::quiet_NaN();
    text += row.value("method", std::string{}) + "," + format_g17(row.value("epsilon", 0.0)) +
            "," + std::to_string(total) + "," + format_g17(objective) + "," +
            format_g17(yield_value) + "\n";
  }
  write_text(csv_path, text);
  return text;
}

}  // namespace ccyopt
