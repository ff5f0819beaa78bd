#include "ccyopt/config.hpp"

#include <cmath>
#include <fstream>
#include <set>

namespace ccyopt {

namespace {

void reject_unknown_keys(const Json& j, const std::string& where,
                         const std::set<std::string>& allowed) {
  if (!j.is_object()) throw ConfigError(where + ": expected an object");
  for (const auto& [key, value] : j.items()) {
    (void)value;
    if (!allowed.count(key)) throw ConfigError(where + ": unknown key '" + key + "'");
  }
}

GaussianMixture default_mixture(const std::string& name) {
  auto correlated = [](int d, double mu_scale, double sigma, const Matrix& corr) {
    Matrix cov = sigma * sigma * corr;
    MixtureComponent plus{0.5, Vector::Constant(d, mu_scale), cov};
    MixtureComponent minus{0.5, Vector::Constant(d, -mu_scale), cov};
    return GaussianMixture({plus, minus});
  };
  if (name == "synthetic") {
    Matrix corr(2, 2);
    corr << 1.0, 0.75, 0.75, 1.0;
    return correlated(2, 0.01, 0.01, corr);
  }
  if (name == "microring") {
    Matrix corr(4, 4);
    corr << 1.0, 0.4, 0.1, 0.4,
            0.4, 1.0, 0.4, 0.1,
            0.1, 0.4, 1.0, 0.4,
            0.4, 0.1, 0.4, 1.0;
    return correlated(4, 0.006, 0.006, corr);
  }
  if (name == "mzi") {
    Matrix corr(3, 3);
    corr << 1.0, 0.4, 0.1,
            0.4, 1.0, 0.4,
            0.1, 0.4, 1.0;
    return correlated(3, 1.0, 1.0, corr);
  }
  throw ConfigError("no default mixture for problem '" + name + "'");
}

std::vector<std::pair<double, double>> default_bounds(const std::string& name) {
  if (name == "synthetic") return {{-1.0, 1.0}, {-1.0, 1.0}};
  if (name == "microring") return {{0.3, 0.6}, {0.3, 0.6}, {0.3, 0.6}, {0.3, 0.6}};
  if (name == "mzi") return {{100.0, 300.0}, {100.0, 300.0}, {100.0, 300.0}};
  throw ConfigError("no default bounds for problem '" + name + "'");
}

ChanceSpec default_chance(const std::string& name) {
  ChanceSpec spec;
  spec.objective = {0, true};
  if (name == "synthetic") {
    spec.constraints = {{1, true, 1.0, 0.05}, {2, true, 1.0, 0.05}};
  } else if (name == "microring") {
    // extinction ratio >= 25 dB, passband roughness <= 1 dB
    spec.constraints = {{1, false, 25.0, 0.05}, {2, true, 1.0, 0.05}};
  } else if (name == "mzi") {
    // crosstalk <= -4 dB, attenuation <= 2 dB
    spec.constraints = {{1, true, -4.0, 0.05}, {2, true, 2.0, 0.05}};
  } else {
    throw ConfigError("no default constraints for problem '" + name + "'");
  }
  return spec;
}

int resolve_metric(const Json& j, const std::vector<std::string>& names, const std::string& where) {
  if (j.is_number_integer()) {
    const int index = j.get<int>();
    if (index < 0 || index >= static_cast<int>(names.size())) {
      throw ConfigError(where + ": metric index out of range");
    }
    return index;
  }
  if (j.is_string()) {
    const std::string name = j.get<std::string>();
    for (size_t i = 0; i < names.size(); ++i) {
      if (names[i] == name) return static_cast<int>(i);
    }
    throw ConfigError(where + ": unknown metric '" + name + "'");
  }
  throw ConfigError(where + ": metric must be an index or a name");
}

}  // namespace

RunConfig RunConfig::from_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  Json j;
  try {
    in >> j;
  } catch (const std::exception& err) {
    throw ConfigError("config parse error in '" + path + "': " + err.what());
  }
  return from_json(j);
}

RunConfig RunConfig::from_json(const Json& root) {
  reject_unknown_keys(root, "config",
                      {"problem", "surrogate", "solver", "validation", "output", "evaluate", "seed"});
  RunConfig cfg;

  if (!root.contains("problem")) throw ConfigError("config: 'problem' block required");
  const Json& problem = root.at("problem");
  reject_unknown_keys(problem, "problem",
                      {"name", "external", "bounds", "mixture", "objective", "constraints",
                       "epsilon", "bonferroni"});
  cfg.problem.name = problem.value("name", std::string("external"));

  if (problem.contains("external")) {
    const Json& ext = problem.at("external");
    reject_unknown_keys(ext, "problem.external",
                        {"command", "design_dim", "noise_dim", "metrics", "timeout_s"});
    ExternalSimulator::Options opts;
    opts.command = ext.at("command").get<std::string>();
    opts.design_dim = ext.at("design_dim").get<int>();
    opts.noise_dim = ext.at("noise_dim").get<int>();
    opts.metric_names = ext.at("metrics").get<std::vector<std::string>>();
    opts.timeout_s = ext.value("timeout_s", 300.0);
    cfg.problem.external = std::move(opts);
    cfg.problem.name = "external";
  } else if (cfg.problem.name == "external") {
    throw ConfigError("problem: either a built-in 'name' or an 'external' block is required");
  } else if (!make_builtin(cfg.problem.name)) {
    throw ConfigError("problem: unknown built-in '" + cfg.problem.name + "'");
  }
  const bool builtin = !cfg.problem.external.has_value();

  if (problem.contains("bounds")) {
    for (const auto& pair : problem.at("bounds")) {
      if (!pair.is_array() || pair.size() != 2) {
        throw ConfigError("problem.bounds: expected [lower, upper] pairs");
      }
      cfg.problem.bounds.emplace_back(pair[0].get<double>(), pair[1].get<double>());
    }
  } else if (builtin) {
    cfg.problem.bounds = default_bounds(cfg.problem.name);
  } else {
    throw ConfigError("problem.bounds: required for external simulators");
  }
  for (const auto& [lo, hi] : cfg.problem.bounds) {
    if (!(lo < hi)) throw ConfigError("problem.bounds: lower must be below upper");
  }

  if (problem.contains("mixture")) {
    const Json& mix = problem.at("mixture");
    reject_unknown_keys(mix, "problem.mixture", {"weights", "means", "covariances"});
    cfg.problem.mixture = mixture_from_json(mix);
  } else if (builtin) {
    cfg.problem.mixture = default_mixture(cfg.problem.name);
  } else {
    throw ConfigError("problem.mixture: required for external simulators");
  }

  auto simulator = cfg.problem.external
                       ? std::unique_ptr<Simulator>(new ExternalSimulator(*cfg.problem.external))
                       : make_builtin(cfg.problem.name);
  const auto metric_names = simulator->metric_names();
  if (static_cast<int>(cfg.problem.bounds.size()) != simulator->design_dim()) {
    throw ConfigError("problem.bounds: expected " + std::to_string(simulator->design_dim()) +
                      " entries");
  }
  if (cfg.problem.mixture->dim() != simulator->noise_dim()) {
    throw ConfigError("problem.mixture: expected dimension " +
                      std::to_string(simulator->noise_dim()));
  }

  if (problem.contains("objective")) {
    const Json& objective = problem.at("objective");
    reject_unknown_keys(objective, "problem.objective", {"metric", "sense"});
    cfg.problem.chance.objective.metric =
        resolve_metric(objective.at("metric"), metric_names, "problem.objective");
    const std::string sense = objective.value("sense", std::string("max"));
    if (sense != "max" && sense != "min") {
      throw ConfigError("problem.objective.sense: expected 'max' or 'min'");
    }
    cfg.problem.chance.objective.maximize = sense == "max";
  } else if (builtin) {
    cfg.problem.chance.objective = default_chance(cfg.problem.name).objective;
  } else {
    throw ConfigError("problem.objective: required for external simulators");
  }

  if (problem.contains("constraints")) {
    for (const auto& con : problem.at("constraints")) {
      reject_unknown_keys(con, "problem.constraints[]",
                          {"metric", "sense", "threshold", "epsilon"});
      ChanceConstraintSpec spec;
      spec.metric = resolve_metric(con.at("metric"), metric_names, "problem.constraints");
      const std::string sense = con.value("sense", std::string("le"));
      if (sense != "le" && sense != "ge") {
        throw ConfigError("problem.constraints.sense: expected 'le' or 'ge'");
      }
      spec.upper_bound = sense == "le";
      spec.threshold = con.at("threshold").get<double>();
      spec.epsilon = con.value("epsilon", 0.05);
      cfg.problem.chance.constraints.push_back(spec);
    }
  } else if (builtin) {
    cfg.problem.chance.constraints = default_chance(cfg.problem.name).constraints;
  } else {
    throw ConfigError("problem.constraints: required for external simulators");
  }
  if (problem.contains("epsilon")) {
    const double eps = problem.at("epsilon").get<double>();
    for (auto& con : cfg.problem.chance.constraints) con.epsilon = eps;
  }
  cfg.problem.chance.bonferroni = problem.value("bonferroni", false);
  for (const auto& con : cfg.problem.chance.constraints) {
    kappa(con.epsilon);  // validates the range before any simulation
  }

  if (root.contains("surrogate")) {
    const Json& surrogate = root.at("surrogate");
    reject_unknown_keys(surrogate, "surrogate",
                        {"order", "design_tol_sq", "noise_tol_sq", "joint_l1_tol",
                         "weight_prune_tol", "seed", "candidate_factor", "bcd_rel_tol",
                         "bcd_max_outer", "prune_max_outer"});
    cfg.surrogate.order = surrogate.value("order", 2);
    if (cfg.surrogate.order < 1 || cfg.surrogate.order > 4) {
      throw ConfigError("surrogate.order: supported range is 1..4");
    }
    auto& q = cfg.surrogate.quadrature;
    q.design_tol_sq = surrogate.value("design_tol_sq", q.design_tol_sq);
    q.noise_tol_sq = surrogate.value("noise_tol_sq", q.noise_tol_sq);
    q.joint_l1_tol = surrogate.value("joint_l1_tol", q.joint_l1_tol);
    q.weight_prune_tol = surrogate.value("weight_prune_tol", q.weight_prune_tol);
    q.seed = surrogate.value("seed", q.seed);
    q.candidate_factor = surrogate.value("candidate_factor", q.candidate_factor);
    q.bcd.rel_decrease_tol = surrogate.value("bcd_rel_tol", q.bcd.rel_decrease_tol);
    q.bcd.max_outer = surrogate.value("bcd_max_outer", q.bcd.max_outer);
    q.prune_max_outer = surrogate.value("prune_max_outer", q.prune_max_outer);
  }

  if (root.contains("solver")) {
    const Json& solver = root.at("solver");
    reject_unknown_keys(solver, "solver",
                        {"starts", "seed", "grid_check", "grid_points_per_dim", "feasibility_tol",
                         "penalty_init", "penalty_mult", "inner_tol", "max_outer",
                         "reformulation"});
    auto& s = cfg.solver.solve;
    s.starts = solver.value("starts", s.starts);
    s.seed = solver.value("seed", s.seed);
    s.feasibility_tol = solver.value("feasibility_tol", s.feasibility_tol);
    s.penalty_init = solver.value("penalty_init", s.penalty_init);
    s.penalty_mult = solver.value("penalty_mult", s.penalty_mult);
    s.inner_tol = solver.value("inner_tol", s.inner_tol);
    s.max_outer = solver.value("max_outer", s.max_outer);
    cfg.solver.grid_check = solver.value("grid_check", false);
    cfg.solver.grid_points_per_dim = solver.value("grid_points_per_dim", 401);
    cfg.solver.reformulation = solver.value("reformulation", std::string("cantelli"));
    if (cfg.solver.reformulation != "cantelli" && cfg.solver.reformulation != "mean-only") {
      throw ConfigError("solver.reformulation: expected 'cantelli' or 'mean-only'");
    }
  }

  if (root.contains("validation")) {
    const Json& validation = root.at("validation");
    reject_unknown_keys(validation, "validation", {"samples", "seed", "bins", "spectrum_draws"});
    cfg.validation.samples = validation.value("samples", cfg.validation.samples);
    cfg.validation.seed = validation.value("seed", cfg.validation.seed);
    cfg.validation.bins = validation.value("bins", cfg.validation.bins);
    cfg.validation.spectrum_draws = validation.value("spectrum_draws", cfg.validation.spectrum_draws);
    if (cfg.validation.samples < 100) throw ConfigError("validation.samples: need at least 100");
  }

  if (root.contains("output")) {
    const Json& output = root.at("output");
    reject_unknown_keys(output, "output", {"dir"});
    cfg.output_dir = output.value("dir", cfg.output_dir);
  }

  if (root.contains("evaluate")) {
    const Json& evaluate = root.at("evaluate");
    reject_unknown_keys(evaluate, "evaluate", {"x"});
    Vector x = vector_from_json(evaluate.at("x"));
    if (x.size() != static_cast<Index>(cfg.problem.bounds.size())) {
      throw ConfigError("evaluate.x: dimension mismatch with problem bounds");
    }
    cfg.evaluate_x = std::move(x);
  }

  if (root.contains("seed")) {
    cfg.override_seed(root.at("seed").get<std::uint64_t>());
  }
  return cfg;
}

void RunConfig::override_seed(std::uint64_t master) {
  surrogate.quadrature.seed = derive_seed(master, 1);
  solver.solve.seed = derive_seed(master, 2);
  validation.seed = derive_seed(master, 3);
}

std::unique_ptr<Simulator> RunConfig::make_simulator() const {
  if (problem.external) return std::make_unique<ExternalSimulator>(*problem.external);
  auto simulator = make_builtin(problem.name);
  if (!simulator) throw ConfigError("unknown built-in problem '" + problem.name + "'");
  return simulator;
}

double RunConfig::uniform_epsilon() const {
  if (problem.chance.constraints.empty()) return std::numeric_limits<double>::quiet_NaN();
  const double eps = problem.chance.constraints.front().epsilon;
  for (const auto& con : problem.chance.constraints) {
    if (con.epsilon != eps) return std::numeric_limits<double>::quiet_NaN();
  }
  return eps;
}

std::vector<CanonConstraint> RunConfig::criteria() const {
  std::vector<CanonConstraint> out;
  for (const auto& con : problem.chance.constraints) {
    const double sign = con.upper_bound ? 1.0 : -1.0;
    out.push_back({con.metric, sign, sign * con.threshold});
  }
  return out;
}

std::string RunConfig::cache_fingerprint() const {
  Json j{{"problem", problem.name},
         {"order", surrogate.order},
         {"mixture", to_json(*problem.mixture)},
         {"seed", surrogate.quadrature.seed},
         {"candidate_factor", surrogate.quadrature.candidate_factor},
         {"design_tol_sq", surrogate.quadrature.design_tol_sq},
         {"noise_tol_sq", surrogate.quadrature.noise_tol_sq},
         {"joint_l1_tol", surrogate.quadrature.joint_l1_tol}};
  Json bounds = Json::array();
  for (const auto& [lo, hi] : problem.bounds) bounds.push_back(Json::array({lo, hi}));
  j["bounds"] = bounds;
  if (problem.external) j["command"] = problem.external->command;
  return j.dump();
}

}  // namespace ccyopt
