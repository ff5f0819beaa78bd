#include "ccyopt/serialize.hpp"

namespace ccyopt {

Json to_json(const Vector& v) {
  Json arr = Json::array();
  for (Index i = 0; i < v.size(); ++i) arr.push_back(v[i]);
  return arr;
}

Json to_json(const Matrix& m) {
  Json rows = Json::array();
  for (Index i = 0; i < m.rows(); ++i) {
    Json row = Json::array();
    for (Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(std::move(row));
  }
  return rows;
}

Vector vector_from_json(const Json& j) {
  Vector v(static_cast<Index>(j.size()));
  for (Index i = 0; i < v.size(); ++i) v[i] = j[static_cast<size_t>(i)].get<double>();
  return v;
}

Matrix matrix_from_json(const Json& j) {
  const Index rows = static_cast<Index>(j.size());
  const Index cols = rows == 0 ? 0 : static_cast<Index>(j[0].size());
  Matrix m(rows, cols);
  for (Index i = 0; i < rows; ++i) {
    for (Index c = 0; c < cols; ++c) m(i, c) = j[static_cast<size_t>(i)][static_cast<size_t>(c)].get<double>();
  }
  return m;
}

Json to_json(const QuadratureRule& rule) {
  return Json{{"points", to_json(rule.points)},
              {"weights", to_json(rule.weights)},
              {"residual_l1", rule.residual_l1},
              {"order", rule.order},
              {"design_dim", rule.design_dim},
              {"noise_dim", rule.noise_dim},
              {"warning_capped", rule.warning_capped}};
}

QuadratureRule quadrature_rule_from_json(const Json& j) {
  QuadratureRule rule;
  rule.points = matrix_from_json(j.at("points"));
  rule.weights = vector_from_json(j.at("weights"));
  rule.residual_l1 = j.at("residual_l1").get<double>();
  rule.order = j.at("order").get<int>();
  rule.design_dim = j.at("design_dim").get<int>();
  rule.noise_dim = j.at("noise_dim").get<int>();
  rule.warning_capped = j.value("warning_capped", false);
  return rule;
}

Json to_json(const GaussianMixture& mixture) {
  Json weights = Json::array(), means = Json::array(), covariances = Json::array();
  for (const auto& comp : mixture.components()) {
    weights.push_back(comp.weight);
    means.push_back(to_json(comp.mean));
    covariances.push_back(to_json(comp.covariance));
  }
  return Json{{"weights", weights}, {"means", means}, {"covariances", covariances}};
}

GaussianMixture mixture_from_json(const Json& j) {
  std::vector<MixtureComponent> components;
  const auto& weights = j.at("weights");
  const auto& means = j.at("means");
  const auto& covariances = j.at("covariances");
  if (weights.size() != means.size() || weights.size() != covariances.size()) {
    throw ConfigError("mixture: weights, means, covariances must have equal length");
  }
  for (size_t c = 0; c < weights.size(); ++c) {
    MixtureComponent comp;
    comp.weight = weights[c].get<double>();
    comp.mean = vector_from_json(means[c]);
    comp.covariance = matrix_from_json(covariances[c]);
    components.push_back(std::move(comp));
  }
  return GaussianMixture(std::move(components));
}

Json to_json(const SurrogateModel& model) {
  Json bounds = Json::array();
  for (const auto& [lo, hi] : model.design_basis().bounds()) {
    bounds.push_back(Json::array({lo, hi}));
  }
  return Json{{"order", model.order()},
              {"basis_order", model.design_basis().order()},
              {"design_bounds", bounds},
              {"mixture", to_json(model.noise_basis().measure())},
              {"metric_names", model.metric_names()},
              {"coefficients", to_json(model.coefficients())},
              {"simulation_count", model.simulation_count()}};
}

SurrogateModel surrogate_from_json(const Json& j) {
  std::vector<std::pair<double, double>> bounds;
  for (const auto& pair : j.at("design_bounds")) {
    bounds.emplace_back(pair[0].get<double>(), pair[1].get<double>());
  }
  const int order = j.at("order").get<int>();
  const int basis_order = j.at("basis_order").get<int>();
  auto design = std::make_shared<LegendreBasis>(bounds, basis_order);
  auto noise = std::make_shared<GramSchmidtBasis>(mixture_from_json(j.at("mixture")), basis_order);
  SurrogateModel model(design, noise, order, j.at("metric_names").get<std::vector<std::string>>());
  model.coefficients() = matrix_from_json(j.at("coefficients"));
  model.set_simulation_count(j.at("simulation_count").get<Index>());
  return model;
}

Json to_json(const SolveResult& result) {
  Json out{{"x_star", to_json(result.x_star)},
           {"objective_value", result.objective_value},
           {"feasibility_residual", result.feasibility_residual},
           {"status", to_string(result.status)},
           {"starts_used", result.starts_used}};
  if (result.oracle_agreement) out["oracle_agreement"] = *result.oracle_agreement;
  return out;
}

std::uint64_t fingerprint(const std::string& text) {
  std::uint64_t hash = 14695981039346656037ull;
  for (const unsigned char ch : text) {
    hash ^= ch;
    hash *= 1099511628211ull;
  }
  return hash;
}

}  // namespace ccyopt
