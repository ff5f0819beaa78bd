#pragma once

#include <nlohmann/json.hpp>

#include "ccyopt/polyopt.hpp"
#include "ccyopt/quadrature.hpp"
#include "ccyopt/surrogate.hpp"

namespace ccyopt {

using Json = nlohmann::json;

Json to_json(const Vector& v);
Json to_json(const Matrix& m);
Vector vector_from_json(const Json& j);
Matrix matrix_from_json(const Json& j);

Json to_json(const QuadratureRule& rule);
QuadratureRule quadrature_rule_from_json(const Json& j);

Json to_json(const GaussianMixture& mixture);
GaussianMixture mixture_from_json(const Json& j);

// Bases are stored as their defining data (bounds/order, measure/order) and
// reconstructed exactly on load.
Json to_json(const SurrogateModel& model);
SurrogateModel surrogate_from_json(const Json& j);

Json to_json(const SolveResult& result);

// FNV-1a over a canonical string; used to fingerprint cached artifacts.
std::uint64_t fingerprint(const std::string& text);

}  // namespace ccyopt
