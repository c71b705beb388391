#pragma once

#include <optional>
#include <string>

#include <json.hpp>

#include "pfactor/polynomial.hpp"

namespace pfactor {

/// A problem file. Polynomials are lists of {"coeff": c, "exps": [e_1, ..., e_n]}.
struct ProblemFile {
  std::string name;
  std::string description;
  int n_in = 0;
  std::optional<Polynomial> objective;
  std::optional<PolynomialMap> equations;
  std::optional<PolynomialMap> inequalities;  // g(x) <= 0
  std::optional<Vector> reference_point;

  /// Throws InputError when the file has no equations.
  const PolynomialMap& equations_required() const;
  /// Throws InputError when the file has no objective.
  ObjectiveProblem objective_problem() const;
};

Polynomial parse_polynomial(const nlohmann::json& j, int n_vars);
nlohmann::json polynomial_to_json(const Polynomial& p);

/// A JSON array of finite numbers; `expected` < 0 accepts any length.
Vector parse_vector(const nlohmann::json& j, const std::string& what, int expected = -1);

/// Unknown keys, wrong types, non-finite numbers and dimension errors all throw
/// InputError subclasses.
ProblemFile parse_problem(const nlohmann::json& j);
ProblemFile parse_problem_text(const std::string& text);
ProblemFile load_problem(const std::string& path);
nlohmann::json problem_to_json(const ProblemFile& problem);

}  // namespace pfactor
