#include "pfactor/problem_io.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include <fmt/format.h>

#include "pfactor/errors.hpp"

namespace pfactor {

namespace {

using nlohmann::json;

void reject_unknown(const json& j, const std::set<std::string>& allowed, const std::string& where) {
  for (const auto& [key, value] : j.items()) {
    if (!allowed.count(key)) throw ParseError(fmt::format("unknown key '{}' in {}", key, where));
  }
}

double finite_number(const json& j, const std::string& what) {
  if (!j.is_number()) throw ParseError(fmt::format("{} must be a number", what));
  const double v = j.get<double>();
  if (!std::isfinite(v)) throw NonFiniteValue(fmt::format("{} is not finite", what));
  return v;
}

PolynomialMap parse_map(const json& j, int n, const std::string& what) {
  if (!j.is_array()) throw ParseError(fmt::format("{} must be an array of polynomials", what));
  std::vector<Polynomial> comps;
  for (const auto& c : j) comps.push_back(parse_polynomial(c, n));
  return PolynomialMap(n, std::move(comps));
}

json map_to_json(const PolynomialMap& m) {
  json out = json::array();
  for (const auto& c : m.components()) out.push_back(polynomial_to_json(c));
  return out;
}

}  // namespace

const PolynomialMap& ProblemFile::equations_required() const {
  if (!equations) throw InputError(fmt::format("problem '{}' has no equations", name));
  return *equations;
}

ObjectiveProblem ProblemFile::objective_problem() const {
  if (!objective) throw InputError(fmt::format("problem '{}' has no objective", name));
  ObjectiveProblem p;
  p.objective = PolynomialMap(n_in, {*objective});
  p.equality_constraints = equations;
  p.inequality_constraints = inequalities;
  p.validate();
  return p;
}

Polynomial parse_polynomial(const json& j, int n_vars) {
  if (!j.is_array()) throw ParseError("a polynomial must be an array of terms");
  std::vector<Monomial> terms;
  for (const auto& t : j) {
    if (!t.is_object()) throw ParseError("a term must be an object");
    reject_unknown(t, {"coeff", "exps"}, "term");
    if (!t.contains("coeff") || !t.contains("exps")) {
      throw ParseError("a term needs both 'coeff' and 'exps'");
    }
    Monomial m;
    m.coeff = finite_number(t["coeff"], "coeff");
    const json& e = t["exps"];
    if (!e.is_array()) throw ParseError("exps must be an array");
    if (static_cast<int>(e.size()) != n_vars) {
      throw DimensionMismatch(
          fmt::format("term has {} exponents, expected n_in = {}", e.size(), n_vars));
    }
    for (const auto& v : e) {
      if (!v.is_number_integer() || v.get<long long>() < 0) {
        throw ParseError("exponents must be nonnegative integers");
      }
      m.exps.push_back(v.get<int>());
    }
    terms.push_back(std::move(m));
  }
  return Polynomial(n_vars, std::move(terms));
}

json polynomial_to_json(const Polynomial& p) {
  json out = json::array();
  for (const auto& t : p.terms()) out.push_back({{"coeff", t.coeff}, {"exps", t.exps}});
  return out;
}

Vector parse_vector(const json& j, const std::string& what, int expected) {
  if (!j.is_array()) throw ParseError(fmt::format("{} must be a JSON array", what));
  if (expected >= 0 && static_cast<int>(j.size()) != expected) {
    throw DimensionMismatch(
        fmt::format("{} has {} entries, expected {}", what, j.size(), expected));
  }
  Vector v(static_cast<Eigen::Index>(j.size()));
  for (size_t i = 0; i < j.size(); ++i) {
    v(static_cast<Eigen::Index>(i)) = finite_number(j[i], fmt::format("{}[{}]", what, i));
  }
  return v;
}

ProblemFile parse_problem(const json& j) {
  if (!j.is_object()) throw ParseError("problem file must hold a JSON object");
  reject_unknown(j,
                 {"name", "description", "n_in", "objective", "equations", "inequalities",
                  "reference_point"},
                 "problem");
  if (!j.contains("n_in") || !j["n_in"].is_number_integer() || j["n_in"].get<long long>() < 1) {
    throw ParseError("n_in must be a positive integer");
  }
  ProblemFile p;
  p.n_in = j["n_in"].get<int>();
  if (j.contains("name")) {
    if (!j["name"].is_string()) throw ParseError("name must be a string");
    p.name = j["name"].get<std::string>();
  }
  if (j.contains("description")) {
    if (!j["description"].is_string()) throw ParseError("description must be a string");
    p.description = j["description"].get<std::string>();
  }
  if (j.contains("objective")) p.objective = parse_polynomial(j["objective"], p.n_in);
  if (j.contains("equations")) p.equations = parse_map(j["equations"], p.n_in, "equations");
  if (j.contains("inequalities")) {
    p.inequalities = parse_map(j["inequalities"], p.n_in, "inequalities");
  }
  if (j.contains("reference_point")) {
    p.reference_point = parse_vector(j["reference_point"], "reference_point");
  }
  if (!p.objective && !p.equations) {
    throw ParseError("problem needs an objective or equations");
  }
  return p;
}

ProblemFile parse_problem_text(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw ParseError(fmt::format("invalid JSON: {}", e.what()));
  }
  return parse_problem(j);
}

ProblemFile load_problem(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError(fmt::format("cannot open problem file '{}'", path));
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_problem_text(ss.str());
}

json problem_to_json(const ProblemFile& p) {
  json out;
  if (!p.name.empty()) out["name"] = p.name;
  if (!p.description.empty()) out["description"] = p.description;
  out["n_in"] = p.n_in;
  if (p.objective) out["objective"] = polynomial_to_json(*p.objective);
  if (p.equations) out["equations"] = map_to_json(*p.equations);
  if (p.inequalities) out["inequalities"] = map_to_json(*p.inequalities);
  if (p.reference_point) {
    out["reference_point"] =
        std::vector<double>(p.reference_point->data(),
                            p.reference_point->data() + p.reference_point->size());
  }
  return out;
}

}  // namespace pfactor
