#pragma once

#include <optional>
#include <span>
#include <vector>

#include <Eigen/Dense>

namespace pfactor {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

struct Monomial {
  double coeff = 0.0;
  std::vector<int> exps;
};

/// Sparse multivariate polynomial in a fixed number of variables.
///
/// Terms are kept sorted by exponent tuple with duplicates merged, so two
/// polynomials that are equal as functions compare equal term by term.
class Polynomial {
 public:
  explicit Polynomial(int n_vars = 0);
  Polynomial(int n_vars, std::vector<Monomial> terms);

  static Polynomial constant(int n_vars, double value);
  static Polynomial variable(int n_vars, int index);

  int n_vars() const { return n_vars_; }
  const std::vector<Monomial>& terms() const { return terms_; }
  bool is_zero() const { return terms_.empty(); }
  int degree() const;

  double evaluate(std::span<const double> x) const;
  double evaluate(const Vector& x) const;

  /// Mixed partial derivative; counts[j] = number of differentiations in x_j.
  Polynomial partial(std::span<const int> counts) const;
  Polynomial partial(int var) const;

  /// Same polynomial viewed in `n_vars` >= n_vars() variables; new variables
  /// are appended after the existing ones.
  Polynomial embed(int n_vars, int offset = 0) const;

  Polynomial operator-() const;
  Polynomial& operator+=(const Polynomial& other);
  Polynomial& operator-=(const Polynomial& other);
  Polynomial& operator*=(double s);

  friend Polynomial operator+(Polynomial a, const Polynomial& b) { return a += b; }
  friend Polynomial operator-(Polynomial a, const Polynomial& b) { return a -= b; }
  friend Polynomial operator*(Polynomial a, double s) { return a *= s; }
  friend Polynomial operator*(double s, Polynomial a) { return a *= s; }
  friend Polynomial operator*(const Polynomial& a, const Polynomial& b);

  friend bool operator==(const Polynomial& a, const Polynomial& b);

 private:
  void normalize();

  int n_vars_;
  std::vector<Monomial> terms_;
};

/// F : R^n_in -> R^n_out with polynomial components.
class PolynomialMap {
 public:
  PolynomialMap() = default;
  PolynomialMap(int n_in, std::vector<Polynomial> components);

  int n_in() const { return n_in_; }
  int n_out() const { return static_cast<int>(components_.size()); }
  const std::vector<Polynomial>& components() const { return components_; }
  const Polynomial& component(int i) const { return components_.at(static_cast<size_t>(i)); }
  int degree() const;

  Vector operator()(const Vector& x) const;

  PolynomialMap& operator+=(const PolynomialMap& other);
  PolynomialMap& operator*=(double s);
  friend PolynomialMap operator+(PolynomialMap a, const PolynomialMap& b) { return a += b; }
  friend PolynomialMap operator*(double s, PolynomialMap a) { return a *= s; }

 private:
  int n_in_ = 0;
  std::vector<Polynomial> components_;
};

/// min objective(x) s.t. equality_constraints(x) = 0, inequality_constraints(x) <= 0.
struct ObjectiveProblem {
  PolynomialMap objective;
  std::optional<PolynomialMap> equality_constraints;
  std::optional<PolynomialMap> inequality_constraints;

  int n() const { return objective.n_in(); }
  /// Throws DimensionMismatch when the maps disagree on n_in or the objective is not scalar.
  void validate() const;
};

/// Component-wise evaluation; throws DimensionMismatch when dim(x) != n_in.
Vector evaluate(const PolynomialMap& map, const Vector& x);

/// Gradient of a scalar polynomial as a map R^n -> R^n.
PolynomialMap gradient(const Polynomial& p);

}  // namespace pfactor
