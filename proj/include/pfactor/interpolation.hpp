#pragma once

#include <functional>
#include <vector>

#include "pfactor/polynomial.hpp"

namespace pfactor {

using ScalarFunction = std::function<double(double)>;

/// Newton form W_n(x) = sum_k alpha_k omega_k(x), omega_k(x) = (x - x_0)...(x - x_{k-1}).
struct InterpolationTable {
  std::vector<double> nodes;
  std::vector<double> values;
  std::vector<double> coefficients;  // alpha_0..alpha_n

  int degree() const { return static_cast<int>(coefficients.size()) - 1; }
  double step() const;  // uniform node spacing, 0 for a single node
  double evaluate(double x) const;
  double derivative(double x) const;
  double basis(int k, double x) const;  // omega_k(x)
};

/// Top edge of the divided-difference table: alpha_k = f[x_0, ..., x_k].
/// Throws InputError on repeated nodes.
std::vector<double> divided_differences(const std::vector<double>& nodes,
                                        const std::vector<double>& values);

InterpolationTable interpolate_at(const ScalarFunction& f, std::vector<double> nodes);

/// n + 1 uniform nodes on [a, b].
InterpolationTable newton_interpolate(const ScalarFunction& f, double a, double b, int n);

/// f̄(x) = f(x) + f'(x) h + ... + f^{(p-1)}(x) h^{p-1} for a univariate polynomial f.
class PFactorScalarFunction {
 public:
  PFactorScalarFunction(Polynomial f, int p, double h = 1.0);

  const Polynomial& base() const { return f_; }
  int p() const { return p_; }
  double h() const { return h_; }
  /// f̄ as a polynomial, for symbolic checks.
  const Polynomial& corrected() const { return bar_; }

  double operator()(double x) const;
  double derivative(double x) const;

 private:
  Polynomial f_;
  int p_;
  double h_;
  Polynomial bar_;
};

struct InterpolationRoot {
  double x = 0.0;
  double residual = 0.0;  // |W(x)|
  InterpolationTable table;
};

/// Root of W in [a, b]: first sign change on a uniform scan, bisection to an
/// interval of width 1e-14, then two Newton steps on W kept inside the bracket.
/// Throws NoRootInBracket when W has no sign change on [a, b].
double interpolant_root(const InterpolationTable& table, double a, double b);

/// Root of the interpolant of f on n + 1 uniform nodes of [a, b].
InterpolationRoot classical_root_baseline(const ScalarFunction& f, double a, double b, int n);

/// Root of the interpolant of f̄ on n + 1 uniform nodes of [a, b].
InterpolationRoot pfactor_interpolate_root(const PFactorScalarFunction& f, double a, double b,
                                           int n);

/// Smallest p <= p_max with f^{(p)}(x̄) != 0; throws PreconditionViolated if none.
int root_multiplicity(const Polynomial& f, double x_bar, int p_max = 12, double tol = 1e-12);

struct SweepRow {
  double eps = 0.0;
  double classical_error = 0.0;
  double pfactor_error = 0.0;
};

/// For each eps, interpolates on [x̄ - eps/3, x̄ + 2 eps/3] and reports the
/// distance of both interpolation roots from x̄.
std::vector<SweepRow> interpolation_sweep(const PFactorScalarFunction& f, double x_bar,
                                          const std::vector<double>& eps, int n);

}  // namespace pfactor
