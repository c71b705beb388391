#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "pfactor/cascade.hpp"

namespace pfactor {

enum class Termination { converged, diverged, singular_breakdown, max_iters };

std::string to_string(Termination t);

struct IterationStep {
  int iter = 0;
  Vector x;
  double residual = 0.0;    // ||F(x^k)||
  double p_residual = 0.0;  // NaN when no reference cascade is available
  double step_norm = 0.0;   // ||x^k - x^{k-1}||, 0 for the start point
  double sigma_min = 0.0;   // of the linear system solved at x^k; NaN if none was solved
};

struct IterationTrace {
  std::string method;
  int p = 1;
  std::vector<IterationStep> steps;
  Termination termination = Termination::max_iters;
  std::optional<double> observed_order;
  bool least_squares = false;

  const Vector& final_point() const { return steps.back().x; }
  double final_residual() const { return steps.back().residual; }
};

struct NewtonOptions {
  double tol = 1e-12;
  int max_iters = 50;
  /// Defaults to 1e6 (1 + ||x0||).
  std::optional<double> divergence_radius;
  /// A step longer than blowup_factor (1 + ||x^k||) counts as divergence.
  double blowup_factor = 1e3;
  /// Known solution: enables the convergence-order fit and p_residual.
  std::optional<Vector> true_root;
};

/// The linear model solved at each iterate: x^{k+1} = x^k - damping A(x^k)^{-1} b(x^k).
struct LinearizedSystem {
  std::function<Matrix(const Vector&)> matrix;
  std::function<Vector(const Vector&)> rhs;
  /// Called with x^k before A(x^k) is formed; may throw.
  std::function<void(const Vector&)> before_step;
  /// Sum of the norms of the terms that make up b(x), before cancellation.
  /// Drives the roundoff floor of the order fit; defaults to ||b(x)||.
  std::function<double(const Vector&)> rhs_magnitude;
};

/// Shared Newton-type loop. Converged means ||F(x)|| <= tol and ||b(x)|| <= tol.
/// With a known root, the order fit stops at the first iterate whose error is
/// within ten times the roundoff estimate eps (||x^k|| + rhs_magnitude / sigma_min)
/// of the step that produced it.
/// A singular square A either throws FactorMatrixSingular or ends the trace
/// with singular_breakdown. Non-square A is solved in the least-squares sense.
IterationTrace newton_iterate(const PolynomialMap& map, const Vector& x0,
                              const NewtonOptions& options, const LinearizedSystem& system,
                              bool throw_on_singular, double damping = 1.0,
                              const SubspaceCascade* reference = nullptr);

/// x^{k+1} = x^k - F'(x^k)^{-1} F(x^k). Throws NonSquareSystem unless m = n.
IterationTrace newton_classical(const PolynomialMap& map, const Vector& x0,
                               const NewtonOptions& options = {});

struct FactorNewtonConfig {
  int p = kDefaultPMax;  // largest order tried when building projections
  Vector h;
  bool normalize_h = true;
  std::optional<Vector> projection_point;  // defaults to x0
  bool refresh_projections = false;
  /// Use the factor matrix at the projection point for every step instead of
  /// re-evaluating derivatives at x^k.
  bool frozen_matrix = false;
  double damping = 1.0;
  double rel_tol = kDefaultRankTol;
  NewtonOptions newton;
};

struct FactorProjections {
  int p = 1;
  Vector point;
  Vector h;
  std::vector<Matrix> images;  // orthonormal bases of Y_1, ..., Y_p
  std::vector<Matrix> p_bar;   // P̄_1, ..., P̄_{p-1}
  std::vector<Matrix> p_sums;  // P_1, ..., P_{p-1}
  Matrix factor_matrix;        // F' + sum_j P_j F^{(j+1)}[h]^j at `point`
  double sigma_min = 0.0;
};

/// Builds P̄_k and the ordered-product sums P_j at `point` along h (used
/// as given). Throws NotPRegularAlongH if the factor matrix is still rank
/// deficient at order max_p.
FactorProjections build_factor_projections(const PolynomialMap& map, const Vector& point,
                                           const Vector& h, int max_p = kDefaultPMax,
                                           double rel_tol = kDefaultRankTol);

/// A(x) = F'(x) + sum_j P_j F^{(j+1)}(x)[h]^j.
Matrix factor_matrix_at(const PolynomialMap& map, const FactorProjections& proj, const Vector& x);
/// b(x) = F(x) + sum_j P_j F^{(j)}(x)[h]^j.
Vector factor_rhs_at(const PolynomialMap& map, const FactorProjections& proj, const Vector& x);

/// x^{k+1} = x^k - A(x^k)^{-1} b(x^k). Throws FactorMatrixSingular when A is
/// singular at an iterate.
IterationTrace newton_p_factor(const PolynomialMap& map, const FactorNewtonConfig& config,
                               const Vector& x0);

/// sum_i ||f_i(xi) - f_i(x̄)||^{1/i} with the cascade built at x̄.
double p_order_residual(const SubspaceCascade& cascade, const PolynomialMap& map,
                        const Vector& xi);

/// Least-squares slope of log e_{k+1} against log e_k over the last three
/// pairs with both errors above `floor`. Needs at least two pairs.
std::optional<double> fit_order(const std::vector<double>& errors, double floor = 1e-14);

}  // namespace pfactor
