#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "pfactor/factor_operator.hpp"

namespace pfactor {

/// h lies in Ker^i f_i^{(i)}(x̄) for every i = 1..p. Each test is
/// ||f_i^{(i)}[h]^i|| <= tol (1 + ||f_i^{(i)}||) ||h||^i.
bool h_p_membership(const SubspaceCascade& cascade, const Vector& h, double tol = 1e-9);

struct ConeSample {
  Vector direction;  // unit vector
  bool member = false;
  bool p_regular = false;
};

enum class ConeKind { empty, rays, subspace, cone };
std::string to_string(ConeKind k);

struct TangentConeQuery {
  Vector x_bar;
  int p = 1;
  double tol = 1e-9;
  ConeKind kind = ConeKind::empty;
  /// Unit rays, both orientations of every line (kind == rays).
  std::vector<Vector> rays;
  std::vector<bool> ray_p_regular;
  /// Orthonormal basis (kind == subspace).
  Matrix subspace_basis;
  std::vector<ConeSample> samples;
  /// Members along which the operator is not p-regular, so the tangent-cone
  /// identity is not backed by the theory.
  int unverified_members = 0;
};

struct ConeOptions {
  int samples = 200;
  std::uint64_t seed = 1;
  double tol = 1e-9;
  int max_corrector_steps = 60;
  Convention convention = Convention::plain;
};

/// Sampled H_p(x̄). Sphere samples in Ker f_1'(x̄) are pulled onto the
/// variety {f_i^{(i)}[z]^i = 0, i >= 2} by Gauss-Newton on the sphere, then
/// deduplicated into lines. Isolated solutions give kind == rays; otherwise a
/// linear span is tested for containment (kind == subspace) before falling
/// back to a plain sample (kind == cone).
TangentConeQuery tangent_cone_sample(const SubspaceCascade& cascade,
                                     const ConeOptions& options = {});

struct QuadraticSample {
  Vector h;
  double value = 0.0;   // L̄''[h]^2
  double margin = 0.0;  // value / ||h||^2
  double stationarity_residual = 0.0;
  bool multiplier_found = false;
};

struct PFactorLagrangeReport {
  Vector h;
  int p = 1;
  Convention convention = Convention::factorial;
  /// lambda_i = P_{Y_i} lambda in ambient coordinates, i = 1..p.
  std::vector<Vector> multipliers;
  /// The same blocks expressed in the orthonormal Y_i bases.
  std::vector<Vector> multiplier_coordinates;
  Vector lambda;
  double stationarity_residual = 0.0;
  double classical_residual = 0.0;
  Matrix lagrangian_hessian;  // L̄''_{xx} at (x̄, lambda(h), h)
  double quadratic_value = 0.0;
  std::vector<QuadraticSample> sufficient_quadratic_values;
  double alpha = 0.0;  // empirical min of the margins over the H_p sample
  ConeKind cone_kind = ConeKind::empty;
  bool necessary_holds = false;
  bool sufficient_holds = false;
};

struct OptimalityOptions {
  double tol = 1e-9;
  Convention convention = Convention::factorial;
  ConeOptions cone;
  int subspace_samples = 1000;
};

/// min ||f'(x̄) + F'(x̄)^T lambda|| over lambda.
double classical_stationarity_residual(const ObjectiveProblem& problem, const Vector& x_bar);

/// p-factor Lagrange conditions at x̄ for h. `cascade` is the equality
/// constraint cascade at x̄ (ignored when the problem has no equalities).
/// Throws HNotAdmissible, NotPRegularAlongH or NoMultiplierExists.
PFactorLagrangeReport check_optimality(const ObjectiveProblem& problem,
                                       const SubspaceCascade* cascade, const Vector& x_bar,
                                       const Vector& h, const OptimalityOptions& options = {});

}  // namespace pfactor
