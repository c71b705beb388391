#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "pfactor/cascade.hpp"

namespace pfactor {

enum class Convention { plain, factorial };

std::string to_string(Convention c);
Convention parse_convention(const std::string& s);

/// Weight of term i of the p-factor operator: 1 (plain) or 1/i! (factorial).
double term_weight(Convention c, int i);

struct FactorOperator {
  Vector h;
  Matrix matrix;
  Convention convention = Convention::plain;
  Vector singular_values;
  double sigma_min = 0.0;
  double tolerance_used = 0.0;
  bool surjective = false;
  double right_inverse_norm = 0.0;
};

/// Psi_p(h) = sum_i w_i f_i^{(i)}(x̄)[h]^{i-1}.
FactorOperator assemble_psi(const SubspaceCascade& cascade, const Vector& h,
                            Convention convention = Convention::plain,
                            double rel_tol = kDefaultRankTol);

struct RegularityVerdict {
  bool regular = false;
  double right_inverse_norm = 0.0;
  double sigma_min = 0.0;
  /// Block form: Psi_{p-1}(h) onto Y_1 + ... + Y_{p-1} and
  /// f_p^{(p)}[h]^{p-1} mapping Ker Psi_{p-1}(h) onto Y_p.
  bool block_criterion = false;
  bool block_criterion_agrees = false;
};

RegularityVerdict p_regular_along(const SubspaceCascade& cascade, const Vector& h,
                                  Convention convention = Convention::plain,
                                  double rel_tol = kDefaultRankTol);

struct StrongRegularityEstimate {
  double sup_right_inverse_norm = 0.0;
  Vector worst_h;
  int samples_drawn = 0;
  int samples_in_h_alpha = 0;
};

/// Sampled sup of ||Psi_p(h)^{-1}|| over H_alpha = {||h|| = 1,
/// ||f_i^{(i)}[h]^i|| <= alpha for all i}. +inf if some sample is not surjective.
StrongRegularityEstimate strong_p_regularity_estimate(const SubspaceCascade& cascade,
                                                      double alpha, int samples,
                                                      std::uint64_t seed,
                                                      Convention convention = Convention::plain);

struct ConditionRow {
  std::string name;
  double lhs = 0.0;
  double rhs = 0.0;
  bool holds = false;
};

struct ExistenceCertificate {
  std::string kind;  // "regular" or "singular"
  Vector x0;
  Vector h;
  double radius = 0.0;  // epsilon (regular) or omega (singular)
  double nu = 0.0;
  int p = 1;
  Convention convention = Convention::plain;
  double delta = 0.0, eta = 0.0, c = 0.0, d = 0.0, alpha = 0.0;
  std::vector<ConditionRow> conditions;
  bool certified = false;
  double certified_ball_radius = 0.0;
  bool heuristic = true;
  int sample_count = 0;
  std::optional<bool> other_convention_certified;
  bool conventions_agree = true;
};

inline constexpr int kDefaultCertificateSamples = 10000;
inline constexpr double kSupInflation = 1.25;

/// Sampled sup over the closed ball B_r(x0) of ||T(x)||, where T(x) is the
/// projected order-k derivative of `map`; `projection` may be empty. Constant
/// tensors are evaluated once and not inflated.
double sampled_tensor_sup(const PolynomialMap& map, const Matrix& projection, int order,
                          const Vector& x0, double radius, int samples, std::uint64_t seed);

/// Sufficient conditions for a root in B_eps(x0) at a regular base point.
ExistenceCertificate existence_certificate_regular(const PolynomialMap& map, const Vector& x0,
                                                   double eps,
                                                   int sample_count = kDefaultCertificateSamples,
                                                   std::uint64_t seed = 1);

/// Sufficient conditions for a root near x0 + omega h at a singular base
/// point. The cascade must be built at x0.
ExistenceCertificate existence_certificate_singular(
    const SubspaceCascade& cascade, const PolynomialMap& map, const Vector& h, double omega,
    double nu, int sample_count = kDefaultCertificateSamples, std::uint64_t seed = 1,
    Convention convention = Convention::plain, double kernel_tol = 1e-9);

}  // namespace pfactor
