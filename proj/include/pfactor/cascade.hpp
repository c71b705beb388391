#pragma once

#include <vector>

#include "pfactor/linalg.hpp"

namespace pfactor {

inline constexpr int kDefaultPMax = 6;

/// Orthogonal splitting R^m = Y_1 + ... + Y_p at a base point.
///
/// Index i of every vector member refers to order i + 1. complements[i] is
/// the projector onto Z_{i+1}, the orthogonal complement of Y_1 + ... + Y_i
/// (so complements[0] is the identity). derivatives[i] holds F^{(i+1)}(x̄).
struct SubspaceCascade {
  Vector base_point;
  int p_requested = 0;
  int p = 0;
  double rel_tol = kDefaultRankTol;
  std::vector<Matrix> bases;
  std::vector<Matrix> projections;
  std::vector<Matrix> complements;
  std::vector<DerivativeTensor> derivatives;
  std::vector<RankProfile> profiles;

  int m() const { return projections.empty() ? 0 : static_cast<int>(projections[0].rows()); }
  int n() const { return static_cast<int>(base_point.size()); }
  std::vector<int> dims() const;
  const Matrix& projection(int i) const;   // P_{Y_i}, 1-based
  const Matrix& basis(int i) const;        // Y_i, 1-based
  const DerivativeTensor& derivative(int i) const;  // F^{(i)}(x̄), 1-based

  /// f_i^{(i)}(x̄) = P_{Y_i} F^{(i)}(x̄).
  DerivativeTensor projected_derivative(int i) const;
};

/// Throws DecompositionIncomplete when Y_1 + ... + Y_p does not exhaust R^m.
/// Stops early (cascade.p < p) once the complement becomes trivial.
SubspaceCascade build_cascade(const PolynomialMap& map, const Vector& x_bar, int p,
                              double rel_tol = kDefaultRankTol);

/// Smallest p <= p_max whose cascade exhausts R^m.
SubspaceCascade minimal_cascade(const PolynomialMap& map, const Vector& x_bar,
                                int p_max = kDefaultPMax, double rel_tol = kDefaultRankTol);

/// f_i(x) = P_{Y_i} F(x).
Vector f_component(const SubspaceCascade& cascade, int i, const PolynomialMap& map,
                   const Vector& x);

/// ||f_i^{(i)}(x̄)[xi]^i|| <= tol ||xi||^i.
bool k_kernel_membership(const SubspaceCascade& cascade, int i, const Vector& xi,
                         double tol = 1e-9);

}  // namespace pfactor
