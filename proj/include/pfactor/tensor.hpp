#pragma once

#include <functional>
#include <optional>
#include <span>

#include "pfactor/polynomial.hpp"

namespace pfactor {

/// The order-k derivative F^{(k)}(x) of a map R^n -> R^m.
///
/// Stored densely as an m x n^k matrix. Column index of the domain multi-index
/// (i_1, ..., i_k) is i_1 n^{k-1} + ... + i_k. Entries are symmetric under any
/// permutation of the k domain indices.
class DerivativeTensor {
 public:
  DerivativeTensor(int order, int n, Vector base_point, Matrix entries);

  static DerivativeTensor zero(int order, int n, int m, Vector base_point = {});

  int order() const { return order_; }
  int n() const { return n_; }
  int m() const { return static_cast<int>(entries_.rows()); }
  const Vector& base_point() const { return base_point_; }
  const Matrix& flattened() const { return entries_; }

  double at(int row, std::span<const int> index) const;

  /// One contraction with h; the result has order k-1 (requires k >= 2).
  DerivativeTensor contract(const Vector& h) const;

  /// T[h]^{k-1} as an m x n matrix. For k = 1 this is the Jacobian itself.
  Matrix contract_to_matrix(const Vector& h) const;

  /// T[h]^k as an m-vector.
  Vector apply(const Vector& h) const;

  /// Left multiplication of every slice: (A T) with A of size r x m.
  DerivativeTensor left_multiply(const Matrix& a) const;

  /// Largest deviation between an entry and its image under the index permutation.
  double symmetry_defect(std::span<const int> permutation) const;

 private:
  int order_;
  int n_;
  Vector base_point_;
  Matrix entries_;
};

/// Exact k-th derivative of a polynomial map at x (k >= 1). Orders above the
/// total degree give the zero tensor.
DerivativeTensor derivative_tensor(const PolynomialMap& map, const Vector& x, int order);

/// Jacobian shorthand for derivative_tensor(map, x, 1).flattened().
Matrix jacobian(const PolynomialMap& map, const Vector& x);

using VectorFunction = std::function<Vector(const Vector&)>;

/// Default finite-difference step eps^{1/(k+2)} (1 + ||x||).
double default_fd_step(const Vector& x, int order);

/// Central-difference approximation of F^{(k)}(x), k <= 4, error O(step^2).
///
/// Each mixed partial is the composition of k first-order central differences,
/// evaluated once per sorted multi-index and copied to every permutation, so the
/// result is exactly symmetric. Throws NonFiniteValue when a stencil value is
/// not finite.
DerivativeTensor fd_derivative(const VectorFunction& f, const Vector& x, int order,
                               std::optional<double> step = std::nullopt);

}  // namespace pfactor
