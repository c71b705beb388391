#pragma once

#include <optional>

#include "pfactor/tensor.hpp"

namespace pfactor {

inline constexpr double kDefaultRankTol = 1e-9;

struct RankProfile {
  Vector singular_values;  // descending
  int rank = 0;
  double tolerance_used = 0.0;
  Matrix image_basis;   // m x rank
  Matrix kernel_basis;  // n x (n - rank); empty when not requested

  int rows() const { return static_cast<int>(image_basis.rows()); }
  bool surjective() const { return rank == rows(); }
  bool singular() const { return !surjective(); }
};

/// SVD rank test. A singular value counts when it exceeds rel_tol times the
/// reference scale: `scale` if given, else the largest singular value (or 1
/// when every singular value is zero).
RankProfile rank_profile(const Matrix& a, double rel_tol = kDefaultRankTol,
                         std::optional<double> scale = std::nullopt, bool with_kernel = true);

/// Orthogonal projector Q Q^T onto the column span of an orthonormal basis.
Matrix projector(const Matrix& basis, int dim);

/// Orthonormal basis of the orthogonal complement of span(basis) in R^dim.
Matrix complement_basis(const Matrix& basis, int dim);

/// Smallest of the min(m, n) leading singular values; 0 if n < m.
double sigma_min_rows(const Matrix& a);

/// Norm of the minimal-norm right inverse, 1 / sigma_min for full-row-rank
/// matrices and +inf otherwise.
double right_inverse_norm(const Matrix& a, double rel_tol = kDefaultRankTol);

/// sup over unit v of ||T[v]^k||, which for symmetric T equals the
/// multilinear operator norm. Exact for k = 1; otherwise sphere sampling
/// followed by projected power iterations from the `refine` best samples.
double tensor_norm(const DerivativeTensor& t, int samples = 96, int refine = 4);

}  // namespace pfactor
