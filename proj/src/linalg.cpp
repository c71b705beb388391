#include "pfactor/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "pfactor/errors.hpp"
#include "pfactor/sampling.hpp"

namespace pfactor {

RankProfile rank_profile(const Matrix& a, double rel_tol, std::optional<double> scale,
                         bool with_kernel) {
  if (!(rel_tol > 0.0 && rel_tol < 1.0)) throw InputError("rel_tol must lie in (0, 1)");
  RankProfile out;
  const auto m = a.rows();
  const auto n = a.cols();
  if (m == 0 || n == 0) {
    out.singular_values = Vector(0);
    out.image_basis = Matrix(m, 0);
    out.kernel_basis = with_kernel ? Matrix::Identity(n, n) : Matrix(n, 0);
    out.tolerance_used = rel_tol;
    return out;
  }
  const unsigned opts = with_kernel ? (Eigen::ComputeThinU | Eigen::ComputeFullV)
                                    : static_cast<unsigned>(Eigen::ComputeThinU);
  Eigen::JacobiSVD<Matrix> svd(a, opts);
  out.singular_values = svd.singularValues();
  double ref = scale.value_or(out.singular_values(0));
  if (ref <= 0.0) ref = 1.0;
  out.tolerance_used = rel_tol * ref;
  int r = 0;
  while (r < out.singular_values.size() && out.singular_values(r) > out.tolerance_used) ++r;
  out.rank = r;
  out.image_basis = svd.matrixU().leftCols(r);
  if (with_kernel) {
    out.kernel_basis = svd.matrixV().rightCols(n - r);
  } else {
    out.kernel_basis = Matrix(n, 0);
  }
  return out;
}

Matrix projector(const Matrix& basis, int dim) {
  if (basis.cols() == 0) return Matrix::Zero(dim, dim);
  if (basis.rows() != dim) throw DimensionMismatch("basis has wrong ambient dimension");
  return basis * basis.transpose();
}

Matrix complement_basis(const Matrix& basis, int dim) {
  if (basis.cols() == 0) return Matrix::Identity(dim, dim);
  Matrix p = Matrix::Identity(dim, dim) - projector(basis, dim);
  return rank_profile(p, 1e-8, 1.0, false).image_basis;
}

double sigma_min_rows(const Matrix& a) {
  if (a.rows() == 0) return std::numeric_limits<double>::infinity();
  if (a.cols() < a.rows()) return 0.0;
  Eigen::JacobiSVD<Matrix> svd(a);
  return svd.singularValues()(a.rows() - 1);
}

double right_inverse_norm(const Matrix& a, double rel_tol) {
  if (a.rows() == 0) return 0.0;
  if (a.cols() < a.rows()) return std::numeric_limits<double>::infinity();
  Eigen::JacobiSVD<Matrix> svd(a);
  const Vector& s = svd.singularValues();
  const double smin = s(a.rows() - 1);
  const double ref = s(0) > 0.0 ? s(0) : 1.0;
  if (!(smin > rel_tol * ref)) return std::numeric_limits<double>::infinity();
  return 1.0 / smin;
}

double tensor_norm(const DerivativeTensor& t, int samples, int refine) {
  if (t.m() == 0 || t.n() == 0) return 0.0;
  if (t.order() == 1) {
    Eigen::JacobiSVD<Matrix> svd(t.flattened());
    return svd.singularValues()(0);
  }
  if (t.flattened().isZero(0.0)) return 0.0;
  if (t.n() == 1) return t.apply(Vector::Ones(1)).norm();

  auto value = [&](const Vector& v) { return t.apply(v).norm(); };
  std::vector<std::pair<double, Vector>> scored;
  for (auto& v : sphere_points(t.n(), samples, 0x7e9a5eedULL)) {
    scored.emplace_back(value(v), v);
  }
  for (int j = 0; j < t.n(); ++j) {
    Vector e = Vector::Zero(t.n());
    e(j) = 1.0;
    scored.emplace_back(value(e), e);
  }
  std::sort(scored.begin(), scored.end(),
            [](const auto& a, const auto& b) { return a.first > b.first; });
  double best = scored.front().first;
  const size_t starts = std::min<size_t>(static_cast<size_t>(std::max(refine, 0)), scored.size());
  for (size_t s = 0; s < starts; ++s) {
    Vector v = scored[s].second;
    for (int it = 0; it < 200; ++it) {
      const Matrix j = t.contract_to_matrix(v);
      Vector g = j.transpose() * (j * v);
      const double gn = g.norm();
      if (gn == 0.0) break;
      Vector next = g / gn;
      const double val = value(next);
      best = std::max(best, val);
      const double moved = std::min((next - v).norm(), (next + v).norm());
      v = next;
      if (moved < 1e-13) break;
    }
  }
  return best;
}

}  // namespace pfactor
