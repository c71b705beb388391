#include "pfactor/cascade.hpp"

#include <cmath>

#include <fmt/format.h>

#include "pfactor/errors.hpp"

namespace pfactor {

namespace {

void check_index(const SubspaceCascade& c, int i) {
  if (i < 1 || i > c.p) {
    throw IndexOutOfRange(fmt::format("cascade index {} outside 1..{}", i, c.p));
  }
}

}  // namespace

std::vector<int> SubspaceCascade::dims() const {
  std::vector<int> d;
  for (const auto& b : bases) d.push_back(static_cast<int>(b.cols()));
  return d;
}

const Matrix& SubspaceCascade::projection(int i) const {
  check_index(*this, i);
  return projections[static_cast<size_t>(i - 1)];
}

const Matrix& SubspaceCascade::basis(int i) const {
  check_index(*this, i);
  return bases[static_cast<size_t>(i - 1)];
}

const DerivativeTensor& SubspaceCascade::derivative(int i) const {
  check_index(*this, i);
  return derivatives[static_cast<size_t>(i - 1)];
}

DerivativeTensor SubspaceCascade::projected_derivative(int i) const {
  return derivative(i).left_multiply(projection(i));
}

SubspaceCascade build_cascade(const PolynomialMap& map, const Vector& x_bar, int p,
                              double rel_tol) {
  if (p < 1) throw InputError("cascade order p must be at least 1");
  if (x_bar.size() != map.n_in()) throw DimensionMismatch("base point has wrong dimension");
  if (!x_bar.allFinite()) throw NonFiniteValue("base point is not finite");
  const int m = map.n_out();

  SubspaceCascade c;
  c.base_point = x_bar;
  c.p_requested = p;
  c.rel_tol = rel_tol;
  Matrix pz = Matrix::Identity(m, m);
  int remaining = m;

  for (int i = 1; i <= p; ++i) {
    DerivativeTensor d = derivative_tensor(map, x_bar, i);
    const Matrix& flat = d.flattened();
    double scale = 0.0;
    if (flat.size() > 0 && !flat.isZero(0.0)) {
      scale = Eigen::JacobiSVD<Matrix>(flat).singularValues()(0);
    }
    RankProfile prof = rank_profile(pz * flat, rel_tol, scale > 0.0 ? scale : 1.0, false);
    int r = std::min(prof.rank, remaining);
    Matrix basis = prof.image_basis.leftCols(r);
    Matrix py = projector(basis, m);

    c.complements.push_back(pz);
    c.bases.push_back(basis);
    c.projections.push_back(py);
    c.derivatives.push_back(std::move(d));
    c.profiles.push_back(std::move(prof));
    c.p = i;

    pz = pz - py;
    remaining -= r;
    if (remaining == 0) break;
    if (i == p) {
      throw DecompositionIncomplete(fmt::format(
          "Y_1 + ... + Y_{} leaves a {}-dimensional complement; raise p", p, remaining));
    }
  }
  if (remaining == 0) {
    // Symmetrize against accumulated roundoff; exact zeros stay exact.
    for (auto& proj : c.projections) proj = 0.5 * (proj + proj.transpose()).eval();
  }
  return c;
}

SubspaceCascade minimal_cascade(const PolynomialMap& map, const Vector& x_bar, int p_max,
                                double rel_tol) {
  for (int p = 1; p <= p_max; ++p) {
    try {
      return build_cascade(map, x_bar, p, rel_tol);
    } catch (const DecompositionIncomplete&) {
      if (p == p_max) throw;
    }
  }
  throw DecompositionIncomplete("p_max must be at least 1");
}

Vector f_component(const SubspaceCascade& cascade, int i, const PolynomialMap& map,
                   const Vector& x) {
  return cascade.projection(i) * evaluate(map, x);
}

bool k_kernel_membership(const SubspaceCascade& cascade, int i, const Vector& xi, double tol) {
  const double nx = xi.norm();
  if (!(nx > 0.0)) throw PreconditionViolated("k-kernel test needs a nonzero direction");
  const Vector v = cascade.projected_derivative(i).apply(xi);
  return v.norm() <= tol * std::pow(nx, i);
}

}  // namespace pfactor
