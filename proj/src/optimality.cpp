#include "pfactor/optimality.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <fmt/format.h>

#include "pfactor/errors.hpp"
#include "pfactor/sampling.hpp"

namespace pfactor {

namespace {

Matrix square_from_flat(const Eigen::RowVectorXd& flat, int n) {
  Matrix h(n, n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) h(i, j) = flat(i * n + j);
  }
  return h;
}

Vector canonical_orientation(Vector z) {
  for (int i = 0; i < z.size(); ++i) {
    if (std::abs(z(i)) > 1e-12) {
      if (z(i) < 0) z = -z;
      break;
    }
  }
  return z;
}

struct KernelSystem {
  Matrix k;                                 // n x r, orthonormal
  std::vector<std::pair<int, DerivativeTensor>> forms;  // (order, scaled projected tensor)

  Vector residual(const Vector& u) const {
    const Vector z = k * u;
    Vector r(0);
    for (const auto& [i, t] : forms) {
      Vector v = t.apply(z);
      Vector joined(r.size() + v.size());
      joined << r, v;
      r = std::move(joined);
    }
    return r;
  }

  Matrix jac(const Vector& u) const {
    const Vector z = k * u;
    Matrix j(0, k.cols());
    for (const auto& [i, t] : forms) {
      Matrix block = static_cast<double>(i) * t.contract_to_matrix(z) * k;
      Matrix joined(j.rows() + block.rows(), k.cols());
      joined << j, block;
      j = std::move(joined);
    }
    return j;
  }
};

}  // namespace

std::string to_string(ConeKind k) {
  switch (k) {
    case ConeKind::empty: return "empty";
    case ConeKind::rays: return "rays";
    case ConeKind::subspace: return "subspace";
    case ConeKind::cone: return "cone";
  }
  return "unknown";
}

bool h_p_membership(const SubspaceCascade& cascade, const Vector& h, double tol) {
  if (h.size() != cascade.n()) throw DimensionMismatch("direction has wrong dimension");
  const double nh = h.norm();
  if (!(nh > 0.0)) throw PreconditionViolated("H_p excludes the zero direction");
  for (int i = 1; i <= cascade.p; ++i) {
    if (cascade.basis(i).cols() == 0) continue;
    const DerivativeTensor t = cascade.projected_derivative(i);
    const double scale = 1.0 + t.flattened().norm();
    if (t.apply(h).norm() > tol * scale * std::pow(nh, i)) return false;
  }
  return true;
}

TangentConeQuery tangent_cone_sample(const SubspaceCascade& cascade, const ConeOptions& options) {
  const int n = cascade.n();
  TangentConeQuery q;
  q.x_bar = cascade.base_point;
  q.p = cascade.p;
  q.tol = options.tol;

  KernelSystem sys;
  if (cascade.basis(1).cols() == 0) {
    sys.k = Matrix::Identity(n, n);
  } else {
    sys.k = rank_profile(cascade.projected_derivative(1).flattened(), cascade.rel_tol).kernel_basis;
  }
  const int r = static_cast<int>(sys.k.cols());
  if (r == 0) {
    q.kind = ConeKind::empty;
    return q;
  }
  for (int i = 2; i <= cascade.p; ++i) {
    if (cascade.basis(i).cols() == 0) continue;
    DerivativeTensor t = cascade.projected_derivative(i);
    const double s = tensor_norm(t);
    if (s == 0.0) continue;
    sys.forms.emplace_back(i, t.left_multiply(Matrix::Identity(t.m(), t.m()) / s));
  }

  auto regular = [&](const Vector& z) {
    return p_regular_along(cascade, z, options.convention).regular;
  };

  if (sys.forms.empty()) {
    q.kind = ConeKind::subspace;
    q.subspace_basis = sys.k;
    for (const Vector& u : sphere_points(r, options.samples, options.seed)) {
      ConeSample s{sys.k * u, true, false};
      s.p_regular = regular(s.direction);
      if (!s.p_regular) ++q.unverified_members;
      q.samples.push_back(std::move(s));
    }
    return q;
  }

  const double accept = 1e-11;
  std::vector<Vector> members;
  for (Vector u : sphere_points(r, options.samples, options.seed)) {
    double res = sys.residual(u).norm();
    for (int it = 0; it < options.max_corrector_steps && res > 1e-15; ++it) {
      Matrix ja(sys.jac(u).rows() + 1, r);
      ja << sys.jac(u), u.transpose();
      Vector ra(ja.rows());
      ra << sys.residual(u), 0.0;
      const Vector du = Eigen::CompleteOrthogonalDecomposition<Matrix>(ja).solve(ra);
      Vector next = u - du;
      if (!(next.norm() > 0.0) || !next.allFinite()) break;
      next.normalize();
      const double nres = sys.residual(next).norm();
      if (nres >= res && (next - u).norm() < 1e-15) break;
      u = next;
      res = nres;
    }
    const Vector z = (sys.k * u).normalized();
    ConeSample s{z, res <= accept && h_p_membership(cascade, z, options.tol), false};
    if (s.member) {
      s.p_regular = regular(z);
      if (!s.p_regular) ++q.unverified_members;
      members.push_back(canonical_orientation(z));
    }
    q.samples.push_back(std::move(s));
  }
  if (members.empty()) {
    q.kind = ConeKind::empty;
    return q;
  }

  std::vector<Vector> lines;
  for (const Vector& z : members) {
    bool seen = false;
    for (const Vector& c : lines) {
      if (std::abs(z.dot(c)) >= 1.0 - 1e-9) {
        seen = true;
        break;
      }
    }
    if (!seen) lines.push_back(z);
  }

  bool isolated = lines.size() <= 64;
  for (const Vector& z : lines) {
    if (!isolated) break;
    const Vector u = sys.k.transpose() * z;
    Matrix ja(sys.jac(u).rows() + 1, r);
    ja << sys.jac(u), u.transpose();
    isolated = rank_profile(ja, 1e-8, std::nullopt, false).rank == r;
  }
  if (isolated) {
    q.kind = ConeKind::rays;
    for (const Vector& z : lines) {
      const bool reg = regular(z);
      q.rays.push_back(z);
      q.ray_p_regular.push_back(reg);
      q.rays.push_back(-z);
      q.ray_p_regular.push_back(reg);
    }
    return q;
  }

  Matrix cols(n, static_cast<Eigen::Index>(members.size()));
  for (size_t j = 0; j < members.size(); ++j) cols.col(static_cast<Eigen::Index>(j)) = members[j];
  const Matrix span = rank_profile(cols, 1e-6, std::nullopt, false).image_basis;
  bool contained = true;
  for (const Vector& v : sphere_points(static_cast<int>(span.cols()), 64, options.seed + 7)) {
    if (!h_p_membership(cascade, span * v, 1e-7)) {
      contained = false;
      break;
    }
  }
  if (contained) {
    q.kind = ConeKind::subspace;
    q.subspace_basis = span;
  } else {
    q.kind = ConeKind::cone;
  }
  return q;
}

double classical_stationarity_residual(const ObjectiveProblem& problem, const Vector& x_bar) {
  problem.validate();
  const Vector g = jacobian(problem.objective, x_bar).row(0).transpose();
  if (!problem.equality_constraints || problem.equality_constraints->n_out() == 0) {
    return g.norm();
  }
  const Matrix jt = jacobian(*problem.equality_constraints, x_bar).transpose();
  const Vector lambda = Eigen::CompleteOrthogonalDecomposition<Matrix>(jt).solve(-g);
  return (g + jt * lambda).norm();
}

PFactorLagrangeReport check_optimality(const ObjectiveProblem& problem,
                                       const SubspaceCascade* cascade, const Vector& x_bar,
                                       const Vector& h, const OptimalityOptions& options) {
  problem.validate();
  const int n = problem.n();
  if (x_bar.size() != n || h.size() != n) throw DimensionMismatch("x̄ or h has wrong dimension");
  if (!(h.norm() > 0.0)) throw HNotAdmissible("h must be nonzero");

  const Vector grad = jacobian(problem.objective, x_bar).row(0).transpose();
  const Matrix hess =
      square_from_flat(derivative_tensor(problem.objective, x_bar, 2).flattened().row(0), n);

  PFactorLagrangeReport rep;
  rep.h = h;
  rep.convention = options.convention;
  rep.classical_residual = classical_stationarity_residual(problem, x_bar);

  const bool constrained =
      problem.equality_constraints && problem.equality_constraints->n_out() > 0;
  if (!constrained) {
    rep.p = 0;
    rep.lambda = Vector(0);
    rep.stationarity_residual = grad.norm();
    rep.lagrangian_hessian = hess;
    rep.quadratic_value = h.dot(hess * h);
    rep.necessary_holds = rep.stationarity_residual <= options.tol;
    rep.cone_kind = ConeKind::subspace;
    double amin = std::numeric_limits<double>::infinity();
    for (const Vector& z : sphere_points(n, options.subspace_samples, options.cone.seed)) {
      QuadraticSample s{z, z.dot(hess * z), 0.0, rep.stationarity_residual, true};
      s.margin = s.value;
      amin = std::min(amin, s.margin);
      rep.sufficient_quadratic_values.push_back(std::move(s));
    }
    rep.alpha = amin;
    rep.sufficient_holds = rep.necessary_holds && amin > options.tol;
    return rep;
  }

  if (cascade == nullptr) throw PreconditionViolated("constrained problem needs a cascade at x̄");
  const PolynomialMap& F = *problem.equality_constraints;
  if ((cascade->base_point - x_bar).norm() > 1e-12 * (1.0 + x_bar.norm())) {
    throw PreconditionViolated("cascade was built at a different point");
  }
  rep.p = cascade->p;
  if (!h_p_membership(*cascade, h, options.tol)) {
    throw HNotAdmissible("h is not in H_p(x̄)");
  }
  if (!p_regular_along(*cascade, h, options.convention).regular) {
    throw NotPRegularAlongH("constraint map is not p-regular along h");
  }

  std::vector<DerivativeTensor> higher;  // F^{(i+1)}(x̄), i = 1..p
  for (int i = 1; i <= cascade->p; ++i) higher.push_back(derivative_tensor(F, x_bar, i + 1));

  struct Solve {
    Vector lambda;
    double residual;
    Matrix hessian;
  };
  auto solve_at = [&](const Vector& z) {
    const Matrix psi = assemble_psi(*cascade, z, options.convention).matrix;
    const Matrix pt = psi.transpose();
    Solve s;
    s.lambda = Eigen::CompleteOrthogonalDecomposition<Matrix>(pt).solve(-grad);
    s.residual = (grad + pt * s.lambda).norm();
    s.hessian = hess;
    for (int i = 1; i <= cascade->p; ++i) {
      if (cascade->basis(i).cols() == 0) continue;
      const Vector mu = cascade->projection(i) * s.lambda;
      DerivativeTensor t = higher[static_cast<size_t>(i - 1)];
      for (int c = 0; c < i - 1; ++c) t = t.contract(z);
      const double w = 2.0 / (i * (i + 1.0)) * term_weight(options.convention, i);
      s.hessian += w * square_from_flat(mu.transpose() * t.flattened(), n);
    }
    return s;
  };

  const Solve main = solve_at(h);
  rep.lambda = main.lambda;
  rep.stationarity_residual = main.residual;
  if (main.residual > options.tol * (1.0 + grad.norm())) {
    throw NoMultiplierExists(fmt::format(
        "p-factor stationarity residual {:.3e} exceeds tolerance", main.residual));
  }
  rep.necessary_holds = true;
  for (int i = 1; i <= cascade->p; ++i) {
    rep.multipliers.push_back(cascade->projection(i) * main.lambda);
    rep.multiplier_coordinates.push_back(cascade->basis(i).transpose() * main.lambda);
  }
  rep.lagrangian_hessian = main.hessian;
  rep.quadratic_value = h.dot(main.hessian * h);

  const TangentConeQuery cone = tangent_cone_sample(*cascade, options.cone);
  rep.cone_kind = cone.kind;
  std::vector<Vector> dirs;
  if (cone.kind == ConeKind::rays) {
    dirs = cone.rays;
  } else if (cone.kind == ConeKind::subspace) {
    for (const Vector& v : sphere_points(static_cast<int>(cone.subspace_basis.cols()),
                                         options.subspace_samples, options.cone.seed)) {
      dirs.push_back(cone.subspace_basis * v);
    }
  } else {
    for (const auto& s : cone.samples) {
      if (s.member) dirs.push_back(s.direction);
    }
  }

  bool all_found = !dirs.empty();
  double amin = std::numeric_limits<double>::infinity();
  for (const Vector& z : dirs) {
    QuadraticSample qs;
    qs.h = z;
    if (p_regular_along(*cascade, z, options.convention).regular) {
      const Solve s = solve_at(z);
      qs.stationarity_residual = s.residual;
      qs.multiplier_found = s.residual <= options.tol * (1.0 + grad.norm());
      qs.value = z.dot(s.hessian * z);
      qs.margin = qs.value / z.squaredNorm();
    }
    all_found = all_found && qs.multiplier_found;
    if (qs.multiplier_found) amin = std::min(amin, qs.margin);
    rep.sufficient_quadratic_values.push_back(std::move(qs));
  }
  rep.alpha = std::isfinite(amin) ? amin : 0.0;
  rep.sufficient_holds = all_found && rep.alpha > options.tol;
  return rep;
}

}  // namespace pfactor
