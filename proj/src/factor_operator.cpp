#include "pfactor/factor_operator.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <fmt/format.h>

#include "pfactor/errors.hpp"
#include "pfactor/sampling.hpp"

namespace pfactor {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double factorial(int k) {
  double r = 1.0;
  for (int i = 2; i <= k; ++i) r *= i;
  return r;
}

Matrix psi_matrix(const SubspaceCascade& cascade, const Vector& h, Convention convention,
                  int upto) {
  Matrix psi = Matrix::Zero(cascade.m(), cascade.n());
  for (int i = 1; i <= upto; ++i) {
    if (cascade.basis(i).cols() == 0) continue;
    psi += term_weight(convention, i) * cascade.projection(i) *
           cascade.derivative(i).contract_to_matrix(h);
  }
  return psi;
}

ConditionRow row(std::string name, double lhs, double rhs) {
  return ConditionRow{std::move(name), lhs, rhs, lhs <= rhs};
}

}  // namespace

std::string to_string(Convention c) { return c == Convention::plain ? "plain" : "factorial"; }

Convention parse_convention(const std::string& s) {
  if (s == "plain") return Convention::plain;
  if (s == "factorial") return Convention::factorial;
  throw ParseError(fmt::format("unknown convention '{}'", s));
}

double term_weight(Convention c, int i) {
  return c == Convention::plain ? 1.0 : 1.0 / factorial(i);
}

FactorOperator assemble_psi(const SubspaceCascade& cascade, const Vector& h,
                            Convention convention, double rel_tol) {
  if (h.size() != cascade.n()) throw DimensionMismatch("direction h has wrong dimension");
  if (!(h.norm() > 0.0)) throw PreconditionViolated("direction h must be nonzero");
  FactorOperator op;
  op.h = h;
  op.convention = convention;
  op.matrix = psi_matrix(cascade, h, convention, cascade.p);
  const auto m = op.matrix.rows();
  const auto n = op.matrix.cols();
  if (m == 0) {
    op.singular_values = Vector(0);
    op.surjective = true;
    op.sigma_min = kInf;
    return op;
  }
  op.singular_values = n > 0 ? Vector(Eigen::JacobiSVD<Matrix>(op.matrix).singularValues())
                             : Vector(0);
  const double smax = op.singular_values.size() > 0 ? op.singular_values(0) : 0.0;
  op.tolerance_used = rel_tol * (smax > 0.0 ? smax : 1.0);
  op.sigma_min = n >= m ? op.singular_values(m - 1) : 0.0;
  op.surjective = op.sigma_min > op.tolerance_used;
  op.right_inverse_norm = op.surjective ? 1.0 / op.sigma_min : kInf;
  return op;
}

RegularityVerdict p_regular_along(const SubspaceCascade& cascade, const Vector& h,
                                  Convention convention, double rel_tol) {
  const FactorOperator op = assemble_psi(cascade, h, convention, rel_tol);
  RegularityVerdict v;
  v.regular = op.surjective;
  v.right_inverse_norm = op.right_inverse_norm;
  v.sigma_min = op.sigma_min;

  const int p = cascade.p;
  int lower_dim = 0;
  for (int i = 1; i < p; ++i) lower_dim += static_cast<int>(cascade.basis(i).cols());
  const Matrix& yp = cascade.basis(p);
  bool lower_ok = true;
  Matrix kernel = Matrix::Identity(cascade.n(), cascade.n());
  if (p > 1) {
    const RankProfile lower = rank_profile(psi_matrix(cascade, h, convention, p - 1), rel_tol);
    lower_ok = lower.rank == lower_dim;
    kernel = lower.kernel_basis;
  }
  bool top_ok = true;
  if (yp.cols() > 0) {
    const Matrix top = term_weight(convention, p) * yp.transpose() *
                       cascade.derivative(p).contract_to_matrix(h) * kernel;
    top_ok = top.cols() >= top.rows() &&
             rank_profile(top, rel_tol, op.singular_values.size() ? op.singular_values(0) : 1.0,
                          false)
                     .rank == yp.cols();
  }
  v.block_criterion = lower_ok && top_ok;
  v.block_criterion_agrees = v.block_criterion == v.regular;
  return v;
}

StrongRegularityEstimate strong_p_regularity_estimate(const SubspaceCascade& cascade,
                                                      double alpha, int samples,
                                                      std::uint64_t seed,
                                                      Convention convention) {
  if (!(alpha > 0.0)) throw PreconditionViolated("alpha must be positive");
  if (samples < 1) throw PreconditionViolated("sample count must be positive");
  std::vector<DerivativeTensor> projected;
  for (int i = 1; i <= cascade.p; ++i) projected.push_back(cascade.projected_derivative(i));

  StrongRegularityEstimate est;
  est.samples_drawn = samples;
  for (const Vector& h : sphere_points(cascade.n(), samples, seed)) {
    bool inside = true;
    for (const auto& t : projected) {
      if (t.apply(h).norm() > alpha) {
        inside = false;
        break;
      }
    }
    if (!inside) continue;
    ++est.samples_in_h_alpha;
    const double r = assemble_psi(cascade, h, convention).right_inverse_norm;
    if (est.worst_h.size() == 0 || r > est.sup_right_inverse_norm) {
      est.sup_right_inverse_norm = r;
      est.worst_h = h;
    }
  }
  if (est.samples_in_h_alpha == 0) {
    throw EmptySample(fmt::format("no sampled direction fell in H_alpha for alpha = {}", alpha));
  }
  return est;
}

double sampled_tensor_sup(const PolynomialMap& map, const Matrix& projection, int order,
                          const Vector& x0, double radius, int samples, std::uint64_t seed) {
  if (order > map.degree()) return 0.0;
  auto tensor_at = [&](const Vector& x) {
    DerivativeTensor t = derivative_tensor(map, x, order);
    return projection.size() ? t.left_multiply(projection) : t;
  };
  if (order == map.degree()) return tensor_norm(tensor_at(x0));

  std::vector<std::pair<double, Vector>> screened;
  screened.emplace_back(tensor_norm(tensor_at(x0), 32, 0), x0);
  for (const Vector& x : ball_points(x0, radius, samples, seed)) {
    screened.emplace_back(tensor_norm(tensor_at(x), 32, 0), x);
  }
  std::partial_sort(screened.begin(), screened.begin() + std::min<long>(5, screened.size()),
                    screened.end(),
                    [](const auto& a, const auto& b) { return a.first > b.first; });
  double best = screened.front().first;
  for (size_t i = 0; i < std::min<size_t>(5, screened.size()); ++i) {
    best = std::max(best, tensor_norm(tensor_at(screened[i].second)));
  }
  return kSupInflation * best;
}

ExistenceCertificate existence_certificate_regular(const PolynomialMap& map, const Vector& x0,
                                                   double eps, int sample_count,
                                                   std::uint64_t seed) {
  if (x0.size() != map.n_in()) throw DimensionMismatch("x0 has wrong dimension");
  if (!(eps > 0.0 && eps < 1.0)) throw PreconditionViolated("radius must lie in (0, 1)");
  if (map.n_out() != map.n_in()) throw NonSquareSystem("regular certificate needs m = n");
  const Matrix j = jacobian(map, x0);
  const double inv_norm = right_inverse_norm(j);
  if (!std::isfinite(inv_norm)) {
    throw SingularBasePoint("F'(x0) is not invertible; the regular certificate does not apply");
  }
  ExistenceCertificate cert;
  cert.kind = "regular";
  cert.x0 = x0;
  cert.radius = eps;
  cert.sample_count = sample_count;
  cert.eta = evaluate(map, x0).norm();
  cert.delta = inv_norm;
  cert.c = sampled_tensor_sup(map, Matrix(), 2, x0, eps, sample_count, seed);
  cert.conditions = {
      row("delta*eta <= eps/2", cert.delta * cert.eta, eps / 2.0),
      row("delta*C*eps <= 1/4", cert.delta * cert.c * eps, 0.25),
      row("C*eps <= 1/2", cert.c * eps, 0.5),
  };
  cert.certified = true;
  for (const auto& r : cert.conditions) cert.certified = cert.certified && r.holds;
  cert.certified_ball_radius = cert.certified ? eps : 0.0;
  return cert;
}

namespace {

ExistenceCertificate singular_certificate(const SubspaceCascade& cascade,
                                          const PolynomialMap& map, const Vector& h_in,
                                          double omega, double nu, int sample_count,
                                          Convention convention, double c_sup) {
  const Vector h = h_in.normalized();
  const int p = cascade.p;
  ExistenceCertificate cert;
  cert.kind = "singular";
  cert.x0 = cascade.base_point;
  cert.h = h;
  cert.radius = omega;
  cert.nu = nu;
  cert.p = p;
  cert.convention = convention;
  cert.sample_count = sample_count;

  const FactorOperator op = assemble_psi(cascade, h, convention);
  if (!op.surjective) {
    throw NotPRegularAlongH(
        fmt::format("Psi_{}(h) is not surjective (sigma_min = {:.3e})", p, op.sigma_min));
  }
  cert.delta = evaluate(map, cascade.base_point).norm();
  cert.eta = op.right_inverse_norm;
  cert.c = c_sup;

  double dmax = 0.0;
  double amin = std::numeric_limits<double>::infinity();
  for (int k = 1; k <= p; ++k) {
    if (cascade.basis(k).cols() == 0) continue;
    const double nk = tensor_norm(cascade.projected_derivative(k)) / factorial(k - 1);
    dmax = std::max(dmax, nk);
    amin = std::min(amin, nk);
  }
  cert.d = 4.0 * dmax;
  cert.alpha = std::min(3.0 / (std::pow(4.0, p + 2) * cert.eta), amin);

  const double rhs1 = cert.d > 0.0 ? cert.alpha * std::pow(omega, p) / (2.0 * p * cert.d) : kInf;
  cert.conditions = {
      row("eta*delta <= alpha*omega^p/(2*p*d)", cert.eta * cert.delta, rhs1),
      row("(4^(p+2)/3)*c*omega*eta <= 1/2", std::pow(4.0, p + 2) / 3.0 * cert.c * omega * cert.eta,
          0.5),
  };
  cert.certified = true;
  for (const auto& r : cert.conditions) cert.certified = cert.certified && r.holds;
  cert.certified_ball_radius = cert.certified ? 1.5 * omega : 0.0;
  return cert;
}

}  // namespace

ExistenceCertificate existence_certificate_singular(const SubspaceCascade& cascade,
                                                    const PolynomialMap& map, const Vector& h,
                                                    double omega, double nu, int sample_count,
                                                    std::uint64_t seed, Convention convention,
                                                    double kernel_tol) {
  if (h.size() != cascade.n()) throw DimensionMismatch("direction h has wrong dimension");
  if (!(h.norm() > 0.0)) throw PreconditionViolated("direction h must be nonzero");
  if (!(nu > 0.0 && nu < 1.0)) throw PreconditionViolated("nu must lie in (0, 1)");
  if (!(omega > 0.0 && omega < nu / 2.0)) {
    throw PreconditionViolated("omega must lie in (0, nu/2)");
  }
  const Vector hn = h.normalized();
  for (int k = 1; k < cascade.p; ++k) {
    if (cascade.basis(k).cols() == 0) continue;
    const DerivativeTensor t = cascade.projected_derivative(k);
    const double scale = 1.0 + tensor_norm(t);
    if (t.apply(hn).norm() > kernel_tol * scale) {
      throw HNotAdmissible(fmt::format("h is not in the {}-kernel of f_{}^({})", k, k, k));
    }
  }
  double c = 0.0;
  for (int k = 1; k <= cascade.p; ++k) {
    if (cascade.basis(k).cols() == 0) continue;
    c = std::max(c, sampled_tensor_sup(map, cascade.projection(k), k + 1, cascade.base_point,
                                       nu, sample_count, seed));
  }
  ExistenceCertificate cert =
      singular_certificate(cascade, map, h, omega, nu, sample_count, convention, c);
  const Convention other =
      convention == Convention::plain ? Convention::factorial : Convention::plain;
  try {
    const ExistenceCertificate alt =
        singular_certificate(cascade, map, h, omega, nu, sample_count, other, c);
    cert.other_convention_certified = alt.certified;
    cert.conventions_agree = alt.certified == cert.certified;
  } catch (const NotPRegularAlongH&) {
    cert.other_convention_certified = false;
    cert.conventions_agree = !cert.certified;
  }
  return cert;
}

}  // namespace pfactor
