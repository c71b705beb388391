#include "pfactor/solvers.hpp"

#include <cmath>
#include <functional>
#include <limits>

#include <fmt/format.h>

#include "pfactor/errors.hpp"

namespace pfactor {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

struct LinearStep {
  Vector dx;
  double sigma_min = kNaN;
  bool singular = false;
  bool least_squares = false;
};

LinearStep solve_linear(const Matrix& a, const Vector& b) {
  LinearStep s;
  if (a.rows() == 0 || a.cols() == 0) {
    s.dx = Vector::Zero(a.cols());
    return s;
  }
  const Vector sv = Eigen::JacobiSVD<Matrix>(a).singularValues();
  s.sigma_min = sv(sv.size() - 1);
  if (a.rows() == a.cols()) {
    Eigen::FullPivLU<Matrix> lu(a);
    if (!lu.isInvertible()) {
      s.singular = true;
      return s;
    }
    s.dx = lu.solve(b);
  } else {
    s.least_squares = true;
    s.dx = Eigen::CompleteOrthogonalDecomposition<Matrix>(a).solve(b);
  }
  return s;
}

IterationTrace run_loop(const PolynomialMap& map, const Vector& x0, const NewtonOptions& opt,
                        const LinearizedSystem& sys, bool throw_on_singular, double damping,
                        const SubspaceCascade* reference, IterationTrace trace) {
  const double radius = opt.divergence_radius.value_or(1e6 * (1.0 + x0.norm()));

  auto record = [&](int k, const Vector& x, double step_norm) {
    IterationStep st;
    st.iter = k;
    st.x = x;
    st.residual = evaluate(map, x).norm();
    st.p_residual = reference ? p_order_residual(*reference, map, x) : kNaN;
    st.step_norm = step_norm;
    st.sigma_min = kNaN;
    trace.steps.push_back(std::move(st));
  };

  constexpr double kEps = std::numeric_limits<double>::epsilon();
  std::vector<double> noise{0.0};  // roundoff estimate for each recorded iterate
  Vector x = x0;
  record(0, x, 0.0);
  for (int k = 0;; ++k) {
    if (!x.allFinite()) {
      trace.termination = Termination::diverged;
      break;
    }
    const Vector b = sys.rhs(x);
    if (trace.steps.back().residual <= opt.tol && b.norm() <= opt.tol) {
      trace.termination = Termination::converged;
      break;
    }
    if (k >= opt.max_iters) {
      trace.termination = Termination::max_iters;
      break;
    }
    if (sys.before_step) sys.before_step(x);
    const LinearStep ls = solve_linear(sys.matrix(x), b);
    trace.steps.back().sigma_min = ls.sigma_min;
    trace.least_squares = trace.least_squares || ls.least_squares;
    if (ls.singular) {
      if (throw_on_singular) {
        throw FactorMatrixSingular(fmt::format(
            "factor matrix singular at iterate {} (sigma_min = {:.3e})", k, ls.sigma_min));
      }
      trace.termination = Termination::singular_breakdown;
      break;
    }
    const Vector xn = x - damping * ls.dx;
    const double step = (xn - x).norm();
    const double mag = sys.rhs_magnitude ? sys.rhs_magnitude(x) : b.norm();
    noise.push_back(kEps * (x.norm() + (ls.sigma_min > 0.0 ? mag / ls.sigma_min : 0.0)));
    record(k + 1, xn, step);
    if (!xn.allFinite() || xn.norm() > radius ||
        step > opt.blowup_factor * (1.0 + x.norm())) {
      trace.termination = Termination::diverged;
      break;
    }
    x = xn;
  }

  if (opt.true_root) {
    const double rel = 4.0 * kEps * opt.true_root->norm();
    std::vector<double> errors;
    for (size_t k = 0; k < trace.steps.size(); ++k) {
      const double e = (trace.steps[k].x - *opt.true_root).norm();
      if (!(e > std::max(rel, 10.0 * noise[k]))) break;
      errors.push_back(e);
    }
    trace.observed_order = fit_order(errors, 0.0);
  }
  return trace;
}

std::optional<SubspaceCascade> try_cascade(const PolynomialMap& map, const Vector& x) {
  try {
    return minimal_cascade(map, x);
  } catch (const PreconditionViolated&) {
    return std::nullopt;
  }
}

}  // namespace

IterationTrace newton_iterate(const PolynomialMap& map, const Vector& x0,
                              const NewtonOptions& options, const LinearizedSystem& system,
                              bool throw_on_singular, double damping,
                              const SubspaceCascade* reference) {
  if (x0.size() != map.n_in()) throw DimensionMismatch("x0 has wrong dimension");
  IterationTrace trace;
  trace.method = "newton_iterate";
  return run_loop(map, x0, options, system, throw_on_singular, damping, reference,
                  std::move(trace));
}

std::string to_string(Termination t) {
  switch (t) {
    case Termination::converged: return "converged";
    case Termination::diverged: return "diverged";
    case Termination::singular_breakdown: return "singular_breakdown";
    case Termination::max_iters: return "max_iters";
  }
  return "unknown";
}

IterationTrace newton_classical(const PolynomialMap& map, const Vector& x0,
                               const NewtonOptions& options) {
  if (map.n_in() != map.n_out()) {
    throw NonSquareSystem(fmt::format("classical Newton needs m = n, got m = {}, n = {}",
                                      map.n_out(), map.n_in()));
  }
  if (x0.size() != map.n_in()) throw DimensionMismatch("x0 has wrong dimension");
  std::optional<SubspaceCascade> ref;
  if (options.true_root) ref = try_cascade(map, *options.true_root);

  LinearizedSystem sys;
  sys.matrix = [&](const Vector& x) { return jacobian(map, x); };
  sys.rhs = [&](const Vector& x) { return evaluate(map, x); };
  IterationTrace trace;
  trace.method = "newton_classical";
  return run_loop(map, x0, options, sys, false, 1.0, ref ? &*ref : nullptr, std::move(trace));
}

FactorProjections build_factor_projections(const PolynomialMap& map, const Vector& point,
                                           const Vector& h, int max_p, double rel_tol) {
  if (point.size() != map.n_in() || h.size() != map.n_in()) {
    throw DimensionMismatch("projection point or h has wrong dimension");
  }
  if (!(h.norm() > 0.0)) throw PreconditionViolated("direction h must be nonzero");
  if (max_p < 1) throw InputError("p must be at least 1");
  const int m = map.n_out();
  const Matrix eye = Matrix::Identity(m, m);

  FactorProjections out;
  out.point = point;
  out.h = h;
  std::vector<Matrix> contracted;  // F^{(j+1)}(point)[h]^j, j = 1..max_p-1
  for (int j = 1; j < max_p; ++j) {
    contracted.push_back(derivative_tensor(map, point, j + 1).contract_to_matrix(h));
  }
  Matrix a = jacobian(map, point);
  const double scale = std::max(1.0, a.norm());
  std::vector<Matrix> sums;  // e_1, ..., e_k over P̄_1..P̄_k

  for (int k = 0;; ++k) {
    const RankProfile prof = rank_profile(a, rel_tol, std::max(scale, a.norm()), false);
    out.images.push_back(prof.image_basis);
    if (prof.rank == m) {
      out.p = k + 1;
      out.p_sums = sums;
      out.factor_matrix = a;
      out.sigma_min = sigma_min_rows(a);
      return out;
    }
    if (k + 1 >= max_p) break;
    const Matrix pbar = eye - projector(prof.image_basis, m);
    out.p_bar.push_back(pbar);
    // Ordered products, larger index on the left.
    sums.push_back(Matrix::Zero(m, m));
    for (int j = k; j >= 1; --j) sums[static_cast<size_t>(j)] += pbar * sums[static_cast<size_t>(j - 1)];
    sums[0] += pbar;
    a = jacobian(map, point);
    for (size_t j = 0; j < sums.size(); ++j) a += sums[j] * contracted[j];
  }
  throw NotPRegularAlongH(
      fmt::format("factor matrix is rank deficient up to order {} along h", max_p));
}

Matrix factor_matrix_at(const PolynomialMap& map, const FactorProjections& proj, const Vector& x) {
  Matrix a = jacobian(map, x);
  for (size_t j = 0; j < proj.p_sums.size(); ++j) {
    a += proj.p_sums[j] *
         derivative_tensor(map, x, static_cast<int>(j) + 2).contract_to_matrix(proj.h);
  }
  return a;
}

Vector factor_rhs_at(const PolynomialMap& map, const FactorProjections& proj, const Vector& x) {
  Vector b = evaluate(map, x);
  for (size_t j = 0; j < proj.p_sums.size(); ++j) {
    b += proj.p_sums[j] * derivative_tensor(map, x, static_cast<int>(j) + 1).apply(proj.h);
  }
  return b;
}

IterationTrace newton_p_factor(const PolynomialMap& map, const FactorNewtonConfig& config,
                               const Vector& x0) {
  if (x0.size() != map.n_in()) throw DimensionMismatch("x0 has wrong dimension");
  if (config.h.size() != map.n_in()) throw DimensionMismatch("h has wrong dimension");
  if (!(config.h.norm() > 0.0)) throw PreconditionViolated("direction h must be nonzero");
  if (!(config.damping > 0.0)) throw InputError("damping must be positive");
  const Vector h = config.normalize_h ? Vector(config.h.normalized()) : config.h;
  const Vector point = config.projection_point.value_or(x0);

  FactorProjections proj = build_factor_projections(map, point, h, config.p, config.rel_tol);
  const FactorProjections frozen = proj;
  std::optional<SubspaceCascade> ref;
  if (config.newton.true_root) ref = try_cascade(map, *config.newton.true_root);

  LinearizedSystem sys;
  if (config.refresh_projections) {
    sys.before_step = [&](const Vector& x) {
      try {
        proj = build_factor_projections(map, x, h, config.p, config.rel_tol);
      } catch (const NotPRegularAlongH& e) {
        throw FactorMatrixSingular(e.what());
      }
    };
  }
  sys.matrix = [&](const Vector& x) {
    return config.frozen_matrix ? frozen.factor_matrix : factor_matrix_at(map, proj, x);
  };
  sys.rhs = [&](const Vector& x) { return factor_rhs_at(map, proj, x); };
  sys.rhs_magnitude = [&](const Vector& x) {
    double mag = evaluate(map, x).norm();
    for (size_t j = 0; j < proj.p_sums.size(); ++j) {
      mag += (proj.p_sums[j] * derivative_tensor(map, x, static_cast<int>(j) + 1).apply(proj.h))
                 .norm();
    }
    return mag;
  };

  IterationTrace trace;
  trace.method = "newton_p_factor";
  trace.p = proj.p;
  return run_loop(map, x0, config.newton, sys, true, config.damping, ref ? &*ref : nullptr,
                  std::move(trace));
}

double p_order_residual(const SubspaceCascade& cascade, const PolynomialMap& map,
                        const Vector& xi) {
  const Vector f_bar = evaluate(map, cascade.base_point);
  const Vector f_xi = evaluate(map, xi);
  double sum = 0.0;
  for (int i = 1; i <= cascade.p; ++i) {
    const double r = (cascade.projection(i) * (f_xi - f_bar)).norm();
    sum += std::pow(r, 1.0 / i);
  }
  return sum;
}

std::optional<double> fit_order(const std::vector<double>& errors, double floor) {
  std::vector<std::pair<double, double>> pairs;
  for (size_t k = 0; k + 1 < errors.size(); ++k) {
    if (errors[k] > floor && errors[k + 1] > floor) {
      pairs.emplace_back(std::log(errors[k]), std::log(errors[k + 1]));
    }
  }
  if (pairs.size() > 3) pairs.erase(pairs.begin(), pairs.end() - 3);
  if (pairs.size() < 2) return std::nullopt;
  double mx = 0.0, my = 0.0;
  for (auto [a, b] : pairs) {
    mx += a;
    my += b;
  }
  mx /= static_cast<double>(pairs.size());
  my /= static_cast<double>(pairs.size());
  double sxx = 0.0, sxy = 0.0;
  for (auto [a, b] : pairs) {
    sxx += (a - mx) * (a - mx);
    sxy += (a - mx) * (b - my);
  }
  if (sxx == 0.0) return std::nullopt;
  return sxy / sxx;
}

}  // namespace pfactor
