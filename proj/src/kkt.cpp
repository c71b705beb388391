#include "pfactor/kkt.hpp"

#include <algorithm>

#include <fmt/format.h>

#include "pfactor/errors.hpp"
#include "pfactor/linalg.hpp"

namespace pfactor {

namespace {

PolynomialMap build_g(const KKTSystem& kkt) {
  const int n = kkt.n;
  const int m = kkt.m;
  const int nw = n + m;
  std::vector<Polynomial> comps;
  comps.reserve(static_cast<size_t>(nw));
  const PolynomialMap grad_f = gradient(kkt.problem.objective.component(0));
  for (int i = 0; i < n; ++i) {
    Polynomial row = grad_f.component(i).embed(nw);
    for (int j = 0; j < m; ++j) {
      const Polynomial lam = Polynomial::variable(nw, n + j);
      row += 0.5 * (lam * lam) * kkt.g_map.component(j).partial(i).embed(nw);
    }
    comps.push_back(std::move(row));
  }
  for (int j = 0; j < m; ++j) {
    comps.push_back(Polynomial::variable(nw, n + j) * kkt.g_map.component(j).embed(nw));
  }
  return PolynomialMap(nw, std::move(comps));
}

void check_w(const KKTSystem& kkt, const Vector& w) {
  if (w.size() != kkt.n + kkt.m) {
    throw DimensionMismatch(
        fmt::format("w has dimension {}, expected n + m = {}", w.size(), kkt.n + kkt.m));
  }
}

}  // namespace

KKTSystem assemble_kkt(const ObjectiveProblem& problem) {
  problem.validate();
  KKTSystem kkt;
  kkt.problem = problem;
  kkt.n = problem.n();
  kkt.g_map = problem.inequality_constraints.value_or(PolynomialMap(kkt.n, {}));
  kkt.m = kkt.g_map.n_out();
  kkt.map = build_g(kkt);
  kkt.h = Vector::Zero(kkt.n + kkt.m);
  return kkt;
}

IndexSets estimate_index_sets(const KKTSystem& kkt, const Vector& w, double theta_scale) {
  check_w(kkt, w);
  const double theta = theta_scale * (1.0 + w.norm());
  const Vector g = evaluate(kkt.g_map, w.head(kkt.n));
  IndexSets s;
  for (int j = 0; j < kkt.m; ++j) {
    if (std::abs(g(j)) <= theta) {
      s.active.push_back(j);
      (std::abs(w(kkt.n + j)) <= theta ? s.weak : s.strong).push_back(j);
    } else {
      s.inactive.push_back(j);
    }
  }
  return s;
}

Vector structural_direction(const KKTSystem& kkt, const IndexSets& sets) {
  Vector h = Vector::Zero(kkt.n + kkt.m);
  for (int j : sets.weak) h(kkt.n + j) = 1.0;
  return h;
}

void set_reference_point(KKTSystem& kkt, const Vector& w_ref, double theta_scale) {
  kkt.sets = estimate_index_sets(kkt, w_ref, theta_scale);
  kkt.reference_point = w_ref;
  kkt.h = structural_direction(kkt, kkt.sets);
}

Matrix two_factor_matrix(const KKTSystem& kkt, const Vector& w, const Vector& h) {
  check_w(kkt, w);
  Matrix a = jacobian(kkt.map, w);
  if (h.norm() > 0.0) a += derivative_tensor(kkt.map, w, 2).contract_to_matrix(h);
  return a;
}

KKTResult solve_kkt_2factor(KKTSystem kkt, const Vector& w0, const KKTOptions& options) {
  check_w(kkt, w0);
  if (!kkt.reference_point) set_reference_point(kkt, w0, options.theta_scale);

  int step = 0;
  LinearizedSystem sys;
  if (options.reestimate) {
    sys.before_step = [&](const Vector& w) {
      const IndexSets s = estimate_index_sets(kkt, w, options.theta_scale);
      if (!(s == kkt.sets)) {
        if (step >= options.stability_window) {
          throw WeaklyActiveSetEstimateUnstable(fmt::format(
              "index sets changed at iterate {} after the stability window of {}", step,
              options.stability_window));
        }
        kkt.sets = s;
        kkt.h = structural_direction(kkt, s);
      }
      ++step;
    };
  }
  sys.matrix = [&](const Vector& w) { return two_factor_matrix(kkt, w, kkt.h); };
  sys.rhs = [&](const Vector& w) {
    return Vector(evaluate(kkt.map, w) + jacobian(kkt.map, w) * kkt.h);
  };
  sys.rhs_magnitude = [&](const Vector& w) {
    return evaluate(kkt.map, w).norm() + (jacobian(kkt.map, w) * kkt.h).norm();
  };

  KKTResult out;
  out.trace = newton_iterate(kkt.map, w0, options.newton, sys, true);
  out.trace.method = "kkt_2factor";
  out.trace.p = kkt.sets.weak.empty() ? 1 : 2;
  out.final_sets = kkt.sets;
  const Vector& wf = out.trace.final_point();
  if (wf.allFinite()) {
    const Matrix gj = jacobian(kkt.map, wf);
    const Vector sv = Eigen::JacobiSVD<Matrix>(gj).singularValues();
    out.sigma_min_jacobian = sv(sv.size() - 1);
    out.jacobian_singular = out.sigma_min_jacobian <= 1e-8 * std::max(1.0, sv(0));
    out.sigma_min_two_factor = sigma_min_rows(two_factor_matrix(kkt, wf, kkt.h));
  }
  return out;
}

Matrix bordered_matrix(const Matrix& v, const Matrix& q, const Vector& d_n) {
  const Eigen::Index n = v.rows();
  const Eigen::Index s = q.cols();
  const Eigen::Index r = d_n.size();
  if (v.cols() != n || (s > 0 && q.rows() != n)) throw DimensionMismatch("V and Q disagree");
  Matrix a = Matrix::Zero(n + s + r, n + s + r);
  a.topLeftCorner(n, n) = v;
  if (s > 0) {
    a.block(0, n, n, s) = q;
    a.block(n, 0, s, n) = q.transpose();
  }
  if (r > 0) a.bottomRightCorner(r, r) = d_n.asDiagonal();
  return a;
}

bool bordered_hypotheses_hold(const Matrix& v, const Matrix& q, double tol) {
  const Eigen::Index n = v.rows();
  Matrix k;
  if (q.cols() == 0) {
    k = Matrix::Identity(n, n);
  } else {
    const RankProfile prof = rank_profile(q.transpose());
    if (prof.rank != q.cols()) return false;
    k = prof.kernel_basis;
  }
  if (k.cols() == 0) return true;
  const Matrix reduced = k.transpose() * (0.5 * (v + v.transpose())) * k;
  return Eigen::SelfAdjointEigenSolver<Matrix>(reduced).eigenvalues().minCoeff() > tol;
}

BorderedBlocks bordered_blocks(const KKTSystem& kkt, const Vector& w_bar) {
  check_w(kkt, w_bar);
  const int n = kkt.n;
  const IndexSets sets = estimate_index_sets(kkt, w_bar);
  const Vector x = w_bar.head(n);
  const Matrix gj = jacobian(kkt.map, w_bar);
  const Matrix dg = kkt.m > 0 ? jacobian(kkt.g_map, x) : Matrix(0, n);
  const Vector g = evaluate(kkt.g_map, x);

  BorderedBlocks b;
  b.v = gj.topLeftCorner(n, n);
  b.q.resize(n, static_cast<Eigen::Index>(sets.weak.size() + sets.strong.size()));
  Eigen::Index c = 0;
  for (int j : sets.weak) b.q.col(c++) = dg.row(j).transpose();
  for (int j : sets.strong) b.q.col(c++) = w_bar(n + j) * dg.row(j).transpose();
  b.d_n.resize(static_cast<Eigen::Index>(sets.inactive.size()));
  for (size_t i = 0; i < sets.inactive.size(); ++i) {
    b.d_n(static_cast<Eigen::Index>(i)) = g(sets.inactive[i]);
  }
  b.order = sets.weak;
  b.order.insert(b.order.end(), sets.strong.begin(), sets.strong.end());
  b.order.insert(b.order.end(), sets.inactive.begin(), sets.inactive.end());
  return b;
}

}  // namespace pfactor
