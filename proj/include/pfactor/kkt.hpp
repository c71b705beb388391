#pragma once

#include <optional>
#include <vector>

#include "pfactor/solvers.hpp"

namespace pfactor {

struct IndexSets {
  std::vector<int> active;    // I
  std::vector<int> weak;      // I_0
  std::vector<int> strong;    // I_+
  std::vector<int> inactive;  // N

  friend bool operator==(const IndexSets&, const IndexSets&) = default;
};

/// G(x, lambda) = (grad f + 1/2 sum lambda_i^2 grad g_i ; lambda_i g_i(x)) for
/// min f s.t. g(x) <= 0, as a map on w = (x, lambda) in R^{n+m}.
struct KKTSystem {
  ObjectiveProblem problem;
  int n = 0;
  int m = 0;
  PolynomialMap g_map;  // inequality constraints g(x) <= 0
  PolynomialMap map;    // G
  std::optional<Vector> reference_point;
  IndexSets sets;
  Vector h;  // zeros except ones on the lambda entries of I_0
};

KKTSystem assemble_kkt(const ObjectiveProblem& problem);

/// I_0 = {|lambda_i| <= theta, |g_i(x)| <= theta}, theta = theta_scale (1 + ||w||).
IndexSets estimate_index_sets(const KKTSystem& kkt, const Vector& w, double theta_scale = 1e-4);

/// Fixes the reference point, index sets and the structural direction h.
void set_reference_point(KKTSystem& kkt, const Vector& w_ref, double theta_scale = 1e-4);

Vector structural_direction(const KKTSystem& kkt, const IndexSets& sets);

/// Phi'(w) = G'(w) + G''(w)[h].
Matrix two_factor_matrix(const KKTSystem& kkt, const Vector& w, const Vector& h);

struct KKTOptions {
  NewtonOptions newton;
  bool reestimate = false;
  int stability_window = 5;
  double theta_scale = 1e-4;
};

struct KKTResult {
  IterationTrace trace;
  IndexSets final_sets;
  double sigma_min_jacobian = 0.0;    // G' at the final iterate
  double sigma_min_two_factor = 0.0;  // Phi' at the final iterate
  bool jacobian_singular = false;     // strict complementarity fails there
};

/// w^{k+1} = w^k - (G' + G''h)^{-1} (G + G'h). When kkt has no reference
/// point the index sets are estimated at w0.
KKTResult solve_kkt_2factor(KKTSystem kkt, const Vector& w0, const KKTOptions& options = {});

/// [[V, Q, 0], [Q^T, 0, 0], [0, 0, D_N]].
Matrix bordered_matrix(const Matrix& v, const Matrix& q, const Vector& d_n);

/// Q has independent columns and V is positive definite on Ker Q^T.
bool bordered_hypotheses_hold(const Matrix& v, const Matrix& q, double tol = 1e-10);

/// V, Q and D_N of the bordered form at a KKT point w̄ = (x̄, lambdā),
/// with lambda ordered (I_0, I_+, N).
struct BorderedBlocks {
  Matrix v;
  Matrix q;
  Vector d_n;
  std::vector<int> order;
};
BorderedBlocks bordered_blocks(const KKTSystem& kkt, const Vector& w_bar);

}  // namespace pfactor
