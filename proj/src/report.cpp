#include "pfactor/report.hpp"

#include <cmath>

#include <fmt/format.h>

namespace pfactor::report {

namespace {

std::string g17(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  return fmt::format("{:.17g}", v);
}

json int_list(const std::vector<int>& v) { return json(v); }

}  // namespace

json number(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

json vector(const Vector& v) {
  json out = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(number(v(i)));
  return out;
}

json matrix(const Matrix& m) {
  json out = json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) out.push_back(vector(m.row(r).transpose()));
  return out;
}

json cascade(const SubspaceCascade& c) {
  json blocks = json::array();
  for (int i = 1; i <= c.p; ++i) {
    const RankProfile& prof = c.profiles[static_cast<size_t>(i - 1)];
    blocks.push_back({{"order", i},
                      {"dim", c.basis(i).cols()},
                      {"basis", matrix(c.basis(i))},
                      {"projection", matrix(c.projection(i))},
                      {"rank", prof.rank},
                      {"singular_values", vector(prof.singular_values)},
                      {"tolerance_used", number(prof.tolerance_used)}});
  }
  return {{"base_point", vector(c.base_point)},
          {"m", c.m()},
          {"n", c.n()},
          {"p", c.p},
          {"p_requested", c.p_requested},
          {"rel_tol", c.rel_tol},
          {"dims", int_list(c.dims())},
          {"blocks", blocks}};
}

json factor_operator(const FactorOperator& op) {
  return {{"h", vector(op.h)},
          {"matrix", matrix(op.matrix)},
          {"convention", to_string(op.convention)},
          {"singular_values", vector(op.singular_values)},
          {"sigma_min", number(op.sigma_min)},
          {"tolerance_used", number(op.tolerance_used)},
          {"surjective", op.surjective},
          {"right_inverse_norm", number(op.right_inverse_norm)}};
}

json verdict(const RegularityVerdict& v) {
  return {{"regular", v.regular},
          {"right_inverse_norm", number(v.right_inverse_norm)},
          {"sigma_min", number(v.sigma_min)},
          {"block_criterion", v.block_criterion},
          {"block_criterion_agrees", v.block_criterion_agrees}};
}

json trace_summary(const IterationTrace& t) {
  json out = {{"method", t.method},
              {"p", t.p},
              {"iterations", static_cast<int>(t.steps.size()) - 1},
              {"termination", to_string(t.termination)},
              {"final_point", vector(t.final_point())},
              {"final_residual", number(t.final_residual())},
              {"least_squares", t.least_squares}};
  out["observed_order"] = t.observed_order ? number(*t.observed_order) : json(nullptr);
  return out;
}

json certificate(const ExistenceCertificate& c) {
  json rows = json::array();
  for (const auto& r : c.conditions) {
    rows.push_back({{"name", r.name}, {"lhs", number(r.lhs)}, {"rhs", number(r.rhs)},
                    {"holds", r.holds}});
  }
  json out = {{"kind", c.kind},
              {"x0", vector(c.x0)},
              {"h", vector(c.h)},
              {"radius", number(c.radius)},
              {"nu", number(c.nu)},
              {"p", c.p},
              {"convention", to_string(c.convention)},
              {"delta", number(c.delta)},
              {"eta", number(c.eta)},
              {"c", number(c.c)},
              {"d", number(c.d)},
              {"alpha", number(c.alpha)},
              {"conditions", rows},
              {"certified", c.certified},
              {"certified_ball_radius", number(c.certified_ball_radius)},
              {"heuristic", c.heuristic},
              {"sample_count", c.sample_count},
              {"conventions_agree", c.conventions_agree}};
  out["other_convention_certified"] =
      c.other_convention_certified ? json(*c.other_convention_certified) : json(nullptr);
  return out;
}

json optimality(const PFactorLagrangeReport& r) {
  json blocks = json::array();
  for (size_t i = 0; i < r.multipliers.size(); ++i) {
    blocks.push_back({{"order", static_cast<int>(i) + 1},
                      {"ambient", vector(r.multipliers[i])},
                      {"coordinates", vector(r.multiplier_coordinates[i])}});
  }
  json samples = json::array();
  for (const auto& s : r.sufficient_quadratic_values) {
    samples.push_back({{"h", vector(s.h)},
                       {"value", number(s.value)},
                       {"margin", number(s.margin)},
                       {"stationarity_residual", number(s.stationarity_residual)},
                       {"multiplier_found", s.multiplier_found}});
  }
  return {{"h", vector(r.h)},
          {"p", r.p},
          {"convention", to_string(r.convention)},
          {"multipliers", blocks},
          {"lambda", vector(r.lambda)},
          {"stationarity_residual", number(r.stationarity_residual)},
          {"classical_residual", number(r.classical_residual)},
          {"lagrangian_hessian", matrix(r.lagrangian_hessian)},
          {"quadratic_value", number(r.quadratic_value)},
          {"sufficient_samples", samples},
          {"alpha", number(r.alpha)},
          {"cone_kind", to_string(r.cone_kind)},
          {"necessary_holds", r.necessary_holds},
          {"sufficient_holds", r.sufficient_holds}};
}

json cone(const TangentConeQuery& q) {
  json rays = json::array();
  for (size_t i = 0; i < q.rays.size(); ++i) {
    rays.push_back({{"direction", vector(q.rays[i])}, {"p_regular", bool(q.ray_p_regular[i])}});
  }
  json samples = json::array();
  for (const auto& s : q.samples) {
    samples.push_back(
        {{"direction", vector(s.direction)}, {"member", s.member}, {"p_regular", s.p_regular}});
  }
  return {{"x_bar", vector(q.x_bar)},
          {"p", q.p},
          {"tol", q.tol},
          {"kind", to_string(q.kind)},
          {"rays", rays},
          {"subspace_basis", matrix(q.subspace_basis.transpose())},
          {"samples", samples},
          {"unverified_members", q.unverified_members}};
}

json index_sets(const IndexSets& s) {
  return {{"active", int_list(s.active)},
          {"weak", int_list(s.weak)},
          {"strong", int_list(s.strong)},
          {"inactive", int_list(s.inactive)}};
}

json kkt(const KKTResult& r) {
  return {{"trace", trace_summary(r.trace)},
          {"final_sets", index_sets(r.final_sets)},
          {"sigma_min_jacobian", number(r.sigma_min_jacobian)},
          {"sigma_min_two_factor", number(r.sigma_min_two_factor)},
          {"jacobian_singular", r.jacobian_singular}};
}

std::string trace_csv_header(int n) {
  std::string h = "iter";
  for (int i = 1; i <= n; ++i) h += fmt::format(",x{}", i);
  return h + ",residual,p_residual,step_norm,sigma_min";
}

void write_trace_csv(std::ostream& out, const IterationTrace& t) {
  const int n = t.steps.empty() ? 0 : static_cast<int>(t.steps.front().x.size());
  out << trace_csv_header(n) << '\n';
  for (const auto& s : t.steps) {
    out << s.iter;
    for (Eigen::Index i = 0; i < s.x.size(); ++i) out << ',' << g17(s.x(i));
    out << ',' << g17(s.residual) << ',' << g17(s.p_residual) << ',' << g17(s.step_norm) << ','
        << g17(s.sigma_min) << '\n';
  }
}

void write_sweep_csv(std::ostream& out, const std::vector<SweepRow>& rows) {
  out << "eps,classical_error,pfactor_error\n";
  for (const auto& r : rows) {
    out << g17(r.eps) << ',' << g17(r.classical_error) << ',' << g17(r.pfactor_error) << '\n';
  }
}

}  // namespace pfactor::report
