#include "pfactor/cli.hpp"

#include <chrono>
#include <cmath>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <set>
#include <sstream>

#include <fmt/format.h>

#include "pfactor/errors.hpp"
#include "pfactor/interpolation.hpp"
#include "pfactor/kkt.hpp"
#include "pfactor/optimality.hpp"
#include "pfactor/problem_io.hpp"
#include "pfactor/report.hpp"
#include "pfactor/sampling.hpp"

namespace pfactor::cli {

namespace {

using nlohmann::json;
namespace fs = std::filesystem;

constexpr const char* kVersion = "0.1.0";
constexpr int kAnalyzeGrid = 360;
constexpr int kAnalyzeSphereSamples = 256;
const std::vector<double> kDefaultSweep = {1e-1, 1e-2, 1e-3, 1e-4};

const std::map<std::string, std::set<std::string>>& allowed_options() {
  static const std::map<std::string, std::set<std::string>> table = {
      {"analyze", {"p", "h", "x0", "tol", "seed", "out", "convention", "samples"}},
      {"solve", {"p", "h", "x0", "tol", "out", "max_iters", "normalize_h"}},
      {"kkt", {"x0", "tol", "out", "max_iters", "reestimate", "theta"}},
      {"optimality", {"h", "x0", "tol", "seed", "out", "convention", "samples"}},
      {"cone", {"x0", "tol", "seed", "out", "samples"}},
      {"interp", {"p", "h", "x0", "out", "n", "eps"}},
      {"certify", {"h", "x0", "seed", "out", "samples", "eps", "omega", "nu", "convention"}},
  };
  return table;
}

class Options {
 public:
  explicit Options(const std::map<std::string, std::string>& raw) : raw_(raw) {}

  bool has(const std::string& k) const { return raw_.count(k) > 0; }

  const std::string& text(const std::string& k) const { return raw_.at(k); }

  double real(const std::string& k, double fallback) const {
    if (!has(k)) return fallback;
    const std::string& s = text(k);
    size_t pos = 0;
    double v = 0.0;
    try {
      v = std::stod(s, &pos);
    } catch (const std::exception&) {
      throw ParseError(fmt::format("--{} expects a number, got '{}'", k, s));
    }
    if (pos != s.size()) throw ParseError(fmt::format("--{} expects a number, got '{}'", k, s));
    if (!std::isfinite(v)) throw NonFiniteValue(fmt::format("--{} is not finite", k));
    return v;
  }

  double required_real(const std::string& k) const {
    if (!has(k)) throw InputError(fmt::format("--{} is required", k));
    return real(k, 0.0);
  }

  long long integer(const std::string& k, long long fallback) const {
    if (!has(k)) return fallback;
    const std::string& s = text(k);
    size_t pos = 0;
    long long v = 0;
    try {
      v = std::stoll(s, &pos);
    } catch (const std::exception&) {
      throw ParseError(fmt::format("--{} expects an integer, got '{}'", k, s));
    }
    if (pos != s.size()) throw ParseError(fmt::format("--{} expects an integer, got '{}'", k, s));
    return v;
  }

  bool flag(const std::string& k, bool fallback) const {
    if (!has(k)) return fallback;
    const std::string& s = text(k);
    if (s == "true" || s == "1") return true;
    if (s == "false" || s == "0") return false;
    throw ParseError(fmt::format("--{} expects true or false, got '{}'", k, s));
  }

  std::optional<Vector> vec(const std::string& k, int expected = -1) const {
    if (!has(k)) return std::nullopt;
    json j;
    try {
      j = json::parse(text(k));
    } catch (const json::parse_error&) {
      throw ParseError(fmt::format("--{} expects a JSON array, got '{}'", k, text(k)));
    }
    return parse_vector(j, "--" + k, expected);
  }

  std::uint64_t seed() const {
    if (!has("seed")) throw InputError("--seed is required for sampling commands");
    const long long s = integer("seed", 0);
    if (s < 0) throw ParseError("--seed must be nonnegative");
    return static_cast<std::uint64_t>(s);
  }

 private:
  const std::map<std::string, std::string>& raw_;
};

struct Context {
  const CommandRequest& req;
  Options opt;
  ProblemFile problem;
  fs::path out_dir;
  std::ostream& out;
};

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw InputError(fmt::format("cannot write '{}'", path.string()));
  f << text;
}

void write_json(const fs::path& path, const json& j) { write_text(path, j.dump(2) + "\n"); }

Vector point_from(const Context& ctx, int n, const std::string& what) {
  if (auto v = ctx.opt.vec("x0", n)) return *v;
  if (ctx.problem.reference_point) {
    if (ctx.problem.reference_point->size() != n) {
      throw DimensionMismatch(fmt::format("reference_point must have {} entries", n));
    }
    return *ctx.problem.reference_point;
  }
  throw InputError(fmt::format("{} needs --x0 or a reference_point in the problem file", what));
}

Convention convention_from(const Options& opt, Convention fallback) {
  if (!opt.has("convention")) return fallback;
  try {
    return parse_convention(opt.text("convention"));
  } catch (const Error&) {
    throw ParseError(fmt::format("--convention expects plain or factorial, got '{}'",
                                 opt.text("convention")));
  }
}

int positive_int(const Options& opt, const std::string& k, long long fallback) {
  const long long v = opt.integer(k, fallback);
  if (v < 1 || v > 100000000) throw InputError(fmt::format("--{} must be a positive integer", k));
  return static_cast<int>(v);
}

json psi_for(const SubspaceCascade& c, const Vector& h, Convention conv) {
  json j = report::factor_operator(assemble_psi(c, h, conv));
  j["verdict"] = report::verdict(p_regular_along(c, h, conv));
  j["h_p_member"] = h_p_membership(c, h);
  return j;
}

/// Lines through the origin in R^2 along which Psi_p(h) is not surjective,
/// located by golden-section refinement of sigma_min between grid angles.
std::vector<Vector> singular_lines(const SubspaceCascade& c, Convention conv, int grid) {
  auto dir = [](double t) {
    Vector h(2);
    h << std::cos(t), std::sin(t);
    return h;
  };
  auto smin = [&](double t) { return assemble_psi(c, dir(t), conv).sigma_min; };
  const double step = std::numbers::pi / grid;
  std::vector<double> s(static_cast<size_t>(grid));
  for (int k = 0; k < grid; ++k) s[static_cast<size_t>(k)] = smin(k * step);
  std::vector<Vector> lines;
  for (int k = 0; k < grid; ++k) {
    const double prev = s[static_cast<size_t>((k + grid - 1) % grid)];
    const double next = s[static_cast<size_t>((k + 1) % grid)];
    const double cur = s[static_cast<size_t>(k)];
    if (!(cur <= prev && cur < next)) continue;
    double lo = (k - 1) * step;
    double hi = (k + 1) * step;
    const double g = (std::sqrt(5.0) - 1.0) / 2.0;
    for (int it = 0; it < 200 && hi - lo > 1e-15; ++it) {
      const double a = hi - g * (hi - lo);
      const double b = lo + g * (hi - lo);
      if (smin(a) < smin(b)) {
        hi = b;
      } else {
        lo = a;
      }
    }
    const Vector h = dir(0.5 * (lo + hi));
    if (!p_regular_along(c, h, conv).regular) {
      Vector u = h;
      if (u(0) < 0 || (u(0) == 0 && u(1) < 0)) u = -u;
      lines.push_back(u);
    }
  }
  return lines;
}

std::string vec_text(const Vector& v) {
  std::string s = "(";
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    s += fmt::format("{}{:.6g}", i ? ", " : "", std::abs(v(i)) < 1e-12 ? 0.0 : v(i));
  }
  return s + ")";
}

int cmd_analyze(Context& ctx) {
  const PolynomialMap& f = ctx.problem.equations_required();
  const Vector x_bar = point_from(ctx, f.n_in(), "analyze");
  const int p_max = positive_int(ctx.opt, "p", kDefaultPMax);
  const double rel_tol = ctx.opt.real("tol", kDefaultRankTol);
  const Convention conv = convention_from(ctx.opt, Convention::plain);
  const SubspaceCascade c = minimal_cascade(f, x_bar, p_max, rel_tol);

  json j;
  j["problem"] = ctx.problem.name;
  j["x_bar"] = report::vector(x_bar);
  const RankProfile& jac = c.profiles.front();
  j["jacobian"] = {{"rank", jac.rank},
                   {"m", f.n_out()},
                   {"n", f.n_in()},
                   {"singular_values", report::vector(jac.singular_values)}};
  j["regular"] = c.p == 1;
  j["p"] = c.p;
  j["convention"] = to_string(conv);
  j["cascade"] = report::cascade(c);

  json sweep;
  const int n = f.n_in();
  std::vector<Vector> dirs;
  if (n == 1) {
    dirs = {Vector::Ones(1)};
    sweep["kind"] = "unit";
  } else if (n == 2) {
    dirs = circle_grid(kAnalyzeGrid);
    sweep["kind"] = "circle_grid";
  } else {
    dirs = sphere_points(n, positive_int(ctx.opt, "samples", kAnalyzeSphereSamples),
                         ctx.opt.seed());
    sweep["kind"] = "sphere_samples";
  }
  json entries = json::array();
  int regular_count = 0;
  for (const Vector& h : dirs) {
    const RegularityVerdict v = p_regular_along(c, h, conv);
    regular_count += v.regular ? 1 : 0;
    entries.push_back({{"h", report::vector(h)},
                       {"regular", v.regular},
                       {"sigma_min", report::number(v.sigma_min)},
                       {"h_p_member", h_p_membership(c, h)}});
  }
  sweep["count"] = static_cast<int>(dirs.size());
  sweep["regular_count"] = regular_count;
  sweep["entries"] = entries;

  std::string statement;
  if (c.p == 1) {
    statement = "regular: F'(x) is surjective";
  } else if (n == 2) {
    const std::vector<Vector> lines = singular_lines(c, conv, kAnalyzeGrid / 2);
    json lj = json::array();
    for (const auto& l : lines) lj.push_back(report::vector(l));
    sweep["singular_lines"] = lj;
    if (regular_count == 0) {
      statement = fmt::format("not {}-regular along any sampled h", c.p);
    } else if (lines.empty()) {
      statement = fmt::format("{}-regular along every h != 0", c.p);
    } else {
      statement = fmt::format("{}-regular along h iff h is off", c.p);
      for (size_t i = 0; i < lines.size(); ++i) {
        statement += fmt::format("{} span{{{}}}", i ? " and" : "", vec_text(lines[i]));
      }
    }
  } else {
    statement = fmt::format("{}-regular along {} of {} sampled directions", c.p, regular_count,
                            dirs.size());
  }
  j["h_sweep"] = sweep;
  j["statement"] = statement;
  if (auto h = ctx.opt.vec("h", n)) j["h"] = psi_for(c, *h, conv);

  write_json(ctx.out_dir / "analysis.json", j);
  ctx.out << statement << '\n';
  return kExitOk;
}

NewtonOptions newton_options(const Options& opt) {
  NewtonOptions o;
  o.tol = opt.real("tol", o.tol);
  if (!(o.tol > 0.0)) throw InputError("--tol must be positive");
  o.max_iters = positive_int(opt, "max_iters", o.max_iters);
  return o;
}

int finish_trace(Context& ctx, const IterationTrace& t, json summary) {
  std::ostringstream csv;
  report::write_trace_csv(csv, t);
  write_text(ctx.out_dir / "trace.csv", csv.str());
  write_json(ctx.out_dir / "summary.json", summary);
  ctx.out << fmt::format("{}: {} after {} iterations, residual {:.3e}\n", t.method,
                         to_string(t.termination), t.steps.size() - 1, t.final_residual());
  return t.termination == Termination::singular_breakdown ? kExitBreakdown : kExitOk;
}

int cmd_solve(Context& ctx) {
  const PolynomialMap& f = ctx.problem.equations_required();
  const int n = f.n_in();
  const auto x0 = ctx.opt.vec("x0", n);
  if (!x0) throw InputError("solve needs --x0");
  NewtonOptions nopt = newton_options(ctx.opt);
  if (ctx.problem.reference_point) {
    if (ctx.problem.reference_point->size() != n) {
      throw DimensionMismatch(fmt::format("reference_point must have {} entries", n));
    }
    nopt.true_root = ctx.problem.reference_point;
  }
  const int p = positive_int(ctx.opt, "p", 1);
  IterationTrace t;
  json summary;
  summary["problem"] = ctx.problem.name;
  summary["x0"] = report::vector(*x0);
  if (p == 1) {
    t = newton_classical(f, *x0, nopt);
  } else {
    FactorNewtonConfig cfg;
    const auto h = ctx.opt.vec("h", n);
    if (!h) throw InputError("solve with p >= 2 needs --h");
    cfg.h = *h;
    cfg.p = p;
    cfg.normalize_h = ctx.opt.flag("normalize_h", true);
    cfg.newton = nopt;
    cfg.projection_point = ctx.problem.reference_point;
    t = newton_p_factor(f, cfg, *x0);
    summary["projection_point"] = report::vector(cfg.projection_point.value_or(*x0));
    summary["h"] = report::vector(cfg.normalize_h ? Vector(h->normalized()) : *h);
  }
  summary["trace"] = report::trace_summary(t);
  return finish_trace(ctx, t, summary);
}

int cmd_kkt(Context& ctx) {
  const ObjectiveProblem op = ctx.problem.objective_problem();
  if (!op.inequality_constraints) throw InputError("kkt needs inequalities");
  KKTSystem kkt = assemble_kkt(op);
  const int nw = kkt.n + kkt.m;
  const auto w0 = ctx.opt.vec("x0", nw);
  if (!w0) throw InputError(fmt::format("kkt needs --x0 with n + m = {} entries", nw));
  KKTOptions o;
  o.newton = newton_options(ctx.opt);
  o.reestimate = ctx.opt.flag("reestimate", false);
  o.theta_scale = ctx.opt.real("theta", o.theta_scale);
  json summary;
  summary["problem"] = ctx.problem.name;
  summary["x0"] = report::vector(*w0);
  if (ctx.problem.reference_point) {
    if (ctx.problem.reference_point->size() != nw) {
      throw DimensionMismatch(fmt::format("kkt reference_point must have n + m = {} entries", nw));
    }
    set_reference_point(kkt, *ctx.problem.reference_point, o.theta_scale);
    o.newton.true_root = ctx.problem.reference_point;
    summary["reference_point"] = report::vector(*ctx.problem.reference_point);
  }
  const KKTResult r = solve_kkt_2factor(kkt, *w0, o);
  summary["kkt"] = report::kkt(r);
  summary["h"] = report::vector(structural_direction(kkt, r.final_sets));
  return finish_trace(ctx, r.trace, summary);
}

int cmd_optimality(Context& ctx) {
  const ObjectiveProblem op = ctx.problem.objective_problem();
  const int n = op.n();
  const Vector x_bar = point_from(ctx, n, "optimality");
  const auto h = ctx.opt.vec("h", n);
  if (!h) throw InputError("optimality needs --h");
  OptimalityOptions o;
  o.tol = ctx.opt.real("tol", o.tol);
  o.convention = convention_from(ctx.opt, o.convention);
  o.cone.seed = ctx.opt.seed();
  o.cone.samples = positive_int(ctx.opt, "samples", o.cone.samples);
  std::optional<SubspaceCascade> c;
  if (op.equality_constraints) c = minimal_cascade(*op.equality_constraints, x_bar);
  const PFactorLagrangeReport r = check_optimality(op, c ? &*c : nullptr, x_bar, *h, o);
  json j = report::optimality(r);
  j["problem"] = ctx.problem.name;
  j["x_bar"] = report::vector(x_bar);
  write_json(ctx.out_dir / "optimality.json", j);
  ctx.out << fmt::format("necessary: {}, sufficient: {}, alpha = {:.6g}\n", r.necessary_holds,
                         r.sufficient_holds, r.alpha);
  return kExitOk;
}

int cmd_cone(Context& ctx) {
  const PolynomialMap& f = ctx.problem.equations_required();
  const Vector x_bar = point_from(ctx, f.n_in(), "cone");
  ConeOptions o;
  o.seed = ctx.opt.seed();
  o.samples = positive_int(ctx.opt, "samples", o.samples);
  o.tol = ctx.opt.real("tol", o.tol);
  const SubspaceCascade c = minimal_cascade(f, x_bar);
  const TangentConeQuery q = tangent_cone_sample(c, o);
  json j = report::cone(q);
  j["problem"] = ctx.problem.name;
  write_json(ctx.out_dir / "cone.json", j);
  ctx.out << fmt::format("tangent cone: {} ({} rays)\n", to_string(q.kind), q.rays.size());
  return kExitOk;
}

int cmd_interp(Context& ctx) {
  const PolynomialMap& f = ctx.problem.equations_required();
  if (f.n_in() != 1 || f.n_out() != 1) {
    throw DimensionMismatch("interp needs a single equation in one variable");
  }
  const double x_bar = point_from(ctx, 1, "interp")(0);
  const int p = ctx.opt.has("p") ? positive_int(ctx.opt, "p", 1)
                                 : root_multiplicity(f.component(0), x_bar);
  const double h = ctx.opt.has("h") ? (*ctx.opt.vec("h", 1))(0) : 1.0;
  const int n = positive_int(ctx.opt, "n", 1);
  std::vector<double> eps = kDefaultSweep;
  if (auto e = ctx.opt.vec("eps")) eps.assign(e->data(), e->data() + e->size());
  const PFactorScalarFunction fbar(f.component(0), p, h);
  const std::vector<SweepRow> rows = interpolation_sweep(fbar, x_bar, eps, n);

  std::ostringstream csv;
  report::write_sweep_csv(csv, rows);
  write_text(ctx.out_dir / "sweep.csv", csv.str());
  json jr = json::array();
  for (const auto& r : rows) {
    jr.push_back({{"eps", r.eps},
                  {"classical_error", report::number(r.classical_error)},
                  {"pfactor_error", report::number(r.pfactor_error)}});
  }
  write_json(ctx.out_dir / "interp.json", {{"problem", ctx.problem.name},
                                           {"x_bar", x_bar},
                                           {"p", p},
                                           {"h", h},
                                           {"n", n},
                                           {"corrected", polynomial_to_json(fbar.corrected())},
                                           {"rows", jr}});
  ctx.out << fmt::format("interpolation sweep over {} steps, p = {}\n", rows.size(), p);
  return kExitOk;
}

int cmd_certify(Context& ctx) {
  const PolynomialMap& f = ctx.problem.equations_required();
  const int n = f.n_in();
  const Vector x0 = point_from(ctx, n, "certify");
  const std::uint64_t seed = ctx.opt.seed();
  const int samples = positive_int(ctx.opt, "samples", kDefaultCertificateSamples);
  ExistenceCertificate cert;
  if (auto h = ctx.opt.vec("h", n)) {
    const double omega = ctx.opt.required_real("omega");
    const double nu = ctx.opt.required_real("nu");
    const SubspaceCascade c = minimal_cascade(f, x0);
    cert = existence_certificate_singular(c, f, *h, omega, nu, samples, seed,
                                          convention_from(ctx.opt, Convention::plain));
  } else {
    cert = existence_certificate_regular(f, x0, ctx.opt.required_real("eps"), samples, seed);
  }
  json j = report::certificate(cert);
  j["problem"] = ctx.problem.name;
  write_json(ctx.out_dir / "certificate.json", j);
  ctx.out << fmt::format("{} certificate: {}\n", cert.kind,
                         cert.certified ? "certified" : "not certified");
  return kExitOk;
}

std::string utc_timestamp() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

}  // namespace

json default_config() {
  const NewtonOptions newton;
  const ConeOptions cone;
  const OptimalityOptions optimality;
  const KKTOptions kkt;
  return {
      {"p_max", kDefaultPMax},
      {"rank_rel_tol", kDefaultRankTol},
      {"newton",
       {{"tol", newton.tol},
        {"max_iters", newton.max_iters},
        {"blowup_factor", newton.blowup_factor},
        {"divergence_radius", "1e6 * (1 + |x0|)"}}},
      {"factor_newton", {{"normalize_h", true}, {"damping", 1.0}}},
      {"analyze", {{"grid", kAnalyzeGrid}, {"sphere_samples", kAnalyzeSphereSamples}}},
      {"cone",
       {{"samples", cone.samples},
        {"tol", cone.tol},
        {"max_corrector_steps", cone.max_corrector_steps}}},
      {"optimality",
       {{"tol", optimality.tol},
        {"convention", to_string(optimality.convention)},
        {"subspace_samples", optimality.subspace_samples}}},
      {"kkt", {{"theta_scale", kkt.theta_scale}, {"stability_window", kkt.stability_window}}},
      {"certificate",
       {{"samples", kDefaultCertificateSamples},
        {"sup_inflation", kSupInflation},
        {"convention", "plain"}}},
      {"interp", {{"n", 1}, {"h", 1.0}, {"eps", kDefaultSweep}, {"bisection_tol", 1e-14}}},
      {"output_dir", "pfactor_out"},
  };
}

int run(const CommandRequest& request, std::ostream& out, std::ostream& err) {
  try {
    const auto& table = allowed_options();
    const auto it = table.find(request.command);
    if (it == table.end()) throw ParseError(fmt::format("unknown command '{}'", request.command));
    for (const auto& [key, value] : request.options) {
      if (!it->second.count(key)) {
        throw ParseError(fmt::format("option --{} does not apply to '{}'", key, request.command));
      }
    }
    if (request.problem_path.empty()) throw InputError("--problem is required");
    Context ctx{request, Options(request.options), load_problem(request.problem_path),
                fs::path(request.options.count("out") ? request.options.at("out")
                                                      : std::string("pfactor_out")),
                out};
    fs::create_directories(ctx.out_dir);
    write_json(ctx.out_dir / "metadata.json", {{"command", request.command},
                                               {"problem_path", request.problem_path},
                                               {"timestamp", utc_timestamp()},
                                               {"version", kVersion}});
    const std::string& c = request.command;
    if (c == "analyze") return cmd_analyze(ctx);
    if (c == "solve") return cmd_solve(ctx);
    if (c == "kkt") return cmd_kkt(ctx);
    if (c == "optimality") return cmd_optimality(ctx);
    if (c == "cone") return cmd_cone(ctx);
    if (c == "interp") return cmd_interp(ctx);
    return cmd_certify(ctx);
  } catch (const InputError& e) {
    err << "input error: " << e.what() << '\n';
    return kExitInput;
  } catch (const PreconditionViolated& e) {
    err << "precondition violated: " << e.what() << '\n';
    return kExitPrecondition;
  } catch (const SolverBreakdown& e) {
    err << "solver breakdown: " << e.what() << '\n';
    return kExitBreakdown;
  } catch (const fs::filesystem_error& e) {
    err << "input error: " << e.what() << '\n';
    return kExitInput;
  } catch (const std::exception& e) {
    err << "internal error: " << e.what() << '\n';
    return kExitInternal;
  }
}

}  // namespace pfactor::cli
