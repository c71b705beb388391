#include "pfactor/interpolation.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>

#include "pfactor/errors.hpp"

namespace pfactor {

double InterpolationTable::step() const {
  return nodes.size() < 2 ? 0.0 : nodes[1] - nodes[0];
}

double InterpolationTable::evaluate(double x) const {
  // Horner on the nested Newton form.
  double acc = 0.0;
  for (int k = degree(); k >= 0; --k) {
    acc = acc * (x - nodes[static_cast<size_t>(k)]) + coefficients[static_cast<size_t>(k)];
  }
  return acc;
}

double InterpolationTable::derivative(double x) const {
  double acc = 0.0;
  double d = 0.0;
  for (int k = degree(); k >= 0; --k) {
    d = d * (x - nodes[static_cast<size_t>(k)]) + acc;
    acc = acc * (x - nodes[static_cast<size_t>(k)]) + coefficients[static_cast<size_t>(k)];
  }
  return d;
}

double InterpolationTable::basis(int k, double x) const {
  double w = 1.0;
  for (int i = 0; i < k; ++i) w *= x - nodes[static_cast<size_t>(i)];
  return w;
}

std::vector<double> divided_differences(const std::vector<double>& nodes,
                                        const std::vector<double>& values) {
  if (nodes.size() != values.size() || nodes.empty()) {
    throw DimensionMismatch("nodes and values must be nonempty and of equal length");
  }
  std::vector<double> table = values;
  std::vector<double> alpha{table[0]};
  const size_t n = nodes.size();
  for (size_t level = 1; level < n; ++level) {
    for (size_t i = 0; i + level < n; ++i) {
      const double dx = nodes[i + level] - nodes[i];
      if (dx == 0.0) throw InputError("divided differences need distinct nodes");
      table[i] = (table[i + 1] - table[i]) / dx;
    }
    alpha.push_back(table[0]);
  }
  return alpha;
}

InterpolationTable interpolate_at(const ScalarFunction& f, std::vector<double> nodes) {
  InterpolationTable t;
  t.values.reserve(nodes.size());
  for (double x : nodes) {
    const double y = f(x);
    if (!std::isfinite(y)) throw NonFiniteValue(fmt::format("f({}) is not finite", x));
    t.values.push_back(y);
  }
  t.nodes = std::move(nodes);
  t.coefficients = divided_differences(t.nodes, t.values);
  return t;
}

InterpolationTable newton_interpolate(const ScalarFunction& f, double a, double b, int n) {
  if (!(b > a)) throw InputError("interpolation interval needs b > a");
  if (n < 1) throw InputError("interpolation degree must be at least 1");
  std::vector<double> nodes;
  for (int k = 0; k <= n; ++k) nodes.push_back(k == n ? b : a + (b - a) * k / n);
  return interpolate_at(f, std::move(nodes));
}

PFactorScalarFunction::PFactorScalarFunction(Polynomial f, int p, double h)
    : f_(std::move(f)), p_(p), h_(h), bar_(1) {
  if (f_.n_vars() != 1) throw DimensionMismatch("p-factor scalar function needs one variable");
  if (p < 1) throw InputError("p must be at least 1");
  if (h == 0.0 || !std::isfinite(h)) throw InputError("h must be a nonzero finite number");
  Polynomial d = f_;
  double hj = 1.0;
  for (int j = 0; j < p; ++j) {
    bar_ += hj * d;
    d = d.partial(0);
    hj *= h;
  }
}

double PFactorScalarFunction::operator()(double x) const {
  const double xs[1] = {x};
  return bar_.evaluate(xs);
}

double PFactorScalarFunction::derivative(double x) const {
  const double xs[1] = {x};
  return bar_.partial(0).evaluate(xs);
}

double interpolant_root(const InterpolationTable& table, double a, double b) {
  const int cells = 64 * std::max(1, table.degree());
  auto at = [&](int k) { return k == cells ? b : a + (b - a) * k / cells; };
  double lo = a;
  double flo = table.evaluate(a);
  if (flo == 0.0) return a;
  bool found = false;
  double hi = b;
  for (int k = 1; k <= cells; ++k) {
    const double x = at(k);
    const double fx = table.evaluate(x);
    if (fx == 0.0) return x;
    if ((fx < 0.0) != (flo < 0.0)) {
      hi = x;
      found = true;
      break;
    }
    lo = x;
    flo = fx;
  }
  if (!found) {
    throw NoRootInBracket(fmt::format("interpolant has no sign change on [{}, {}]", a, b));
  }
  const double lo0 = lo;
  const double hi0 = hi;
  for (int it = 0; it < 400 && hi - lo > 1e-14; ++it) {
    const double mid = 0.5 * (lo + hi);
    const double fm = table.evaluate(mid);
    if (fm == 0.0) return mid;
    if ((fm < 0.0) == (flo < 0.0)) {
      lo = mid;
      flo = fm;
    } else {
      hi = mid;
    }
  }
  double x = 0.5 * (lo + hi);
  for (int polish = 0; polish < 2; ++polish) {
    const double d = table.derivative(x);
    if (d == 0.0 || !std::isfinite(d)) break;
    const double xn = x - table.evaluate(x) / d;
    if (!(xn >= lo0 && xn <= hi0)) break;
    x = xn;
  }
  return x;
}

InterpolationRoot classical_root_baseline(const ScalarFunction& f, double a, double b, int n) {
  InterpolationRoot r;
  r.table = newton_interpolate(f, a, b, n);
  r.x = interpolant_root(r.table, a, b);
  r.residual = std::abs(r.table.evaluate(r.x));
  return r;
}

InterpolationRoot pfactor_interpolate_root(const PFactorScalarFunction& f, double a, double b,
                                           int n) {
  return classical_root_baseline([&f](double x) { return f(x); }, a, b, n);
}

int root_multiplicity(const Polynomial& f, double x_bar, int p_max, double tol) {
  if (f.n_vars() != 1) throw DimensionMismatch("root multiplicity needs a univariate polynomial");
  const double xs[1] = {x_bar};
  const double scale = 1.0 + std::abs(x_bar);
  Polynomial d = f;
  for (int p = 0; p <= p_max; ++p) {
    if (std::abs(d.evaluate(xs)) > tol * std::pow(scale, std::max(0, f.degree() - p))) {
      if (p == 0) throw PreconditionViolated(fmt::format("{} is not a root", x_bar));
      return p;
    }
    d = d.partial(0);
  }
  throw PreconditionViolated(fmt::format("no nonzero derivative up to order {}", p_max));
}

std::vector<SweepRow> interpolation_sweep(const PFactorScalarFunction& f, double x_bar,
                                          const std::vector<double>& eps, int n) {
  const Polynomial& base = f.base();
  auto plain = [&base](double x) {
    const double v[1] = {x};
    return base.evaluate(v);
  };
  std::vector<SweepRow> rows;
  for (double e : eps) {
    if (!(e > 0.0)) throw InputError("sweep step eps must be positive");
    const double a = x_bar - e / 3.0;
    const double b = x_bar + 2.0 * e / 3.0;
    SweepRow row;
    row.eps = e;
    row.classical_error = std::abs(classical_root_baseline(plain, a, b, n).x - x_bar);
    row.pfactor_error = std::abs(pfactor_interpolate_root(f, a, b, n).x - x_bar);
    rows.push_back(row);
  }
  return rows;
}

}  // namespace pfactor
