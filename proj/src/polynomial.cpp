#include "pfactor/polynomial.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>

#include "pfactor/errors.hpp"

namespace pfactor {

namespace {

double int_power(double base, int e) {
  double result = 1.0;
  for (int i = 0; i < e; ++i) result *= base;
  return result;
}

}  // namespace

Polynomial::Polynomial(int n_vars) : n_vars_(n_vars) {
  if (n_vars < 0) throw DimensionMismatch("polynomial with negative variable count");
}

Polynomial::Polynomial(int n_vars, std::vector<Monomial> terms)
    : n_vars_(n_vars), terms_(std::move(terms)) {
  if (n_vars < 0) throw DimensionMismatch("polynomial with negative variable count");
  for (const auto& t : terms_) {
    if (static_cast<int>(t.exps.size()) != n_vars_) {
      throw DimensionMismatch(fmt::format("monomial has {} exponents, expected {}",
                                          t.exps.size(), n_vars_));
    }
    if (std::any_of(t.exps.begin(), t.exps.end(), [](int e) { return e < 0; })) {
      throw InputError("negative exponent in monomial");
    }
    if (!std::isfinite(t.coeff)) throw NonFiniteValue("non-finite polynomial coefficient");
  }
  normalize();
}

Polynomial Polynomial::constant(int n_vars, double value) {
  return Polynomial(n_vars, {Monomial{value, std::vector<int>(static_cast<size_t>(n_vars), 0)}});
}

Polynomial Polynomial::variable(int n_vars, int index) {
  if (index < 0 || index >= n_vars) throw IndexOutOfRange("variable index out of range");
  std::vector<int> e(static_cast<size_t>(n_vars), 0);
  e[static_cast<size_t>(index)] = 1;
  return Polynomial(n_vars, {Monomial{1.0, std::move(e)}});
}

void Polynomial::normalize() {
  std::sort(terms_.begin(), terms_.end(),
            [](const Monomial& a, const Monomial& b) { return a.exps < b.exps; });
  std::vector<Monomial> merged;
  merged.reserve(terms_.size());
  for (auto& t : terms_) {
    if (!merged.empty() && merged.back().exps == t.exps) {
      merged.back().coeff += t.coeff;
    } else {
      merged.push_back(std::move(t));
    }
  }
  std::erase_if(merged, [](const Monomial& t) { return t.coeff == 0.0; });
  terms_ = std::move(merged);
}

int Polynomial::degree() const {
  int d = 0;
  for (const auto& t : terms_) {
    int s = 0;
    for (int e : t.exps) s += e;
    d = std::max(d, s);
  }
  return d;
}

double Polynomial::evaluate(std::span<const double> x) const {
  if (static_cast<int>(x.size()) != n_vars_) {
    throw DimensionMismatch(
        fmt::format("point has dimension {}, polynomial expects {}", x.size(), n_vars_));
  }
  double sum = 0.0;
  for (const auto& t : terms_) {
    double v = t.coeff;
    for (size_t j = 0; j < x.size(); ++j) v *= int_power(x[j], t.exps[j]);
    sum += v;
  }
  return sum;
}

double Polynomial::evaluate(const Vector& x) const {
  return evaluate(std::span<const double>(x.data(), static_cast<size_t>(x.size())));
}

Polynomial Polynomial::partial(std::span<const int> counts) const {
  if (static_cast<int>(counts.size()) != n_vars_) {
    throw DimensionMismatch("derivative multi-index has wrong length");
  }
  std::vector<Monomial> out;
  for (const auto& t : terms_) {
    Monomial d{t.coeff, t.exps};
    bool vanishes = false;
    for (size_t j = 0; j < counts.size() && !vanishes; ++j) {
      for (int c = 0; c < counts[j]; ++c) {
        if (d.exps[j] == 0) {
          vanishes = true;
          break;
        }
        d.coeff *= d.exps[j];
        --d.exps[j];
      }
    }
    if (!vanishes) out.push_back(std::move(d));
  }
  return Polynomial(n_vars_, std::move(out));
}

Polynomial Polynomial::partial(int var) const {
  if (var < 0 || var >= n_vars_) throw IndexOutOfRange("variable index out of range");
  std::vector<int> counts(static_cast<size_t>(n_vars_), 0);
  counts[static_cast<size_t>(var)] = 1;
  return partial(counts);
}

Polynomial Polynomial::embed(int n_vars, int offset) const {
  if (offset < 0 || offset + n_vars_ > n_vars) {
    throw DimensionMismatch("cannot embed polynomial into fewer variables");
  }
  std::vector<Monomial> out;
  out.reserve(terms_.size());
  for (const auto& t : terms_) {
    std::vector<int> e(static_cast<size_t>(n_vars), 0);
    std::copy(t.exps.begin(), t.exps.end(), e.begin() + offset);
    out.push_back({t.coeff, std::move(e)});
  }
  return Polynomial(n_vars, std::move(out));
}

Polynomial Polynomial::operator-() const {
  Polynomial r = *this;
  r *= -1.0;
  return r;
}

Polynomial& Polynomial::operator+=(const Polynomial& other) {
  if (other.n_vars_ != n_vars_) throw DimensionMismatch("adding polynomials in different spaces");
  terms_.insert(terms_.end(), other.terms_.begin(), other.terms_.end());
  normalize();
  return *this;
}

Polynomial& Polynomial::operator-=(const Polynomial& other) { return *this += -other; }

Polynomial& Polynomial::operator*=(double s) {
  if (!std::isfinite(s)) throw NonFiniteValue("non-finite scale factor");
  for (auto& t : terms_) t.coeff *= s;
  normalize();
  return *this;
}

Polynomial operator*(const Polynomial& a, const Polynomial& b) {
  if (a.n_vars_ != b.n_vars_) throw DimensionMismatch("multiplying polynomials in different spaces");
  std::vector<Monomial> out;
  out.reserve(a.terms_.size() * b.terms_.size());
  for (const auto& s : a.terms_) {
    for (const auto& t : b.terms_) {
      Monomial m{s.coeff * t.coeff, s.exps};
      for (size_t j = 0; j < m.exps.size(); ++j) m.exps[j] += t.exps[j];
      out.push_back(std::move(m));
    }
  }
  return Polynomial(a.n_vars_, std::move(out));
}

bool operator==(const Polynomial& a, const Polynomial& b) {
  if (a.n_vars_ != b.n_vars_ || a.terms_.size() != b.terms_.size()) return false;
  for (size_t i = 0; i < a.terms_.size(); ++i) {
    if (a.terms_[i].coeff != b.terms_[i].coeff || a.terms_[i].exps != b.terms_[i].exps) {
      return false;
    }
  }
  return true;
}

PolynomialMap::PolynomialMap(int n_in, std::vector<Polynomial> components)
    : n_in_(n_in), components_(std::move(components)) {
  for (const auto& c : components_) {
    if (c.n_vars() != n_in_) {
      throw DimensionMismatch(
          fmt::format("component in {} variables, map expects {}", c.n_vars(), n_in_));
    }
  }
}

int PolynomialMap::degree() const {
  int d = 0;
  for (const auto& c : components_) d = std::max(d, c.degree());
  return d;
}

Vector PolynomialMap::operator()(const Vector& x) const { return evaluate(*this, x); }

PolynomialMap& PolynomialMap::operator+=(const PolynomialMap& other) {
  if (other.n_in_ != n_in_ || other.n_out() != n_out()) {
    throw DimensionMismatch("adding maps of different shapes");
  }
  for (size_t i = 0; i < components_.size(); ++i) components_[i] += other.components_[i];
  return *this;
}

PolynomialMap& PolynomialMap::operator*=(double s) {
  for (auto& c : components_) c *= s;
  return *this;
}

void ObjectiveProblem::validate() const {
  if (objective.n_out() != 1) throw DimensionMismatch("objective must be scalar");
  const int n = objective.n_in();
  if (equality_constraints && equality_constraints->n_in() != n) {
    throw DimensionMismatch("equality constraints and objective disagree on n_in");
  }
  if (inequality_constraints && inequality_constraints->n_in() != n) {
    throw DimensionMismatch("inequality constraints and objective disagree on n_in");
  }
}

Vector evaluate(const PolynomialMap& map, const Vector& x) {
  if (x.size() != map.n_in()) {
    throw DimensionMismatch(
        fmt::format("point has dimension {}, map expects {}", x.size(), map.n_in()));
  }
  Vector out(map.n_out());
  for (int i = 0; i < map.n_out(); ++i) out(i) = map.component(i).evaluate(x);
  return out;
}

PolynomialMap gradient(const Polynomial& p) {
  std::vector<Polynomial> g;
  g.reserve(static_cast<size_t>(p.n_vars()));
  for (int j = 0; j < p.n_vars(); ++j) g.push_back(p.partial(j));
  return PolynomialMap(p.n_vars(), std::move(g));
}

}  // namespace pfactor
