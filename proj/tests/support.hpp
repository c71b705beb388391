#pragma once

#include <cmath>
#include <cstdint>
#include <initializer_list>
#include <random>
#include <utility>
#include <vector>

#include "pfactor/polynomial.hpp"

namespace testing {

using pfactor::Matrix;
using pfactor::Polynomial;
using pfactor::PolynomialMap;
using pfactor::Vector;

using Term = std::pair<double, std::vector<int>>;

inline Polynomial poly(int n, std::initializer_list<Term> terms) {
  std::vector<pfactor::Monomial> ms;
  for (const auto& [c, e] : terms) ms.push_back({c, e});
  return Polynomial(n, std::move(ms));
}

inline Vector vec(std::initializer_list<double> v) {
  Vector out(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (double x : v) out(i++) = x;
  return out;
}

inline Matrix mat(int rows, int cols, std::initializer_list<double> v) {
  Matrix out(rows, cols);
  auto it = v.begin();
  for (int r = 0; r < rows; ++r)
    for (int c = 0; c < cols; ++c) out(r, c) = *it++;
  return out;
}

// (x1 + x2, x1 x2)
inline PolynomialMap sum_product() {
  return PolynomialMap(2, {poly(2, {{1, {1, 0}}, {1, {0, 1}}}), poly(2, {{1, {1, 1}}})});
}

// (x1 + x2, x1 x2^2, x1^3)
inline PolynomialMap three_regular() {
  return PolynomialMap(
      2, {poly(2, {{1, {1, 0}}, {1, {0, 1}}}), poly(2, {{1, {1, 2}}}), poly(2, {{1, {3, 0}}})});
}

// (x1^2 - x2^2 + x3^2, x1^2 - x2^2 + x3^2 + x2 x3)
inline PolynomialMap crossing_cone() {
  return PolynomialMap(3, {poly(3, {{1, {2, 0, 0}}, {-1, {0, 2, 0}}, {1, {0, 0, 2}}}),
                           poly(3, {{1, {2, 0, 0}}, {-1, {0, 2, 0}}, {1, {0, 0, 2}}, {1, {0, 1, 1}}})});
}

// gradient of x1^2 + x1^2 x2 + x2^4
inline PolynomialMap gradient_system() {
  return PolynomialMap(2, {poly(2, {{2, {1, 0}}, {2, {1, 1}}}), poly(2, {{1, {2, 0}}, {4, {0, 3}}})});
}

inline PolynomialMap quadric() {
  return PolynomialMap(2, {poly(2, {{1, {2, 0}}, {-1, {0, 2}}})});
}

inline pfactor::ObjectiveProblem degenerate_multipliers(double sign = 1.0) {
  pfactor::ObjectiveProblem p;
  p.objective = PolynomialMap(3, {poly(3, {{sign, {0, 2, 0}}, {sign, {0, 0, 1}}})});
  p.equality_constraints = crossing_cone();
  return p;
}

// min x1^2 + x2^2 + 4 x1 x2 s.t. -x <= 0
inline pfactor::ObjectiveProblem degenerate_kkt() {
  pfactor::ObjectiveProblem p;
  p.objective = PolynomialMap(2, {poly(2, {{1, {2, 0}}, {1, {0, 2}}, {4, {1, 1}}})});
  p.inequality_constraints =
      PolynomialMap(2, {poly(2, {{-1, {1, 0}}}), poly(2, {{-1, {0, 1}}})});
  return p;
}

inline Vector uniform_ball(std::mt19937_64& rng, int n, double radius) {
  std::normal_distribution<double> nd;
  std::uniform_real_distribution<double> ud(0.0, 1.0);
  Vector v(n);
  for (int i = 0; i < n; ++i) v(i) = nd(rng);
  return v.normalized() * radius * std::pow(ud(rng), 1.0 / n);
}

/// Random polynomial with `terms` monomials of total degree <= deg.
inline Polynomial random_poly(std::mt19937_64& rng, int n, int deg, int terms) {
  std::uniform_int_distribution<int> di(0, deg);
  std::uniform_real_distribution<double> dc(-2.0, 2.0);
  std::vector<pfactor::Monomial> ms;
  for (int t = 0; t < terms; ++t) {
    std::vector<int> e(static_cast<size_t>(n), 0);
    int budget = di(rng);
    for (int k = 0; k < budget; ++k) e[static_cast<size_t>(rng() % static_cast<unsigned>(n))]++;
    ms.push_back({dc(rng), e});
  }
  return Polynomial(n, std::move(ms));
}

inline PolynomialMap random_map(std::mt19937_64& rng, int n, int m, int deg, int terms) {
  std::vector<Polynomial> c;
  for (int i = 0; i < m; ++i) c.push_back(random_poly(rng, n, deg, terms));
  return PolynomialMap(n, std::move(c));
}

}  // namespace testing
