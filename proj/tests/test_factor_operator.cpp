#include <doctest.h>

#include <cmath>
#include <limits>

#include "pfactor/errors.hpp"
#include "pfactor/factor_operator.hpp"
#include "pfactor/sampling.hpp"
#include "support.hpp"

using namespace pfactor;
using testing::mat;
using testing::poly;
using testing::vec;

namespace {

double dist(const Matrix& a, const Matrix& b) { return (a - b).cwiseAbs().maxCoeff(); }

PolynomialMap scalar(std::initializer_list<testing::Term> terms) {
  return PolynomialMap(1, {poly(1, terms)});
}

bool certificate_consistent(const ExistenceCertificate& c) {
  bool all = true;
  for (const auto& row : c.conditions) all = all && row.holds;
  return !c.certified || all;
}

}  // namespace

TEST_SUITE("factor_operator") {

TEST_CASE("psi for the sum-product map") {
  const SubspaceCascade c = build_cascade(testing::sum_product(), vec({0, 0}), 2);
  for (const Vector& h : {vec({0.3, -1.2}), vec({2, 5}), vec({1, 1})}) {
    const FactorOperator op = assemble_psi(c, h);
    CHECK(dist(op.matrix, mat(2, 2, {1, 1, h(1), h(0)})) <= 1e-12);
    CHECK(op.surjective == (std::abs(h(0) - h(1)) > 1e-9));
  }
  const FactorOperator f = assemble_psi(c, vec({0.3, -1.2}), Convention::factorial);
  CHECK(dist(f.matrix, mat(2, 2, {1, 1, -0.6, 0.15})) <= 1e-12);
}

TEST_CASE("psi for the three-regular map") {
  const SubspaceCascade c = build_cascade(testing::three_regular(), vec({0, 0}), 3);
  const double h1 = 0.7, h2 = -0.4;
  const FactorOperator op = assemble_psi(c, vec({h1, h2}));
  CHECK(dist(op.matrix, mat(3, 2, {1, 1, 2 * h2 * h2, 4 * h1 * h2, 6 * h1 * h1, 0})) <= 1e-12);
  CHECK_FALSE(op.surjective);
  CHECK(std::isinf(op.right_inverse_norm));
}

TEST_CASE("psi of a regular map is its jacobian") {
  const PolynomialMap f(2, {poly(2, {{2, {1, 0}}, {1, {0, 2}}}), poly(2, {{-1, {0, 1}}, {1, {1, 1}}})});
  const SubspaceCascade c = minimal_cascade(f, vec({0, 0}));
  const FactorOperator op = assemble_psi(c, vec({0.5, 3}));
  CHECK(dist(op.matrix, mat(2, 2, {2, 0, 0, -1})) == 0.0);
  CHECK(op.right_inverse_norm == doctest::Approx(1.0));
}

TEST_CASE("p-regularity along directions") {
  const SubspaceCascade c = build_cascade(testing::sum_product(), vec({0, 0}), 2);
  const RegularityVerdict a = p_regular_along(c, vec({1, 0}));
  CHECK(a.regular);
  CHECK(a.block_criterion_agrees);
  CHECK(a.right_inverse_norm == doctest::Approx(1 / 0.6180339887498949));
  CHECK_FALSE(p_regular_along(c, vec({1, 1})).regular);
  CHECK(p_regular_along(c, vec({1, 1})).block_criterion_agrees);

  const SubspaceCascade cc = minimal_cascade(testing::crossing_cone(), vec({0, 0, 0}));
  CHECK(p_regular_along(cc, vec({1, 1, 0})).regular);
}

TEST_CASE("sum-product regularity on an angular grid") {
  const SubspaceCascade c = build_cascade(testing::sum_product(), vec({0, 0}), 2);
  int mismatches = 0;
  for (const Vector& h : circle_grid(360)) {
    const bool expected = std::abs(h(0) - h(1)) > 1e-6;
    if (p_regular_along(c, h).regular != expected) ++mismatches;
  }
  CHECK(mismatches == 0);
}

TEST_CASE("strong regularity estimate") {
  const PolynomialMap f(2, {poly(2, {{3, {1, 0}}}), poly(2, {{1, {0, 1}}, {1, {1, 1}}})});
  const SubspaceCascade reg = minimal_cascade(f, vec({0, 0}));
  const StrongRegularityEstimate r = strong_p_regularity_estimate(reg, 10.0, 200, 3);
  CHECK(r.sup_right_inverse_norm == doctest::Approx(1.0));

  const SubspaceCascade c = build_cascade(testing::sum_product(), vec({0, 0}), 2);
  const StrongRegularityEstimate s = strong_p_regularity_estimate(c, 1.5, 500, 7);
  CHECK(s.samples_in_h_alpha > 0);
  CHECK(std::isfinite(s.sup_right_inverse_norm));
  const double h1 = s.worst_h(0), h2 = s.worst_h(1);
  const double sig = Eigen::JacobiSVD<Matrix>(mat(2, 2, {1, 1, h2, h1})).singularValues()(1);
  CHECK(s.sup_right_inverse_norm == doctest::Approx(1 / sig).epsilon(1e-9));
  const StrongRegularityEstimate again = strong_p_regularity_estimate(c, 1.5, 500, 7);
  CHECK(again.sup_right_inverse_norm == s.sup_right_inverse_norm);
}

TEST_CASE("regular certificate for an affine map") {
  const ExistenceCertificate c = existence_certificate_regular(scalar({{1, {1}}, {-1, {0}}}), vec({0.9}), 0.5);
  CHECK(c.certified);
  CHECK(c.c == 0.0);
  CHECK(c.eta == doctest::Approx(0.1));
  CHECK(c.delta == doctest::Approx(1.0));
  CHECK(certificate_consistent(c));
}

TEST_CASE("regular certificate for x^2 - 1") {
  const ExistenceCertificate c =
      existence_certificate_regular(scalar({{1, {2}}, {-1, {0}}}), vec({1.05}), 0.2);
  // eta = 0.1025, delta = 1/2.1, C = 2
  CHECK(c.eta == doctest::Approx(0.1025));
  CHECK(c.delta == doctest::Approx(1 / 2.1));
  CHECK(c.c == doctest::Approx(2.0));
  CHECK(c.certified);
  CHECK(certificate_consistent(c));
  CHECK(c.conditions.size() == 3);
}

TEST_CASE("regular certificate rejects a singular base point") {
  const PolynomialMap f = scalar({{1.0 / 5040, {7}}, {1, {5}}, {1e-3, {0}}});
  CHECK_THROWS_AS(existence_certificate_regular(f, vec({0}), 0.5), SingularBasePoint);
}

TEST_CASE("singular certificate for x^2 - a^2") {
  const double omega = 0.1, nu = 0.5;
  int certified = 0;
  for (double a : {1e-4, 1e-3, 3e-3, 0.02, 0.05}) {
    const PolynomialMap f = scalar({{1, {2}}, {-a * a, {0}}});
    const SubspaceCascade c = build_cascade(f, vec({0}), 2);
    const ExistenceCertificate cert = existence_certificate_singular(c, f, vec({1}), omega, nu, 500, 1);
    CHECK(cert.p == 2);
    CHECK(certificate_consistent(cert));
    if (cert.certified) {
      ++certified;
      CHECK(cert.certified_ball_radius == doctest::Approx(1.5 * omega));
      CHECK(std::abs(a - omega) <= cert.certified_ball_radius);
    }
    CHECK(cert.certified == (a <= 0.038273 * omega));
  }
  CHECK(certified == 3);
}

TEST_CASE("singular certificate with zero residual") {
  const SubspaceCascade c = build_cascade(testing::sum_product(), vec({0, 0}), 2);
  const ExistenceCertificate cert =
      existence_certificate_singular(c, testing::sum_product(), vec({1, -1}) / std::sqrt(2.0), 0.05, 0.5, 300, 2);
  CHECK(cert.delta == 0.0);
  REQUIRE_FALSE(cert.conditions.empty());
  CHECK(cert.conditions[0].holds);
}

TEST_CASE("singular certificate preconditions") {
  const SubspaceCascade c = build_cascade(testing::sum_product(), vec({0, 0}), 2);
  CHECK_THROWS_AS(existence_certificate_singular(c, testing::sum_product(), vec({1, 0}), 0.05, 0.5),
                  PreconditionViolated);
  const Vector h = vec({1, -1}) / std::sqrt(2.0);
  CHECK_THROWS_AS(existence_certificate_singular(c, testing::sum_product(), h, 0.3, 0.5),
                  PreconditionViolated);
  CHECK_THROWS_AS(existence_certificate_singular(c, testing::sum_product(), h, 0.05, 1.5),
                  PreconditionViolated);
}

TEST_CASE("convention names") {
  CHECK(parse_convention(to_string(Convention::factorial)) == Convention::factorial);
  CHECK(term_weight(Convention::factorial, 3) == doctest::Approx(1.0 / 6));
  CHECK(term_weight(Convention::plain, 3) == 1.0);
  CHECK_THROWS_AS(parse_convention("other"), InputError);
}

}  // TEST_SUITE
