#include <doctest.h>

#include <cmath>
#include <random>

#include "pfactor/errors.hpp"
#include "pfactor/solvers.hpp"
#include "support.hpp"

using namespace pfactor;
using testing::mat;
using testing::poly;
using testing::vec;

namespace {

double dist(const Matrix& a, const Matrix& b) { return (a - b).cwiseAbs().maxCoeff(); }

FactorNewtonConfig config_at_zero(const Vector& h, int p) {
  FactorNewtonConfig cfg;
  cfg.p = p;
  cfg.h = h;
  cfg.normalize_h = false;
  cfg.projection_point = Vector::Zero(h.size());
  cfg.newton.true_root = Vector::Zero(h.size());
  return cfg;
}

}  // namespace

TEST_SUITE("solvers") {

TEST_CASE("classical newton on x^2 - 4") {
  const PolynomialMap f(1, {poly(1, {{1, {2}}, {-4, {0}}})});
  NewtonOptions opt;
  opt.true_root = vec({2});
  const IterationTrace t = newton_classical(f, vec({3}), opt);
  CHECK(t.termination == Termination::converged);
  CHECK(t.final_point()(0) == doctest::Approx(2.0).epsilon(1e-14));
  REQUIRE(t.observed_order);
  CHECK(*t.observed_order == doctest::Approx(2.0).epsilon(0.1));
  // x1 = 3 - 5/6
  CHECK(t.steps[1].x(0) == doctest::Approx(13.0 / 6));
  CHECK(t.steps[1].step_norm == doctest::Approx(5.0 / 6));
  CHECK(t.steps[0].step_norm == 0.0);
}

TEST_CASE("classical newton diverges near a singular root") {
  for (double t : {1e-3, 1e-4, 1e-5}) {
    const IterationTrace tr = newton_classical(testing::sum_product(), vec({t + t * t * t, t}));
    REQUIRE(tr.steps.size() >= 2);
    const Vector x1 = tr.steps[1].x;
    // closed form of the first iterate: (-1/t - t, 1/t + t)
    CHECK(x1(0) == doctest::Approx(-1 / t - t).epsilon(1e-6));
    CHECK(x1(1) == doctest::Approx(1 / t + t).epsilon(1e-6));
    CHECK(x1.norm() >= 0.9 / t);
  }
  const IterationTrace d = newton_classical(testing::sum_product(), vec({1e-5 + 1e-15, 1e-5}));
  CHECK(d.termination == Termination::diverged);
}

TEST_CASE("classical newton breaks down on a singular jacobian") {
  const IterationTrace t = newton_classical(testing::sum_product(), vec({1e-3, 1e-3}));
  CHECK(t.termination == Termination::singular_breakdown);
  CHECK(t.steps.size() == 1);
}

TEST_CASE("classical newton needs a square system") {
  CHECK_THROWS_AS(newton_classical(testing::three_regular(), vec({1, 1})), NonSquareSystem);
}

TEST_CASE("sum-product factor projections") {
  const FactorProjections pr = build_factor_projections(testing::sum_product(), vec({0, 0}), vec({1, -1}));
  CHECK(pr.p == 2);
  REQUIRE(pr.p_sums.size() == 1);
  CHECK(dist(pr.p_sums[0], mat(2, 2, {0, 0, 0, 1})) <= 1e-12);
  CHECK(dist(pr.factor_matrix, mat(2, 2, {1, 1, -1, 1})) <= 1e-12);
}

TEST_CASE("one p-factor step on the sum-product map") {
  std::mt19937_64 rng(11);
  for (int r = 0; r < 20; ++r) {
    const Vector x0 = testing::uniform_ball(rng, 2, 1e-2);
    FactorNewtonConfig cfg = config_at_zero(vec({1, -1}), 2);
    cfg.newton.max_iters = 1;
    const IterationTrace t = newton_p_factor(testing::sum_product(), cfg, x0);
    const double a = x0(0), b = x0(1);
    // A(x) = [[1, 1], [b - 1, a + 1]], b(x) = (a + b, ab + b - a)
    const Vector expected = vec({-a * b, a * b}) / (2 + a - b);
    CHECK(dist(t.steps.at(1).x, expected) <= 1e-15);
  }
}

TEST_CASE("gradient-system projections") {
  const FactorProjections pr = build_factor_projections(testing::gradient_system(), vec({0, 0}), vec({1, 1}));
  CHECK(pr.p == 3);
  REQUIRE(pr.p_bar.size() == 2);
  CHECK(dist(pr.p_bar[0], mat(2, 2, {0, 0, 0, 1})) <= 1e-12);
  CHECK(dist(pr.p_bar[1], mat(2, 2, {0.5, -0.5, -0.5, 0.5})) <= 1e-12);
  CHECK(dist(pr.p_sums[0], mat(2, 2, {0.5, -0.5, -0.5, 1.5})) <= 1e-12);
  CHECK(dist(pr.p_sums[1], mat(2, 2, {0, -0.5, 0, 0.5})) <= 1e-12);
  CHECK(dist(pr.factor_matrix, mat(2, 2, {2, -11, 2, 11})) <= 1e-12);
}

TEST_CASE("p-factor newton on the gradient system") {
  FactorNewtonConfig cfg = config_at_zero(vec({1, 1}), 3);
  cfg.frozen_matrix = true;
  std::mt19937_64 rng(5);
  double worst = 0.0;
  for (int r = 0; r < 30; ++r) {
    const IterationTrace t = newton_p_factor(testing::gradient_system(), cfg, testing::uniform_ball(rng, 2, 1e-2));
    CHECK(t.termination == Termination::converged);
    CHECK(t.p == 3);
    for (size_t k = 0; k + 1 < t.steps.size(); ++k) {
      const double e0 = t.steps[k].x.norm();
      if (e0 < 1e-8) break;
      worst = std::max(worst, t.steps[k + 1].x.norm() / (e0 * e0));
    }
  }
  CHECK(worst <= 10.0);
}

TEST_CASE("p = 1 reproduces classical newton") {
  const PolynomialMap f(1, {poly(1, {{1, {2}}, {-4, {0}}})});
  FactorNewtonConfig cfg;
  cfg.p = 1;
  cfg.h = vec({1});
  cfg.normalize_h = false;
  const IterationTrace a = newton_p_factor(f, cfg, vec({3}));
  const IterationTrace b = newton_classical(f, vec({3}));
  REQUIRE(a.steps.size() == b.steps.size());
  for (size_t k = 0; k < a.steps.size(); ++k) CHECK(a.steps[k].x(0) == b.steps[k].x(0));
}

TEST_CASE("factor matrix singular along a bad direction") {
  FactorNewtonConfig cfg = config_at_zero(vec({1, 1}), 2);
  CHECK_THROWS_AS(newton_p_factor(testing::sum_product(), cfg, vec({0.01, 0.02})), NotPRegularAlongH);
}

TEST_CASE("p-order residual examples") {
  const SubspaceCascade c = build_cascade(testing::sum_product(), vec({0, 0}), 2);
  CHECK(p_order_residual(c, testing::sum_product(), vec({0, 0})) == 0.0);
  for (double e : {1e-1, 1e-3, 0.25}) {
    CHECK(p_order_residual(c, testing::sum_product(), vec({e, -e})) == doctest::Approx(e));
    CHECK(p_order_residual(c, testing::sum_product(), vec({e, 0})) == doctest::Approx(e));
  }
}

TEST_CASE("fit order") {
  std::vector<double> quad{1e-1, 1e-2, 1e-4, 1e-8};
  CHECK(*fit_order(quad) == doctest::Approx(2.0));
  std::vector<double> lin{1, 0.5, 0.25, 0.125, 0.0625};
  CHECK(*fit_order(lin) == doctest::Approx(1.0));
  CHECK_FALSE(fit_order({1e-1, 1e-2}));
  CHECK_FALSE(fit_order({1e-1, 1e-2, 1e-20}));
}

TEST_CASE("solver traces are deterministic") {
  FactorNewtonConfig cfg = config_at_zero(vec({1, 1}), 3);
  const IterationTrace a = newton_p_factor(testing::gradient_system(), cfg, vec({0.004, -0.003}));
  const IterationTrace b = newton_p_factor(testing::gradient_system(), cfg, vec({0.004, -0.003}));
  REQUIRE(a.steps.size() == b.steps.size());
  for (size_t k = 0; k < a.steps.size(); ++k) {
    CHECK((a.steps[k].x.array() == b.steps[k].x.array()).all());
    CHECK(a.steps[k].residual == b.steps[k].residual);
  }
}

TEST_CASE("termination names") {
  CHECK(to_string(Termination::converged) == "converged");
  CHECK(to_string(Termination::singular_breakdown) == "singular_breakdown");
}

}  // TEST_SUITE
