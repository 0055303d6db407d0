#include <doctest.h>

#include <cmath>
#include <random>

#include "muxw/field.hpp"

using namespace muxw;

TEST_CASE("holding-cost evaluation") {
  CostFunction lin = uniform_cost(CostKind::linear, 2, 1.0);
  CHECK(lin.eval({2.0, 3.0}) == 5.0);

  CostFunction quad = uniform_cost(CostKind::shifted_quadratic, 3, 1.0, 20.0);
  CHECK(quad.eval({20.0, 20.0, 20.0}) == 0.0);
  CHECK(quad.eval({25.0, 20.0, 20.0}) == 25.0);

  CostFunction comp = uniform_cost(CostKind::composite, 2, 1.0, 20.0, {1});
  CHECK(comp.eval({7.0, 20.0}) == 7.0);
  CHECK(comp.eval({7.0, 22.0}) == 7.0 + 4.0);
}

TEST_CASE("holding-cost gradients and curvatures") {
  CostFunction lin;
  lin.kind = CostKind::linear;
  lin.weights = {2.0, 3.0};
  CHECK(lin.gradient({9.0, 9.0}) == Vec{2.0, 3.0});
  CHECK(lin.curvature_at(0) == 0.0);

  CostFunction quad = uniform_cost(CostKind::shifted_quadratic, 1, 1.0, 20.0);
  CHECK(quad.gradient({25.0})[0] == 10.0);
  CHECK(quad.curvature_at(0) == 2.0);

  CostFunction comp = uniform_cost(CostKind::composite, 2, 1.0, 20.0, {1});
  Vec g = comp.gradient({7.0, 20.0});
  CHECK(g[0] == 1.0);
  CHECK(g[1] == 0.0);  // stationary at the target
  CHECK(comp.curvature_at(0) == 0.0);
  CHECK(comp.curvature_at(1) == 2.0);
}

TEST_CASE("cost validation") {
  CostFunction lin = uniform_cost(CostKind::linear, 2, 1.0);
  CHECK_THROWS_AS(lin.eval({1.0}), StructuralError);
  CostFunction bad = uniform_cost(CostKind::composite, 2, 1.0, 20.0, {5});
  CHECK_THROWS_AS(bad.check(2), StructuralError);
}

TEST_CASE("separable perturbation scalars") {
  Perturbation e{PerturbationKind::exponential, 1.0};
  CHECK(e.scalar(0.0) == 0.0);
  CHECK(e.scalar_derivative(0.0) == 0.0);
  CHECK(e.scalar(3.0) == doctest::Approx(3.0 + std::exp(-3.0) - 1.0));

  Perturbation l{PerturbationKind::logarithmic, 1.0};
  CHECK(l.scalar(1.0) == doctest::Approx(std::log(2.0)));
  CHECK(l.scalar(0.0) == 0.0);
  CHECK(l.scalar_derivative(0.0) == 0.0);
  CHECK(l.scalar_derivative(1.0) == doctest::Approx(std::log(2.0) + 0.5));
}

TEST_CASE("coupled perturbation and damping diagonal") {
  Perturbation c{PerturbationKind::coupled, 1.0};
  Vec y = c.apply({0.0, 7.0});
  CHECK(y[0] == 1.0);  // empty queue keeps the full unit offset

  Vec z = c.apply({1.0, 1.0});
  CHECK(z[0] == doctest::Approx(1.0 + std::exp(-0.5)));

  Vec d = perturbation_matrix_diag({1.0, 1.0}, 1.0);
  CHECK(d[0] == doctest::Approx(1.0 - std::exp(-0.5)));
  CHECK(d[0] == doctest::Approx(0.3935).epsilon(1e-3));
  CHECK(perturbation_matrix_diag({0.0, 3.0}, 1.0)[0] == 0.0);
  CHECK(perturbation_matrix_diag({50.0, 0.0}, 1.0)[0] ==
        doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("perturbation parameter validation") {
  Perturbation e{PerturbationKind::exponential, 0.5};
  CHECK_THROWS_AS(e.check(), ContractError);
  Perturbation l{PerturbationKind::logarithmic, 0.0};
  CHECK_THROWS_AS(l.check(), ContractError);
  Perturbation c{PerturbationKind::coupled, 1.0};
  CHECK_THROWS_AS(c.scalar(1.0), ContractError);
}

TEST_CASE("coupled field vanishes on every boundary face") {
  CostFunction cf = uniform_cost(CostKind::composite, 3, 1.0, 20.0, {2});
  SchedulingField f = build_field(cf, {PerturbationKind::coupled, 1.0});
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(0.0, 100.0);
  for (int trial = 0; trial < 200; ++trial) {
    Vec x = {u(rng), u(rng), u(rng)};
    x[trial % 3] = 0.0;
    CHECK(f(x)[trial % 3] == 0.0);
  }
}

TEST_CASE("composite field frozen values") {
  // app buffer over target, the partner queue empty
  CostFunction cf = uniform_cost(CostKind::composite, 2, 1.0, 20.0, {0});
  SchedulingField f = build_field(cf, {PerturbationKind::coupled, 1.0});
  Vec mu = f({25.0, 0.0});
  CHECK(mu[0] == doctest::Approx(10.0 * (1.0 - std::exp(-25.0))));
  CHECK(mu[0] == doctest::Approx(10.0).epsilon(1e-9));
  CHECK(mu[1] == 0.0);

  // at the target the app-buffer weight is exactly zero
  CHECK(f({20.0, 5.0})[0] == 0.0);
}

TEST_CASE("linear coupled field frozen values") {
  CostFunction cf = uniform_cost(CostKind::linear, 2, 1.0);
  SchedulingField f = build_field(cf, {PerturbationKind::coupled, 1.0});
  Vec mu = f({5.0, 1.0});
  CHECK(mu[0] == doctest::Approx(1.0 - std::exp(-2.5)));
  CHECK(mu[0] == doctest::Approx(0.917915).epsilon(1e-5));
  CHECK(mu[1] == doctest::Approx(1.0 - std::exp(-1.0 / 6.0)));
  CHECK(mu[1] == doctest::Approx(0.153518).epsilon(1e-5));
}

TEST_CASE("separable fields vanish at zero and follow the chain rule") {
  CostFunction cf;
  cf.kind = CostKind::linear;
  cf.weights = {2.0, 5.0};
  for (auto kind :
       {PerturbationKind::exponential, PerturbationKind::logarithmic}) {
    Perturbation p{kind, 1.5};
    SchedulingField f = build_field(cf, p);
    CHECK(f({0.0, 0.0}) == Vec{0.0, 0.0});
    Vec mu = f({4.0, 9.0});
    CHECK(mu[0] == doctest::Approx(2.0 * p.scalar_derivative(4.0)));
    CHECK(mu[1] == doctest::Approx(5.0 * p.scalar_derivative(9.0)));
  }
}

TEST_CASE("analytic jacobians match finite differences") {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> ux(0.1, 50.0);
  std::uniform_real_distribution<double> utheta(1.0, 5.0);
  std::uniform_int_distribution<int> udim(2, 5);

  auto check_field = [&](const SchedulingField& f, const Vec& x) {
    for (std::size_t i = 0; i < x.size(); ++i) {
      Vec a = f.gradient(x, i);
      Vec n = finite_difference_gradient(f.value, x, i);
      for (std::size_t k = 0; k < x.size(); ++k) {
        CHECK(a[k] ==
              doctest::Approx(n[k]).epsilon(1e-4).scale(1.0 + std::abs(n[k])));
      }
    }
  };

  for (int trial = 0; trial < 120; ++trial) {
    int m = udim(rng);
    double theta = utheta(rng);
    Vec x(m);
    for (auto& v : x) v = ux(rng);

    CostFunction cf = uniform_cost(
        trial % 3 == 0 ? CostKind::linear
                       : trial % 3 == 1 ? CostKind::shifted_quadratic
                                        : CostKind::composite,
        m, 1.0 + (trial % 4), 20.0, {0});

    check_field(build_field(cf, {PerturbationKind::coupled, theta}), x);
    check_field(build_field(cf, {PerturbationKind::exponential, theta}), x);
    check_field(build_field(cf, {PerturbationKind::logarithmic, theta}), x);
  }
}

TEST_CASE("identity field is maxweight's weight choice") {
  SchedulingField f = identity_field(3);
  Vec x = {4.0, 0.0, 2.5};
  CHECK(f(x) == x);
  CHECK(f.gradient(x, 1) == Vec{0.0, 1.0, 0.0});
}

TEST_CASE("field normalization") {
  CHECK(normalize_field({2.0, 2.0}) == Vec{0.5, 0.5});
  CHECK(normalize_field({3.0, 0.0, 1.0}) == Vec{0.75, 0.0, 0.25});
  Vec s = normalize_field({-1.0, 1.0});
  CHECK(s == Vec{-0.5, 0.5});
  CHECK(l1_norm(s) == 1.0);
  CHECK(normalize_field({-1.0, 1.0}, true) == Vec{0.0, 1.0});
  CHECK_THROWS_AS(normalize_field({0.0, 0.0}), NormalizationError);
  CHECK_THROWS_AS(normalize_field({-1.0, 0.0}, true), NormalizationError);
}
