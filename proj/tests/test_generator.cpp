#include "doctest.h"

#include <memory>

#include "fld/generator.hpp"

using namespace fld;

namespace {

DriftTable cauchy_table() {
  QuadratureSpec q;
  auto p = std::make_shared<RadialPotential>(make_stable_target(1.0, 1));
  DriftGrid grid;
  grid.r_max = 200.0;
  grid.n_points = 96;
  return build_drift_table(p, ModelConfig(1, 1.0), grid, q, 2);
}

}  // namespace

TEST_SUITE("generator") {
  TEST_CASE("bump derivatives agree with finite differences") {
    const auto f = make_bump(2.0, 1.0);
    for (double x : {1.2, 1.9, 2.4, 2.95}) {
      const double h = 1e-6;
      CAPTURE(x);
      CHECK(f.func.f1(x) ==
            doctest::Approx((f.func.f(x + h) - f.func.f(x - h)) / (2.0 * h)).epsilon(1e-5));
      CHECK(f.func.f2(x) ==
            doctest::Approx((f.func.f1(x + h) - f.func.f1(x - h)) / (2.0 * h)).epsilon(1e-4));
    }
    CHECK(f.func.f(3.5) == 0.0);
    CHECK(f.func.f(0.5) == 0.0);
    f.validate_support();
  }

  TEST_CASE("generator of the Cauchy model annihilates the target in mean") {
    QuadratureSpec q;
    const auto p = make_stable_target(1.0, 1);
    const auto table = cauchy_table();
    std::vector<TestFunction> family;
    for (double c : {0.0, 1.0, 2.0, 4.0, 8.0}) family.push_back(make_bump(c));
    const auto res = invariance_residual(family, p, table, ModelConfig(1, 1.0), q);
    CHECK(res.residuals.size() == family.size());
    CHECK(res.max_residual < 1e-4);
  }

  TEST_CASE("wrong drift breaks invariance") {
    QuadratureSpec q;
    auto p = std::make_shared<RadialPotential>(make_stable_target(1.0, 1));
    const auto good = cauchy_table();
    DriftTable bad(ModelConfig(1, 1.0));
    bad.quad_used = q;
    for (std::size_t i = 0; i < good.radii.size(); ++i) {
      bad.radii.push_back(good.radii[i]);
      bad.values.push_back(-2.0 * good.radii[i]);
    }
    bad.tail_policy = TailPolicy::asymptotic_fit;
    bad.attach_potential(p);
    bad.finalize();
    std::vector<TestFunction> family;
    for (double c : {0.0, 1.0, 2.0, 4.0, 8.0}) family.push_back(make_bump(c));
    const auto res_bad = invariance_residual(family, *p, bad, ModelConfig(1, 1.0), q);
    const auto res_good = invariance_residual(family, *p, good, ModelConfig(1, 1.0), q);
    CHECK(res_bad.max_residual > 10.0 * res_good.max_residual);
  }

  TEST_CASE("lyapunov flags grids that never probe the tail") {
    QuadratureSpec q;
    const auto p = make_stable_target(1.0, 1);
    const auto table = cauchy_table();
    const auto res = lyapunov_check(0.5, p, table, ModelConfig(1, 1.0), q, {0.5, 1.0, 2.0});
    CHECK(res.warning_small_radii);
    CHECK_FALSE(res.pass);
  }

  TEST_CASE("lyapunov passes on the Cauchy model") {
    QuadratureSpec q;
    const auto p = make_stable_target(1.0, 1);
    const auto table = cauchy_table();
    std::vector<double> radii;
    for (double r = 0.5; r <= 128.0; r *= 2.0) radii.push_back(r);
    const auto res = lyapunov_check(0.5, p, table, ModelConfig(1, 1.0), q, radii);
    CHECK(res.pass);
    CHECK(res.C2 > 0.0);
    CHECK(res.C1 >= 1.0);
  }

  TEST_CASE("beta outside (0, alpha) is rejected") {
    QuadratureSpec q;
    const auto p = make_stable_target(1.0, 1);
    const auto table = cauchy_table();
    CHECK_THROWS_AS(lyapunov_check(1.0, p, table, ModelConfig(1, 1.0), q, {16.0}),
                    std::domain_error);
  }
}
