#include "doctest.h"

#include <cmath>
#include <memory>

#include "fld/diagnostics.hpp"

using namespace fld;

TEST_SUITE("diagnostics") {
  TEST_CASE("holder exponent on synthetic profiles") {
    std::vector<double> scales;
    for (double h = 1e-3; h < 0.2; h *= 2.0) scales.push_back(h);
    // linear profile: Lipschitz, slope ~ 1
    const auto lin = holder_exponent([](double r) { return -r; }, 0.0, 5.0, scales);
    CHECK(lin.slope == doctest::Approx(1.0).epsilon(1e-6));
    // |r-1|^{1/2}: exponent 1/2
    const auto root =
        holder_exponent([](double r) { return std::sqrt(std::abs(r - 1.0)); }, 0.0, 5.0, scales);
    CHECK(root.slope == doctest::Approx(0.5).epsilon(0.1));
    // window robustness: shift by one dyadic step
    std::vector<double> shifted;
    for (double h : scales) shifted.push_back(2.0 * h);
    const auto root2 =
        holder_exponent([](double r) { return std::sqrt(std::abs(r - 1.0)); }, 0.0, 5.0, shifted);
    CHECK(std::abs(root2.slope - root.slope) <= 0.1);
    // constant profile reports the infinite-smoothness flag
    const auto flat = holder_exponent([](double) { return 3.0; }, 0.0, 5.0, scales);
    CHECK(std::isinf(flat.slope));
  }

  TEST_CASE("target cdf and quantile are mutually inverse") {
    QuadratureSpec q;
    auto p = std::make_shared<RadialPotential>(make_stable_target(1.0, 1));
    Target1D target(p, q);
    // Cauchy closed form: F(x) = 1/2 + atan(x)/pi
    for (double x : {-3.0, -0.5, 0.0, 1.0, 10.0}) {
      CAPTURE(x);
      CHECK(target.cdf(x) ==
            doctest::Approx(0.5 + std::atan(x) / std::numbers::pi).epsilon(1e-7));
    }
    for (double u : {0.05, 0.3, 0.5, 0.9, 0.99}) {
      CAPTURE(u);
      CHECK(target.cdf(target.quantile(u)) == doctest::Approx(u).epsilon(1e-7));
    }
  }

  TEST_CASE("distance metrics vanish on perfect samples and see bad ones") {
    QuadratureSpec q;
    auto p = std::make_shared<RadialPotential>(make_stable_target(1.0, 1));
    DistanceGauge gauge(p, q);
    // quantile-stratified "perfect" sample
    std::vector<double> good;
    const int n = 4000;
    for (int i = 0; i < n; ++i)
      good.push_back(gauge.target().quantile((i + 0.5) / static_cast<double>(n)));
    std::vector<double> bad;
    for (int i = 0; i < n; ++i) bad.push_back(3.0 * good[i]);  // scaled Cauchy
    for (auto m : {DistanceMetric::ks, DistanceMetric::wasserstein1,
                   DistanceMetric::weighted_tv_proxy}) {
      CAPTURE(to_string(m));
      CHECK(gauge.distance(good, m) < 0.01);
      CHECK(gauge.distance(bad, m) > 5.0 * gauge.distance(good, m));
    }
  }

  TEST_CASE("ks critical value at the one percent level") {
    CHECK(ks_critical(10000, 0.01) == doctest::Approx(1.6276 / 100.0).epsilon(1e-3));
  }

  TEST_CASE("drift bound fit on the Cauchy table") {
    QuadratureSpec q;
    auto p = std::make_shared<RadialPotential>(make_stable_target(1.0, 1));
    DriftGrid grid;
    grid.r_max = 1000.0;
    grid.n_points = 128;
    const auto table = build_drift_table(p, ModelConfig(1, 1.0), grid, q, 2);
    const auto fit = fit_drift_bounds(table, *p, ModelConfig(1, 1.0));
    CHECK(fit.holds_on_grid);
    CHECK(fit.c2 > 0.25);
    CHECK(fit.c2 < 0.45);
    CHECK(fit.c_upper > 0.25);
    CHECK(fit.c_upper < 0.45);
  }

  TEST_CASE("drift bound fit rejects an outward drift") {
    DriftTable t(ModelConfig(1, 1.0));
    for (double r = 0.0; r <= 10.0; r += 1.0) {
      t.radii.push_back(r);
      t.values.push_back(r);  // outward everywhere
    }
    t.tail_c = 1.0;
    t.finalize();
    const auto fit = fit_drift_bounds(t, make_stable_target(1.0, 1), ModelConfig(1, 1.0));
    CHECK_FALSE(fit.holds_on_grid);
    CHECK(fit.c2 == 0.0);
  }

  TEST_CASE("wasserstein distance on shifted samples") {
    QuadratureSpec q;
    auto p = std::make_shared<RadialPotential>(make_stable_target(1.0, 1));
    DistanceGauge gauge(p, q);
    std::vector<double> shifted;
    const int n = 4000;
    for (int i = 0; i < n; ++i)
      shifted.push_back(gauge.target().quantile((i + 0.5) / static_cast<double>(n)) + 0.5);
    // W1 between mu and its 0.5-shift is exactly 0.5
    CHECK(gauge.distance(shifted, DistanceMetric::wasserstein1) ==
          doctest::Approx(0.5).epsilon(0.05));
  }
}
