#include "doctest.h"

#include <cmath>
#include <vector>

#include "fld/rng.hpp"
#include "fld/stable_noise.hpp"
#include "fld/stats.hpp"

using namespace fld;

namespace {

// Monte Carlo CF check with a majority vote over independent attempts, so a
// single unlucky draw cannot flake the suite.
bool cf_matches(int d, double alpha, double xi, std::uint64_t seed) {
  int wins = 0;
  for (int attempt = 0; attempt < 3; ++attempt) {
    RngStream rng(seed, static_cast<std::uint64_t>(attempt));
    const int n = 100000;
    double acc = 0.0;
    for (int i = 0; i < n; ++i) {
      const auto z = sample_isotropic_stable(StableNoiseSpec{d, alpha}, rng);
      acc += std::cos(xi * z[0]);
    }
    const double want = std::exp(-std::pow(xi, alpha));
    if (std::abs(acc / n - want) < 0.01) ++wins;
  }
  return wins >= 2;
}

}  // namespace

TEST_SUITE("stable_noise") {
  TEST_CASE("characteristic function across alpha and xi") {
    std::uint64_t seed = 1000;
    for (double alpha : {0.5, 1.0, 1.5, 1.9})
      for (double xi : {0.25, 1.0, 4.0})
        for (int d : {1, 2}) {
          CAPTURE(alpha);
          CAPTURE(xi);
          CAPTURE(d);
          CHECK(cf_matches(d, alpha, xi, seed++));
        }
  }

  TEST_CASE("one-sided Kanter sampler has Laplace transform exp(-lambda^s)") {
    for (double s : {0.25, 0.5, 0.75}) {
      RngStream rng(77, 0);
      const int n = 200000;
      double acc = 0.0;
      for (int i = 0; i < n; ++i) acc += std::exp(-sample_one_sided_stable(s, rng));
      CAPTURE(s);
      CHECK(std::abs(acc / n - std::exp(-1.0)) < 0.01);
    }
  }

  TEST_CASE("increment obeys dt^{1/alpha} scaling in law") {
    const double alpha = 1.5, dt = 0.04, xi = 2.0;
    RngStream rng(31, 0);
    const int n = 150000;
    double acc = 0.0;
    for (int i = 0; i < n; ++i)
      acc += std::cos(xi * increment(StableNoiseSpec{1, alpha}, dt, rng)[0]);
    CHECK(std::abs(acc / n - std::exp(-dt * std::pow(xi, alpha))) < 0.01);
  }

  TEST_CASE("Hill estimator recovers the tail index") {
    const double alpha = 1.5;
    RngStream rng(404, 0);
    std::vector<double> sample(300000);
    for (auto& x : sample) x = sample_symmetric_stable_1d(alpha, rng);
    const double est = hill_tail_index(sample, 3000);
    CHECK(std::abs(est - alpha) < 0.15);
  }

  TEST_CASE("parameter validation") {
    CHECK_THROWS_AS(StableNoiseSpec({1, 2.0}).validate(), std::invalid_argument);
    CHECK_THROWS_AS(StableNoiseSpec({0, 1.0}).validate(), std::invalid_argument);
    RngStream rng(1, 0);
    CHECK_THROWS_AS(increment(StableNoiseSpec{1, 1.0}, 0.0, rng), std::invalid_argument);
    CHECK_THROWS_AS(sample_one_sided_stable(1.0, rng), std::invalid_argument);
  }

  TEST_CASE("alpha = 1 path is exactly Cauchy in one dimension") {
    RngStream rng(9, 0);
    const int n = 200000;
    int inside = 0;
    for (int i = 0; i < n; ++i)
      if (std::abs(sample_symmetric_stable_1d(1.0, rng)) < 1.0) ++inside;
    CHECK(std::abs(static_cast<double>(inside) / n - 0.5) < 0.005);
  }
}
