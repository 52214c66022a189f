// Acceptance gate: every criterion prints exactly one PASS/FAIL line with the
// measured quantities, and the process exits nonzero if any criterion fails.

#include <cmath>
#include <cstdio>
#include <memory>
#include <thread>
#include <vector>

#include "fld/diagnostics.hpp"
#include "fld/drift.hpp"
#include "fld/generator.hpp"
#include "fld/sde.hpp"
#include "fld/stable_density.hpp"

using namespace fld;

namespace {

int n_threads() {
  const unsigned hw = std::thread::hardware_concurrency();
  return static_cast<int>(std::min(hw == 0 ? 4u : hw, 8u));
}

int failures = 0;

void report(int id, bool pass, const char* what, const std::string& detail) {
  std::printf("[%2d] %s  %s (%s)\n", id, pass ? "PASS" : "FAIL", what, detail.c_str());
  std::fflush(stdout);
  if (!pass) ++failures;
}

std::string fmt(const char* f, double a, double b = 0.0) {
  char buf[160];
  std::snprintf(buf, sizeof buf, f, a, b);
  return buf;
}

std::shared_ptr<DriftTable> build(std::shared_ptr<RadialPotential> p, ModelConfig cfg,
                                  double r_max, std::size_t n, const QuadratureSpec& q) {
  DriftGrid grid;
  grid.r_max = r_max;
  grid.n_points = n;
  auto t = std::make_shared<DriftTable>(build_drift_table(p, cfg, grid, q, n_threads()));
  t->tail_policy = TailPolicy::asymptotic_fit;
  return t;
}

}  // namespace

int main() {
  QuadratureSpec q;
  const int threads = n_threads();

  // 1. antiderivative branch, Cauchy target: b(x) = -x
  {
    const auto p = make_stable_target(1.0, 1);
    double worst = 0.0;
    for (double x : {0.25, 0.5, 1.0, 2.0, 5.0})
      worst = std::max(worst, std::abs(drift_antiderivative(x, p, 1.0, q) + x) / x);
    report(1, worst <= 1e-3, "Cauchy antiderivative drift = -x", fmt("max rel err %.2e", worst));
  }

  // 2. riesz branch, 2D Cauchy target: g(r) = -r
  {
    const auto p = make_stable_target(1.0, 2);
    const ModelConfig cfg(2, 1.0);
    double worst = 0.0;
    for (double r : {0.5, 1.0, 2.0, 5.0})
      worst = std::max(worst, std::abs(drift_riesz(r, p, cfg, q) + r) / r);
    report(2, worst <= 1e-2, "2D Cauchy riesz drift = -r", fmt("max rel err %.2e", worst));
  }

  // 3. riesz branch in 1D, alpha = 1.5: g(r) = -r/1.5
  {
    const auto p = make_stable_target(1.5, 1);
    const ModelConfig cfg(1, 1.5);
    double worst = 0.0;
    for (double r : {0.5, 1.0, 2.0}) {
      const double want = -r / 1.5;
      worst = std::max(worst, std::abs(drift_riesz(r, p, cfg, q) - want) / std::abs(want));
    }
    report(3, worst <= 2e-2, "1D 1.5-stable riesz drift = -r/1.5", fmt("max rel err %.2e", worst));
  }

  // 4. fractional Laplacian oracles
  {
    SmoothFunction1D cauchy;
    cauchy.f = [](double x) { return 1.0 / (std::numbers::pi * (1.0 + x * x)); };
    cauchy.f1 = [](double x) {
      const double w = 1.0 + x * x;
      return -2.0 * x / (std::numbers::pi * w * w);
    };
    cauchy.f2 = [](double x) {
      const double w = 1.0 + x * x;
      return (6.0 * x * x - 2.0) / (std::numbers::pi * w * w * w);
    };
    double worst = 0.0;
    for (double x : {0.0, 0.5, 1.0, 3.0}) {
      const double w = 1.0 + x * x;
      const double exact = (1.0 - x * x) / (std::numbers::pi * w * w);
      worst = std::max(worst, std::abs(frac_laplacian_1d(cauchy, x, 1.0, q) - exact));
    }
    SmoothFunction1D gauss;
    gauss.f = [](double x) { return std::exp(-x * x / 2.0); };
    gauss.f1 = [](double x) { return -x * std::exp(-x * x / 2.0); };
    gauss.f2 = [](double x) { return (x * x - 1.0) * std::exp(-x * x / 2.0); };
    double worst_g = 0.0;
    for (double alpha : {0.5, 1.5})
      for (double x : {0.0, 0.8, 2.5}) {
        const double ref = std::sqrt(2.0 / std::numbers::pi) *
                           integrate(
                               [&](double xi) {
                                 return std::pow(xi, alpha) * std::exp(-xi * xi / 2.0) *
                                        std::cos(xi * x);
                               },
                               0.0, 40.0, 1e-12, 1e-14, 48);
        worst_g = std::max(worst_g, std::abs(frac_laplacian_1d(gauss, x, alpha, q) - ref));
      }
    report(4, worst <= 1e-6 && worst_g <= 1e-4, "fractional Laplacian oracles",
           fmt("cauchy %.2e, gaussian %.2e", worst, worst_g));
  }

  // Shared tables for the remaining criteria.
  auto p_cauchy = std::make_shared<RadialPotential>(make_stable_target(1.0, 1));
  const ModelConfig cfg_cauchy(1, 1.0);
  auto t_cauchy = build(p_cauchy, cfg_cauchy, 1000.0, 160, q);
  auto p_log2 = std::make_shared<RadialPotential>(make_log_beta(2.0));
  const ModelConfig cfg_log2(1, 1.5);
  auto t_log2 = build(p_log2, cfg_log2, 1000.0, 160, q);

  // 5. invariance residual on the 5-bump family + wrong-drift control
  {
    std::vector<TestFunction> family;
    for (double c : {0.0, 1.0, 2.0, 4.0, 8.0}) family.push_back(make_bump(c));
    const auto r1 = invariance_residual(family, *p_cauchy, *t_cauchy, cfg_cauchy, q);
    const auto r2 = invariance_residual(family, *p_log2, *t_log2, cfg_log2, q);
    DriftTable wrong(cfg_cauchy);
    wrong.quad_used = q;
    for (std::size_t i = 0; i < t_cauchy->radii.size(); ++i) {
      wrong.radii.push_back(t_cauchy->radii[i]);
      wrong.values.push_back(-2.0 * t_cauchy->radii[i]);
    }
    wrong.tail_policy = TailPolicy::asymptotic_fit;
    wrong.attach_potential(p_cauchy);
    wrong.finalize();
    const auto rw = invariance_residual(family, *p_cauchy, wrong, cfg_cauchy, q);
    const bool pass = r1.max_residual <= 1e-2 && r2.max_residual <= 1e-2 &&
                      rw.max_residual >= 10.0 * r1.max_residual;
    report(5, pass, "invariance residual, both models + wrong-drift control",
           fmt("cauchy %.2e, log2 %.2e", r1.max_residual, r2.max_residual) +
               fmt(", control ratio %.1f", rw.max_residual / r1.max_residual));
  }

  // 6. dissipativity bounds on every assumption-passing builtin
  {
    bool all_pass = true;
    std::string detail;
    struct Case {
      std::shared_ptr<RadialPotential> p;
      ModelConfig cfg;
      std::shared_ptr<DriftTable> table;
    };
    auto p_log125 = std::make_shared<RadialPotential>(make_log_beta(1.25));
    auto p_pow = std::make_shared<RadialPotential>(make_power_beta(0.5));
    std::vector<Case> cases = {
        {p_cauchy, cfg_cauchy, t_cauchy},
        {p_log2, cfg_log2, t_log2},
        {p_log125, ModelConfig(1, 1.0), build(p_log125, ModelConfig(1, 1.0), 500.0, 96, q)},
        {p_pow, ModelConfig(2, 1.0), build(p_pow, ModelConfig(2, 1.0), 100.0, 72, q)},
    };
    DriftBoundFit cauchy_fit;
    for (const auto& c : cases) {
      if (!check_assumption_A(*c.p, c.cfg.d, c.cfg.alpha, q).passed) {
        all_pass = false;
        detail += c.p->name + " fails (A); ";
        continue;
      }
      const auto fit = fit_drift_bounds(*c.table, *c.p, c.cfg);
      if (c.p.get() == p_cauchy.get()) cauchy_fit = fit;
      if (!(fit.c2 > 0.0) || !std::isfinite(fit.c_upper)) {
        all_pass = false;
        detail += c.p->name + " c2<=0; ";
      }
    }
    const bool window = cauchy_fit.c2 >= 0.25 && cauchy_fit.c2 <= 0.45 &&
                        cauchy_fit.c_upper >= 0.25 && cauchy_fit.c_upper <= 0.45;
    report(6, all_pass && window, "drift bounds c2 > 0 on builtins, Cauchy window",
           detail + fmt("cauchy c2=%.3f c_upper=%.3f", cauchy_fit.c2, cauchy_fit.c_upper));
  }

  // 7. Lyapunov inequality
  {
    std::vector<double> radii;
    for (double r = 0.25; r <= 1024.0; r *= 2.0) radii.push_back(r);
    const auto l1 = lyapunov_check(0.5, *p_cauchy, *t_cauchy, cfg_cauchy, q, radii);
    const auto l2 = lyapunov_check(1.0, *p_log2, *t_log2, cfg_log2, q, radii);
    report(7, l1.pass && l2.pass, "Lyapunov C2 > 0 on both models",
           fmt("cauchy C2=%.3f, log2 C2=%.3f", l1.C2, l2.C2));
  }

  // 8. SDE stationarity: KS at the 1% level with the O(dt) allowance
  DistanceGauge gauge(p_cauchy, q);
  {
    SimPlan plan;
    plan.d = 1;
    plan.alpha = 1.0;
    plan.dt = 0.01;
    plan.t_final = 20.0;
    plan.n_chains = 10000;
    plan.seed = 2024;
    plan.thinning = 2000;
    plan.n_threads = threads;
    plan.init = InitLaw::target_sample;
    TargetSampler sampler(*p_cauchy, 1, q);
    const auto ens = simulate(plan, make_table_drift(t_cauchy), &sampler);
    const auto xs = ens.coordinate_slice(ens.times.size() - 1);
    const double ks = gauge.distance(xs, DistanceMetric::ks);
    // Euler discretization biases the law by O(dt); the allowance is dt itself.
    const double bar = ks_critical(xs.size(), 0.01) + plan.dt;
    report(8, ks <= bar, "stationarity KS vs Cauchy at 1% (+O(dt) allowance)",
           fmt("ks %.4f vs %.4f", ks, bar));
  }

  // 9. exponential decay witness across seeds
  {
    std::vector<double> lambdas;
    bool valid = true;
    for (std::uint64_t seed : {101, 202, 303}) {
      SimPlan plan;
      plan.d = 1;
      plan.alpha = 1.0;
      plan.dt = 0.01;
      plan.t_final = 20.0;
      plan.n_chains = 10000;
      plan.seed = seed;
      plan.thinning = 50;
      plan.n_threads = threads;
      plan.x0 = {50.0};
      const auto ens = simulate(plan, make_table_drift(t_cauchy));
      const auto rep = convergence_curve(ens, gauge, DistanceMetric::ks);
      valid = valid && rep.fit_valid;
      lambdas.push_back(rep.lambda);
    }
    const double mid = median(lambdas);
    double spread = 0.0;
    for (double l : lambdas) spread = std::max(spread, std::abs(l - mid) / mid);
    report(9, valid && spread <= 0.3, "lambda > 0, R2 >= 0.8, stable across 3 seeds",
           fmt("lambda ~ %.3f, spread %.1f%%", mid, 100.0 * spread));
  }

  // 10. heavy-tail escape benchmark
  {
    auto p_esc = std::make_shared<RadialPotential>(make_log_beta(1.25));
    const ModelConfig cfg_esc(1, 1.0);
    auto t_esc = build(p_esc, cfg_esc, 2000.0, 128, q);
    SimPlan plan;
    plan.d = 1;
    plan.alpha = 1.0;
    plan.dt = 0.01;
    plan.t_final = 400.0;
    plan.n_chains = 400;
    plan.seed = 77;
    plan.n_threads = threads;
    plan.x0 = {1000.0};
    const auto esc = escape_benchmark(plan, p_esc, make_table_drift(t_esc), 10.0);
    const bool pass = esc.medians_valid && esc.ratio >= 10.0;
    report(10, pass, "escape: stable beats Gaussian baseline >= 10x",
           fmt("ratio %.1f%s", esc.ratio, 0.0) +
               (esc.ratio_is_lower_bound ? " (lower bound, baseline censored)" : ""));
  }

  // 11. Holder regularity witness of the drift
  {
    bool pass = true;
    std::string detail;
    std::vector<double> scales;
    for (double h = 1e-3; h < 0.15; h *= 2.0) scales.push_back(h);
    for (double alpha : {1.25, 1.5, 1.75}) {
      auto p = std::make_shared<RadialPotential>(make_log_beta(2.0));
      const ModelConfig cfg(1, alpha);
      DriftGrid grid;
      grid.r_max = 6.0;
      grid.n_points = 384;
      const auto table = build_drift_table(p, cfg, grid, q, threads);
      const auto fit =
          holder_exponent([&](double r) { return table.radial(r); }, 0.0, 5.0, scales);
      const double bar = 2.0 - alpha - 0.15;
      if (!(fit.slope >= bar)) pass = false;
      detail += fmt("a=%.2f: %.2f ", alpha, fit.slope);
    }
    report(11, pass, "Holder exponent of drift >= 2 - alpha - 0.15", detail);
  }

  // 12. identity suite
  {
    const double zero_int = std::abs(zero_integral_residual(*p_cauchy, 1.0, q));
    const double b0 = drift_antiderivative(0.0, *p_cauchy, 1.0, q);
    const double banti = drift_antiderivative(-2.0, *p_cauchy, 1.0, q) +
                         drift_antiderivative(2.0, *p_cauchy, 1.0, q);
    const double c_err = std::abs(const_c(1, 1.0) - 1.0 / std::numbers::pi);
    const double C_err = std::abs(const_C(2, 1.0) - 1.0 / (2.0 * std::numbers::pi));
    const bool pass =
        zero_int <= 1e-3 && b0 == 0.0 && banti == 0.0 && c_err <= 1e-12 && C_err <= 1e-12;
    report(12, pass, "identities: zero-integral, b(0)=0, anti-symmetry, constants",
           fmt("zero-int %.1e, const err %.1e", zero_int, std::max(c_err, C_err)));
  }

  std::printf("%s: %d criteri%s failed\n", failures == 0 ? "OK" : "GATE FAILED", failures,
              failures == 1 ? "on" : "a");
  return failures == 0 ? 0 : 1;
}
