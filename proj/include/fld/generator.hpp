#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

#include "fld/drift.hpp"
#include "fld/frac_ops.hpp"
#include "fld/potentials.hpp"
#include "fld/quadrature.hpp"

namespace fld {

// Compactly supported smooth test function on R (the d = 1 face of C_c^infty).
struct TestFunction {
  SmoothFunction1D func;
  double support_radius = HUGE_VAL;  // |x - center| >= support_radius => f = f' = 0
  double center = 0.0;
  std::string label;

  void validate_support() const {
    if (!std::isfinite(support_radius)) return;
    for (int k = 1; k <= 10; ++k) {
      const double x = center + (support_radius + 0.1 * k) * (k % 2 ? 1.0 : -1.0);
      if (func.f(x) != 0.0 || func.f1(x) != 0.0)
        throw std::logic_error("TestFunction: nonzero outside declared support");
    }
  }
};

// C^infty bump phi((x-c)/rho) with phi(u) = exp(-1/(1-u^2)) on |u|<1.
inline TestFunction make_bump(double center, double rho = 1.0) {
  const auto phi = [](double u) {
    return std::abs(u) < 1.0 ? std::exp(-1.0 / (1.0 - u * u)) : 0.0;
  };
  const auto dphi = [phi](double u) {
    if (std::abs(u) >= 1.0) return 0.0;
    const double w = 1.0 - u * u;
    return phi(u) * (-2.0 * u / (w * w));
  };
  const auto d2phi = [phi](double u) {
    if (std::abs(u) >= 1.0) return 0.0;
    const double w = 1.0 - u * u;
    const double a = 2.0 * u / (w * w);
    return phi(u) * (a * a - 2.0 / (w * w) - 8.0 * u * u / (w * w * w));
  };
  TestFunction t;
  t.center = center;
  t.support_radius = rho;
  t.label = "bump@" + std::to_string(center);
  t.func.f = [phi, center, rho](double x) { return phi((x - center) / rho); };
  t.func.f1 = [dphi, center, rho](double x) { return dphi((x - center) / rho) / rho; };
  t.func.f2 = [d2phi, center, rho](double x) { return d2phi((x - center) / rho) / (rho * rho); };
  t.func.growth_power = 0.0;
  return t;
}

// Lf(x) = -(-Delta)^{alpha/2} f(x) + b(x) f'(x) for the d = 1 model.
inline double generator_apply(const TestFunction& f, double x, const DriftTable& drift,
                              const ModelConfig& cfg, const QuadratureSpec& quad) {
  if (cfg.d != 1) throw std::invalid_argument("generator_apply: test functions are 1D");
  if (f.func.growth_power > 0.0 && f.func.growth_power >= cfg.alpha)
    throw std::domain_error("generator_apply: growth power >= alpha");
  const double nonlocal = -frac_laplacian_1d(f.func, x, cfg.alpha, quad);
  const double b = x >= 0 ? drift.radial(x) : -drift.radial(-x);
  return nonlocal + b * f.func.f1(x);
}

struct InvarianceResult {
  std::vector<std::string> labels;
  std::vector<double> residuals;  // normalized by max(1, sup|Lf|)
  double max_residual = 0.0;
};

// mu(Lf) for each test function: the defining identity of invariance. The
// integral runs over the full line, so the region outside the support (where
// only the nonlocal term survives) is included.
inline InvarianceResult invariance_residual(const std::vector<TestFunction>& family,
                                            const RadialPotential& p, const DriftTable& drift,
                                            const ModelConfig& cfg, const QuadratureSpec& quad) {
  if (family.empty()) throw std::invalid_argument("invariance_residual: empty family");
  const double Z = normalizing_constant(p, cfg.d, quad);
  InvarianceResult res;
  for (const auto& f : family) {
    f.validate_support();
    double sup_lf = 0.0;
    const auto integrand = [&](double x) {
      const double lf = generator_apply(f, x, drift, cfg, quad);
      sup_lf = std::max(sup_lf, std::abs(lf));
      return lf * std::exp(-p(std::abs(x)));
    };
    // Lf decays like |x|^{-1-alpha} off the support and e^{-V} is integrable;
    // a moderate outer radius suffices.
    const double R = std::min(quad.truncation_radius, 50.0 * (1.0 + std::abs(f.center)));
    QuadratureSpec outer = quad;
    outer.rel_tol = std::max(quad.rel_tol, 1e-6);
    outer.abs_tol = std::max(quad.abs_tol, 1e-8);
    std::vector<double> pts;
    for (double t : {-R, -10.0, f.center - f.support_radius, f.center, f.center + f.support_radius,
                     10.0, R})
      pts.push_back(std::clamp(t, -R, R));
    std::sort(pts.begin(), pts.end());
    const double integral = integrate_split(integrand, pts, outer);
    res.labels.push_back(f.label);
    res.residuals.push_back(std::abs(integral / Z) / std::max(1.0, sup_lf));
  }
  res.max_residual = *std::max_element(res.residuals.begin(), res.residuals.end());
  return res;
}

struct LyapunovResult {
  double C1 = 0.0;
  double C2 = 0.0;
  bool pass = false;
  bool warning_small_radii = false;  // max radius < 10: tail behavior unprobed
  std::vector<double> radii;
  std::vector<double> lv0;  // LV0 at each radius
};

// Checks LV0 <= C1 - C2 e^{V}/|x|^{d+alpha} V0 with V0 = (1+|x|^2)^{beta/2}:
// fits C1 on the core radii and C2 on the tail subset (r >= 10), where the
// inequality has content. pass requires LV0 < 0 on the tail with C2 > 0.
inline LyapunovResult lyapunov_check(double beta, const RadialPotential& p,
                                     const DriftTable& drift, const ModelConfig& cfg,
                                     const QuadratureSpec& quad,
                                     const std::vector<double>& radii) {
  if (!(beta > 0.0 && beta < cfg.alpha))
    throw std::domain_error("lyapunov_check: requires 0 < beta < alpha");
  RadialProfileND v0;
  v0.g = [beta](double r) { return std::pow(1.0 + r * r, beta / 2.0); };
  v0.g1 = [beta](double r) { return beta * r * std::pow(1.0 + r * r, beta / 2.0 - 1.0); };
  v0.g2 = [beta](double r) {
    const double q = 1.0 + r * r;
    return beta * std::pow(q, beta / 2.0 - 2.0) * (q + (beta - 2.0) * r * r);
  };
  v0.growth_power = beta;

  LyapunovResult out;
  out.radii = radii;
  double core_max = 0.0;
  double c2 = HUGE_VAL;
  bool tail_negative = true;
  bool has_tail = false;
  for (double r : radii) {
    const double nonlocal = -frac_laplacian_radial_nd(v0, cfg.d, r, cfg.alpha, quad);
    const double lv0 = nonlocal + drift.radial(r) * v0.g1(r);
    out.lv0.push_back(lv0);
    if (r < 10.0) {
      core_max = std::max(core_max, lv0);
    } else {
      has_tail = true;
      if (lv0 >= 0.0) tail_negative = false;
      const double w = std::exp(p(r)) / std::pow(r, cfg.d + cfg.alpha) * v0.g(r);
      c2 = std::min(c2, -lv0 / w);
    }
  }
  out.C1 = std::max(0.0, core_max) + 1.0;
  out.C2 = has_tail ? c2 : 0.0;
  out.warning_small_radii = !has_tail;
  out.pass = has_tail && tail_negative && out.C2 > 0.0;
  return out;
}

}  // namespace fld
