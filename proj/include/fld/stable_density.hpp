#pragma once

#include <cmath>
#include <numbers>

#include "fld/quadrature.hpp"

namespace fld {

// Density of the standard 1D symmetric alpha-stable law, CF exp(-|xi|^alpha),
// together with its first two derivatives. Moderate |x| uses direct cosine
// inversion; large |x| switches to the heavy-tail series
//   p(x) = (1/pi) sum_k (-1)^{k-1} Gamma(k a + 1)/k! sin(k pi a / 2) x^{-k a - 1}.
class StableDensity1D {
 public:
  explicit StableDensity1D(double alpha, double switch_radius = 8.0)
      : alpha_(alpha), switch_radius_(switch_radius) {
    if (!(alpha > 0.0 && alpha < 2.0))
      throw std::invalid_argument("StableDensity1D: alpha must be in (0,2)");
  }

  double alpha() const { return alpha_; }

  double pdf(double x) const { return eval(std::abs(x), 0); }
  // Derivative in x for x >= 0 (odd/even continuation handled by the caller).
  double dpdf(double x) const {
    const double v = eval(std::abs(x), 1);
    return x < 0 ? -v : v;
  }
  double d2pdf(double x) const { return eval(std::abs(x), 2); }

 private:
  double eval(double x, int order) const {
    return x > switch_radius_ ? tail_series(x, order) : inversion(x, order);
  }

  double inversion(double x, int order) const {
    // e^{-xi^alpha} is negligible past this point for every alpha we serve.
    const double xi_max = std::pow(745.0, 1.0 / alpha_);
    QuadratureSpec quad;
    quad.rel_tol = 1e-11;
    quad.abs_tol = 1e-13;
    const auto integrand = [&](double xi) {
      const double damp = std::exp(-std::pow(xi, alpha_));
      switch (order) {
        case 0:
          return std::cos(x * xi) * damp;
        case 1:
          return -xi * std::sin(x * xi) * damp;
        default:
          return -xi * xi * std::cos(x * xi) * damp;
      }
    };
    // Panel length tracks the oscillation so adaptivity stays local.
    const double panel = x > 1.0 ? 2.0 * std::numbers::pi / x : xi_max;
    std::vector<double> pts;
    for (double p = 0.0; p < xi_max; p += panel) pts.push_back(p);
    pts.push_back(xi_max);
    return integrate_split(integrand, pts, quad) / std::numbers::pi;
  }

  double tail_series(double x, int order) const {
    double sum = 0.0, prev_term = HUGE_VAL;
    for (int k = 1; k <= 24; ++k) {
      const double ka = k * alpha_;
      double mag = std::exp(std::lgamma(ka + 1.0) - std::lgamma(k + 1.0) - (ka + 1.0) * std::log(x));
      double coeff = std::sin(k * std::numbers::pi * alpha_ / 2.0);
      if (order == 1) mag *= (ka + 1.0) / x;
      if (order == 2) mag *= (ka + 1.0) * (ka + 2.0) / (x * x);
      // Stop at the smallest term of the asymptotic series. Compare bare
      // magnitudes: sin(k pi a/2) vanishes for some k (all even k at a = 1)
      // and a zero term must not end the summation.
      if (mag > prev_term) break;
      sum += ((k % 2 == 1) ? 1.0 : -1.0) * coeff * mag;
      prev_term = mag;
      if (mag < 1e-16 * std::abs(sum)) break;
    }
    double sign = 1.0;
    if (order == 1) sign = -1.0;
    return sign * sum / std::numbers::pi;
  }

  double alpha_;
  double switch_radius_;
};

}  // namespace fld
