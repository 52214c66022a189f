#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <numbers>
#include <stdexcept>
#include <vector>

#include "fld/potentials.hpp"
#include "fld/quadrature.hpp"

namespace fld {

// Riesz-potential constant C_{d,s} = Gamma((d-s)/2) / (2^s pi^{d/2} Gamma(s/2)).
// Defined only in the transient regime 0 < s < d.
inline double const_C(int d, double s) {
  if (!(s > 0.0 && s < static_cast<double>(d)))
    throw std::domain_error("const_C: requires 0 < s < d (Green operator undefined otherwise)");
  return std::tgamma((d - s) / 2.0) /
         (std::pow(2.0, s) * std::pow(std::numbers::pi, d / 2.0) * std::tgamma(s / 2.0));
}

// Fractional-Laplacian constant
// c_{d,alpha} = alpha 2^{alpha-1} Gamma((d+alpha)/2) / (pi^{d/2} Gamma(1-alpha/2))
//             = |C_{d,-alpha}|.
inline double const_c(int d, double alpha) {
  if (!(alpha > 0.0 && alpha < 2.0)) throw std::domain_error("const_c: alpha must be in (0,2)");
  return alpha * std::pow(2.0, alpha - 1.0) * std::tgamma((d + alpha) / 2.0) /
         (std::pow(std::numbers::pi, d / 2.0) * std::tgamma(1.0 - alpha / 2.0));
}

// Smooth scalar function with analytic first and second derivatives and a
// declared polynomial growth bound |f(x)| <= M (1+|x|)^p.
struct SmoothFunction1D {
  std::function<double(double)> f;
  std::function<double(double)> f1;
  std::function<double(double)> f2;
  double growth_power = 0.0;  // p = 0 declares a bounded function
  double growth_const = 1.0;

  // Spot-checks derivative consistency by central differences.
  void validate(const std::vector<double>& probe = {-1.3, 0.2, 0.9, 2.7}) const {
    const double h = 1e-5;
    for (double x : probe) {
      const double fd1 = (f(x + h) - f(x - h)) / (2 * h);
      if (std::abs(fd1 - f1(x)) > 1e-5 * (1.0 + std::abs(f1(x)) + std::abs(f(x)) / h * 1e-6))
        throw std::invalid_argument("SmoothFunction1D: f1 inconsistent with f at x=" +
                                    std::to_string(x));
      const double fd2 = (f(x + h) - 2 * f(x) + f(x - h)) / (h * h);
      if (std::abs(fd2 - f2(x)) > 1e-3 * (1.0 + std::abs(f2(x))))
        throw std::invalid_argument("SmoothFunction1D: f2 inconsistent with f at x=" +
                                    std::to_string(x));
    }
  }
};

namespace detail {

// Integrates w(z) dz over [h, infinity): geometric panels to the truncation
// radius, then a power-decay probe for the tail, which is added to the value.
template <typename W>
inline double integrate_tail_probe(const W& w, double h, const QuadratureSpec& quad,
                                   const std::vector<double>& interior = {}) {
  const double R = quad.truncation_radius;
  std::vector<double> pts{h};
  for (double next = 4.0 * h; next < R; next *= 4.0) pts.push_back(next);
  pts.push_back(R);
  // Pin sharp features the geometric grid would straddle (and the panel
  // quadrature could then miss entirely).
  for (double b : interior)
    if (b > h && b < R) pts.push_back(b);
  std::sort(pts.begin(), pts.end());
  double value = integrate_split(w, pts, quad);
  const double f1 = std::abs(w(0.9 * R)), f2 = std::abs(w(R));
  if (f2 > 0.0 && f1 > f2) {
    const double p = std::log(f1 / f2) / std::log(1.0 / 0.9);
    if (p > 1.01) value += w(R) > 0 ? f2 * R / (p - 1.0) : -f2 * R / (p - 1.0);
  }
  return value;
}

}  // namespace detail

// Pointwise (-Delta)^{alpha/2} f(x) via the compensated jump integral in the
// symmetrized form
//   (-Delta)^{a/2} f(x) = -c_{1,a} int_0^inf (f(x+z)+f(x-z)-2f(x)) z^{-1-a} dz,
// with |z| <= h replaced by its second-order Taylor value f''(x) h^{2-a}/(2-a).
inline double frac_laplacian_1d(const SmoothFunction1D& f, double x, double alpha,
                                const QuadratureSpec& quad) {
  quad.validate();
  if (!(alpha > 0.0 && alpha < 2.0))
    throw std::domain_error("frac_laplacian_1d: alpha must be in (0,2)");
  if (f.growth_power > 0.0 && f.growth_power >= alpha)
    throw std::domain_error("frac_laplacian_1d: growth power >= alpha, integral diverges");

  const double h = 1e-3 * (1.0 + std::abs(x));
  const double inner = f.f2(x) * std::pow(h, 2.0 - alpha) / (2.0 - alpha);
  const double fx = f.f(x);
  const auto sym = [&](double z) {
    return (f.f(x + z) + f.f(x - z) - 2.0 * fx) * std::pow(z, -1.0 - alpha);
  };
  // Jumps of size ~|x| land back on the bulk of f, so the truncation radius
  // has to scale with the evaluation point.
  QuadratureSpec q = quad;
  q.truncation_radius = std::max(quad.truncation_radius, 200.0 * (1.0 + std::abs(x)));
  // At z = |x| the backward jump x - z revisits the origin, where a localized
  // f has its bulk; pin that neighborhood so the panels resolve it.
  const double ax = std::abs(x);
  std::vector<double> pins;
  if (ax > 8.0 * h)
    pins = {0.5 * ax, 0.9 * ax, ax - 1.0, ax, ax + 1.0, 1.1 * ax, 2.0 * ax};
  const double outer = detail::integrate_tail_probe(sym, h, q, pins);
  return -const_c(1, alpha) * (inner + outer);
}

enum class AngularWeight { one, cosine };

// |S_{d-2}| int_0^pi w(theta) sin^{d-2}(theta) (r^2+s^2-2 r s cos theta)^{-q/2} dtheta,
// the polar-angle reduction of the d-dimensional kernel |x-y|^{-q} with |x|=r,
// |y|=s; w = 1 or cos(theta). For d=1 this degenerates to the two-point sum.
// Symmetric in (r,s) by construction.
inline double angular_kernel(int d, double q, double r, double s, AngularWeight weight,
                             const QuadratureSpec& quad = {}) {
  if (d < 1 || r < 0 || s < 0) throw std::invalid_argument("angular_kernel: bad arguments");
  if (r == s && (r != 0.0) && q >= d - 1) {
    // theta^{d-2-q} near 0 is non-integrable for q >= d-1 when the radial
    // singularity sits exactly on the shell.
    throw std::domain_error("angular_kernel: non-integrable angular singularity at r = s");
  }
  const double wpi = (weight == AngularWeight::cosine) ? -1.0 : 1.0;
  if (d == 1) {
    return std::pow(std::abs(r - s), -q) + wpi * std::pow(r + s, -q);
  }
  if (r == 0.0 || s == 0.0) {
    // Kernel is constant in theta.
    const double k = std::pow(r * r + s * s, -q / 2.0);
    const auto wfun = [&](double t) {
      const double w = (weight == AngularWeight::cosine) ? std::cos(t) : 1.0;
      return w * std::pow(std::sin(t), static_cast<double>(d - 2));
    };
    return sphere_surface(d - 1) * k * integrate(wfun, 0.0, std::numbers::pi, quad);
  }
  const auto integrand = [&](double t) {
    const double w = (weight == AngularWeight::cosine) ? std::cos(t) : 1.0;
    // (r-s)^2 + 4 r s sin^2(t/2): exact and nonnegative, unlike the law of
    // cosines form, which cancels catastrophically for s near r.
    const double st = std::sin(0.5 * t);
    const double dist2 = (r - s) * (r - s) + 4.0 * r * s * st * st;
    return w * std::pow(std::sin(t), static_cast<double>(d - 2)) * std::pow(dist2, -q / 2.0);
  };
  // Near theta = 0 the kernel scale is |r-s|/sqrt(rs); grade the panels there.
  double tstar = std::abs(r - s) / std::sqrt(r * s);
  tstar = std::clamp(tstar, 1e-12, std::numbers::pi / 4);
  std::vector<double> pts{0.0};
  for (double t = tstar; t < std::numbers::pi / 2; t *= 8.0) pts.push_back(t);
  pts.push_back(std::numbers::pi);
  return sphere_surface(d - 1) * integrate_split(integrand, pts, quad);
}

// Green-operator action on a radial integrand:
//   C_{d,2-a} int_0^inf h(s) s^{d-1} K_one(r,s) ds,
// split at the kernel shell s = r. Requires d > 2-alpha (transience).
inline double riesz_potential_radial(const std::function<double(double)>& h, int d, double alpha,
                                     double r, const QuadratureSpec& quad) {
  quad.validate();
  if (!(static_cast<double>(d) > 2.0 - alpha))
    throw std::domain_error("riesz_potential_radial: requires d > 2 - alpha");
  const double q = d - 2.0 + alpha;
  const double C = const_C(d, 2.0 - alpha);
  const auto integrand = [&](double s) {
    if (s == r) s = std::nextafter(s, 2.0 * s);  // node rounded onto the shell
    return h(s) * std::pow(s, d - 1) * angular_kernel(d, q, r, s, AngularWeight::one, quad);
  };
  const double R = quad.truncation_radius;
  std::vector<double> pts{0.0};
  if (r > 0.0 && r < R) {
    const double delta = quad.singularity_split;
    if (r * (1.0 - delta) > 0.0) pts.push_back(r * (1.0 - delta));
    pts.push_back(r);  // GK nodes are interior: the shell itself is never evaluated
    pts.push_back(r * (1.0 + delta));
  }
  double next = std::max(1.0, 2.0 * r + 1.0);
  while (next < R) {
    if (next > pts.back()) pts.push_back(next);
    next *= 4.0;
  }
  pts.push_back(R);
  double value = integrate_split(integrand, pts, quad);
  // Tail probe as in the compensated integrals.
  const double f1 = std::abs(integrand(0.9 * R)), f2 = std::abs(integrand(R));
  if (f2 > 0.0 && f1 > f2) {
    const double p = std::log(f1 / f2) / std::log(1.0 / 0.9);
    if (p > 1.01) value += (integrand(R) > 0 ? 1.0 : -1.0) * f2 * R / (p - 1.0);
  }
  return C * value;
}

// Smooth function on R^d presented through its radial profile g(|x|).
struct RadialProfileND {
  std::function<double(double)> g;   // g(r)
  std::function<double(double)> g1;  // g'(r)
  std::function<double(double)> g2;  // g''(r)
  double growth_power = 0.0;
  double growth_const = 1.0;
};

// (-Delta)^{alpha/2} F(x) for radial F(x) = g(|x|), evaluated at |x| = r, via
// the polar decomposition radial x angular:
//   -c_{d,a} int_0^inf rho^{-1-a} S(rho) drho,
//   S(rho) = int_{S^{d-1}} (g(|x + rho w|) - g(r)) dw.
// S(rho) ~ (|S^{d-1}|/(2d)) Lap F(x) rho^2 near 0 supplies the inner Taylor term.
inline double frac_laplacian_radial_nd(const RadialProfileND& f, int d, double r, double alpha,
                                       const QuadratureSpec& quad) {
  quad.validate();
  if (!(alpha > 0.0 && alpha < 2.0))
    throw std::domain_error("frac_laplacian_radial_nd: alpha must be in (0,2)");
  if (f.growth_power > 0.0 && f.growth_power >= alpha)
    throw std::domain_error("frac_laplacian_radial_nd: growth power >= alpha, integral diverges");
  if (d == 1) {
    SmoothFunction1D f1{[&](double x) { return f.g(std::abs(x)); },
                        [&](double x) { return x < 0 ? -f.g1(-x) : f.g1(x); },
                        [&](double x) { return f.g2(std::abs(x)); }, f.growth_power,
                        f.growth_const};
    return frac_laplacian_1d(f1, r, alpha, quad);
  }
  const double surface = sphere_surface(d);
  const double gr = f.g(r);
  const auto sphere_mean = [&](double rho) {
    // int over S^{d-1} of g(sqrt(r^2+rho^2+2 r rho cos t)) - g(r).
    const auto ang = [&](double t) {
      const double rr = std::sqrt(std::max(0.0, r * r + rho * rho + 2.0 * r * rho * std::cos(t)));
      return std::pow(std::sin(t), static_cast<double>(d - 2)) * (f.g(rr) - gr);
    };
    return sphere_surface(d - 1) * integrate(ang, 0.0, std::numbers::pi, quad);
  };
  const double h = 1e-3 * (1.0 + r);
  const double lap = f.g2(r) + (r > 0 ? (d - 1) * f.g1(r) / r : (d - 1) * f.g2(r));
  const double inner = surface / (2.0 * d) * lap * std::pow(h, 2.0 - alpha) / (2.0 - alpha);
  const auto radial = [&](double rho) { return sphere_mean(rho) * std::pow(rho, -1.0 - alpha); };
  const double outer = detail::integrate_tail_probe(radial, h, quad);
  return -const_c(d, alpha) * (inner + outer);
}

}  // namespace fld
