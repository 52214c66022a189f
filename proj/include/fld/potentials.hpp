#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <memory>
#include <numbers>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "fld/quadrature.hpp"
#include "fld/stable_density.hpp"

namespace fld {

class parameter_error : public std::invalid_argument {
 public:
  explicit parameter_error(const std::string& what) : std::invalid_argument(what) {}
};

// Radial potential V(r) with analytic derivatives. V'' is required only by the
// antiderivative drift branch; potentials without it carry has_d2 = false.
struct RadialPotential {
  std::string name;
  std::vector<std::pair<std::string, double>> params;
  std::function<double(double)> eval;  // V(r), r >= 0
  std::function<double(double)> d1;    // V'(r)
  std::function<double(double)> d2;    // V''(r)
  bool has_d2 = false;

  double operator()(double r) const { return eval(r); }

  // FNV-1a over the identifying data; used to pin cached drift tables.
  std::uint64_t hash() const {
    std::ostringstream os;
    os << name;
    for (const auto& [k, v] : params) {
      os.precision(17);
      os << '|' << k << '=' << v;
    }
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (char c : os.str()) {
      h ^= static_cast<unsigned char>(c);
      h *= 0x100000001b3ULL;
    }
    return h;
  }
};

enum class PotentialKind { power_beta, log_beta, polylog_beta, stable_target };

inline PotentialKind potential_kind_from_string(const std::string& s) {
  if (s == "power_beta") return PotentialKind::power_beta;
  if (s == "log_beta") return PotentialKind::log_beta;
  if (s == "polylog_beta") return PotentialKind::polylog_beta;
  if (s == "stable_target") return PotentialKind::stable_target;
  throw parameter_error("unknown potential kind: " + s);
}

inline std::string to_string(PotentialKind k) {
  switch (k) {
    case PotentialKind::power_beta:
      return "power_beta";
    case PotentialKind::log_beta:
      return "log_beta";
    case PotentialKind::polylog_beta:
      return "polylog_beta";
    case PotentialKind::stable_target:
      return "stable_target";
  }
  return "?";
}

// Surface area of the unit sphere S^{d-1} in R^d.
inline double sphere_surface(int d) {
  if (d < 1) throw std::invalid_argument("sphere_surface: d must be >= 1");
  return 2.0 * std::pow(std::numbers::pi, d / 2.0) / std::tgamma(d / 2.0);
}

// V(r) = (1+r^2)^beta, beta > 0.
inline RadialPotential make_power_beta(double beta) {
  if (!(beta > 0)) throw parameter_error("power_beta: requires beta > 0");
  RadialPotential p;
  p.name = "power_beta";
  p.params = {{"beta", beta}};
  p.eval = [beta](double r) { return std::pow(1.0 + r * r, beta); };
  p.d1 = [beta](double r) { return 2.0 * beta * r * std::pow(1.0 + r * r, beta - 1.0); };
  p.d2 = [beta](double r) {
    const double q = 1.0 + r * r;
    return 2.0 * beta * std::pow(q, beta - 2.0) * (q + 2.0 * r * r * (beta - 1.0));
  };
  p.has_d2 = true;
  return p;
}

// V(r) = beta * log(1+r^2) with an optional additive offset (so shifted
// variants like the Cauchy potential reuse the same derivatives).
inline RadialPotential make_log_beta(double beta, double offset = 0.0,
                                     const std::string& name = "log_beta") {
  if (!(beta > 0)) throw parameter_error("log_beta: requires beta > 0");
  RadialPotential p;
  p.name = name;
  p.params = {{"beta", beta}};
  if (offset != 0.0) p.params.emplace_back("offset", offset);
  p.eval = [beta, offset](double r) { return beta * std::log1p(r * r) + offset; };
  p.d1 = [beta](double r) { return 2.0 * beta * r / (1.0 + r * r); };
  p.d2 = [beta](double r) {
    const double q = 1.0 + r * r;
    return 2.0 * beta * (1.0 - r * r) / (q * q);
  };
  p.has_d2 = true;
  return p;
}

// V(r) = log^beta(1+r^2), beta > 1.
inline RadialPotential make_polylog_beta(double beta) {
  if (!(beta > 1)) throw parameter_error("polylog_beta: requires beta > 1");
  RadialPotential p;
  p.name = "polylog_beta";
  p.params = {{"beta", beta}};
  p.eval = [beta](double r) { return std::pow(std::log1p(r * r), beta); };
  p.d1 = [beta](double r) {
    if (r == 0.0) return 0.0;
    const double L = std::log1p(r * r);
    return beta * std::pow(L, beta - 1.0) * 2.0 * r / (1.0 + r * r);
  };
  p.d2 = [beta](double r) {
    if (r == 0.0) return 0.0;
    const double q = 1.0 + r * r;
    const double L = std::log1p(r * r);
    const double u = 2.0 * r / q;  // (log(1+r^2))'
    return beta * ((beta - 1.0) * std::pow(L, beta - 2.0) * u * u +
                   std::pow(L, beta - 1.0) * 2.0 * (1.0 - r * r) / (q * q));
  };
  p.has_d2 = true;
  return p;
}

// V = -log of the standard isotropic alpha-stable density in R^d.
// Closed form for alpha = 1 (isotropic Cauchy) in any d; numeric Fourier
// inversion for general alpha in d = 1.
inline RadialPotential make_stable_target(double alpha, int d) {
  if (!(alpha > 0 && alpha < 2)) throw parameter_error("stable_target: alpha must be in (0,2)");
  if (d < 1) throw parameter_error("stable_target: d must be >= 1");
  if (alpha == 1.0) {
    // p(r) = Gamma((d+1)/2) / pi^{(d+1)/2} * (1+r^2)^{-(d+1)/2}
    const double log_c =
        std::lgamma((d + 1) / 2.0) - (d + 1) / 2.0 * std::log(std::numbers::pi);
    RadialPotential p = make_log_beta((d + 1) / 2.0, -log_c, "stable_target");
    p.params = {{"alpha", alpha}, {"d", static_cast<double>(d)}};
    return p;
  }
  if (d != 1)
    throw parameter_error("stable_target: general alpha is only tabulated for d = 1");
  auto density = std::make_shared<StableDensity1D>(alpha);
  RadialPotential p;
  p.name = "stable_target";
  p.params = {{"alpha", alpha}, {"d", 1.0}};
  p.eval = [density](double r) { return -std::log(density->pdf(r)); };
  p.d1 = [density](double r) { return -density->dpdf(r) / density->pdf(r); };
  p.d2 = [density](double r) {
    const double f = density->pdf(r), f1 = density->dpdf(r), f2 = density->d2pdf(r);
    return (f1 * f1 - f * f2) / (f * f);
  };
  p.has_d2 = true;
  return p;
}

inline RadialPotential make_builtin_potential(PotentialKind kind,
                                              const std::vector<double>& params) {
  switch (kind) {
    case PotentialKind::power_beta:
      if (params.size() != 1) throw parameter_error("power_beta: expects one parameter (beta)");
      return make_power_beta(params[0]);
    case PotentialKind::log_beta:
      if (params.size() != 1) throw parameter_error("log_beta: expects one parameter (beta)");
      return make_log_beta(params[0]);
    case PotentialKind::polylog_beta:
      if (params.size() != 1) throw parameter_error("polylog_beta: expects one parameter (beta)");
      return make_polylog_beta(params[0]);
    case PotentialKind::stable_target:
      if (params.size() != 2)
        throw parameter_error("stable_target: expects two parameters (alpha, d)");
      return make_stable_target(params[0], static_cast<int>(params[1]));
  }
  throw parameter_error("make_builtin_potential: unknown kind");
}

struct AssumptionReport {
  bool condition_1_1 = false;     // limsup e^{-V(r)} r^{d+alpha} < infinity
  double condition_1_1_witness = 0.0;  // max over the tail half of the grid
  double r0_estimate = 0.0;       // sup{r : V'(r) <= 0}
  double integral_abs = 0.0;      // int e^{-V} |V'| r^d dr
  double integral_signed = 0.0;   // int e^{-V} V' r^d dr
  double branch_ii_limsup = 0.0;  // running max of |x^3 e^{-V}(V'^2 - V'')| on the tail
  double branch_ii_liminf = 0.0;  // running min of x^3 e^{-V}(V'^2 - V'') on the tail
  bool passed = false;
};

// Numerically probes Assumption-style conditions on a geometric radius grid up
// to the quadrature truncation radius. Asymptotic statements are reported as
// witnesses over the tail half of the grid, not claimed as proofs.
inline AssumptionReport check_assumption_A(const RadialPotential& p, int d, double alpha,
                                           const QuadratureSpec& quad) {
  quad.validate();
  if (d < 1 || !(alpha > 0 && alpha < 2))
    throw std::invalid_argument("check_assumption_A: need d >= 1 and alpha in (0,2)");
  AssumptionReport rep;

  const int n_grid = 256;
  const double r_lo = 1e-3, r_hi = quad.truncation_radius;
  std::vector<double> grid(n_grid);
  for (int i = 0; i < n_grid; ++i)
    grid[i] = r_lo * std::pow(r_hi / r_lo, static_cast<double>(i) / (n_grid - 1));

  // Condition on e^{-V(r)} r^{d+alpha}: witness = max over the tail half,
  // boundedness decided by the log-log trend over the same window.
  {
    std::vector<double> lx, ly;
    double witness = 0.0;
    for (int i = n_grid / 2; i < n_grid; ++i) {
      const double w = std::exp(-p(grid[i])) * std::pow(grid[i], d + alpha);
      witness = std::max(witness, w);
      if (w > 0) {
        lx.push_back(std::log(grid[i]));
        ly.push_back(std::log(w));
      }
    }
    rep.condition_1_1_witness = witness;
    if (lx.size() >= 8) {
      rep.condition_1_1 = linear_fit(lx, ly).slope <= 0.01 && std::isfinite(witness);
    } else {
      rep.condition_1_1 = std::isfinite(witness);  // witness underflowed to ~0: decays fast
    }
  }

  // r0 = sup{r : V'(r) <= 0}: last sign change on the grid, refined by bisection.
  {
    double r0 = 0.0;
    for (int i = 0; i + 1 < n_grid; ++i) {
      if (p.d1(grid[i]) <= 0.0 && p.d1(grid[i + 1]) > 0.0) {
        double a = grid[i], b = grid[i + 1];
        while (b - a > 1e-8) {
          const double m = 0.5 * (a + b);
          (p.d1(m) <= 0.0 ? a : b) = m;
        }
        r0 = 0.5 * (a + b);
      } else if (p.d1(grid[i + 1]) <= 0.0) {
        r0 = grid[i + 1];
      }
    }
    rep.r0_estimate = r0;
  }

  // Signed-integral conditions (branch i normalization uses r^d).
  {
    const auto f_abs = [&](double r) { return std::exp(-p(r)) * std::abs(p.d1(r)) * std::pow(r, d); };
    const auto f_sgn = [&](double r) { return std::exp(-p(r)) * p.d1(r) * std::pow(r, d); };
    rep.integral_abs = integrate_to_infinity(f_abs, 0.0, quad);
    rep.integral_signed = integrate_to_infinity(f_sgn, 0.0, quad);
  }

  // Branch (ii) witnesses: x^3 e^{-V} (V'^2 - V'') on the tail half.
  if (p.has_d2) {
    double hi = -HUGE_VAL, lo = HUGE_VAL;
    for (int i = n_grid / 2; i < n_grid; ++i) {
      const double r = grid[i];
      const double w = r * r * r * std::exp(-p(r)) * (p.d1(r) * p.d1(r) - p.d2(r));
      hi = std::max(hi, std::abs(w));
      lo = std::min(lo, w);
    }
    rep.branch_ii_limsup = hi;
    rep.branch_ii_liminf = lo;
  }

  const bool branch_i = d > 2.0 - alpha;
  if (branch_i) {
    rep.passed = rep.condition_1_1 && std::isfinite(rep.r0_estimate) &&
                 std::isfinite(rep.integral_abs) && rep.integral_signed > 0.0;
  } else {
    rep.passed = rep.condition_1_1 && p.has_d2 && std::isfinite(rep.branch_ii_limsup) &&
                 rep.branch_ii_liminf >= -1e-10 * (1.0 + rep.branch_ii_limsup);
  }
  return rep;
}

// Z = S_{d-1} int_0^infty e^{-V(r)} r^{d-1} dr.
inline double normalizing_constant(const RadialPotential& p, int d, const QuadratureSpec& quad) {
  quad.validate();
  double tail = 0.0;
  const auto f = [&](double r) { return std::exp(-p(r)) * std::pow(r, d - 1); };
  const double radial = integrate_to_infinity(f, 0.0, quad, &tail);
  if (!std::isfinite(radial) || radial <= 0.0)
    throw numeric_error("normalizing_constant: integral did not converge");
  return sphere_surface(d) * radial;
}

}  // namespace fld
