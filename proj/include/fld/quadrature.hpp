#pragma once

#include <cmath>
#include <cstddef>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

namespace fld {

// Thrown when an integral fails to converge or is structurally divergent.
class numeric_error : public std::runtime_error {
 public:
  explicit numeric_error(const std::string& what) : std::runtime_error(what) {}
};

struct QuadratureSpec {
  double rel_tol = 1e-9;
  double abs_tol = 1e-11;
  double truncation_radius = 1e4;   // outer cutoff for improper integrals
  double singularity_split = 0.1;   // half-width fraction around kernel singularities
  int angular_nodes = 32;           // initial node count for angular quadrature
  int max_refinements = 48;

  void validate() const {
    if (rel_tol <= 0 || abs_tol <= 0)
      throw std::invalid_argument("QuadratureSpec: tolerances must be positive");
    if (truncation_radius <= 0)
      throw std::invalid_argument("QuadratureSpec: truncation_radius must be positive");
    if (singularity_split <= 0 || singularity_split >= 1)
      throw std::invalid_argument("QuadratureSpec: singularity_split must be in (0,1)");
    if (angular_nodes < 1 || max_refinements < 1)
      throw std::invalid_argument("QuadratureSpec: node/refinement counts must be positive");
  }

  QuadratureSpec tightened(double factor) const {
    QuadratureSpec q = *this;
    q.rel_tol *= factor;
    q.abs_tol *= factor;
    return q;
  }
};

namespace detail {

// Gauss-Kronrod 7-15 nodes/weights on [-1,1].
inline constexpr double kGK15Nodes[15] = {
    -0.991455371120812639206854697526329,
    -0.949107912342758524526189684047851,
    -0.864864423359769072789712788640926,
    -0.741531185599394439863864773280788,
    -0.586087235467691130294144838258730,
    -0.405845151377397166906606412076961,
    -0.207784955007898467600689403773245,
    0.0,
    0.207784955007898467600689403773245,
    0.405845151377397166906606412076961,
    0.586087235467691130294144838258730,
    0.741531185599394439863864773280788,
    0.864864423359769072789712788640926,
    0.949107912342758524526189684047851,
    0.991455371120812639206854697526329};

inline constexpr double kK15Weights[15] = {
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
    0.204432940075298892414161999234649,
    0.190350578064785409913256402421014,
    0.169004726639267902826583426598550,
    0.140653259715525918745189590510238,
    0.104790010322250183839876322541518,
    0.063092092629978553290700663189204,
    0.022935322010529224963732008058970};

// Gauss-7 weights aligned with the odd Kronrod nodes.
inline constexpr double kG7Weights[7] = {
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
    0.381830050505118944950369775488975,
    0.279705391489276667901467771423780,
    0.129484966168869693270611432679082};

template <typename F>
inline void gk15(const F& f, double a, double b, double& value, double& err) {
  const double c = 0.5 * (a + b);
  const double h = 0.5 * (b - a);
  double k = 0.0, g = 0.0;
  for (int i = 0; i < 15; ++i) {
    const double fx = f(c + h * kGK15Nodes[i]);
    k += kK15Weights[i] * fx;
    if (i % 2 == 1) g += kG7Weights[i / 2] * fx;
  }
  value = k * h;
  err = std::abs((k - g) * h);
  // Conservative sharpening of the embedded estimate.
  if (err > 0.0) err = std::pow(200.0 * err, 1.5);
  if (!std::isfinite(err)) err = std::abs(value);
}

}  // namespace detail

// Deterministic adaptive Gauss-Kronrod integration on a finite interval.
// Worst intervals are bisected first; node sequence depends only on (f, a, b, tol).
template <typename F>
inline double integrate(const F& f, double a, double b, double rel_tol, double abs_tol,
                        int max_refinements = 48) {
  if (a == b) return 0.0;
  struct Seg {
    double a, b, value, err;
  };
  std::vector<Seg> segs;
  double v, e;
  detail::gk15(f, a, b, v, e);
  segs.push_back({a, b, v, e});
  double total = v, total_err = e;

  // Refinement budget scales with the requested depth.
  const std::size_t max_segs = static_cast<std::size_t>(max_refinements) * 64;
  while (total_err > std::max(abs_tol, rel_tol * std::abs(total)) && segs.size() < max_segs) {
    std::size_t worst = 0;
    for (std::size_t i = 1; i < segs.size(); ++i)
      if (segs[i].err > segs[worst].err) worst = i;
    Seg s = segs[worst];
    if (s.b - s.a < 1e-15 * (std::abs(s.a) + std::abs(s.b) + 1.0)) break;
    const double m = 0.5 * (s.a + s.b);
    Seg left, right;
    detail::gk15(f, s.a, m, left.value, left.err);
    detail::gk15(f, m, s.b, right.value, right.err);
    left.a = s.a;
    left.b = m;
    right.a = m;
    right.b = s.b;
    total += left.value + right.value - s.value;
    total_err += left.err + right.err - s.err;
    segs[worst] = left;
    segs.push_back(right);
  }
  if (!std::isfinite(total))
    throw numeric_error("integrate: non-finite result on [" + std::to_string(a) + ", " +
                        std::to_string(b) + "]");
  return total;
}

template <typename F>
inline double integrate(const F& f, double a, double b, const QuadratureSpec& quad) {
  return integrate(f, a, b, quad.rel_tol, quad.abs_tol, quad.max_refinements);
}

// Integrate f over [a, a+width1] u ... with breakpoints; singular interior points
// should be passed as breakpoints so Kronrod nodes never land on them.
template <typename F>
inline double integrate_split(const F& f, const std::vector<double>& breakpoints,
                              const QuadratureSpec& quad) {
  double total = 0.0;
  for (std::size_t i = 0; i + 1 < breakpoints.size(); ++i)
    total += integrate(f, breakpoints[i], breakpoints[i + 1], quad.rel_tol, quad.abs_tol,
                       quad.max_refinements);
  return total;
}

// Integral over [a, infinity) truncated at quad.truncation_radius. The caller is
// responsible for the tail: `tail_bound`, when provided, receives an upper bound
// on the discarded mass computed from the last decade of the integrand.
template <typename F>
inline double integrate_to_infinity(const F& f, double a, const QuadratureSpec& quad,
                                    double* tail_bound = nullptr) {
  const double R = std::max(quad.truncation_radius, a + 1.0);
  // Geometric panels keep the adaptive subdivision shallow on slowly decaying tails.
  std::vector<double> pts;
  pts.push_back(a);
  double next = std::max(1.0, std::abs(a) * 2.0 + 1.0);
  while (next < R) {
    if (next > a) pts.push_back(next);
    next *= 4.0;
  }
  pts.push_back(R);
  double value = integrate_split(f, pts, quad);
  // Probe the decay rate on the last decade: f ~ C s^-p  =>  tail ~ f(R) R/(p-1).
  // The signed estimate is folded into the result; a non-decaying tail is an error.
  const double fr = f(R);
  const double f1 = std::abs(f(0.9 * R)), f2 = std::abs(fr);
  double tail = 0.0;
  if (f2 > 0.0) {
    const double p = std::log(std::max(f1, 1e-300) / f2) / std::log(1.0 / 0.9);
    if (p <= 1.01)
      throw numeric_error("integrate_to_infinity: integrand tail not decaying (p <= 1)");
    tail = fr * R / (p - 1.0);
  }
  if (tail_bound) *tail_bound = std::abs(tail);
  return value + tail;
}

// Least-squares slope/intercept with R^2, shared by the rate and exponent fits.
struct LinearFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r2 = 0.0;
};

inline LinearFit linear_fit(const std::vector<double>& x, const std::vector<double>& y) {
  const std::size_t n = x.size();
  if (n < 2 || y.size() != n) throw std::invalid_argument("linear_fit: need >= 2 points");
  double sx = 0, sy = 0, sxx = 0, sxy = 0, syy = 0;
  for (std::size_t i = 0; i < n; ++i) {
    sx += x[i];
    sy += y[i];
    sxx += x[i] * x[i];
    sxy += x[i] * y[i];
    syy += y[i] * y[i];
  }
  const double den = n * sxx - sx * sx;
  if (den == 0) throw std::invalid_argument("linear_fit: degenerate abscissae");
  LinearFit fit;
  fit.slope = (n * sxy - sx * sy) / den;
  fit.intercept = (sy - fit.slope * sx) / n;
  double ss_res = 0, ss_tot = 0;
  const double mean_y = sy / n;
  for (std::size_t i = 0; i < n; ++i) {
    const double pred = fit.slope * x[i] + fit.intercept;
    ss_res += (y[i] - pred) * (y[i] - pred);
    ss_tot += (y[i] - mean_y) * (y[i] - mean_y);
  }
  fit.r2 = ss_tot > 0 ? 1.0 - ss_res / ss_tot : 1.0;
  return fit;
}

}  // namespace fld
