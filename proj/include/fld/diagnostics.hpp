#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

#include "fld/drift.hpp"
#include "fld/generator.hpp"
#include "fld/potentials.hpp"
#include "fld/quadrature.hpp"
#include "fld/sde.hpp"
#include "fld/stats.hpp"

namespace fld {

// Grid fit of the dissipativity sandwich
//   <x, b(x)> <= -c2 |x|^2 e^{V} / (1+|x|)^{d+alpha}   for |x| > r1,
//   |b(x)| <= c_upper e^{V} / (1+|x|)^{d+alpha-1}      everywhere,
// read off a built drift table.
struct DriftBoundFit {
  double r1 = 0.0;       // onset of persistent inward drift
  double c1 = 0.0;       // max of <x,b> on the core, positive part
  double c2 = 0.0;       // tail coercivity constant
  double c_upper = 0.0;  // magnitude envelope constant
  bool holds_on_grid = false;
};

inline DriftBoundFit fit_drift_bounds(const DriftTable& table, const RadialPotential& p,
                                      const ModelConfig& cfg) {
  if (table.radii.size() < 4) throw std::invalid_argument("fit_drift_bounds: table too small");
  DriftBoundFit fit;
  // r1: smallest radius after which g stays negative to the end of the grid.
  std::size_t onset = table.radii.size();
  for (std::size_t i = table.radii.size(); i-- > 0;) {
    if (table.radii[i] > 0.0 && table.values[i] < 0.0)
      onset = i;
    else
      break;
  }
  if (onset == table.radii.size()) return fit;  // never persistently inward
  fit.r1 = onset == 0 ? 0.0 : table.radii[onset];

  double c2 = HUGE_VAL;
  double c1 = 0.0;
  double c_upper = 0.0;
  const double q = cfg.d + cfg.alpha;
  for (std::size_t i = 0; i < table.radii.size(); ++i) {
    const double r = table.radii[i];
    if (r == 0.0) continue;
    const double g = table.values[i];
    const double ev = std::exp(p(r));
    c_upper = std::max(c_upper, std::abs(g) * std::pow(1.0 + r, q - 1.0) / ev);
    if (i >= onset && i > 0)
      c2 = std::min(c2, -g * r * std::pow(1.0 + r, q) / (ev * r * r));
    else
      c1 = std::max(c1, g * r);
  }
  fit.c1 = std::max(0.0, c1);
  fit.c2 = std::isfinite(c2) ? c2 : 0.0;
  fit.c_upper = c_upper;
  fit.holds_on_grid = fit.c2 > 0.0;
  return fit;
}

// sup_x |g(x+h) - g(x)| against h on a log-log scale; the slope estimates the
// Holder exponent of g over [a, b].
inline LinearFit holder_exponent(const std::function<double(double)>& g, double a, double b,
                                 const std::vector<double>& scales, std::size_t n_grid = 512) {
  if (!(b > a)) throw std::invalid_argument("holder_exponent: empty interval");
  if (scales.size() < 3) throw std::invalid_argument("holder_exponent: need >= 3 scales");
  std::vector<double> lx, ly;
  for (double h : scales) {
    if (!(h > 0.0)) throw std::invalid_argument("holder_exponent: scales must be positive");
    double sup = 0.0;
    double best_x = a;
    const double step = (b - a - h) / static_cast<double>(n_grid);
    for (std::size_t i = 0; i <= n_grid; ++i) {
      const double x = a + step * static_cast<double>(i);
      const double v = std::abs(g(x + h) - g(x));
      if (v > sup) {
        sup = v;
        best_x = x;
      }
    }
    // Refine around the coarse argmax: a cusp between grid points would
    // otherwise bias sup_x |g(x+h)-g(x)| low at small h.
    double width = step;
    for (int round = 0; round < 3; ++round) {
      const double center = best_x;
      for (int i = -64; i <= 64; ++i) {
        const double x = std::clamp(center + width * i / 64.0, a, b - h);
        const double v = std::abs(g(x + h) - g(x));
        if (v > sup) {
          sup = v;
          best_x = x;
        }
      }
      width /= 64.0;
    }
    if (sup <= 0.0) {
      // Constant g: infinitely smooth at every scale probed.
      LinearFit flat;
      flat.slope = HUGE_VAL;
      flat.r2 = 1.0;
      return flat;
    }
    lx.push_back(std::log(h));
    ly.push_back(std::log(sup));
  }
  return linear_fit(lx, ly);
}

// Cached CDF and quantile function of the 1D target Z^{-1} e^{-V(|x|)} dx.
class Target1D {
 public:
  Target1D(std::shared_ptr<const RadialPotential> p, const QuadratureSpec& quad,
           double r_max = 1e8, std::size_t n_grid = 8192)
      : p_(std::move(p)) {
    const double r_min = 1e-6;
    grid_.push_back(0.0);
    half_cdf_.push_back(0.0);
    double acc = 0.0;
    double prev = 0.0;
    for (std::size_t i = 0; i <= n_grid; ++i) {
      const double r = r_min * std::pow(r_max / r_min, static_cast<double>(i) / n_grid);
      acc += integrate([&](double s) { return std::exp(-(*p_)(s)); }, prev, r,
                       std::max(quad.rel_tol, 1e-10), quad.abs_tol, quad.max_refinements);
      grid_.push_back(r);
      half_cdf_.push_back(acc);
      prev = r;
    }
    for (double& c : half_cdf_) c /= acc;  // half-line mass normalized to 1
  }

  double cdf(double x) const {
    const double r = std::abs(x);
    const auto it = std::upper_bound(grid_.begin(), grid_.end(), r);
    double h;
    if (it == grid_.end()) {
      h = 1.0;
    } else {
      const auto i = static_cast<std::size_t>(it - grid_.begin());
      const double r0 = grid_[i - 1], r1 = grid_[i];
      const double t = r1 > r0 ? (r - r0) / (r1 - r0) : 0.0;
      h = half_cdf_[i - 1] + t * (half_cdf_[i] - half_cdf_[i - 1]);
    }
    return x >= 0.0 ? 0.5 + 0.5 * h : 0.5 - 0.5 * h;
  }

  double quantile(double u) const {
    if (!(u > 0.0 && u < 1.0)) throw std::invalid_argument("Target1D::quantile: u in (0,1)");
    const double h = std::abs(2.0 * u - 1.0);
    const auto it = std::lower_bound(half_cdf_.begin(), half_cdf_.end(), h);
    double r;
    if (it == half_cdf_.end()) {
      r = grid_.back();
    } else {
      const auto i = static_cast<std::size_t>(it - half_cdf_.begin());
      if (i == 0) {
        r = 0.0;
      } else {
        const double c0 = half_cdf_[i - 1], c1 = half_cdf_[i];
        const double t = c1 > c0 ? (h - c0) / (c1 - c0) : 0.5;
        r = grid_[i - 1] + t * (grid_[i] - grid_[i - 1]);
      }
    }
    return u >= 0.5 ? r : -r;
  }

 private:
  std::shared_ptr<const RadialPotential> p_;
  std::vector<double> grid_;
  std::vector<double> half_cdf_;
};

enum class DistanceMetric { ks, wasserstein1, weighted_tv_proxy };

inline std::string to_string(DistanceMetric m) {
  switch (m) {
    case DistanceMetric::ks: return "ks";
    case DistanceMetric::wasserstein1: return "wasserstein1";
    case DistanceMetric::weighted_tv_proxy: return "weighted_tv_proxy";
  }
  return "?";
}

// Distance from a 1D sample to the target. The TV proxy tests the bump family
// against its exact target means; with alpha <= 1 there are no moments, so all
// three metrics stay well defined on heavy tails.
class DistanceGauge {
 public:
  DistanceGauge(std::shared_ptr<const RadialPotential> p, const QuadratureSpec& quad)
      : target_(p, quad) {
    const double z1 =
        2.0 * integrate_to_infinity([&](double s) { return std::exp(-(*p)(s)); }, 0.0, quad);
    for (double c : {0.0, 1.0, 2.0, 4.0, 8.0})
      for (double sgn : {1.0, -1.0}) {
        if (c == 0.0 && sgn < 0.0) continue;
        auto f = make_bump(sgn * c, 1.0);
        const double mean = integrate(
                                [&](double x) { return f.func.f(x) * std::exp(-(*p)(std::abs(x))); },
                                sgn * c - 1.0, sgn * c + 1.0, quad.rel_tol, quad.abs_tol,
                                quad.max_refinements) /
                            z1;
        bumps_.push_back(std::move(f));
        bump_means_.push_back(mean);
      }
  }

  double distance(const std::vector<double>& sample, DistanceMetric metric) const {
    switch (metric) {
      case DistanceMetric::ks:
        return ks_statistic(sample, [this](double x) { return target_.cdf(x); });
      case DistanceMetric::wasserstein1:
        return wasserstein1(sample, [this](double u) { return target_.quantile(u); });
      case DistanceMetric::weighted_tv_proxy: {
        double worst = 0.0;
        for (std::size_t j = 0; j < bumps_.size(); ++j) {
          double acc = 0.0;
          for (double x : sample) acc += bumps_[j].func.f(x);
          worst = std::max(worst,
                           std::abs(acc / static_cast<double>(sample.size()) - bump_means_[j]));
        }
        return worst;
      }
    }
    throw std::logic_error("distance: unreachable");
  }

  const Target1D& target() const { return target_; }

 private:
  Target1D target_;
  std::vector<TestFunction> bumps_;
  std::vector<double> bump_means_;
};

struct ConvergenceReport {
  DistanceMetric metric = DistanceMetric::ks;
  std::vector<double> times;
  std::vector<double> distances;
  double lambda = 0.0;
  double r2 = 0.0;
  double mc_floor = 0.0;
  bool fit_valid = false;  // enough points above the Monte Carlo floor, r2 >= 0.8
};

// Distance-to-target curve along one recorded ensemble, with an exponential
// rate fitted on the window where the signal sits above 3x the sampling floor.
inline ConvergenceReport convergence_curve(const Ensemble& ens, const DistanceGauge& gauge,
                                           DistanceMetric metric) {
  if (ens.plan.d != 1) throw std::invalid_argument("convergence_curve: 1D ensembles only");
  ConvergenceReport rep;
  rep.metric = metric;
  rep.times = ens.times;
  for (std::size_t t = 0; t < ens.times.size(); ++t)
    rep.distances.push_back(gauge.distance(ens.coordinate_slice(t), metric));

  const double n = static_cast<double>(ens.states.size());
  rep.mc_floor = metric == DistanceMetric::ks ? 0.87 / std::sqrt(n) : 1.0 / std::sqrt(n);
  std::vector<double> tx, ly;
  for (std::size_t t = 0; t < rep.times.size(); ++t)
    if (rep.distances[t] > 3.0 * rep.mc_floor) {
      tx.push_back(rep.times[t]);
      ly.push_back(std::log(rep.distances[t]));
    }
  if (tx.size() >= 3) {
    const auto fit = linear_fit(tx, ly);
    rep.lambda = -fit.slope;
    rep.r2 = fit.r2;
    rep.fit_valid = rep.lambda > 0.0 && rep.r2 >= 0.8;
  }
  return rep;
}

struct EscapeResult {
  double median_stable = 0.0;    // first-entrance time into the ball, stable drive
  double median_baseline = 0.0;  // same, Gaussian Langevin baseline
  double ratio = 0.0;            // baseline / stable (>= 1 favors the jumps)
  std::size_t censored_stable = 0;
  std::size_t censored_baseline = 0;
  bool medians_valid = false;        // stable median uncensored, so the ratio is meaningful
  bool ratio_is_lower_bound = false;  // baseline median censored at the horizon
};

namespace detail {

inline std::vector<double> first_entrance_times(const SimPlan& plan, const DriftField& drift,
                                                double ball_radius, std::size_t* censored) {
  plan.validate();
  const auto n_steps = static_cast<std::size_t>(std::llround(plan.t_final / plan.dt));
  std::vector<double> hit(plan.n_chains, plan.t_final);
  std::vector<char> done(plan.n_chains, 0);
  parallel_for(plan.n_chains, std::max(1, plan.n_threads), [&](std::size_t c) {
    RngStream rng(plan.seed, c);
    auto x = initial_state(plan, rng, nullptr);
    std::vector<double> bx(plan.d);
    for (std::size_t s = 1; s <= n_steps; ++s) {
      em_step(x, bx, drift, plan, rng);
      double r2 = 0.0;
      for (double v : x) r2 += v * v;
      if (r2 <= ball_radius * ball_radius) {
        hit[c] = static_cast<double>(s) * plan.dt;
        done[c] = 1;
        break;
      }
    }
  });
  *censored = static_cast<std::size_t>(
      std::count(done.begin(), done.end(), static_cast<char>(0)));
  return hit;
}

}  // namespace detail

// Median time to reach the ball from a far start, stable drive vs classical
// Langevin. Censored chains carry the horizon value, so a median is quoted
// only when more than half the chains arrived.
inline EscapeResult escape_benchmark(const SimPlan& stable_plan,
                                     std::shared_ptr<const RadialPotential> p,
                                     const DriftField& stable_drift, double ball_radius) {
  EscapeResult res;
  auto hits = detail::first_entrance_times(stable_plan, stable_drift, ball_radius,
                                           &res.censored_stable);
  res.median_stable = median(hits);

  SimPlan base = stable_plan;
  base.noise = NoiseKind::gaussian;
  auto base_hits = detail::first_entrance_times(base, make_classical_drift(p), ball_radius,
                                                &res.censored_baseline);
  res.median_baseline = median(base_hits);

  res.medians_valid = res.censored_stable < stable_plan.n_chains / 2;
  res.ratio_is_lower_bound = res.censored_baseline >= base.n_chains / 2;
  res.ratio = res.median_stable > 0.0 ? res.median_baseline / res.median_stable : HUGE_VAL;
  return res;
}

}  // namespace fld
