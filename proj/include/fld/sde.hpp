#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <functional>
#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

#include "fld/drift.hpp"
#include "fld/potentials.hpp"
#include "fld/quadrature.hpp"
#include "fld/rng.hpp"
#include "fld/stable_noise.hpp"

namespace fld {

using DriftField = std::function<void(const std::vector<double>&, std::vector<double>&)>;

inline DriftField make_table_drift(std::shared_ptr<const DriftTable> table) {
  if (!table) throw std::invalid_argument("make_table_drift: null table");
  return [table](const std::vector<double>& x, std::vector<double>& out) {
    double r2 = 0.0;
    for (double xi : x) r2 += xi * xi;
    const double r = std::sqrt(r2);
    if (r == 0.0) {
      std::fill(out.begin(), out.end(), 0.0);
      return;
    }
    const double g = table->radial(r);
    for (std::size_t i = 0; i < x.size(); ++i) out[i] = g * x[i] / r;
  };
}

inline DriftField make_classical_drift(std::shared_ptr<const RadialPotential> p) {
  if (!p) throw std::invalid_argument("make_classical_drift: null potential");
  return [p](const std::vector<double>& x, std::vector<double>& out) {
    double r2 = 0.0;
    for (double xi : x) r2 += xi * xi;
    const double r = std::sqrt(r2);
    if (r == 0.0) {
      std::fill(out.begin(), out.end(), 0.0);
      return;
    }
    const double g = -p->d1(r);
    for (std::size_t i = 0; i < x.size(); ++i) out[i] = g * x[i] / r;
  };
}

enum class NoiseKind { stable, gaussian };

enum class InitLaw { point, uniform_ball, target_sample };

struct SimPlan {
  int d = 1;
  double alpha = 1.0;                 // ignored for gaussian noise
  NoiseKind noise = NoiseKind::stable;
  double dt = 0.01;
  double t_final = 1.0;
  std::size_t n_chains = 1;
  std::uint64_t seed = 1;
  std::size_t thinning = 1;           // record every thinning-th step
  InitLaw init = InitLaw::point;
  std::vector<double> x0;             // for point init; broadcast 0 if empty
  double init_radius = 1.0;           // for uniform_ball
  double blow_up_threshold = 1e12;
  int n_threads = 1;

  void validate() const {
    if (d < 1) throw std::invalid_argument("SimPlan: d must be >= 1");
    if (noise == NoiseKind::stable) StableNoiseSpec{d, alpha}.validate();
    if (!(dt > 0.0) || !(t_final > 0.0)) throw std::invalid_argument("SimPlan: dt, t_final > 0");
    if (n_chains == 0) throw std::invalid_argument("SimPlan: n_chains must be positive");
    if (thinning == 0) throw std::invalid_argument("SimPlan: thinning must be positive");
    if (!(blow_up_threshold > 0.0)) throw std::invalid_argument("SimPlan: blow_up_threshold");
  }
};

struct Ensemble {
  SimPlan plan;
  std::vector<double> times;            // recorded times, shared by all chains
  std::vector<std::vector<double>> states;  // [chain][record * d + coord]
  std::vector<std::ptrdiff_t> blow_up_step;  // -1 if the chain stayed finite

  std::vector<double> coordinate_slice(std::size_t record, int coord = 0) const {
    std::vector<double> out;
    out.reserve(states.size());
    for (std::size_t c = 0; c < states.size(); ++c)
      if (blow_up_step[c] < 0) out.push_back(states[c][record * plan.d + coord]);
    return out;
  }

  std::vector<double> radius_slice(std::size_t record) const {
    std::vector<double> out;
    out.reserve(states.size());
    for (std::size_t c = 0; c < states.size(); ++c) {
      if (blow_up_step[c] >= 0) continue;
      double r2 = 0.0;
      for (int k = 0; k < plan.d; ++k) {
        const double v = states[c][record * plan.d + k];
        r2 += v * v;
      }
      out.push_back(std::sqrt(r2));
    }
    return out;
  }
};

// Sampler for the stationary target itself, used for warm starts. 1D uses the
// full inverse CDF; d >= 2 draws the radius from the radial CDF and a uniform
// direction.
class TargetSampler {
 public:
  TargetSampler(const RadialPotential& p, int d, const QuadratureSpec& quad, double r_max = 1e6,
                std::size_t n_grid = 4096)
      : d_(d) {
    if (d < 1) throw std::invalid_argument("TargetSampler: d >= 1");
    grid_.reserve(n_grid + 1);
    cdf_.reserve(n_grid + 1);
    QuadratureSpec q = quad;
    q.rel_tol = std::max(quad.rel_tol, 1e-10);
    grid_.push_back(0.0);
    cdf_.push_back(0.0);
    double acc = 0.0;
    double prev = 0.0;
    const double r_min = 1e-4;
    for (std::size_t i = 0; i <= n_grid; ++i) {
      const double r = r_min * std::pow(r_max / r_min, static_cast<double>(i) / n_grid);
      acc += integrate([&](double s) { return std::exp(-p(s)) * std::pow(s, d - 1); }, prev, r,
                       q.rel_tol, q.abs_tol, q.max_refinements);
      grid_.push_back(r);
      cdf_.push_back(acc);
      prev = r;
    }
    for (double& c : cdf_) c /= acc;
  }

  double sample_radius(RngStream& rng) const {
    const double u = rng.uniform();
    const auto it = std::lower_bound(cdf_.begin(), cdf_.end(), u);
    const auto i = static_cast<std::size_t>(it - cdf_.begin());
    if (i == 0) return grid_.front();
    if (i >= grid_.size()) return grid_.back();
    const double c0 = cdf_[i - 1], c1 = cdf_[i];
    const double t = c1 > c0 ? (u - c0) / (c1 - c0) : 0.5;
    return grid_[i - 1] + t * (grid_[i] - grid_[i - 1]);
  }

  std::vector<double> sample(RngStream& rng) const {
    const double r = sample_radius(rng);
    if (d_ == 1) return {rng.uniform() < 0.5 ? -r : r};
    std::vector<double> g(d_);
    double n2 = 0.0;
    do {
      n2 = 0.0;
      for (auto& v : g) {
        v = rng.gaussian();
        n2 += v * v;
      }
    } while (n2 == 0.0);
    const double scale = r / std::sqrt(n2);
    for (auto& v : g) v *= scale;
    return g;
  }

 private:
  int d_;
  std::vector<double> grid_;
  std::vector<double> cdf_;
};

namespace detail {

inline std::vector<double> initial_state(const SimPlan& plan, RngStream& rng,
                                         const TargetSampler* target) {
  switch (plan.init) {
    case InitLaw::point: {
      std::vector<double> x(plan.d, 0.0);
      for (std::size_t i = 0; i < plan.x0.size() && i < x.size(); ++i) x[i] = plan.x0[i];
      return x;
    }
    case InitLaw::uniform_ball: {
      std::vector<double> x(plan.d);
      double n2;
      do {
        n2 = 0.0;
        for (auto& v : x) {
          v = rng.uniform(-1.0, 1.0);
          n2 += v * v;
        }
      } while (n2 > 1.0);
      for (auto& v : x) v *= plan.init_radius;
      return x;
    }
    case InitLaw::target_sample:
      if (!target) throw std::invalid_argument("simulate: target_sample init without a sampler");
      return target->sample(rng);
  }
  throw std::logic_error("initial_state: unreachable");
}

}  // namespace detail

inline void em_step(std::vector<double>& x, std::vector<double>& bx, const DriftField& drift,
                    const SimPlan& plan, RngStream& rng) {
  drift(x, bx);
  if (plan.noise == NoiseKind::stable) {
    const auto dz = increment(StableNoiseSpec{plan.d, plan.alpha}, plan.dt, rng);
    for (int k = 0; k < plan.d; ++k) x[k] += bx[k] * plan.dt + dz[k];
  } else {
    const double s = std::sqrt(2.0 * plan.dt);
    for (int k = 0; k < plan.d; ++k) x[k] += bx[k] * plan.dt + s * rng.gaussian();
  }
}

// Euler-Maruyama over all chains. Chain c always uses RngStream(seed, c), so
// results are identical for any thread count. A chain whose radius exceeds
// blow_up_threshold (or turns non-finite) is frozen and flagged with the step
// index at which it left the domain.
inline Ensemble simulate(const SimPlan& plan, const DriftField& drift,
                         const TargetSampler* target = nullptr) {
  plan.validate();
  const auto n_steps = static_cast<std::size_t>(std::llround(plan.t_final / plan.dt));
  if (n_steps == 0) throw std::invalid_argument("simulate: t_final < dt");
  const std::size_t n_records = n_steps / plan.thinning + 1;

  Ensemble ens;
  ens.plan = plan;
  ens.times.reserve(n_records);
  ens.times.push_back(0.0);
  for (std::size_t s = plan.thinning; s <= n_steps; s += plan.thinning)
    ens.times.push_back(static_cast<double>(s) * plan.dt);
  ens.states.assign(plan.n_chains, {});
  ens.blow_up_step.assign(plan.n_chains, -1);

  detail::parallel_for(plan.n_chains, std::max(1, plan.n_threads), [&](std::size_t c) {
    RngStream rng(plan.seed, c);
    auto x = detail::initial_state(plan, rng, target);
    std::vector<double> bx(plan.d);
    auto& rec = ens.states[c];
    rec.reserve(ens.times.size() * plan.d);
    rec.insert(rec.end(), x.begin(), x.end());
    for (std::size_t s = 1; s <= n_steps; ++s) {
      if (ens.blow_up_step[c] < 0) {
        em_step(x, bx, drift, plan, rng);
        double r2 = 0.0;
        bool finite = true;
        for (double v : x) {
          if (!std::isfinite(v)) finite = false;
          r2 += v * v;
        }
        if (!finite || r2 > plan.blow_up_threshold * plan.blow_up_threshold)
          ens.blow_up_step[c] = static_cast<std::ptrdiff_t>(s);
      }
      if (s % plan.thinning == 0) rec.insert(rec.end(), x.begin(), x.end());
    }
  });
  return ens;
}

inline Ensemble simulate_langevin_baseline(SimPlan plan,
                                           std::shared_ptr<const RadialPotential> p) {
  plan.noise = NoiseKind::gaussian;
  return simulate(plan, make_classical_drift(std::move(p)));
}

inline void write_ensemble_csv(const Ensemble& ens, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("write_ensemble_csv: cannot open " + path);
  out << "chain,time";
  for (int k = 1; k <= ens.plan.d; ++k) out << ",x" << k;
  out << "\n";
  out.precision(17);
  for (std::size_t c = 0; c < ens.states.size(); ++c)
    for (std::size_t t = 0; t < ens.times.size(); ++t) {
      out << c << ',' << ens.times[t];
      for (int k = 0; k < ens.plan.d; ++k) out << ',' << ens.states[c][t * ens.plan.d + k];
      out << "\n";
    }
  if (!out) throw std::runtime_error("write_ensemble_csv: write failed for " + path);
}

inline void write_ensemble_binary(const Ensemble& ens, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("write_ensemble_binary: cannot open " + path);
  const char magic[8] = {'f', 'l', 'd', 'e', 'n', 's', '1', '\0'};
  out.write(magic, 8);
  const std::uint64_t dims[3] = {static_cast<std::uint64_t>(ens.plan.d), ens.states.size(),
                                 ens.times.size()};
  out.write(reinterpret_cast<const char*>(dims), sizeof(dims));
  out.write(reinterpret_cast<const char*>(ens.times.data()),
            static_cast<std::streamsize>(ens.times.size() * sizeof(double)));
  for (const auto& rec : ens.states)
    out.write(reinterpret_cast<const char*>(rec.data()),
              static_cast<std::streamsize>(rec.size() * sizeof(double)));
  if (!out) throw std::runtime_error("write_ensemble_binary: write failed for " + path);
}

}  // namespace fld
