#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <sstream>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "fld/frac_ops.hpp"
#include "fld/potentials.hpp"
#include "fld/quadrature.hpp"

namespace fld {

enum class DriftBranch { riesz, antiderivative };

inline std::string to_string(DriftBranch b) {
  return b == DriftBranch::riesz ? "riesz" : "antiderivative";
}

// Dimension, stability index, and the drift-branch dichotomy:
// riesz when d > 2-alpha, antiderivative when d <= 2-alpha (d=1, alpha <= 1).
struct ModelConfig {
  int d;
  double alpha;
  DriftBranch branch;

  ModelConfig(int d_, double alpha_) : d(d_), alpha(alpha_) {
    if (d < 1) throw std::invalid_argument("ModelConfig: d must be >= 1");
    if (!(alpha > 0.0 && alpha < 2.0))
      throw std::invalid_argument("ModelConfig: alpha must be in (0,2)");
    branch = (static_cast<double>(d) > 2.0 - alpha) ? DriftBranch::riesz
                                                    : DriftBranch::antiderivative;
  }

  ModelConfig(int d_, double alpha_, DriftBranch b) : ModelConfig(d_, alpha_) {
    if (b != branch)
      throw std::invalid_argument("ModelConfig: branch inconsistent with (d, alpha) dichotomy");
  }
};

// Radial drift component for the Riesz branch:
//   g(r) = -C_{d,2-a} e^{V(r)} int_0^inf e^{-V(s)} V'(s) s^{d-1} K_cos(r,s) ds,
// with K_cos the cosine-weighted angular kernel. g(0) = 0 by anti-symmetry.
inline double drift_riesz(double r, const RadialPotential& p, const ModelConfig& cfg,
                          const QuadratureSpec& quad) {
  if (cfg.branch != DriftBranch::riesz)
    throw std::invalid_argument("drift_riesz: config selects the antiderivative branch");
  if (r == 0.0) return 0.0;
  quad.validate();
  const double q = cfg.d - 2.0 + cfg.alpha;
  const double C = const_C(cfg.d, 2.0 - cfg.alpha);
  const auto integrand = [&](double s) {
    // Bisection can round a quadrature node onto the shell itself.
    if (s == r) s = std::nextafter(s, 2.0 * s);
    return std::exp(-p(s)) * p.d1(s) * std::pow(s, cfg.d - 1) *
           angular_kernel(cfg.d, q, r, s, AngularWeight::cosine, quad);
  };
  const double R = quad.truncation_radius;
  std::vector<double> pts{0.0};
  if (r < R) {
    const double delta = quad.singularity_split;
    pts.push_back(r * (1.0 - delta));
    pts.push_back(r);
    pts.push_back(r * (1.0 + delta));
  }
  for (double next = std::max(1.0, 2.0 * r + 1.0); next < R; next *= 4.0)
    if (next > pts.back()) pts.push_back(next);
  pts.push_back(R);
  double integral = integrate_split(integrand, pts, quad);
  const double f1 = std::abs(integrand(0.9 * R)), f2 = std::abs(integrand(R));
  if (f2 > 0.0 && f1 > f2) {
    const double pw = std::log(f1 / f2) / std::log(1.0 / 0.9);
    if (pw > 1.01) integral += (integrand(R) > 0 ? 1.0 : -1.0) * f2 * R / (pw - 1.0);
  }
  return -C * std::exp(p(r)) * integral;
}

// (-Delta)^{alpha/2} e^{-V}(z) for symmetric 1D V.
inline double frac_lap_exp_minus_V(const RadialPotential& p, double z, double alpha,
                                   const QuadratureSpec& quad) {
  if (!p.has_d2)
    throw std::invalid_argument("frac_lap_exp_minus_V: potential lacks V'' (needs C^2)");
  SmoothFunction1D f;
  f.f = [&p](double x) { return std::exp(-p(std::abs(x))); };
  f.f1 = [&p](double x) {
    const double a = std::abs(x);
    const double v = -p.d1(a) * std::exp(-p(a));
    return x < 0 ? -v : v;
  };
  f.f2 = [&p](double x) {
    const double a = std::abs(x);
    return (p.d1(a) * p.d1(a) - p.d2(a)) * std::exp(-p(a));
  };
  f.growth_power = 0.0;
  return frac_laplacian_1d(f, z, alpha, quad);
}

// Antiderivative-branch drift (d = 1, alpha <= 1):
//   b(x) = e^{V(x)} int_x^inf (-Delta)^{alpha/2} e^{-V}(z) dz  for x >= 0,
// extended anti-symmetrically to x < 0. The tail beyond the truncation radius
// uses the z^{-1-alpha} decay of the integrand.
inline double drift_antiderivative(double x, const RadialPotential& p, double alpha,
                                   const QuadratureSpec& quad) {
  if (!(alpha > 0.0 && alpha <= 1.0))
    throw std::invalid_argument("drift_antiderivative: requires alpha <= 1 (d = 1 branch)");
  if (x == 0.0) return 0.0;
  if (x < 0.0) return -drift_antiderivative(-x, p, alpha, quad);
  quad.validate();
  const auto fl = [&](double z) { return frac_lap_exp_minus_V(p, z, alpha, quad); };
  // The nested fractional Laplacian is costly: keep the outer panels coarse
  // and let adaptivity spend evaluations near x where the integrand peaks.
  const double integral = detail::integrate_tail_probe(fl, x, quad);
  return std::exp(p(x)) * integral;
}

// Diagnostic residual of int_0^inf (-Delta)^{alpha/2} e^{-V}(u) du, which
// vanishes exactly for admissible symmetric V.
inline double zero_integral_residual(const RadialPotential& p, double alpha,
                                     const QuadratureSpec& quad) {
  const auto fl = [&](double u) { return frac_lap_exp_minus_V(p, u, alpha, quad); };
  return detail::integrate_tail_probe(fl, 1e-6, quad) +
         integrate(fl, 0.0, 1e-6, quad.rel_tol, quad.abs_tol, quad.max_refinements);
}

// Classical (Gaussian-Langevin) drift -grad V.
inline std::vector<double> classical_drift(const RadialPotential& p,
                                           const std::vector<double>& x) {
  double r2 = 0.0;
  for (double xi : x) r2 += xi * xi;
  const double r = std::sqrt(r2);
  std::vector<double> out(x.size(), 0.0);
  if (r == 0.0) return out;
  const double scale = -p.d1(r) / r;
  for (std::size_t i = 0; i < x.size(); ++i) out[i] = scale * x[i];
  return out;
}

enum class TailPolicy { direct_quadrature, asymptotic_fit };

struct DriftGrid {
  double r_max = 1e3;
  int n_points = 256;
  bool geometric = true;
};

// Precomputed radial drift profile: b(x) = g(|x|) x/|x|, g(0) = 0.
class DriftTable {
 public:
  ModelConfig config;
  std::uint64_t potential_id = 0;
  std::vector<double> radii;   // strictly increasing, radii[0] = 0
  std::vector<double> values;  // g_i, values[0] = 0
  TailPolicy tail_policy = TailPolicy::direct_quadrature;
  double tail_c = 0.0;  // fitted constant for the asymptotic tail
  QuadratureSpec quad_used;

  DriftTable(ModelConfig cfg) : config(cfg) {}

  void attach_potential(std::shared_ptr<const RadialPotential> p) { potential_ = std::move(p); }
  const RadialPotential* potential() const { return potential_.get(); }

  // Radial drift component at radius r (r may exceed the grid).
  double radial(double r) const {
    if (r <= 0.0) return 0.0;
    if (r <= radii.back()) return interpolate(r);
    return tail_value(r);
  }

  void finalize() {
    if (radii.empty() || radii[0] != 0.0 || values[0] != 0.0)
      throw std::logic_error("DriftTable: grid must start at r=0 with g(0)=0");
    build_slopes();
    if (tail_c == 0.0) fit_tail_constant();  // keep a constant loaded from file
  }

 private:
  std::shared_ptr<const RadialPotential> potential_;
  std::vector<double> slopes_;  // Fritsch-Carlson monotone-limited Hermite slopes
  // unique_ptr keeps the table movable despite the mutex
  std::unique_ptr<std::mutex> tail_mutex_ = std::make_unique<std::mutex>();
  mutable std::map<double, double> tail_cache_;

  void build_slopes() {
    const std::size_t n = radii.size();
    slopes_.assign(n, 0.0);
    if (n < 2) return;
    std::vector<double> d(n - 1);
    for (std::size_t i = 0; i + 1 < n; ++i)
      d[i] = (values[i + 1] - values[i]) / (radii[i + 1] - radii[i]);
    slopes_[0] = d[0];
    slopes_[n - 1] = d[n - 2];
    for (std::size_t i = 1; i + 1 < n; ++i) {
      if (d[i - 1] * d[i] <= 0.0) {
        slopes_[i] = 0.0;
      } else {
        const double w1 = 2.0 * (radii[i + 1] - radii[i]) + (radii[i] - radii[i - 1]);
        const double w2 = (radii[i + 1] - radii[i]) + 2.0 * (radii[i] - radii[i - 1]);
        slopes_[i] = (w1 + w2) / (w1 / d[i - 1] + w2 / d[i]);
      }
    }
  }

  double interpolate(double r) const {
    const auto it = std::upper_bound(radii.begin(), radii.end(), r);
    std::size_t i = (it == radii.begin()) ? 0 : static_cast<std::size_t>(it - radii.begin()) - 1;
    if (i + 1 >= radii.size()) i = radii.size() - 2;
    const double h = radii[i + 1] - radii[i];
    const double t = (r - radii[i]) / h;
    // Linear fallback across sign changes: a cubic overshoot there could flip
    // the drift's sign near the origin.
    if (values[i] * values[i + 1] < 0.0) return values[i] + t * (values[i + 1] - values[i]);
    const double h00 = (1 + 2 * t) * (1 - t) * (1 - t);
    const double h10 = t * (1 - t) * (1 - t);
    const double h01 = t * t * (3 - 2 * t);
    const double h11 = t * t * (t - 1);
    return h00 * values[i] + h10 * h * slopes_[i] + h01 * values[i + 1] + h11 * h * slopes_[i + 1];
  }

  void fit_tail_constant() {
    // c fitted on the outer decade: g(r) ~ c e^{V(r)} / (1+r)^{d+alpha-1}.
    if (!potential_ || radii.size() < 8) return;
    double acc = 0.0;
    int n = 0;
    for (std::size_t i = radii.size() * 9 / 10; i < radii.size(); ++i) {
      const double r = radii[i];
      acc += values[i] * std::pow(1.0 + r, config.d + config.alpha - 1.0) *
             std::exp(-(*potential_)(r));
      ++n;
    }
    if (n > 0) tail_c = acc / n;
  }

  double tail_value(double r) const {
    if (tail_policy == TailPolicy::asymptotic_fit || !potential_) {
      return tail_c * std::exp((*potential_)(r)) /
             std::pow(1.0 + r, config.d + config.alpha - 1.0);
    }
    {
      std::lock_guard<std::mutex> lock(*tail_mutex_);
      const auto it = tail_cache_.find(r);
      if (it != tail_cache_.end()) return it->second;
    }
    const double g = (config.branch == DriftBranch::riesz)
                         ? drift_riesz(r, *potential_, config, quad_used)
                         : drift_antiderivative(r, *potential_, config.alpha, quad_used);
    std::lock_guard<std::mutex> lock(*tail_mutex_);
    tail_cache_.emplace(r, g);
    return g;
  }
};

namespace detail {

template <typename Fn>
inline void parallel_for(int n, int n_threads, const Fn& fn) {
  if (n_threads <= 1 || n < 2) {
    for (int i = 0; i < n; ++i) fn(i);
    return;
  }
  std::vector<std::thread> workers;
  std::atomic<int> next{0};
  for (int t = 0; t < std::min(n_threads, n); ++t)
    workers.emplace_back([&] {
      for (int i = next.fetch_add(1); i < n; i = next.fetch_add(1)) fn(i);
    });
  for (auto& w : workers) w.join();
}

}  // namespace detail

inline DriftTable build_drift_table(std::shared_ptr<const RadialPotential> p,
                                    const ModelConfig& cfg, const DriftGrid& grid,
                                    const QuadratureSpec& quad, int n_threads = 1) {
  if (grid.n_points < 2 || grid.r_max <= 0)
    throw std::invalid_argument("build_drift_table: bad grid");
  DriftTable table(cfg);
  table.potential_id = p->hash();
  table.quad_used = quad;
  table.attach_potential(p);
  const int n = grid.n_points;
  table.radii.assign(n, 0.0);
  table.values.assign(n, 0.0);
  // First node at 0, remaining nodes linear or geometric (denser near 0).
  const double r_min = grid.geometric ? grid.r_max * 1e-3 : grid.r_max / (n - 1);
  for (int i = 1; i < n; ++i) {
    table.radii[i] = grid.geometric
                         ? r_min * std::pow(grid.r_max / r_min, (i - 1.0) / (n - 2.0))
                         : grid.r_max * i / (n - 1.0);
  }
  std::vector<std::string> errors(n);
  detail::parallel_for(n - 1, n_threads, [&](int k) {
    const int i = k + 1;
    try {
      table.values[i] = (cfg.branch == DriftBranch::riesz)
                            ? drift_riesz(table.radii[i], *p, cfg, quad)
                            : drift_antiderivative(table.radii[i], *p, cfg.alpha, quad);
      if (!std::isfinite(table.values[i]))
        errors[i] = "non-finite drift value";
    } catch (const std::exception& e) {
      errors[i] = e.what();
    }
  });
  for (int i = 0; i < n; ++i)
    if (!errors[i].empty())
      throw numeric_error("build_drift_table: failure at r=" + std::to_string(table.radii[i]) +
                          ": " + errors[i]);
  table.finalize();
  return table;
}

// b(x) = g(|x|) x / |x|; exactly anti-symmetric and zero at the origin.
inline std::vector<double> drift_eval(const DriftTable& table, const std::vector<double>& x) {
  if (static_cast<int>(x.size()) != table.config.d)
    throw std::invalid_argument("drift_eval: dimension mismatch");
  double r2 = 0.0;
  for (double xi : x) r2 += xi * xi;
  const double r = std::sqrt(r2);
  std::vector<double> out(x.size(), 0.0);
  if (r == 0.0) return out;
  const double g = table.radial(r);
  for (std::size_t i = 0; i < x.size(); ++i) out[i] = g * x[i] / r;
  return out;
}

// --- persistence: versioned text format ------------------------------------

inline void save_drift_table(const DriftTable& t, const std::string& path,
                             const RadialPotential& p) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("save_drift_table: cannot open " + path);
  os.precision(17);
  os << "fld-table v1\n";
  os << "d=" << t.config.d << " alpha=" << t.config.alpha << " branch=" << to_string(t.config.branch)
     << "\n";
  os << "potential=" << p.name << " params=";
  for (std::size_t i = 0; i < p.params.size(); ++i)
    os << (i ? "," : "") << p.params[i].first << "=" << p.params[i].second;
  os << " hash=" << std::hex << t.potential_id << std::dec << "\n";
  os << "quad=" << t.quad_used.rel_tol << "," << t.quad_used.abs_tol << ","
     << t.quad_used.truncation_radius << "\n";
  os << "r,g\n";
  for (std::size_t i = 0; i < t.radii.size(); ++i) os << t.radii[i] << "," << t.values[i] << "\n";
  os << "tail=" << (t.tail_policy == TailPolicy::direct_quadrature ? "direct_quadrature"
                                                                   : "asymptotic_fit");
  if (t.tail_policy == TailPolicy::asymptotic_fit) os << ",c=" << t.tail_c;
  os << "\n";
}

inline DriftTable load_drift_table(const std::string& path,
                                   std::shared_ptr<const RadialPotential> live) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("load_drift_table: cannot open " + path);
  std::string line;
  std::getline(is, line);
  if (line != "fld-table v1")
    throw std::runtime_error("load_drift_table: unsupported format: " + line);

  int d = 0;
  double alpha = 0;
  std::string branch_s;
  std::getline(is, line);
  {
    std::istringstream ls(line);
    std::string tok;
    while (ls >> tok) {
      if (tok.rfind("d=", 0) == 0) d = std::stoi(tok.substr(2));
      if (tok.rfind("alpha=", 0) == 0) alpha = std::stod(tok.substr(6));
      if (tok.rfind("branch=", 0) == 0) branch_s = tok.substr(7);
    }
  }
  ModelConfig cfg(d, alpha);
  if (to_string(cfg.branch) != branch_s)
    throw std::runtime_error("load_drift_table: branch tag inconsistent with (d, alpha)");
  DriftTable t(cfg);

  std::getline(is, line);  // potential line
  std::uint64_t file_hash = 0;
  {
    const auto pos = line.find("hash=");
    if (pos == std::string::npos) throw std::runtime_error("load_drift_table: missing hash");
    file_hash = std::stoull(line.substr(pos + 5), nullptr, 16);
  }
  if (live && live->hash() != file_hash)
    throw std::runtime_error("load_drift_table: potential hash mismatch; refusing cached table");
  t.potential_id = file_hash;

  std::getline(is, line);  // quad line
  {
    const auto eq = line.find('=');
    std::istringstream ls(line.substr(eq + 1));
    char comma;
    ls >> t.quad_used.rel_tol >> comma >> t.quad_used.abs_tol >> comma >>
        t.quad_used.truncation_radius;
  }
  std::getline(is, line);
  if (line != "r,g") throw std::runtime_error("load_drift_table: missing r,g header");
  while (std::getline(is, line)) {
    if (line.rfind("tail=", 0) == 0) {
      t.tail_policy = (line.find("asymptotic_fit") != std::string::npos)
                          ? TailPolicy::asymptotic_fit
                          : TailPolicy::direct_quadrature;
      const auto cpos = line.find("c=");
      if (cpos != std::string::npos) t.tail_c = std::stod(line.substr(cpos + 2));
      break;
    }
    const auto comma = line.find(',');
    t.radii.push_back(std::stod(line.substr(0, comma)));
    t.values.push_back(std::stod(line.substr(comma + 1)));
  }
  if (live) t.attach_potential(std::move(live));
  t.finalize();
  return t;
}

}  // namespace fld
