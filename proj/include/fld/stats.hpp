#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <stdexcept>
#include <vector>

#include "fld/quadrature.hpp"

namespace fld {

inline std::vector<double> sorted_copy(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  return v;
}

inline double quantile_sorted(const std::vector<double>& s, double q) {
  if (s.empty()) throw std::invalid_argument("quantile: empty sample");
  if (!(q >= 0.0 && q <= 1.0)) throw std::invalid_argument("quantile: q outside [0,1]");
  const double pos = q * (static_cast<double>(s.size()) - 1.0);
  const auto lo = static_cast<std::size_t>(pos);
  if (lo + 1 >= s.size()) return s.back();
  const double frac = pos - static_cast<double>(lo);
  return s[lo] * (1.0 - frac) + s[lo + 1] * frac;
}

inline double median(std::vector<double> v) { return quantile_sorted(sorted_copy(std::move(v)), 0.5); }

// One-sample Kolmogorov-Smirnov statistic against a CDF.
inline double ks_statistic(const std::vector<double>& sample,
                           const std::function<double(double)>& cdf) {
  if (sample.empty()) throw std::invalid_argument("ks_statistic: empty sample");
  const auto s = sorted_copy(sample);
  const double n = static_cast<double>(s.size());
  double d = 0.0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    const double f = cdf(s[i]);
    d = std::max(d, std::abs(f - static_cast<double>(i) / n));
    d = std::max(d, std::abs(static_cast<double>(i + 1) / n - f));
  }
  return d;
}

// Asymptotic critical value at significance level `alpha_level`.
inline double ks_critical(std::size_t n, double alpha_level) {
  if (n == 0) throw std::invalid_argument("ks_critical: n = 0");
  const double c = std::sqrt(-0.5 * std::log(alpha_level / 2.0));
  return c / std::sqrt(static_cast<double>(n));
}

// W1 distance between the empirical measure and a law given by its quantile
// function: (1/n) sum |x_(i) - Q((i-1/2)/n)|.
inline double wasserstein1(const std::vector<double>& sample,
                           const std::function<double(double)>& quantile_fn) {
  if (sample.empty()) throw std::invalid_argument("wasserstein1: empty sample");
  const auto s = sorted_copy(sample);
  const double n = static_cast<double>(s.size());
  double acc = 0.0;
  for (std::size_t i = 0; i < s.size(); ++i)
    acc += std::abs(s[i] - quantile_fn((static_cast<double>(i) + 0.5) / n));
  return acc / n;
}

// Hill estimator of the tail index from the top k order statistics of |X|.
inline double hill_tail_index(const std::vector<double>& sample, std::size_t k) {
  if (k < 2 || k >= sample.size()) throw std::invalid_argument("hill: bad k");
  std::vector<double> mag(sample.size());
  std::transform(sample.begin(), sample.end(), mag.begin(),
                 [](double x) { return std::abs(x); });
  std::sort(mag.begin(), mag.end(), std::greater<>());
  const double xk = mag[k];
  if (!(xk > 0.0)) throw numeric_error("hill: threshold order statistic is zero");
  double acc = 0.0;
  for (std::size_t i = 0; i < k; ++i) acc += std::log(mag[i] / xk);
  return static_cast<double>(k) / acc;  // estimate of alpha
}

// Empirical characteristic function Re E[e^{i xi X}] for symmetric laws.
inline double empirical_cf_real(const std::vector<double>& sample, double xi) {
  if (sample.empty()) throw std::invalid_argument("empirical_cf: empty sample");
  double acc = 0.0;
  for (double x : sample) acc += std::cos(xi * x);
  return acc / static_cast<double>(sample.size());
}

}  // namespace fld
