#pragma once

#include <cstdint>
#include <random>

namespace fld {

namespace detail {
inline std::uint64_t splitmix64(std::uint64_t& state) {
  state += 0x9e3779b97f4a7c15ULL;
  std::uint64_t z = state;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}
}  // namespace detail

// Seedable, splittable random stream. Each (seed, stream_id) pair yields an
// independent substream; identical pairs yield bit-identical sequences.
class RngStream {
 public:
  explicit RngStream(std::uint64_t seed, std::uint64_t stream_id = 0) {
    std::uint64_t s = seed ^ (0x5851f42d4c957f2dULL * (stream_id + 1));
    std::seed_seq seq{static_cast<std::uint32_t>(detail::splitmix64(s)),
                      static_cast<std::uint32_t>(detail::splitmix64(s) >> 32),
                      static_cast<std::uint32_t>(detail::splitmix64(s)),
                      static_cast<std::uint32_t>(detail::splitmix64(s) >> 32)};
    engine_.seed(seq);
  }

  // Uniform on (0,1), endpoints excluded.
  double uniform() {
    double u;
    do {
      u = uniform_(engine_);
    } while (u <= 0.0 || u >= 1.0);
    return u;
  }

  double uniform(double a, double b) { return a + (b - a) * uniform(); }

  double exponential() { return -std::log(uniform()); }

  double gaussian() { return normal_(engine_); }

  std::mt19937_64& engine() { return engine_; }

 private:
  std::mt19937_64 engine_;
  std::uniform_real_distribution<double> uniform_{0.0, 1.0};
  std::normal_distribution<double> normal_{0.0, 1.0};
};

}  // namespace fld
