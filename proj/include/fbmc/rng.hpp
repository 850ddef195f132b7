#pragma once
// Deterministic random streams for Monte-Carlo runs. Every draw in the
// library comes from a stream derived from (master seed, stream name,
// counters), so a run is reproducible independent of thread scheduling.

#include <cmath>
#include <complex>
#include <cstdint>
#include <string_view>

namespace fbmc {

namespace detail {

inline uint64_t splitmix64(uint64_t& s) {
  s += 0x9e3779b97f4a7c15ULL;
  uint64_t z = s;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

inline uint64_t fnv1a(std::string_view s) {
  uint64_t h = 0xcbf29ce484222325ULL;
  for (char c : s) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001b3ULL;
  }
  return h;
}

}  // namespace detail

/** Counter-seeded PRNG stream (splitmix64 core, Box-Muller gaussians). */
class RngStream {
 public:
  RngStream() : state_(0x853c49e6748fea9bULL) {}
  explicit RngStream(uint64_t seed) : state_(seed) { next_u64(); }

  /// Independent stream from a master seed, a stream name and up to three
  /// counters (e.g. trial, antenna). Same inputs give the same stream.
  static RngStream derive(uint64_t seed, std::string_view name, uint64_t i0 = 0,
                          uint64_t i1 = 0, uint64_t i2 = 0) {
    uint64_t s = seed;
    detail::splitmix64(s);
    s ^= detail::fnv1a(name);
    detail::splitmix64(s);
    s ^= i0;
    detail::splitmix64(s);
    s ^= i1;
    detail::splitmix64(s);
    s ^= i2;
    RngStream r;
    r.state_ = s;
    r.next_u64();
    return r;
  }

  uint64_t next_u64() { return detail::splitmix64(state_); }

  /// Uniform in [0, 1).
  double uniform() { return (next_u64() >> 11) * 0x1.0p-53; }

  double uniform(double a, double b) { return a + uniform() * (b - a); }

  /// Standard normal via Box-Muller (pairs cached).
  double gaussian() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    double u1 = uniform();
    while (u1 <= 0.0) u1 = uniform();
    double r = std::sqrt(-2.0 * std::log(u1));
    double t = 2.0 * kTwoPiHalf * uniform();
    spare_ = r * std::sin(t);
    have_spare_ = true;
    return r * std::cos(t);
  }

  /// Circularly-symmetric complex normal CN(0, variance).
  std::complex<double> cgaussian(double variance) {
    double u1 = uniform();
    while (u1 <= 0.0) u1 = uniform();
    double r = std::sqrt(-variance * std::log(u1));
    double t = 2.0 * kTwoPiHalf * uniform();
    return {r * std::cos(t), r * std::sin(t)};
  }

  /// Fair +1/-1.
  double sign() { return (next_u64() & 1u) ? 1.0 : -1.0; }

 private:
  static constexpr double kTwoPiHalf = 3.14159265358979323846;
  uint64_t state_;
  double spare_ = 0.0;
  bool have_spare_ = false;
};

}  // namespace fbmc
