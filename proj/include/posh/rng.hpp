#pragma once

#include <cmath>
#include <cstdint>

namespace posh {

// Splitmix64 stream. All simulator randomness flows through streams derived
// per (seed, trial, purpose) so that trial results are bit-reproducible and
// independent of how trials are scheduled.
class RngStream {
 public:
  explicit RngStream(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next_u64() {
    state_ += 0x9e3779b97f4a7c15ull;
    std::uint64_t z = state_;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
  }

  // Uniform on [0, 1).
  double uniform01() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  // Uniform on (0, 1]; keeps log() finite in gauss().
  double uniform01_open() {
    return static_cast<double>((next_u64() >> 11) + 1) * 0x1.0p-53;
  }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

  // Box-Muller; two draws per call, second half discarded for a stateless
  // draw sequence.
  double gauss(double stddev) {
    const double two_pi = 6.283185307179586476925286766559;
    double u1 = uniform01_open();
    double u2 = uniform01();
    return stddev * std::sqrt(-2.0 * std::log(u1)) * std::cos(two_pi * u2);
  }

 private:
  std::uint64_t state_;
};

inline std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b) {
  std::uint64_t z = a ^ (b + 0x9e3779b97f4a7c15ull + (a << 6) + (a >> 2));
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

inline RngStream derive_stream(std::uint64_t master, std::uint64_t trial,
                               std::uint64_t purpose) {
  return RngStream(mix_seed(mix_seed(master, trial), purpose));
}

}  // namespace posh
