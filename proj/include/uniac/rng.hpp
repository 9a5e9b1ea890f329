#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <string_view>
#include <vector>

namespace uniac {

// Deterministic, splittable random stream. xoshiro256** seeded through
// splitmix64, with uniform/normal draws built from raw bits so sequences are
// fully specified by this file (no implementation-defined std::distributions).
class Rng {
 public:
  explicit Rng(std::uint64_t seed) {
    std::uint64_t x = seed;
    for (auto& w : s_) w = splitmix64(x);
  }

  std::uint64_t next_u64() {
    const std::uint64_t result = rotl(s_[1] * 5, 7) * 9;
    const std::uint64_t t = s_[1] << 17;
    s_[2] ^= s_[0];
    s_[3] ^= s_[1];
    s_[1] ^= s_[2];
    s_[0] ^= s_[3];
    s_[2] ^= t;
    s_[3] = rotl(s_[3], 45);
    return result;
  }

  // Uniform in [0, 1) with 53-bit resolution.
  double uniform01() { return double(next_u64() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

  // Uniform integer in [0, n).
  std::size_t uniform_index(std::size_t n) {
    // Modulo bias is < 2^-40 for any n we use; acceptable and deterministic.
    return std::size_t(next_u64() % std::uint64_t(n));
  }

  // Standard normal via Box-Muller (one value per call; the twin is unused so
  // the stream layout stays simple).
  double normal() {
    double u1 = uniform01();
    double u2 = uniform01();
    if (u1 <= 0.0) u1 = 0x1.0p-53;
    const double r = std::sqrt(-2.0 * std::log(u1));
    return r * std::cos(6.283185307179586476925286766559 * u2);
  }

  std::vector<double> normal_vec(std::size_t n) {
    std::vector<double> out(n);
    for (auto& v : out) v = normal();
    return out;
  }

  // Derives an independent child stream. Streams are labeled so that runs
  // differing only in one axis reuse identical randomness elsewhere.
  Rng derive(std::string_view label, std::uint64_t index = 0) const {
    std::uint64_t h = 0x9e3779b97f4a7c15ull;
    for (char c : label) h = (h ^ std::uint64_t(std::uint8_t(c))) * 0x100000001b3ull;
    std::uint64_t x = s_[0] ^ rotl(s_[2], 13) ^ h;
    x = splitmix64(x) ^ index;
    return Rng(splitmix64(x));
  }

 private:
  static std::uint64_t rotl(std::uint64_t x, int k) {
    return (x << k) | (x >> (64 - k));
  }
  static std::uint64_t splitmix64(std::uint64_t& x) {
    std::uint64_t z = (x += 0x9e3779b97f4a7c15ull);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
  }

  std::uint64_t s_[4];
};

}  // namespace uniac
