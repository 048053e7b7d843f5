#pragma once
// Deterministic random number generation, identical across platforms.
//
// Streams are xoshiro256++ generators seeded through splitmix64. Uniform
// doubles take the top 53 bits of the raw output, so no standard-library
// distribution (whose algorithms are implementation-defined) is involved
// anywhere. Ensemble run i derives its seed as
//   splitmix64_mix(master + (i + 1) * 0x9E3779B97F4A7C15)
// which keeps runs independent and lets any run be regenerated in isolation.

#include <cstdint>

namespace tickms::rng {

// One splitmix64 step applied to an explicit value (finalizer form).
inline std::uint64_t splitmix64_mix(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

// Sequential splitmix64 stream, used for seeding and for tiny fixtures.
class SplitMix64 {
 public:
  explicit SplitMix64(std::uint64_t seed) : state_(seed) {}
  std::uint64_t next() {
    state_ += 0x9E3779B97F4A7C15ULL;
    std::uint64_t z = state_;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }
  double uniform01() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

 private:
  std::uint64_t state_;
};

// xoshiro256++ by Blackman and Vigna; state expanded from the seed with
// splitmix64 so that any 64-bit seed is acceptable, including 0.
class Xoshiro256pp {
 public:
  explicit Xoshiro256pp(std::uint64_t seed) {
    SplitMix64 sm(seed);
    for (auto& word : s_) word = sm.next();
  }

  std::uint64_t next() {
    const std::uint64_t result = rotl(s_[0] + s_[3], 23) + s_[0];
    const std::uint64_t t = s_[1] << 17;
    s_[2] ^= s_[0];
    s_[3] ^= s_[1];
    s_[1] ^= s_[2];
    s_[0] ^= s_[3];
    s_[2] ^= t;
    s_[3] = rotl(s_[3], 45);
    return result;
  }

  // Uniform on [0, 1) with 53-bit resolution.
  double uniform01() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

 private:
  static std::uint64_t rotl(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }
  std::uint64_t s_[4];
};

// Seed for run `index` of an ensemble under a master seed.
inline std::uint64_t derive_stream(std::uint64_t master, std::uint64_t index) {
  return splitmix64_mix(master + (index + 1) * 0x9E3779B97F4A7C15ULL);
}

}  // namespace tickms::rng
