#pragma once

#include <cstdint>
#include <string_view>

namespace embeval::rng {

// splitmix64 finalizer: bijective avalanche on 64-bit values.
constexpr uint64_t avalanche(uint64_t x) {
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
  return x ^ (x >> 31);
}

constexpr uint64_t fnv1a(std::string_view s) {
  uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  return h;
}

// Derives a task seed from independent components. Each component is
// absorbed through the avalanche, so streams do not depend on the order
// in which work units are evaluated.
constexpr uint64_t mix(uint64_t seed, uint64_t a, uint64_t b = 0) {
  return avalanche(avalanche(seed ^ a) ^ b);
}

// Deterministic generator with platform-stable draws. std::uniform_*
// distributions are deliberately avoided: their output differs between
// standard library implementations.
class Stream {
 public:
  explicit Stream(uint64_t seed) : state_(seed) {}

  uint64_t next() { return avalanche(state_ += 0x9e3779b97f4a7c15ull); }

  // Unbiased integer in [0, n); n must be > 0.
  uint64_t bounded(uint64_t n);

  // [0, 1) with 53 random bits.
  double unit() { return double(next() >> 11) * 0x1.0p-53; }

  // (0, 1]
  double unit_pos() { return double((next() >> 11) + 1) * 0x1.0p-53; }

  // Standard normal via Box-Muller.
  double gaussian();

 private:
  uint64_t state_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace embeval::rng
