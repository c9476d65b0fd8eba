#include "embeval/rng.hpp"

#include <cassert>
#include <cmath>
#include <numbers>

namespace embeval::rng {

uint64_t Stream::bounded(uint64_t n) {
  assert(n > 0);
  // Lemire's multiply-shift, with rejection to remove the modulo bias.
  for (;;) {
    uint64_t x = next();
    __uint128_t m = static_cast<__uint128_t>(x) * n;
    uint64_t lo = static_cast<uint64_t>(m);
    if (lo < n) {
      uint64_t t = (0 - n) % n;
      if (lo < t) continue;
    }
    return static_cast<uint64_t>(m >> 64);
  }
}

double Stream::gaussian() {
  if (has_spare_) {
    has_spare_ = false;
    return spare_;
  }
  double u1 = unit_pos();
  double u2 = unit();
  double r = std::sqrt(-2.0 * std::log(u1));
  double a = 2.0 * std::numbers::pi * u2;
  spare_ = r * std::sin(a);
  has_spare_ = true;
  return r * std::cos(a);
}

}  // namespace embeval::rng
