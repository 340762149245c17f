#pragma once

#include <cmath>
#include <cstdint>

namespace signopt {

// splitmix64 finalizer; the basis of the counter-based streams below.
inline std::uint64_t mix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

// Deterministic generator keyed by (seed, stream_a, stream_b). Draws depend
// only on the key and draw index, never on evaluation order elsewhere, so
// parallel sweeps and the distributed simulator reproduce bit-for-bit.
class CounterRng {
 public:
  CounterRng(std::uint64_t seed, std::uint64_t stream_a = 0,
             std::uint64_t stream_b = 0) {
    state_ = mix64(seed ^ 0x8f1bbcdcbfa53e0bULL);
    state_ = mix64(state_ ^ mix64(stream_a ^ 0xd2b74407b1ce6e93ULL));
    state_ = mix64(state_ ^ mix64(stream_b ^ 0x589965cc75374cc3ULL));
    have_spare_ = false;
    spare_ = 0.0;
  }

  std::uint64_t next_u64() {
    state_ += 0x9e3779b97f4a7c15ULL;
    std::uint64_t z = state_;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  // Uniform in (0, 1]; never 0 so it is safe inside log().
  double next_unit() {
    return (static_cast<double>(next_u64() >> 11) + 1.0) * 0x1.0p-53;
  }

  // Standard normal via Box-Muller; pairs are cached.
  double next_gaussian() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    const double u1 = next_unit();
    const double u2 = next_unit();
    const double radius = std::sqrt(-2.0 * std::log(u1));
    const double angle = 6.283185307179586476925286766559 * u2;
    spare_ = radius * std::sin(angle);
    have_spare_ = true;
    return radius * std::cos(angle);
  }

 private:
  std::uint64_t state_;
  bool have_spare_;
  double spare_;
};

}  // namespace signopt
