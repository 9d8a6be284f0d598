#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>
#include <utility>

namespace egopriv {

// Seeded generator with portable output: std::mt19937_64 is fully specified
// by the standard, and every derived distribution below is written out here
// instead of relying on the implementation-defined std:: distributions.
//
//   uniform()      53 high bits of one draw, scaled to [0, 1)
//   below(n)       rejection sampling on the top of the 64-bit range
//   normal()       Box-Muller, both variates used (second one cached)
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next() { return engine_(); }

  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  std::uint64_t below(std::uint64_t n) {
    const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
    std::uint64_t x = engine_();
    while (x >= limit) x = engine_();
    return x % n;
  }

  double normal() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    double u1 = uniform();
    while (u1 <= 0.0) u1 = uniform();
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double theta = 2.0 * std::numbers::pi * u2;
    spare_ = r * std::sin(theta);
    has_spare_ = true;
    return r * std::cos(theta);
  }

  // Index drawn from a discrete distribution given by cumulative-free weights.
  template <typename Range>
  std::size_t categorical(const Range& probs) {
    const double u = uniform();
    double acc = 0.0;
    std::size_t i = 0, last = 0;
    for (double p : probs) {
      acc += p;
      if (p > 0.0) last = i;
      if (u < acc) return i;
      ++i;
    }
    return last;
  }

  template <typename It>
  void shuffle(It first, It last) {
    const auto n = static_cast<std::uint64_t>(last - first);
    for (std::uint64_t i = n; i > 1; --i) {
      std::swap(first[i - 1], first[below(i)]);
    }
  }

 private:
  std::mt19937_64 engine_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace egopriv
