//
// Project grappa - Copyright 2026 The grappa authors.
// SPDX-License-Identifier: Apache-2.0
//

#ifndef GRAPPA_RANDOM_H_
#define GRAPPA_RANDOM_H_

#include <cmath>
#include <cstdint>
#include <random>

#include "grappa/matrix.h"

namespace grappa {

// Seeded generator with platform-independent derived distributions
// (std::uniform_real_distribution output is not portable across libraries).
class Rng {
public:
  explicit Rng(std::uint64_t seed): engine_(seed) { }

  std::uint64_t next() { return engine_(); }

  // Uniform in [0, 1).
  double uniform() {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
  }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // Uniform integer in [0, n).
  std::uint64_t below(std::uint64_t n) {
    const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
    std::uint64_t x;
    do {
      x = engine_();
    } while (x >= limit);
    return x % n;
  }

  double normal() {
    double u1 = uniform();
    while (u1 <= 0.0)
      u1 = uniform();
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
  }

  template <class It>
  void shuffle(It first, It last) {
    const auto n = last - first;
    for (auto i = n - 1; i > 0; --i) {
      const auto j = static_cast<decltype(i)>(below(i + 1));
      std::swap(first[i], first[j]);
    }
  }

  std::mt19937_64 &engine() { return engine_; }

private:
  std::mt19937_64 engine_;
};

// Glorot/Xavier uniform initialization.
inline Matrix glorot_uniform(int rows, int cols, Rng &rng) {
  const double limit = std::sqrt(6.0 / (rows + cols));
  Matrix m(rows, cols);
  for (double &v: m.values())
    v = rng.uniform(-limit, limit);
  return m;
}

}  // namespace grappa

#endif  // GRAPPA_RANDOM_H_
