#pragma once

// Reproducible random numbers. std::mt19937_64 is fully specified by the
// standard; the uniform and Gaussian mappings below are written out so that
// a given seed yields bit-identical samples on every platform.

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>

#include "proxsplit/array.hpp"

namespace proxsplit {

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  /// Uniform on [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  /// Standard normal via the Box-Muller transform (both outputs used).
  double gaussian() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    double u1 = uniform();
    while (u1 <= 0.0) u1 = uniform();
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double t = 2.0 * std::numbers::pi * u2;
    spare_ = r * std::sin(t);
    has_spare_ = true;
    return r * std::cos(t);
  }

  RealArray gaussian_array(Shape shape, double sigma = 1.0) {
    RealArray a(shape);
    for (double& v : a) v = sigma * gaussian();
    return a;
  }
  RealArray uniform_array(Shape shape, double lo, double hi) {
    RealArray a(shape);
    for (double& v : a) v = uniform(lo, hi);
    return a;
  }

  std::mt19937_64& engine() { return engine_; }

 private:
  std::mt19937_64 engine_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace proxsplit
