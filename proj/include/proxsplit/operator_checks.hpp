#pragma once

// Randomized probes of linear-operator identities.

#include <algorithm>
#include <cstdint>

#include "proxsplit/linear_map.hpp"
#include "proxsplit/random.hpp"

namespace proxsplit {

/// Largest relative defect |<Lx,y> - <x,L*y>| / (||Lx|| ||y|| + ||x|| ||L*y||)
/// over random Gaussian pairs.
inline double adjoint_mismatch(const LinearMap& L, int trials = 100, std::uint64_t seed = 7) {
  Rng rng(seed);
  double worst = 0.0;
  for (int t = 0; t < trials; ++t) {
    const RealArray x = rng.gaussian_array(L.domain);
    const RealArray y = rng.gaussian_array(L.codomain);
    const RealArray Lx = L.apply(x);
    const RealArray Lty = L.adjoint(y);
    const double scale = norm(Lx) * norm(y) + norm(x) * norm(Lty);
    if (scale == 0.0) continue;
    worst = std::max(worst, std::abs(dot(Lx, y) - dot(x, Lty)) / scale);
  }
  return worst;
}

/// Largest relative defect ||L L* y - kappa y|| / ||y|| over random probes.
inline double semi_orthogonality_defect(const LinearMap& L, double kappa, int trials = 4,
                                        std::uint64_t seed = 11) {
  Rng rng(seed);
  double worst = 0.0;
  for (int t = 0; t < trials; ++t) {
    const RealArray y = rng.gaussian_array(L.codomain);
    RealArray r = L.apply(L.adjoint(y));
    r.axpy(-kappa, y);
    worst = std::max(worst, norm(r) / norm(y));
  }
  return worst;
}

}  // namespace proxsplit
