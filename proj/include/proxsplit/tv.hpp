#pragma once

// Total variation split into four Haar-block terms tv_i = h∘U_i, where h sums
// the Euclidean norms of the (vertical, horizontal) difference pairs stored in
// the off-diagonal quadrants of U_i y. Each U_i is orthogonal and the frame
// synthesis is semi-orthogonal, so every term has an exact prox.

#include <cmath>
#include <stdexcept>
#include <string>

#include "proxsplit/array.hpp"
#include "proxsplit/frame.hpp"
#include "proxsplit/linear_map.hpp"
#include "proxsplit/prox.hpp"

namespace proxsplit {

namespace detail {

inline std::size_t require_even_square(const RealArray& v, const char* what) {
  if (v.rank() != 2 || v.rows() != v.cols() || v.rows() % 2 != 0) {
    throw ShapeError(std::string(what) + ": expects a square array with even side, got " + v.shape().str());
  }
  return v.rows() / 2;
}

}  // namespace detail

/// h(v) = sum_{k,l < N/2} ||(v(k, l + N/2), v(k + N/2, l))||.
inline double tv_block_value(const RealArray& v) {
  const std::size_t h = detail::require_even_square(v, "tv_block_value");
  double s = 0.0;
  for (std::size_t k = 0; k < h; ++k)
    for (std::size_t l = 0; l < h; ++l) s += std::hypot(v(k, l + h), v(k + h, l));
  return s;
}

/// Pi = prox_{t h}: the smooth and diagonal quadrants pass through, each
/// off-diagonal pair is shrunk by max(0, 1 - t / ||pair||).
inline RealArray tv_block_prox(double t, const RealArray& v) {
  if (!(t >= 0.0)) throw std::invalid_argument("tv_block_prox: threshold must be nonnegative");
  const std::size_t h = detail::require_even_square(v, "tv_block_prox");
  RealArray out = v;
  for (std::size_t k = 0; k < h; ++k) {
    for (std::size_t l = 0; l < h; ++l) {
      const double n = std::hypot(v(k, l + h), v(k + h, l));
      const double s = n > t ? 1.0 - t / n : 0.0;
      out(k, l + h) *= s;
      out(k + h, l) *= s;
    }
  }
  return out;
}

/// f = beta h on the Haar-block coefficient array.
inline ProxFn prox_tv_block(double beta) {
  if (!(beta > 0.0)) throw std::invalid_argument("prox_tv_block: beta must be positive");
  ProxFn f;
  f.name = "tv_block";
  f.evaluate = [beta](const RealArray& v, double g) { return tv_block_prox(g * beta, v); };
  f.objective = [beta](const RealArray& v) { return beta * tv_block_value(v); };
  return f;
}

/// beta tv_i(y) = beta h(U_i y) on images.
inline ProxFn prox_tv_image(int i, double beta, Shape image) {
  return prox_semiorthogonal(prox_tv_block(beta), haar_block_map(i, image), 1.0);
}

/// beta tv_i(F* x) on frame coefficients; the block threshold is gamma kappa beta.
inline ProxFn prox_tv_i(int i, const FrameSpec& F, double beta, Shape image) {
  const LinearMap L = compose(haar_block_map(i, image), frame_synthesis_map(F, image));
  ProxFn f = prox_semiorthogonal(prox_tv_block(beta), L, F.kappa());
  f.name = "tv" + std::to_string(i);
  return f;
}

/// sum_i tv_i(y).
inline double total_variation(const RealArray& y) {
  double s = 0.0;
  for (int i = 0; i < 4; ++i) s += tv_block_value(haar_block_apply(i, y));
  return s;
}

}  // namespace proxsplit
