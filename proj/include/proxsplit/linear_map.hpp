#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <string>

#include "proxsplit/array.hpp"
#include "proxsplit/fft.hpp"

namespace proxsplit {

enum class MapKind { identity, circulant, frame, gradient, haar_block, composite, scaled };

/// A bounded linear operator together with its adjoint.
///
/// Circulant maps additionally carry the DFT of their (full-size) kernel so
/// that normal equations involving them can be solved per frequency.
struct LinearMap {
  std::function<RealArray(const RealArray&)> apply;
  std::function<RealArray(const RealArray&)> adjoint;
  MapKind kind = MapKind::identity;
  std::string descriptor;
  Shape domain{};
  Shape codomain{};
  std::shared_ptr<const ComplexSpectrum> spectrum;  // circulant only

  RealArray operator()(const RealArray& x) const { return apply(x); }
};

inline LinearMap identity_map(Shape shape) {
  LinearMap m;
  m.apply = [](const RealArray& x) { return x; };
  m.adjoint = m.apply;
  m.kind = MapKind::identity;
  m.descriptor = "identity";
  m.domain = m.codomain = shape;
  return m;
}

/// Scale a map by s: (sL)* = s L*.
inline LinearMap scaled(LinearMap L, double s) {
  LinearMap m;
  m.apply = [L, s](const RealArray& x) { return s * L.apply(x); };
  m.adjoint = [L, s](const RealArray& y) { return s * L.adjoint(y); };
  m.kind = MapKind::scaled;
  m.descriptor = "scaled(" + L.descriptor + ")";
  m.domain = L.domain;
  m.codomain = L.codomain;
  return m;
}

/// outer ∘ inner, with adjoint inner* ∘ outer*.
inline LinearMap compose(LinearMap outer, LinearMap inner) {
  if (!(outer.domain == inner.codomain)) {
    throw ShapeError("compose: " + outer.descriptor + " expects " + outer.domain.str() + ", " +
                     inner.descriptor + " yields " + inner.codomain.str());
  }
  LinearMap m;
  m.apply = [outer, inner](const RealArray& x) { return outer.apply(inner.apply(x)); };
  m.adjoint = [outer, inner](const RealArray& y) { return inner.adjoint(outer.adjoint(y)); };
  m.kind = MapKind::composite;
  m.descriptor = outer.descriptor + "∘" + inner.descriptor;
  m.domain = inner.domain;
  m.codomain = outer.codomain;
  return m;
}

// ---------------------------------------------------------------------------
// Circulant convolution

/// Embed a small (odd-sided) kernel into a full-size array, placing its
/// centre tap at index 0 and wrapping the remaining taps periodically.
inline RealArray embed_kernel(const RealArray& small, Shape shape) {
  RealArray full(shape);
  const std::size_t kr = small.rows(), kc = small.cols();
  if (kr > shape.rows || kc > shape.cols) {
    throw ShapeError("embed_kernel: kernel " + small.shape().str() + " larger than " + shape.str());
  }
  const auto cr = static_cast<std::ptrdiff_t>(kr / 2), cc = static_cast<std::ptrdiff_t>(kc / 2);
  const auto R = static_cast<std::ptrdiff_t>(shape.rows), C = static_cast<std::ptrdiff_t>(shape.cols);
  for (std::size_t a = 0; a < kr; ++a) {
    for (std::size_t b = 0; b < kc; ++b) {
      const std::ptrdiff_t r = ((static_cast<std::ptrdiff_t>(a) - cr) % R + R) % R;
      const std::ptrdiff_t c = ((static_cast<std::ptrdiff_t>(b) - cc) % C + C) % C;
      full[static_cast<std::size_t>(r) * shape.cols + static_cast<std::size_t>(c)] += small(a, b);
    }
  }
  return full;
}

/// Normalized k x k box kernel (1-D when rank is 1).
inline RealArray uniform_kernel(std::size_t k, int rank = 2) {
  if (rank == 1) return RealArray(Shape::vector(k), 1.0 / static_cast<double>(k));
  return RealArray(Shape::image(k, k), 1.0 / static_cast<double>(k * k));
}

namespace detail {
inline RealArray spectral_multiply(const ComplexSpectrum& H, const RealArray& x, bool conjugate) {
  ComplexSpectrum X = dft(x);
  for (std::size_t i = 0; i < X.size(); ++i) X[i] *= conjugate ? std::conj(H[i]) : H[i];
  return idft(X);
}
}  // namespace detail

/// Periodic convolution y[n] = sum_m kernel[m] x[n - m]; kernel and x share shape.
inline RealArray circulant_apply(const RealArray& kernel, const RealArray& x) {
  kernel.check_same(x, "circulant_apply");
  return detail::spectral_multiply(dft(kernel), x, false);
}

/// Circulant map built from a full-size kernel (see embed_kernel).
inline LinearMap circulant_map(const RealArray& kernel) {
  auto H = std::make_shared<const ComplexSpectrum>(dft(kernel));
  LinearMap m;
  const Shape shape = kernel.shape();
  m.apply = [H, shape](const RealArray& x) {
    if (!(x.shape() == shape)) throw ShapeError("circulant: input " + x.shape().str());
    return detail::spectral_multiply(*H, x, false);
  };
  m.adjoint = [H, shape](const RealArray& y) {
    if (!(y.shape() == shape)) throw ShapeError("circulant adjoint: input " + y.shape().str());
    return detail::spectral_multiply(*H, y, true);
  };
  m.kind = MapKind::circulant;
  m.descriptor = "circulant";
  m.domain = m.codomain = shape;
  m.spectrum = H;
  return m;
}

// ---------------------------------------------------------------------------
// Periodic 2x2 Haar-like stencils. For an N x N periodic image y with
// entries y(k,l), every stencil reads the block y(k..k+1, l..l+1):
//   grad0:   (a + b + c + d) / 2     (smoothing)
//   grad1:   (y(k+1,·) - y(k,·)) summed over two columns / 2  (vertical)
//   grad1t:  transpose(grad1(transpose(y)))                    (horizontal)
//   grad2:   (y(k+1,l+1) - y(k,l+1) - y(k+1,l) + y(k,l)) / 2    (diagonal)

enum class Stencil { smooth = 0, vertical = 1, horizontal = 2, diagonal = 3 };

namespace detail {

struct Block {
  double y00, y01, y10, y11;  // y(k,l), y(k,l+1), y(k+1,l), y(k+1,l+1)
};

inline Block read_block(const RealArray& y, std::size_t k, std::size_t l) {
  const std::size_t R = y.rows(), C = y.cols();
  const std::size_t k1 = (k + 1) % R, l1 = (l + 1) % C;
  return {y(k, l), y(k, l1), y(k1, l), y(k1, l1)};
}

inline double stencil_value(Stencil s, const Block& b) {
  switch (s) {
    case Stencil::smooth: return 0.5 * (b.y11 + b.y01 + b.y10 + b.y00);
    case Stencil::vertical: return 0.5 * (b.y11 - b.y01 + b.y10 - b.y00);
    case Stencil::horizontal: return 0.5 * (b.y11 - b.y10 + b.y01 - b.y00);
    case Stencil::diagonal: return 0.5 * (b.y11 - b.y01 - b.y10 + b.y00);
  }
  return 0.0;
}

/// Weights of y00, y01, y10, y11 in each stencil, times 2.
inline constexpr int kStencilSigns[4][4] = {
    {1, 1, 1, 1},     // smooth
    {-1, -1, 1, 1},   // vertical
    {-1, 1, -1, 1},   // horizontal
    {1, -1, -1, 1},   // diagonal
};

inline void scatter_block(RealArray& y, std::size_t k, std::size_t l, Stencil s, double v) {
  const std::size_t R = y.rows(), C = y.cols();
  const std::size_t k1 = (k + 1) % R, l1 = (l + 1) % C;
  const int* w = kStencilSigns[static_cast<int>(s)];
  y(k, l) += 0.5 * w[0] * v;
  y(k, l1) += 0.5 * w[1] * v;
  y(k1, l) += 0.5 * w[2] * v;
  y(k1, l1) += 0.5 * w[3] * v;
}

inline void require_image(const RealArray& y, const char* what) {
  if (y.rank() != 2) throw ShapeError(std::string(what) + ": expects a 2-D image");
}

}  // namespace detail

/// Full-resolution stencil output, same shape as y.
inline RealArray apply_stencil(Stencil s, const RealArray& y) {
  detail::require_image(y, "apply_stencil");
  RealArray out(y.shape());
  for (std::size_t k = 0; k < y.rows(); ++k)
    for (std::size_t l = 0; l < y.cols(); ++l) out(k, l) = detail::stencil_value(s, detail::read_block(y, k, l));
  return out;
}

inline RealArray apply_stencil_adjoint(Stencil s, const RealArray& g) {
  detail::require_image(g, "apply_stencil_adjoint");
  RealArray out(g.shape());
  for (std::size_t k = 0; k < g.rows(); ++k)
    for (std::size_t l = 0; l < g.cols(); ++l) detail::scatter_block(out, k, l, s, g(k, l));
  return out;
}

struct GradientImages {
  RealArray smooth;      // grad0
  RealArray vertical;    // grad1
  RealArray horizontal;  // (grad1(y^T))^T
  RealArray diagonal;    // grad2
};

inline GradientImages gradient_ops(const RealArray& y) {
  return {apply_stencil(Stencil::smooth, y), apply_stencil(Stencil::vertical, y),
          apply_stencil(Stencil::horizontal, y), apply_stencil(Stencil::diagonal, y)};
}

inline LinearMap gradient_map(Stencil s, Shape shape) {
  LinearMap m;
  m.apply = [s](const RealArray& y) { return apply_stencil(s, y); };
  m.adjoint = [s](const RealArray& g) { return apply_stencil_adjoint(s, g); };
  m.kind = MapKind::gradient;
  m.descriptor = "gradient" + std::to_string(static_cast<int>(s));
  m.domain = m.codomain = shape;
  return m;
}

// ---------------------------------------------------------------------------
// Decimated Haar blocks U_i, i = q + 2r with (q, r) in {0,1}^2.
//
// U_i y is N x N and stacks the four stencils sampled on the blocks anchored
// at (2k+q, 2l+r): smooth in the top-left quadrant, vertical in the top-right,
// horizontal in the bottom-left and diagonal in the bottom-right. The blocks
// tile the periodic image, so U_i is orthogonal.

inline RealArray haar_block_apply(int i, const RealArray& y) {
  detail::require_image(y, "haar_block_apply");
  if (i < 0 || i > 3) throw std::invalid_argument("haar_block_apply: index must be in 0..3");
  const std::size_t N = y.rows();
  if (N % 2 != 0 || y.cols() != N) {
    throw ShapeError("haar_block_apply: image must be square with even side, got " + y.shape().str());
  }
  const std::size_t q = static_cast<std::size_t>(i % 2), r = static_cast<std::size_t>(i / 2);
  const std::size_t h = N / 2;
  RealArray out(y.shape());
  for (std::size_t k = 0; k < h; ++k) {
    for (std::size_t l = 0; l < h; ++l) {
      const auto b = detail::read_block(y, 2 * k + q, 2 * l + r);
      out(k, l) = detail::stencil_value(Stencil::smooth, b);
      out(k, l + h) = detail::stencil_value(Stencil::vertical, b);
      out(k + h, l) = detail::stencil_value(Stencil::horizontal, b);
      out(k + h, l + h) = detail::stencil_value(Stencil::diagonal, b);
    }
  }
  return out;
}

inline RealArray haar_block_adjoint(int i, const RealArray& v) {
  detail::require_image(v, "haar_block_adjoint");
  if (i < 0 || i > 3) throw std::invalid_argument("haar_block_adjoint: index must be in 0..3");
  const std::size_t N = v.rows();
  if (N % 2 != 0 || v.cols() != N) {
    throw ShapeError("haar_block_adjoint: image must be square with even side, got " + v.shape().str());
  }
  const std::size_t q = static_cast<std::size_t>(i % 2), r = static_cast<std::size_t>(i / 2);
  const std::size_t h = N / 2;
  RealArray out(v.shape());
  for (std::size_t k = 0; k < h; ++k) {
    for (std::size_t l = 0; l < h; ++l) {
      const std::size_t a = 2 * k + q, b = 2 * l + r;
      detail::scatter_block(out, a, b, Stencil::smooth, v(k, l));
      detail::scatter_block(out, a, b, Stencil::vertical, v(k, l + h));
      detail::scatter_block(out, a, b, Stencil::horizontal, v(k + h, l));
      detail::scatter_block(out, a, b, Stencil::diagonal, v(k + h, l + h));
    }
  }
  return out;
}

inline LinearMap haar_block_map(int i, Shape shape) {
  LinearMap m;
  m.apply = [i](const RealArray& y) { return haar_block_apply(i, y); };
  m.adjoint = [i](const RealArray& v) { return haar_block_adjoint(i, v); };
  m.kind = MapKind::haar_block;
  m.descriptor = "haar_block" + std::to_string(i);
  m.domain = m.codomain = shape;
  return m;
}

}  // namespace proxsplit
