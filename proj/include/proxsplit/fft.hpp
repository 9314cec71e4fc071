#pragma once

// Discrete Fourier transforms on RealArray.
//
// Normalization (fixed repo-wide): the forward transform is unnormalized,
//   X[k] = sum_n x[n] exp(-2 pi i k n / N),
// and the inverse carries the 1/N factor. Parseval therefore reads
//   ||x||^2 = (1/N) sum_k |X[k]|^2.
// 2-D transforms are separable (rows, then columns) with N = rows * cols.
// Power-of-two lengths use an iterative radix-2 FFT; other lengths fall back
// to a direct O(N^2) sum, which is only meant for small test sizes.

#include <bit>
#include <complex>
#include <numbers>
#include <stdexcept>
#include <vector>

#include "proxsplit/array.hpp"

namespace proxsplit {

using cplx = std::complex<double>;

namespace detail {

inline void fft_radix2(std::vector<cplx>& a, bool inverse) {
  const std::size_t n = a.size();
  for (std::size_t i = 1, j = 0; i < n; ++i) {
    std::size_t bit = n >> 1;
    for (; j & bit; bit >>= 1) j ^= bit;
    j ^= bit;
    if (i < j) std::swap(a[i], a[j]);
  }
  const double sign = inverse ? 1.0 : -1.0;
  for (std::size_t len = 2; len <= n; len <<= 1) {
    const double ang = sign * 2.0 * std::numbers::pi / static_cast<double>(len);
    const std::size_t half = len / 2;
    for (std::size_t i = 0; i < n; i += len) {
      for (std::size_t k = 0; k < half; ++k) {
        // Twiddles are evaluated directly to keep round-off at O(eps log N).
        const cplx w = std::polar(1.0, ang * static_cast<double>(k));
        const cplx u = a[i + k];
        const cplx v = a[i + k + half] * w;
        a[i + k] = u + v;
        a[i + k + half] = u - v;
      }
    }
  }
}

inline void dft_direct(std::vector<cplx>& a, bool inverse) {
  const std::size_t n = a.size();
  const double sign = inverse ? 1.0 : -1.0;
  std::vector<cplx> out(n);
  for (std::size_t k = 0; k < n; ++k) {
    cplx s = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      const double ang = sign * 2.0 * std::numbers::pi *
                         static_cast<double>((k * j) % n) / static_cast<double>(n);
      s += a[j] * std::polar(1.0, ang);
    }
    out[k] = s;
  }
  a = std::move(out);
}

/// Unnormalized 1-D transform in place (sign -1 forward, +1 inverse).
inline void transform_1d(std::vector<cplx>& a, bool inverse) {
  if (a.empty()) throw std::invalid_argument("dft: zero-length transform");
  if (std::has_single_bit(a.size())) {
    fft_radix2(a, inverse);
  } else {
    dft_direct(a, inverse);
  }
}

inline void transform_nd(Shape shape, std::vector<cplx>& data, bool inverse) {
  if (shape.rank == 1 || shape.cols == 1) {
    transform_1d(data, inverse);
    return;
  }
  std::vector<cplx> line(shape.cols);
  for (std::size_t r = 0; r < shape.rows; ++r) {
    std::copy_n(data.begin() + static_cast<std::ptrdiff_t>(r * shape.cols), shape.cols, line.begin());
    transform_1d(line, inverse);
    std::copy(line.begin(), line.end(), data.begin() + static_cast<std::ptrdiff_t>(r * shape.cols));
  }
  line.resize(shape.rows);
  for (std::size_t c = 0; c < shape.cols; ++c) {
    for (std::size_t r = 0; r < shape.rows; ++r) line[r] = data[r * shape.cols + c];
    transform_1d(line, inverse);
    for (std::size_t r = 0; r < shape.rows; ++r) data[r * shape.cols + c] = line[r];
  }
}

}  // namespace detail

inline ComplexSpectrum dft(const RealArray& x) {
  if (!x.all_finite()) throw std::domain_error("dft: non-finite input");
  ComplexSpectrum s;
  s.shape = x.shape();
  s.data.assign(x.begin(), x.end());
  detail::transform_nd(s.shape, s.data, false);
  s.hermitian = true;
  return s;
}

/// Inverse transform with the 1/N factor, returning complex samples.
inline std::vector<cplx> idft_complex(const ComplexSpectrum& X) {
  std::vector<cplx> data = X.data;
  detail::transform_nd(X.shape, data, true);
  const double inv = 1.0 / static_cast<double>(data.size());
  for (auto& v : data) v *= inv;
  return data;
}

/// Inverse transform of a Hermitian spectrum. Spectra that were produced by
/// dft() and edited conjugate-symmetrically keep the flag set; otherwise the
/// symmetry is verified and a violation is rejected.
inline RealArray idft(const ComplexSpectrum& X) {
  if (!X.hermitian && !X.is_hermitian(1e-9)) {
    throw std::domain_error("idft: spectrum is not Hermitian, inverse would be complex");
  }
  const auto data = idft_complex(X);
  RealArray out(X.shape);
  for (std::size_t i = 0; i < data.size(); ++i) out[i] = data[i].real();
  return out;
}

}  // namespace proxsplit
