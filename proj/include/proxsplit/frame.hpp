#pragma once

// Tight frames built from shifted, periodic, separable orthonormal wavelet
// decompositions. Each shift s contributes one orthonormal transform W applied
// to the circularly shifted image, so F*F = (number of shifts) * Id.

#include <cmath>
#include <string>
#include <utility>
#include <vector>

#include "proxsplit/array.hpp"
#include "proxsplit/linear_map.hpp"

namespace proxsplit {

class FrameError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Length-8 least-asymmetric Daubechies ("symlet") lowpass decomposition filter,
/// tabulated values refined to double precision on the orthonormality and
/// vanishing-moment equations.
inline std::vector<double> symlet8_lowpass() {
  return {-0.07576571478950221, -0.029635527646002493, 0.497618667632775, 0.8037387518051321,
          0.29785779560530606, -0.09921954357663353, -0.012603967262031304, 0.032223100604051466};
}

inline std::vector<double> haar_lowpass() {
  const double s = 1.0 / std::sqrt(2.0);
  return {s, s};
}

struct FrameSpec {
  std::vector<double> lowpass = symlet8_lowpass();
  int levels = 4;
  std::vector<std::pair<int, int>> shifts = {{0, 0}, {1, 0}, {0, 1}, {1, 1}};

  double kappa() const { return static_cast<double>(shifts.size()); }

  /// Throws FrameError unless the filter is orthonormal to its even shifts.
  void validate(double tol = 1e-10) const {
    const std::size_t L = lowpass.size();
    if (L == 0 || L % 2 != 0) throw FrameError("FrameSpec: filter length must be even and positive");
    if (levels < 1) throw FrameError("FrameSpec: at least one level required");
    if (shifts.empty()) throw FrameError("FrameSpec: at least one shift required");
    for (std::size_t m = 0; 2 * m < L; ++m) {
      double s = 0.0;
      for (std::size_t n = 0; n + 2 * m < L; ++n) s += lowpass[n] * lowpass[n + 2 * m];
      const double expected = (m == 0) ? 1.0 : 0.0;
      if (std::abs(s - expected) > tol) {
        throw FrameError("FrameSpec: filter not orthonormal at shift " + std::to_string(2 * m));
      }
    }
  }

  void check_image(Shape shape) const {
    const std::size_t block = std::size_t{1} << levels;
    if (shape.rank != 2 || shape.rows % block != 0 || shape.cols % block != 0) {
      throw FrameError("FrameSpec: image " + shape.str() + " not divisible by 2^" +
                       std::to_string(levels));
    }
  }

  Shape coefficient_shape(Shape image) const {
    return Shape::image(shifts.size() * image.rows, image.cols);
  }
};

namespace detail {

inline std::vector<double> highpass_from(const std::vector<double>& h) {
  const std::size_t L = h.size();
  std::vector<double> g(L);
  for (std::size_t n = 0; n < L; ++n) g[n] = ((n % 2) ? -1.0 : 1.0) * h[L - 1 - n];
  return g;
}

// One periodic two-channel analysis step on a strided line of length M.
inline void analyze_line(const std::vector<double>& h, const std::vector<double>& g, double* x,
                         std::size_t M, std::size_t stride, std::vector<double>& buf) {
  buf.assign(M, 0.0);
  const std::size_t half = M / 2;
  for (std::size_t k = 0; k < half; ++k) {
    double a = 0.0, d = 0.0;
    for (std::size_t n = 0; n < h.size(); ++n) {
      const double v = x[((2 * k + n) % M) * stride];
      a += h[n] * v;
      d += g[n] * v;
    }
    buf[k] = a;
    buf[half + k] = d;
  }
  for (std::size_t i = 0; i < M; ++i) x[i * stride] = buf[i];
}

inline void synthesize_line(const std::vector<double>& h, const std::vector<double>& g, double* x,
                            std::size_t M, std::size_t stride, std::vector<double>& buf) {
  buf.assign(M, 0.0);
  const std::size_t half = M / 2;
  for (std::size_t k = 0; k < half; ++k) {
    const double a = x[k * stride], d = x[(half + k) * stride];
    for (std::size_t n = 0; n < h.size(); ++n) buf[(2 * k + n) % M] += h[n] * a + g[n] * d;
  }
  for (std::size_t i = 0; i < M; ++i) x[i * stride] = buf[i];
}

}  // namespace detail

/// Periodic separable orthonormal DWT (Mallat layout), in place on a copy.
inline RealArray dwt2(const std::vector<double>& h, int levels, const RealArray& y) {
  const auto g = detail::highpass_from(h);
  RealArray c = y;
  std::vector<double> buf;
  std::size_t R = y.rows(), C = y.cols();
  double* base = c.values().data();
  for (int j = 0; j < levels; ++j) {
    for (std::size_t r = 0; r < R; ++r) detail::analyze_line(h, g, base + r * y.cols(), C, 1, buf);
    for (std::size_t col = 0; col < C; ++col) detail::analyze_line(h, g, base + col, R, y.cols(), buf);
    R /= 2;
    C /= 2;
  }
  return c;
}

inline RealArray idwt2(const std::vector<double>& h, int levels, const RealArray& c) {
  const auto g = detail::highpass_from(h);
  RealArray y = c;
  std::vector<double> buf;
  double* base = y.values().data();
  for (int j = levels - 1; j >= 0; --j) {
    const std::size_t R = c.rows() >> j, C = c.cols() >> j;
    for (std::size_t col = 0; col < C; ++col) detail::synthesize_line(h, g, base + col, R, c.cols(), buf);
    for (std::size_t r = 0; r < R; ++r) detail::synthesize_line(h, g, base + r * c.cols(), C, 1, buf);
  }
  return y;
}

inline RealArray circular_shift(const RealArray& y, int dr, int dc) {
  RealArray out(y.shape());
  const auto R = static_cast<long>(y.rows()), C = static_cast<long>(y.cols());
  for (long k = 0; k < R; ++k)
    for (long l = 0; l < C; ++l)
      out(static_cast<std::size_t>(k), static_cast<std::size_t>(l)) =
          y(static_cast<std::size_t>(((k + dr) % R + R) % R), static_cast<std::size_t>(((l + dc) % C + C) % C));
  return out;
}

/// F y: concatenation over shifts of W(shift_s y), stacked vertically.
inline RealArray frame_analysis(const FrameSpec& F, const RealArray& y) {
  F.validate();
  F.check_image(y.shape());
  const std::size_t R = y.rows(), C = y.cols();
  RealArray out(F.coefficient_shape(y.shape()));
  for (std::size_t s = 0; s < F.shifts.size(); ++s) {
    const RealArray w = dwt2(F.lowpass, F.levels, circular_shift(y, F.shifts[s].first, F.shifts[s].second));
    std::copy(w.begin(), w.end(), out.begin() + static_cast<std::ptrdiff_t>(s * R * C));
  }
  return out;
}

/// F* c: sum over shifts of shift_s^{-1} W^T c_s.
inline RealArray frame_synthesis(const FrameSpec& F, const RealArray& c, Shape image) {
  F.validate();
  F.check_image(image);
  if (!(c.shape() == F.coefficient_shape(image))) {
    throw FrameError("frame_synthesis: coefficients " + c.shape().str() + " do not match image " + image.str());
  }
  const std::size_t n = image.size();
  RealArray out(image);
  for (std::size_t s = 0; s < F.shifts.size(); ++s) {
    RealArray block(image, std::vector<double>(c.begin() + static_cast<std::ptrdiff_t>(s * n),
                                               c.begin() + static_cast<std::ptrdiff_t>((s + 1) * n)));
    out += circular_shift(idwt2(F.lowpass, F.levels, block), -F.shifts[s].first, -F.shifts[s].second);
  }
  return out;
}

/// Synthesis operator F* : coefficients -> image as a LinearMap (adjoint = analysis).
inline LinearMap frame_synthesis_map(const FrameSpec& F, Shape image) {
  F.validate();
  F.check_image(image);
  LinearMap m;
  m.apply = [F, image](const RealArray& c) { return frame_synthesis(F, c, image); };
  m.adjoint = [F](const RealArray& y) { return frame_analysis(F, y); };
  m.kind = MapKind::frame;
  m.descriptor = "frame_synthesis";
  m.domain = F.coefficient_shape(image);
  m.codomain = image;
  return m;
}

}  // namespace proxsplit
