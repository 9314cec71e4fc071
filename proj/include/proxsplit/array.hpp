#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <concepts>
#include <cstddef>
#include <numeric>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace proxsplit {

/// Thrown when two arrays that must agree in shape do not.
class ShapeError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Shape of a 1-D signal (rank 1, cols == 1) or a 2-D image (rank 2).
struct Shape {
  std::size_t rows = 0;
  std::size_t cols = 1;
  int rank = 1;

  static constexpr Shape vector(std::size_t n) { return {n, 1, 1}; }
  static constexpr Shape image(std::size_t r, std::size_t c) { return {r, c, 2}; }

  constexpr std::size_t size() const { return rows * cols; }
  friend constexpr bool operator==(const Shape&, const Shape&) = default;

  std::string str() const {
    return rank == 1 ? "(" + std::to_string(rows) + ")"
                     : "(" + std::to_string(rows) + "," + std::to_string(cols) + ")";
  }
};

/// Dense real 1-D signal or row-major 2-D image. Indices are zero-based.
class RealArray {
 public:
  RealArray() = default;
  explicit RealArray(Shape shape, double fill = 0.0)
      : shape_(shape), data_(shape.size(), fill) {}
  explicit RealArray(std::size_t n) : RealArray(Shape::vector(n), 0.0) {}
  template <std::floating_point F>
  RealArray(std::size_t n, F fill) : RealArray(Shape::vector(n), static_cast<double>(fill)) {}
  template <std::integral R, std::integral C>
  RealArray(R rows, C cols, double fill = 0.0)
      : RealArray(Shape::image(static_cast<std::size_t>(rows), static_cast<std::size_t>(cols)), fill) {}
  RealArray(Shape shape, std::vector<double> data)
      : shape_(shape), data_(std::move(data)) {
    if (data_.size() != shape_.size()) {
      throw ShapeError("RealArray: data length " + std::to_string(data_.size()) +
                       " does not match shape " + shape_.str());
    }
  }
  RealArray(std::initializer_list<double> values)
      : shape_(Shape::vector(values.size())), data_(values) {}

  const Shape& shape() const { return shape_; }
  std::size_t size() const { return data_.size(); }
  std::size_t rows() const { return shape_.rows; }
  std::size_t cols() const { return shape_.cols; }
  int rank() const { return shape_.rank; }
  bool empty() const { return data_.empty(); }

  double& operator[](std::size_t i) { return data_[i]; }
  double operator[](std::size_t i) const { return data_[i]; }
  double& operator()(std::size_t r, std::size_t c) { return data_[r * shape_.cols + c]; }
  double operator()(std::size_t r, std::size_t c) const { return data_[r * shape_.cols + c]; }

  std::span<double> values() { return data_; }
  std::span<const double> values() const { return data_; }
  const std::vector<double>& data() const { return data_; }
  auto begin() { return data_.begin(); }
  auto end() { return data_.end(); }
  auto begin() const { return data_.begin(); }
  auto end() const { return data_.end(); }

  bool all_finite() const {
    return std::all_of(data_.begin(), data_.end(), [](double v) { return std::isfinite(v); });
  }

  RealArray& operator+=(const RealArray& o) {
    check_same(o, "+=");
    for (std::size_t i = 0; i < data_.size(); ++i) data_[i] += o.data_[i];
    return *this;
  }
  RealArray& operator-=(const RealArray& o) {
    check_same(o, "-=");
    for (std::size_t i = 0; i < data_.size(); ++i) data_[i] -= o.data_[i];
    return *this;
  }
  RealArray& operator*=(double s) {
    for (double& v : data_) v *= s;
    return *this;
  }
  /// this += s * o
  RealArray& axpy(double s, const RealArray& o) {
    check_same(o, "axpy");
    for (std::size_t i = 0; i < data_.size(); ++i) data_[i] += s * o.data_[i];
    return *this;
  }

  friend RealArray operator+(RealArray a, const RealArray& b) { return a += b; }
  friend RealArray operator-(RealArray a, const RealArray& b) { return a -= b; }
  friend RealArray operator*(double s, RealArray a) { return a *= s; }
  friend RealArray operator*(RealArray a, double s) { return a *= s; }
  friend RealArray operator-(RealArray a) { return a *= -1.0; }

  friend bool operator==(const RealArray&, const RealArray&) = default;

  void check_same(const RealArray& o, const char* what) const {
    if (!(shape_ == o.shape_)) {
      throw ShapeError(std::string("RealArray ") + what + ": shape " + shape_.str() +
                       " vs " + o.shape_.str());
    }
  }

 private:
  Shape shape_{};
  std::vector<double> data_;
};

inline double dot(const RealArray& a, const RealArray& b) {
  a.check_same(b, "dot");
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}
inline double norm(const RealArray& a) { return std::sqrt(dot(a, a)); }
inline double distance(const RealArray& a, const RealArray& b) { return norm(a - b); }
inline double sum(const RealArray& a) { return std::accumulate(a.begin(), a.end(), 0.0); }
inline double max_abs(const RealArray& a) {
  double m = 0.0;
  for (double v : a) m = std::max(m, std::abs(v));
  return m;
}

inline RealArray transpose(const RealArray& a) {
  if (a.rank() == 1) return a;
  RealArray t(a.cols(), a.rows());
  for (std::size_t r = 0; r < a.rows(); ++r)
    for (std::size_t c = 0; c < a.cols(); ++c) t(c, r) = a(r, c);
  return t;
}

/// Complex DFT coefficients laid out exactly like the originating RealArray.
struct ComplexSpectrum {
  Shape shape{};
  std::vector<std::complex<double>> data;
  bool hermitian = false;

  std::complex<double>& operator[](std::size_t i) { return data[i]; }
  const std::complex<double>& operator[](std::size_t i) const { return data[i]; }
  std::size_t size() const { return data.size(); }

  /// Flat index of the frequency -k (mod N, per axis).
  std::size_t mirror(std::size_t i) const {
    const std::size_t r = i / shape.cols, c = i % shape.cols;
    const std::size_t mr = (shape.rows - r) % shape.rows;
    const std::size_t mc = (shape.cols - c) % shape.cols;
    return mr * shape.cols + mc;
  }

  bool is_hermitian(double tol = 1e-12) const {
    double scale = 1.0;
    for (const auto& v : data) scale = std::max(scale, std::abs(v));
    for (std::size_t i = 0; i < data.size(); ++i) {
      if (std::abs(data[i] - std::conj(data[mirror(i)])) > tol * scale) return false;
    }
    return true;
  }
};

}  // namespace proxsplit
