#pragma once

// Projectors onto the constraint sets used by the signal and image problems.
// Frequency-domain sets are defined through the unnormalized DFT; since the
// transform is orthogonal up to the factor N, the Euclidean projection in the
// sample domain acts independently on each conjugate pair of coefficients.

#include <cmath>
#include <complex>
#include <memory>
#include <numbers>
#include <stdexcept>
#include <string>
#include <vector>

#include "proxsplit/array.hpp"
#include "proxsplit/fft.hpp"
#include "proxsplit/prox.hpp"

namespace proxsplit {

class MaskError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Set of sample or frequency indices over an array shape.
struct IndexMask {
  Shape shape{};
  std::vector<bool> on;

  IndexMask() = default;
  explicit IndexMask(Shape s) : shape(s), on(s.size(), false) {}

  std::size_t count() const { return static_cast<std::size_t>(std::count(on.begin(), on.end(), true)); }
  bool operator[](std::size_t i) const { return on[i]; }

  /// Flat index of the frequency -k (mod N per axis).
  std::size_t mirror(std::size_t i) const {
    const std::size_t r = i / shape.cols, c = i % shape.cols;
    return ((shape.rows - r) % shape.rows) * shape.cols + (shape.cols - c) % shape.cols;
  }
  bool conjugate_symmetric() const {
    for (std::size_t i = 0; i < on.size(); ++i)
      if (on[i] != on[mirror(i)]) return false;
    return true;
  }
  /// Adds the mirror of every member.
  IndexMask& symmetrize() {
    for (std::size_t i = 0; i < on.size(); ++i)
      if (on[i]) on[mirror(i)] = true;
    return *this;
  }
};

namespace detail {

inline void require_mask(const IndexMask& m, const RealArray& x, const char* what) {
  if (!(m.shape == x.shape())) {
    throw ShapeError(std::string(what) + ": mask shape " + m.shape.str() + " vs input " + x.shape().str());
  }
}

inline void require_hermitian_mask(const IndexMask& m, const char* what) {
  if (!m.conjugate_symmetric()) throw MaskError(std::string(what) + ": frequency mask is not conjugate-symmetric");
}

inline double spectral_tolerance(const RealArray& x, double tol) {
  return tol * (1.0 + norm(x) * std::sqrt(static_cast<double>(x.size())));
}

}  // namespace detail

/// [lo, hi]^n with zeros on the mask S.
inline Projector project_box_and_mask(double lo, double hi, IndexMask zero_mask) {
  if (!(lo <= 0.0 && 0.0 <= hi)) throw std::invalid_argument("project_box_and_mask: box must contain 0");
  auto S = std::make_shared<const IndexMask>(std::move(zero_mask));
  Projector P;
  P.name = "box_and_mask";
  P.kind = DomainKind::bounded_convex;
  P.project = [lo, hi, S](const RealArray& x) {
    detail::require_mask(*S, x, "project_box_and_mask");
    RealArray out(x.shape());
    for (std::size_t i = 0; i < x.size(); ++i) out[i] = (*S)[i] ? 0.0 : std::clamp(x[i], lo, hi);
    return out;
  };
  P.contains = [lo, hi, S](const RealArray& x, double tol) {
    for (std::size_t i = 0; i < x.size(); ++i) {
      if ((*S)[i] ? std::abs(x[i]) > tol : (x[i] < lo - tol || x[i] > hi + tol)) return false;
    }
    return true;
  };
  return P;
}

/// {x : <x, 1> = n mu}.
inline Projector project_mean_hyperplane(double mu) {
  Projector P;
  P.name = "mean_hyperplane";
  P.kind = DomainKind::affine;
  P.project = [mu](const RealArray& x) {
    const double n = static_cast<double>(x.size());
    const double shift = (sum(x) - n * mu) / n;
    RealArray out = x;
    for (double& v : out) v -= shift;
    return out;
  };
  P.contains = [mu](const RealArray& x, double tol) {
    return std::abs(sum(x) / static_cast<double>(x.size()) - mu) <= tol * (1.0 + std::abs(mu));
  };
  return P;
}

/// {x : angle(X_k) = phase_k for k in D}, X = dft(x). Each constraint is the
/// ray R_+ exp(i phase_k); a coefficient with negative component along the ray
/// projects to 0. phases holds one value per flat frequency index and must be
/// odd under k -> -k; self-conjugate frequencies need phase 0 or pi.
inline Projector project_fourier_phase(IndexMask D, std::vector<double> phases) {
  detail::require_hermitian_mask(D, "project_fourier_phase");
  if (phases.size() != D.on.size()) throw MaskError("project_fourier_phase: one phase per frequency required");
  for (std::size_t k = 0; k < D.on.size(); ++k) {
    if (!D[k]) continue;
    const std::complex<double> a = std::polar(1.0, phases[k]), b = std::polar(1.0, -phases[D.mirror(k)]);
    if (std::abs(a - b) > 1e-9) throw MaskError("project_fourier_phase: phases are not odd at frequency " + std::to_string(k));
  }
  auto Dm = std::make_shared<const IndexMask>(std::move(D));
  auto rays = std::make_shared<std::vector<std::complex<double>>>(phases.size());
  for (std::size_t k = 0; k < phases.size(); ++k) (*rays)[k] = std::polar(1.0, phases[k]);
  // exact sign on self-conjugate frequencies keeps the spectrum Hermitian
  for (std::size_t k = 0; k < phases.size(); ++k)
    if (Dm->mirror(k) == k) (*rays)[k] = {(*rays)[k].real() >= 0.0 ? 1.0 : -1.0, 0.0};
  Projector P;
  P.name = "fourier_phase";
  P.kind = DomainKind::other;
  P.project = [Dm, rays](const RealArray& x) {
    detail::require_mask(*Dm, x, "project_fourier_phase");
    ComplexSpectrum X = dft(x);
    for (std::size_t k = 0; k < X.size(); ++k) {
      if (!(*Dm)[k]) continue;
      const std::complex<double> e = (*rays)[k];
      const double along = (X[k] * std::conj(e)).real();
      X[k] = std::max(along, 0.0) * e;
    }
    return idft(X);
  };
  P.contains = [Dm, rays](const RealArray& x, double tol) {
    const ComplexSpectrum X = dft(x);
    const double t = detail::spectral_tolerance(x, tol);
    for (std::size_t k = 0; k < X.size(); ++k) {
      if (!(*Dm)[k]) continue;
      const std::complex<double> r = X[k] * std::conj((*rays)[k]);
      if (std::abs(r.imag()) > t || r.real() < -t) return false;
    }
    return true;
  };
  return P;
}

/// {x : X_k = 0 for k in D}.
inline Projector project_fourier_zero(IndexMask D) {
  detail::require_hermitian_mask(D, "project_fourier_zero");
  auto Dm = std::make_shared<const IndexMask>(std::move(D));
  Projector P;
  P.name = "fourier_zero";
  P.kind = DomainKind::affine;
  P.project = [Dm](const RealArray& x) {
    detail::require_mask(*Dm, x, "project_fourier_zero");
    ComplexSpectrum X = dft(x);
    for (std::size_t k = 0; k < X.size(); ++k)
      if ((*Dm)[k]) X[k] = 0.0;
    return idft(X);
  };
  P.contains = [Dm](const RealArray& x, double tol) {
    const ComplexSpectrum X = dft(x);
    const double t = detail::spectral_tolerance(x, tol);
    for (std::size_t k = 0; k < X.size(); ++k)
      if ((*Dm)[k] && std::abs(X[k]) > t) return false;
    return true;
  };
  return P;
}

/// {x : |X_k| <= rho for k in D}.
inline Projector project_fourier_magnitude(IndexMask D, double rho) {
  detail::require_hermitian_mask(D, "project_fourier_magnitude");
  if (!(rho >= 0.0)) throw std::invalid_argument("project_fourier_magnitude: rho must be nonnegative");
  auto Dm = std::make_shared<const IndexMask>(std::move(D));
  Projector P;
  P.name = "fourier_magnitude";
  P.kind = DomainKind::other;
  P.project = [Dm, rho](const RealArray& x) {
    detail::require_mask(*Dm, x, "project_fourier_magnitude");
    ComplexSpectrum X = dft(x);
    for (std::size_t k = 0; k < X.size(); ++k) {
      if (!(*Dm)[k]) continue;
      const double m = std::abs(X[k]);
      if (m > rho) X[k] *= rho / m;
    }
    return idft(X);
  };
  P.contains = [Dm, rho](const RealArray& x, double tol) {
    const ComplexSpectrum X = dft(x);
    for (std::size_t k = 0; k < X.size(); ++k)
      if ((*Dm)[k] && std::abs(X[k]) > rho * (1.0 + tol) + tol) return false;
    return true;
  };
  return P;
}

/// {x : ||x|| <= mu}.
inline Projector project_energy_ball(double mu) {
  if (!(mu > 0.0)) throw std::invalid_argument("project_energy_ball: mu must be positive");
  Projector P;
  P.name = "energy_ball";
  P.kind = DomainKind::bounded_convex;
  P.project = [mu](const RealArray& x) {
    const double n = norm(x);
    return n > mu ? (mu / n) * x : x;
  };
  P.contains = [mu](const RealArray& x, double tol) { return norm(x) <= mu * (1.0 + tol) + tol; };
  return P;
}

/// {x : x_k = x_{N-1-k} for all k, x_{N/2} = 1}. The mirror pair
/// (N/2 - 1, N/2) is pinned to 1 and every other pair is averaged.
inline Projector project_symmetry_midpoint() {
  Projector P;
  P.name = "symmetry_midpoint";
  P.kind = DomainKind::affine;
  P.project = [](const RealArray& x) {
    const std::size_t N = x.size();
    if (N < 2 || N % 2 != 0) throw ShapeError("project_symmetry_midpoint: even length >= 2 required");
    RealArray out(x.shape());
    for (std::size_t k = 0; k < N / 2; ++k) {
      const double m = 0.5 * (x[k] + x[N - 1 - k]);
      out[k] = out[N - 1 - k] = m;
    }
    out[N / 2] = out[N / 2 - 1] = 1.0;
    return out;
  };
  P.contains = [](const RealArray& x, double tol) {
    const std::size_t N = x.size();
    if (std::abs(x[N / 2] - 1.0) > tol) return false;
    for (std::size_t k = 0; k < N / 2; ++k)
      if (std::abs(x[k] - x[N - 1 - k]) > tol) return false;
    return true;
  };
  return P;
}

/// {x : x_k = 0 for k in S}.
inline Projector project_time_mask(IndexMask S) {
  auto Sm = std::make_shared<const IndexMask>(std::move(S));
  Projector P;
  P.name = "time_mask";
  P.kind = DomainKind::affine;
  P.project = [Sm](const RealArray& x) {
    detail::require_mask(*Sm, x, "project_time_mask");
    RealArray out = x;
    for (std::size_t k = 0; k < x.size(); ++k)
      if ((*Sm)[k]) out[k] = 0.0;
    return out;
  };
  P.contains = [Sm](const RealArray& x, double tol) {
    for (std::size_t k = 0; k < x.size(); ++k)
      if ((*Sm)[k] && std::abs(x[k]) > tol) return false;
    return true;
  };
  return P;
}

}  // namespace proxsplit
