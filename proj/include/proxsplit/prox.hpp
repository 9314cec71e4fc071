#pragma once

// Proximity operators.
//
// Every potential f is packaged as a ProxFn whose evaluate(x, gamma) returns
// prox_{gamma f}(x) = argmin_y gamma f(y) + ||x - y||^2 / 2. The step gamma is
// folded into each operator's own parameters (thresholds, weights) inside
// evaluate, so a solver only ever passes its effective step.

#include <cassert>
#include <cmath>
#include <functional>
#include <limits>
#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

#include "proxsplit/array.hpp"
#include "proxsplit/fft.hpp"
#include "proxsplit/linear_map.hpp"
#include "proxsplit/operator_checks.hpp"

namespace proxsplit {

inline constexpr double kInfinity = std::numeric_limits<double>::infinity();

/// Coarse description of dom f, consumed by the qualification advisory.
enum class DomainKind { full, affine, bounded_convex, other };

inline const char* to_string(DomainKind d) {
  switch (d) {
    case DomainKind::full: return "full";
    case DomainKind::affine: return "affine";
    case DomainKind::bounded_convex: return "bounded_convex";
    case DomainKind::other: return "other";
  }
  return "?";
}

struct ProxFn {
  std::string name;
  std::function<RealArray(const RealArray&, double)> evaluate;
  DomainKind domain = DomainKind::full;
  /// f(x), possibly +inf; empty when the value is not available.
  std::function<double(const RealArray&)> objective;

  RealArray operator()(const RealArray& x, double gamma) const { return evaluate(x, gamma); }
};

/// Projector onto a nonempty closed convex set.
struct Projector {
  std::string name;
  std::function<RealArray(const RealArray&)> project;
  std::function<bool(const RealArray&, double)> contains;
  DomainKind kind = DomainKind::other;

  RealArray operator()(const RealArray& x) const { return project(x); }
};

inline double distance_to(const Projector& C, const RealArray& x) { return distance(x, C.project(x)); }

/// Membership tolerance used when indicator terms are evaluated for logging.
inline constexpr double kIndicatorTolerance = 1e-9;

/// iota_C as a ProxFn: prox_{gamma iota_C} = P_C for every gamma.
inline ProxFn indicator(const Projector& C) {
  ProxFn f;
  f.name = "indicator(" + C.name + ")";
  f.evaluate = [C](const RealArray& x, double) { return C.project(x); };
  f.domain = C.kind;
  f.objective = [C](const RealArray& x) { return C.contains(x, kIndicatorTolerance) ? 0.0 : kInfinity; };
  return f;
}

// ---------------------------------------------------------------------------
// Scalar functions

struct ScalarConvexFn {
  std::string name;
  std::function<double(double)> value;
  /// prox_{gamma phi}(xi)
  std::function<double(double, double)> prox;
  /// prox_{gamma phi*}(xi)
  std::function<double(double, double)> conjugate_prox;
  /// beta with d phi(0) = [-beta, beta] (phi even)
  double max_subgrad_at_zero = 0.0;
};

namespace detail {

/// Root of an increasing function g on [lo, hi] with g(lo) <= 0 <= g(hi),
/// by Newton steps safeguarded with bisection.
template <typename G, typename DG>
double solve_increasing(G g, DG dg, double lo, double hi, int max_iter = 200) {
  double glo = g(lo), ghi = g(hi);
  if (glo >= 0.0) return lo;
  if (ghi <= 0.0) return hi;
  constexpr double eps = std::numeric_limits<double>::epsilon();
  double x = 0.5 * (lo + hi);
  for (int it = 0; it < max_iter; ++it) {
    const double gx = g(x);
    if (gx == 0.0) return x;
    if (gx < 0.0) lo = x; else hi = x;
    if (hi - lo <= 4.0 * eps * std::abs(hi)) return 0.5 * (lo + hi);
    const double d = dg(x);
    double next = (d > 0.0 && std::isfinite(d)) ? x - gx / d : lo - 1.0;
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    if (std::abs(next - x) <= 2.0 * eps * std::abs(x)) return next;
    x = next;
  }
  return x;
}

inline double sgn(double v) { return (v > 0.0) - (v < 0.0); }

}  // namespace detail

inline ScalarConvexFn scalar_zero() {
  return {"zero", [](double) { return 0.0; }, [](double xi, double) { return xi; },
          [](double, double) { return 0.0; }, 0.0};
}

/// phi = alpha |.|, phi* = indicator of [-alpha, alpha].
inline ScalarConvexFn scalar_abs(double alpha) {
  if (!(alpha > 0.0)) throw std::invalid_argument("scalar_abs: alpha must be positive");
  ScalarConvexFn f;
  f.name = "abs";
  f.value = [alpha](double t) { return alpha * std::abs(t); };
  f.prox = [alpha](double xi, double g) { return detail::sgn(xi) * std::max(std::abs(xi) - g * alpha, 0.0); };
  f.conjugate_prox = [alpha](double xi, double) { return std::clamp(xi, -alpha, alpha); };
  f.max_subgrad_at_zero = alpha;
  return f;
}

/// phi = alpha |.|^p with p > 1. Both proxes solve their own stationarity
/// equation: y + gamma alpha p y^{p-1} = |xi| for phi, and
/// u + gamma (u / (alpha p))^{1/(p-1)} = |xi| for phi*.
inline ScalarConvexFn scalar_power(double alpha, double p) {
  if (!(alpha > 0.0)) throw std::invalid_argument("scalar_power: alpha must be positive");
  if (!(p > 1.0)) throw std::invalid_argument("scalar_power: exponent must exceed 1");
  ScalarConvexFn f;
  f.name = "power";
  f.value = [alpha, p](double t) { return alpha * std::pow(std::abs(t), p); };
  f.prox = [alpha, p](double xi, double g) {
    const double t = std::abs(xi);
    if (t == 0.0) return 0.0;
    const double c = g * alpha * p;
    const double y = detail::solve_increasing(
        [=](double v) { return v + c * std::pow(v, p - 1.0) - t; },
        [=](double v) { return 1.0 + c * (p - 1.0) * std::pow(v, p - 2.0); }, 0.0, t);
    return detail::sgn(xi) * y;
  };
  f.conjugate_prox = [alpha, p](double xi, double g) {
    const double t = std::abs(xi);
    if (t == 0.0) return 0.0;
    const double e = 1.0 / (p - 1.0), s = alpha * p;
    const double u = detail::solve_increasing(
        [=](double v) { return v + g * std::pow(v / s, e) - t; },
        [=](double v) { return 1.0 + g * e * std::pow(v / s, e - 1.0) / s; }, 0.0, t);
    return detail::sgn(xi) * u;
  };
  f.max_subgrad_at_zero = 0.0;
  return f;
}

// ---------------------------------------------------------------------------
// l1 norm

inline RealArray soft_threshold(const RealArray& x, double t) {
  RealArray out(x.shape());
  for (std::size_t i = 0; i < x.size(); ++i) out[i] = detail::sgn(x[i]) * std::max(std::abs(x[i]) - t, 0.0);
  return out;
}

/// f = alpha ||.||_1; prox_{gamma f} soft-thresholds at gamma alpha.
inline ProxFn prox_l1(double alpha) {
  if (!(alpha > 0.0)) throw std::invalid_argument("prox_l1: alpha must be positive");
  ProxFn f;
  f.name = "l1";
  f.evaluate = [alpha](const RealArray& x, double g) { return soft_threshold(x, g * alpha); };
  f.objective = [alpha](const RealArray& x) {
    double s = 0.0;
    for (double v : x) s += std::abs(v);
    return alpha * s;
  };
  return f;
}

// ---------------------------------------------------------------------------
// Separable functions in an orthonormal basis

class BasisError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// f(x) = sum_k phi_k(<x, e_k>) for an orthonormal basis (e_k).
inline ProxFn prox_separable(std::vector<RealArray> basis, std::vector<ScalarConvexFn> scalars,
                             double tol = 1e-10) {
  if (basis.empty()) throw BasisError("prox_separable: empty basis");
  if (basis.size() != scalars.size()) throw BasisError("prox_separable: basis and scalar list lengths differ");
  if (basis.size() != basis.front().size()) throw BasisError("prox_separable: family does not span the space");
  for (std::size_t a = 0; a < basis.size(); ++a) {
    for (std::size_t b = a; b < basis.size(); ++b) {
      const double expected = a == b ? 1.0 : 0.0;
      if (std::abs(dot(basis[a], basis[b]) - expected) > tol) {
        throw BasisError("prox_separable: basis not orthonormal at (" + std::to_string(a) + "," +
                         std::to_string(b) + ")");
      }
    }
  }
  auto B = std::make_shared<const std::vector<RealArray>>(std::move(basis));
  auto phis = std::make_shared<const std::vector<ScalarConvexFn>>(std::move(scalars));
  ProxFn f;
  f.name = "separable";
  f.evaluate = [B, phis](const RealArray& x, double g) {
    RealArray out(x.shape());
    for (std::size_t k = 0; k < B->size(); ++k) out.axpy((*phis)[k].prox(dot(x, (*B)[k]), g), (*B)[k]);
    return out;
  };
  f.objective = [B, phis](const RealArray& x) {
    double s = 0.0;
    for (std::size_t k = 0; k < B->size(); ++k) s += (*phis)[k].value(dot(x, (*B)[k]));
    return s;
  };
  return f;
}

// ---------------------------------------------------------------------------
// Quadratic data term

class ConvergenceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Solve (Id + c L*L) p = rhs by conjugate gradient.
inline RealArray solve_normal_equation_cg(const LinearMap& L, double c, const RealArray& rhs,
                                          const RealArray& start, double rel_tol = 1e-12,
                                          int max_iter = 2000) {
  const auto A = [&](const RealArray& v) {
    RealArray out = v;
    out.axpy(c, L.adjoint(L.apply(v)));
    return out;
  };
  RealArray p = start;
  RealArray r = rhs - A(p);
  RealArray d = r;
  double rr = dot(r, r);
  const double target = rel_tol * std::max(norm(rhs), 1e-300);
  for (int it = 0; it < max_iter; ++it) {
    if (std::sqrt(rr) <= target) return p;
    const RealArray Ad = A(d);
    const double step = rr / dot(d, Ad);
    p.axpy(step, d);
    r.axpy(-step, Ad);
    const double rr_next = dot(r, r);
    d *= rr_next / rr;
    d += r;
    rr = rr_next;
  }
  if (std::sqrt(rr) <= target) return p;
  throw ConvergenceError("prox_quadratic: conjugate gradient did not converge (ill-conditioned normal equation)");
}

/// f = (weight / 2) ||L . - z||^2, so prox_{gamma f} x = (Id + c L*L)^{-1}(x + c L*z)
/// with c = gamma * weight. Circulant maps are solved per frequency.
inline ProxFn prox_quadratic(const LinearMap& L, const RealArray& z, double weight) {
  if (!(weight > 0.0)) throw std::invalid_argument("prox_quadratic: weight must be positive");
  ProxFn f;
  f.name = "quadratic";
  if (L.kind == MapKind::circulant && L.spectrum) {
    auto H = L.spectrum;
    auto Z = std::make_shared<const ComplexSpectrum>(dft(z));
    f.evaluate = [H, Z, weight](const RealArray& x, double g) {
      const double c = g * weight;
      ComplexSpectrum X = dft(x);
      for (std::size_t i = 0; i < X.size(); ++i) {
        const cplx h = (*H)[i];
        X[i] = (X[i] + c * std::conj(h) * (*Z)[i]) / (1.0 + c * std::norm(h));
      }
      return idft(X);
    };
  } else if (L.kind == MapKind::identity) {
    f.evaluate = [z, weight](const RealArray& x, double g) {
      const double c = g * weight;
      RealArray out = x;
      out.axpy(c, z);
      return (1.0 / (1.0 + c)) * out;
    };
  } else {
    f.evaluate = [L, z, weight](const RealArray& x, double g) {
      const double c = g * weight;
      RealArray rhs = x;
      rhs.axpy(c, L.adjoint(z));
      return solve_normal_equation_cg(L, c, rhs, x);
    };
  }
  f.objective = [L, z, weight](const RealArray& x) {
    const RealArray r = L.apply(x) - z;
    return 0.5 * weight * dot(r, r);
  };
  return f;
}

// ---------------------------------------------------------------------------
// Composition with a semi-orthogonal map (L L* = kappa Id)

class SemiOrthogonalityError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// prox of f∘L = Id + (1/kappa) L* (prox_{kappa f} - Id) L, with the step
/// gamma entering as prox_{gamma kappa f}.
inline ProxFn prox_semiorthogonal(const ProxFn& f, const LinearMap& L, double kappa, double tol = 1e-8) {
  if (!(kappa > 0.0)) throw SemiOrthogonalityError("prox_semiorthogonal: kappa must be positive");
  const double defect = semi_orthogonality_defect(L, kappa);
  if (defect > tol) {
    throw SemiOrthogonalityError("prox_semiorthogonal: L L* != kappa Id (relative defect " +
                                 std::to_string(defect) + ")");
  }
  ProxFn out;
  out.name = f.name + "∘" + L.descriptor;
  out.evaluate = [f, L, kappa](const RealArray& x, double g) {
    const RealArray Lx = L.apply(x);
    RealArray r = x;
    r.axpy(1.0 / kappa, L.adjoint(f.evaluate(Lx, g * kappa) - Lx));
    return r;
  };
  out.domain = f.domain;
  if (f.objective) out.objective = [f, L](const RealArray& x) { return f.objective(L.apply(x)); };
  return out;
}

// ---------------------------------------------------------------------------
// Powers of distance functions

/// Unique nu in [0, d] with nu + (nu / (a p))^{1/(p-1)} = d, for p > 1.
inline double distance_power_nu(double d, double a, double p) {
  if (d <= 0.0) return 0.0;
  const double e = 1.0 / (p - 1.0), s = a * p;
  return detail::solve_increasing([=](double v) { return v + std::pow(v / s, e) - d; },
                                  [=](double v) { return 1.0 + e * std::pow(v / s, e - 1.0) / s; }, 0.0, d);
}

/// Closed form of distance_power_nu for p = 3/2.
inline double distance_power_nu_three_halves(double d, double a) {
  // 9a^2 (sqrt(1 + 16d/(9a^2)) - 1) / 8, rationalized to avoid cancellation
  return 2.0 * d / (1.0 + std::sqrt(1.0 + 16.0 * d / (9.0 * a * a)));
}

/// Closed form of distance_power_nu for p = 2.
inline double distance_power_nu_square(double d, double a) { return d * 2.0 * a / (2.0 * a + 1.0); }

enum class NuSolver { closed_form_when_available, newton };

/// f = alpha d_C^p with p >= 1; the effective coefficient of prox_{gamma f} is gamma alpha.
inline ProxFn prox_distance_power(const Projector& C, double alpha, double p,
                                  NuSolver solver = NuSolver::closed_form_when_available) {
  if (!(alpha > 0.0)) throw std::invalid_argument("prox_distance_power: alpha must be positive");
  if (!(p >= 1.0)) throw std::invalid_argument("prox_distance_power: exponent must be >= 1");
  ProxFn f;
  f.name = "distance_power(" + C.name + ")";
  f.evaluate = [C, alpha, p, solver](const RealArray& x, double g) {
    const double a = g * alpha;
    const RealArray P = C.project(x);
    const double d = distance(x, P);
    if (p == 1.0) {
      if (d <= a) return P;
      RealArray out = x;
      out.axpy(a / d, P - x);
      return out;
    }
    if (d == 0.0) return x;
    double nu;
    if (solver == NuSolver::closed_form_when_available && p == 1.5) {
      nu = distance_power_nu_three_halves(d, a);
    } else if (solver == NuSolver::closed_form_when_available && p == 2.0) {
      nu = distance_power_nu_square(d, a);
    } else {
      nu = distance_power_nu(d, a, p);
    }
    if (2.0 * nu <= d) {
      RealArray out = x;
      out.axpy(nu / d, P - x);
      return out;
    }
    // closer to C than to x: step out from P by d - nu, taken from the
    // stationarity equation rather than by cancellation
    const double rest = std::min(d - nu, std::pow(nu / (a * p), 1.0 / (p - 1.0)));
    RealArray out = P;
    out.axpy(rest / d, x - P);
    return out;
  };
  f.objective = [C, alpha, p](const RealArray& x) { return alpha * std::pow(distance_to(C, x), p); };
  return f;
}

/// f = phi∘d_C for an even convex phi differentiable off 0. With gamma folded
/// in, prox_{(gamma phi)*}(d) is taken from the scalar Moreau identity
/// d - prox_{gamma phi}(d).
inline ProxFn prox_phi_distance(const Projector& C, const ScalarConvexFn& phi) {
  ProxFn f;
  f.name = phi.name + "∘distance(" + C.name + ")";
  f.evaluate = [C, phi](const RealArray& x, double g) {
    const RealArray P = C.project(x);
    const double d = distance(x, P);
    if (d <= g * phi.max_subgrad_at_zero) return P;
    const double nu = d - phi.prox(d, g);
    RealArray out = x;
    out.axpy(nu / d, P - x);
    return out;
  };
  f.objective = [C, phi](const RealArray& x) { return phi.value(distance_to(C, x)); };
  return f;
}

// ---------------------------------------------------------------------------
// Conjugates

/// prox_{gamma f*}(x) = x - gamma prox_{f/gamma}(x / gamma).
inline RealArray moreau_conjugate_prox(const ProxFn& f, const RealArray& x, double gamma) {
  if (!(gamma > 0.0)) throw std::invalid_argument("moreau_conjugate_prox: gamma must be positive");
  const RealArray inner = f.evaluate((1.0 / gamma) * x, 1.0 / gamma);
  RealArray out = x;
  out.axpy(-gamma, inner);
#ifndef NDEBUG
  // x = prox_{gamma f*} x + gamma prox_{f/gamma}(x / gamma), with the second term recomputed
  RealArray recomposed = out;
  recomposed.axpy(gamma, f.evaluate((1.0 / gamma) * x, 1.0 / gamma));
  assert(out.all_finite() && distance(recomposed, x) <= 1e-10 * std::max(1.0, norm(x)));
#endif
  return out;
}

/// f* as a ProxFn (no objective).
inline ProxFn conjugate(const ProxFn& f) {
  ProxFn c;
  c.name = "conjugate(" + f.name + ")";
  c.evaluate = [f](const RealArray& x, double g) { return moreau_conjugate_prox(f, x, g); };
  c.domain = DomainKind::other;
  return c;
}

}  // namespace proxsplit
