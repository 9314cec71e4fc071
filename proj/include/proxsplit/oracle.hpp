#pragma once

// Brute-force reference solvers for tests. They only touch objective values,
// explicit (sub)gradients and projections, never the closed-form proximity
// operators they are meant to check.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include "proxsplit/array.hpp"
#include "proxsplit/prox.hpp"
#include "proxsplit/random.hpp"

namespace proxsplit::oracle {

inline constexpr std::size_t kMaxDimension = 64;

class OracleError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

using Objective = std::function<double(const RealArray&)>;
using Gradient = std::function<RealArray(const RealArray&)>;

/// Affine search set {offset + sum_j t_j basis_j}, |t_j| <= radius.
struct Subspace {
  RealArray offset;
  std::vector<RealArray> basis;
  double radius = 10.0;

  static Subspace full(const RealArray& center, double radius) {
    Subspace s;
    s.offset = center;
    s.radius = radius;
    for (std::size_t i = 0; i < center.size(); ++i) {
      RealArray e(center.shape());
      e[i] = 1.0;
      s.basis.push_back(std::move(e));
    }
    return s;
  }

  RealArray point(const std::vector<double>& t) const {
    RealArray y = offset;
    for (std::size_t j = 0; j < basis.size(); ++j) y.axpy(t[j], basis[j]);
    return y;
  }
};

namespace detail {

inline constexpr double kGolden = 0.6180339887498949;

/// Minimizes a convex extended-valued phi on [lo, hi] by golden section.
/// When both interior probes are infinite the finite part of the interval is
/// located on a grid first.
template <typename Phi>
double golden_minimize(Phi phi, double lo, double hi, double tol, double* best_value) {
  double c = hi - kGolden * (hi - lo), d = lo + kGolden * (hi - lo);
  double fc = phi(c), fd = phi(d);
  if (!std::isfinite(fc) && !std::isfinite(fd)) {
    constexpr int kGrid = 400;
    int first = -1, last = -1;
    double best = kInfinity;
    int arg = -1;
    for (int k = 0; k <= kGrid; ++k) {
      const double t = lo + (hi - lo) * k / kGrid;
      const double v = phi(t);
      if (std::isfinite(v)) {
        if (first < 0) first = k;
        last = k;
        if (v < best) best = v, arg = k;
      }
    }
    if (first < 0) {
      *best_value = kInfinity;
      return 0.5 * (lo + hi);
    }
    const double step = (hi - lo) / kGrid;
    const double new_lo = lo + step * std::max(first - 1, 0), new_hi = lo + step * std::min(last + 1, kGrid);
    if (first == last) {
      // an isolated finite point, e.g. an affine set crossing the search line
      *best_value = best;
      return lo + step * arg;
    }
    return golden_minimize(phi, new_lo, new_hi, tol, best_value);
  }
  while (hi - lo > tol) {
    if (fc <= fd) {
      hi = d;
      d = c;
      fd = fc;
      c = hi - kGolden * (hi - lo);
      fc = phi(c);
    } else {
      lo = c;
      c = d;
      fc = fd;
      d = lo + kGolden * (hi - lo);
      fd = phi(d);
    }
  }
  const double t = 0.5 * (lo + hi);
  double v = phi(t);
  double arg = t;
  if (fc < v) v = fc, arg = c;
  if (fd < v) v = fd, arg = d;
  *best_value = v;
  return arg;
}

/// Nested golden section: coordinate `level` is minimized in the outer loop,
/// the remaining coordinates are minimized for each probe.
template <typename G>
double nested_minimize(const G& g, std::vector<double>& t, std::size_t level, double radius, double tol) {
  if (level == t.size()) return g(t);
  const auto inner = [&](double v) {
    t[level] = v;
    return nested_minimize(g, t, level + 1, radius, tol);
  };
  double best = kInfinity;
  const double arg = golden_minimize(inner, -radius, radius, tol, &best);
  t[level] = arg;
  return nested_minimize(g, t, level + 1, radius, tol);
}

inline void check_dimension(std::size_t d, std::size_t cap, const char* what) {
  if (d == 0 || d > cap) {
    throw std::invalid_argument(std::string(what) + ": dimension " + std::to_string(d) + " outside 1.." +
                                std::to_string(cap));
  }
}

}  // namespace detail

/// argmin over the search set of gamma f(y) + ||x - y||^2 / 2. Direct search,
/// so the search dimension is limited to 4. A coarse pass locates the
/// minimizer and a second pass re-centred on it resolves kinks of f; the
/// result is accurate to about sqrt(epsilon) times the objective scale.
inline RealArray prox_oracle(const Objective& f, const RealArray& x, double gamma, const Subspace& S) {
  detail::check_dimension(S.basis.size(), 4, "prox_oracle");
  RealArray center = S.offset;
  double radius = S.radius, tol = 1e-8 * S.radius;
  for (int pass = 0; pass < 2; ++pass) {
    const auto g = [&](const std::vector<double>& t) {
      RealArray y = center;
      for (std::size_t j = 0; j < S.basis.size(); ++j) y.axpy(t[j], S.basis[j]);
      const double v = f(y);
      if (!std::isfinite(v)) return kInfinity;
      const RealArray r = x - y;
      return gamma * v + 0.5 * dot(r, r);
    };
    std::vector<double> t(S.basis.size(), 0.0);
    const double value = detail::nested_minimize(g, t, 0, radius, tol);
    if (!std::isfinite(value)) throw OracleError("prox_oracle: no finite point in the search box");
    const bool on_boundary = std::any_of(t.begin(), t.end(), [&](double v) { return std::abs(v) > 0.99 * radius; });
    for (std::size_t j = 0; j < S.basis.size(); ++j) center.axpy(t[j], S.basis[j]);
    if (pass == 1 && on_boundary) throw OracleError("prox_oracle: refinement left its search box");
    radius = 1e-2 * S.radius;
    tol = 1e-14 * S.radius;
  }
  return center;
}

/// f(y) - f(ref), evaluated without cancellation.
using DeltaObjective = std::function<double(const RealArray& y, const RealArray& ref)>;

/// prox_oracle on a difference-form objective. The second pass re-centres on
/// the first estimate, so the argmin is resolved far below sqrt(epsilon).
inline RealArray prox_oracle_fine(const DeltaObjective& df, const RealArray& x, double gamma, Subspace S,
                                  int passes = 2) {
  detail::check_dimension(S.basis.size(), 4, "prox_oracle_fine");
  RealArray ref = S.offset;
  double radius = S.radius;
  for (int pass = 0; pass < passes; ++pass) {
    const RealArray center = ref;
    const auto g = [&](const std::vector<double>& t) {
      RealArray y = center;
      for (std::size_t j = 0; j < S.basis.size(); ++j) y.axpy(t[j], S.basis[j]);
      const double dv = df(y, center);
      if (!std::isfinite(dv)) return kInfinity;
      // ||x - y||^2/2 - ||x - c||^2/2 = <c - y, 2x - y - c>/2
      RealArray a = center - y, b = 2.0 * x;
      b -= y;
      b -= center;
      return gamma * dv + 0.5 * dot(a, b);
    };
    std::vector<double> t(S.basis.size(), 0.0);
    const double tol = radius * 1e-14 + 1e-300;
    if (!std::isfinite(detail::nested_minimize(g, t, 0, radius, tol))) {
      throw OracleError("prox_oracle_fine: no finite point in the search box");
    }
    for (std::size_t j = 0; j < S.basis.size(); ++j) ref.axpy(t[j], S.basis[j]);
    radius = std::max(1e-6 * radius, 1e-9);
  }
  return ref;
}

/// Full-space search around x with a radius large enough for the test inputs.
inline RealArray prox_oracle(const Objective& f, const RealArray& x, double gamma) {
  return prox_oracle(f, x, gamma, Subspace::full(x, 4.0 + 2.0 * max_abs(x) + 2.0 * gamma));
}

// ---------------------------------------------------------------------------
// Global minimization of small problems

enum class Method {
  /// nested golden section over a box; dimension <= 3
  direct_search,
  /// projected subgradient, steps c/sqrt(n), averaged iterates
  projected_subgradient,
  /// accelerated projected gradient with backtracking (smooth objectives)
  accelerated_gradient,
};

struct OracleProblem {
  Objective objective;
  /// subgradient (or gradient for accelerated_gradient) of the objective
  Gradient subgradient;
  /// projection onto the feasible set; identity when empty
  std::function<RealArray(const RealArray&)> project;
  std::function<bool(const RealArray&)> feasible;
  std::size_t dimension = 0;
  Shape shape{};
  double tolerance = 1e-10;
};

struct OracleOptions {
  Method method = Method::projected_subgradient;
  int iterations = 100000;
  double step = 1.0;
  double radius = 10.0;
  RealArray start;
};

struct OracleResult {
  RealArray x;
  double value = kInfinity;
  int iterations = 0;
};

inline OracleResult min_oracle(const OracleProblem& P, const OracleOptions& opt = {}) {
  detail::check_dimension(P.dimension, kMaxDimension, "min_oracle");
  const Shape shape = P.shape.size() == P.dimension ? P.shape : Shape::vector(P.dimension);
  const auto project = [&](const RealArray& v) { return P.project ? P.project(v) : v; };
  RealArray x0 = opt.start.empty() ? RealArray(shape) : opt.start;
  OracleResult res;

  if (opt.method == Method::direct_search) {
    detail::check_dimension(P.dimension, 3, "min_oracle(direct_search)");
    const auto g = [&](const std::vector<double>& t) {
      RealArray y(shape);
      for (std::size_t i = 0; i < t.size(); ++i) y[i] = x0[i] + t[i];
      if (P.feasible && !P.feasible(y)) return kInfinity;
      return P.objective(y);
    };
    std::vector<double> t(P.dimension, 0.0);
    res.value = detail::nested_minimize(g, t, 0, opt.radius, P.tolerance);
    res.x = x0;
    for (std::size_t i = 0; i < t.size(); ++i) res.x[i] += t[i];
    res.iterations = 1;
  } else if (opt.method == Method::projected_subgradient) {
    if (!P.subgradient) throw std::invalid_argument("min_oracle: subgradient callback required");
    RealArray x = project(x0);
    RealArray avg(shape);
    double weight_sum = 0.0;
    RealArray best = x;
    double best_value = P.objective(x);
    for (int n = 1; n <= opt.iterations; ++n) {
      const RealArray u = P.subgradient(x);
      const double un = norm(u);
      if (un == 0.0) break;
      const double step = opt.step / std::sqrt(static_cast<double>(n));
      RealArray next = x;
      next.axpy(-step / un, u);
      x = project(next);
      avg.axpy(step, x);
      weight_sum += step;
      const double v = P.objective(x);
      if (v < best_value) best_value = v, best = x;
      res.iterations = n;
    }
    RealArray mean = (1.0 / std::max(weight_sum, 1e-300)) * avg;
    mean = project(mean);
    const double mv = weight_sum > 0.0 ? P.objective(mean) : kInfinity;
    if (mv < best_value) best_value = mv, best = mean;
    res.x = best;
    res.value = best_value;
  } else {
    if (!P.subgradient) throw std::invalid_argument("min_oracle: gradient callback required");
    RealArray x = project(x0), z = x;
    double fx = P.objective(x);
    double L = 1.0 / opt.step;
    double t = 1.0;
    for (int n = 1; n <= opt.iterations; ++n) {
      const RealArray gz = P.subgradient(z);
      const double fz = P.objective(z);
      RealArray next;
      double fnext = kInfinity;
      // let the curvature estimate relax again; gradients that are only
      // Hoelder continuous near the solution otherwise freeze the step
      L = std::max(0.5 * L, 1.0 / opt.step);
      for (int bt = 0; bt < 60; ++bt) {
        RealArray trial = z;
        trial.axpy(-1.0 / L, gz);
        next = project(trial);
        fnext = P.objective(next);
        const RealArray d = next - z;
        if (fnext <= fz + dot(gz, d) + 0.5 * L * dot(d, d) + 1e-15 * std::abs(fz)) break;
        L *= 2.0;
      }
      // monotone variant: keep the better of the step and the previous iterate
      const double t_next = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t * t));
      RealArray x_prev = x;
      if (fnext <= fx) {
        x = next;
        fx = fnext;
        z = x;
        z.axpy((t - 1.0) / t_next, x - x_prev);
        t = t_next;
      } else {
        // restart the momentum from the best point
        z = x;
        t = 1.0;
      }
      res.iterations = n;
      // gradient mapping at the floating-point floor
      if (n > 50 && distance(next, x) <= 1e-14 * std::max(1.0, norm(x)) && distance(x, x_prev) == 0.0) break;
    }
    res.x = x;
    res.value = fx;
  }
  if (!std::isfinite(res.value)) throw OracleError("min_oracle: no finite objective value reached");
  return res;
}

// ---------------------------------------------------------------------------
// Certificates

/// Draws probe points for the certificates below.
using Sampler = std::function<RealArray(Rng&)>;

/// Gaussian probes around p at several radii.
inline Sampler gaussian_probes(const RealArray& p) {
  return [p](Rng& rng) {
    const double r = std::pow(10.0, rng.uniform(-3.0, 1.0));
    RealArray y = p;
    y.axpy(r, rng.gaussian_array(p.shape()));
    return y;
  };
}

/// True iff <y - p, x - p> + gamma f(p) <= gamma f(y) + slack for every probe.
inline bool subgrad_check(const Objective& f, const RealArray& p, const RealArray& x, double gamma,
                          int probes = 500, std::uint64_t seed = 17, Sampler sampler = {},
                          double slack = 1e-9) {
  const double fp = f(p);
  if (!std::isfinite(fp)) return false;
  Rng rng(seed);
  if (!sampler) sampler = gaussian_probes(p);
  const RealArray r = x - p;
  for (int k = 0; k < probes; ++k) {
    const RealArray y = sampler(rng);
    const double fy = f(y);
    if (!std::isfinite(fy)) continue;
    if (dot(y - p, r) + gamma * fp > gamma * fy + slack * std::max(1.0, std::abs(gamma * fy))) return false;
  }
  return true;
}

/// True iff gamma f(p) + ||x - p||^2/2 <= gamma f(y) + ||x - y||^2/2 + slack for every probe.
inline bool prox_certificate(const Objective& f, const RealArray& p, const RealArray& x, double gamma,
                             int probes = 200, std::uint64_t seed = 19, Sampler sampler = {},
                             double slack = 1e-9) {
  const auto value = [&](const RealArray& y) {
    const double v = f(y);
    if (!std::isfinite(v)) return kInfinity;
    const RealArray d = x - y;
    return gamma * v + 0.5 * dot(d, d);
  };
  const double vp = value(p);
  if (!std::isfinite(vp)) return false;
  Rng rng(seed);
  if (!sampler) sampler = gaussian_probes(p);
  for (int k = 0; k < probes; ++k) {
    const double vy = value(sampler(rng));
    if (vp > vy + slack * std::max(1.0, std::abs(vy))) return false;
  }
  return true;
}

// ---------------------------------------------------------------------------
// Projections onto intersections

/// Dykstra's alternating projections onto the intersection of closed convex sets.
inline RealArray dykstra(const std::vector<std::function<RealArray(const RealArray&)>>& sets, const RealArray& x,
                         int max_sweeps = 100000, double tol = 1e-14) {
  if (sets.empty()) return x;
  std::vector<RealArray> inc(sets.size(), RealArray(x.shape()));
  RealArray cur = x;
  for (int sweep = 0; sweep < max_sweeps; ++sweep) {
    const RealArray start = cur;
    for (std::size_t j = 0; j < sets.size(); ++j) {
      const RealArray in = cur + inc[j];
      cur = sets[j](in);
      inc[j] = in - cur;
    }
    if (distance(cur, start) <= tol * std::max(1.0, norm(cur))) break;
  }
  return cur;
}

/// Exact projection onto {lo <= y <= hi, y = 0 on mask, sum(y) = target}:
/// y = clamp(x - tau) off the mask with tau found by bisection.
inline RealArray project_box_sum(const RealArray& x, double lo, double hi, const std::vector<bool>& zero_mask,
                                 double target) {
  const auto at = [&](double tau) {
    RealArray y(x.shape());
    for (std::size_t i = 0; i < x.size(); ++i) y[i] = zero_mask[i] ? 0.0 : std::clamp(x[i] - tau, lo, hi);
    return y;
  };
  double a = -(std::abs(hi) + std::abs(lo) + max_abs(x) + 1.0), b = -a;
  for (int it = 0; it < 200; ++it) {
    const double m = 0.5 * (a + b);
    if (sum(at(m)) > target) a = m; else b = m;
    if (b - a <= 1e-15 * std::max(1.0, std::abs(m))) break;
  }
  return at(0.5 * (a + b));
}

}  // namespace proxsplit::oracle
