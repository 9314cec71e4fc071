#pragma once

// Douglas-Rachford splitting, its specialization to a closed vector subspace,
// and the parallel proximal algorithm (PPXA), which is the subspace variant
// run on the weighted product space H^m against the diagonal.

#include <chrono>
#include <cmath>
#include <cstddef>
#include <exception>
#include <functional>
#include <future>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "proxsplit/array.hpp"
#include "proxsplit/prox.hpp"

namespace proxsplit {

class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A prox evaluation threw or returned non-finite values.
class ProxEvaluationError : public std::runtime_error {
 public:
  ProxEvaluationError(std::size_t index, std::size_t iteration, const std::string& what)
      : std::runtime_error("prox " + std::to_string(index) + " failed at iteration " + std::to_string(iteration) +
                           ": " + what),
        index_(index),
        iteration_(iteration) {}
  std::size_t index() const { return index_; }
  std::size_t iteration() const { return iteration_; }

 private:
  std::size_t index_;
  std::size_t iteration_;
};

inline constexpr double kStepFloor = 1e-12;

struct SolverState {
  RealArray x;
  std::vector<RealArray> y;
  std::vector<RealArray> p_i;
  RealArray p;
  std::size_t n = 0;
};

struct SolverConfig {
  double gamma = 1.0;
  /// Empty means 1/m each.
  std::vector<double> weights;
  double lambda = 1.5;
  /// Overrides lambda when set; every value must lie in (0, 2).
  std::function<double(std::size_t n)> lambda_schedule;
  std::size_t max_iterations = 1000;
  /// Stop when ||x_{n+1} - x_n|| / max(||x_n||, kStepFloor) <= tolerance; 0 disables.
  double tolerance = 1e-8;
  /// Adds a_{i,n} to p_{i,n} in place. For douglas_rachford, i = 0 is a_n and i = 1 is b_n.
  std::function<void(std::size_t i, std::size_t n, RealArray& p)> error;
  /// Evaluate the m proxes of one PPXA iteration concurrently.
  bool parallel = false;
  /// Record sum_i f_i(x_{n+1}) in the log (costs one objective call per term).
  bool log_objective = true;
  /// Called after every iteration with the updated state.
  std::function<void(const SolverState&)> observer;

  double lambda_at(std::size_t n) const {
    const double l = lambda_schedule ? lambda_schedule(n) : lambda;
    if (!(l > 0.0 && l < 2.0)) {
      throw ConfigError("relaxation lambda_" + std::to_string(n) + " = " + std::to_string(l) + " is outside (0, 2)");
    }
    return l;
  }

  std::vector<double> resolved_weights(std::size_t m) const {
    if (m == 0) throw ConfigError("at least one function is required");
    if (weights.empty()) return std::vector<double>(m, 1.0 / static_cast<double>(m));
    if (weights.size() != m) {
      throw ConfigError("got " + std::to_string(weights.size()) + " weights for " + std::to_string(m) + " functions");
    }
    double s = 0.0;
    for (double w : weights) {
      if (!(w > 0.0 && w <= 1.0)) throw ConfigError("weights must lie in (0, 1]");
      s += w;
    }
    if (std::abs(s - 1.0) > 1e-12) throw ConfigError("weights must sum to 1, got " + std::to_string(s));
    return weights;
  }

  void validate() const {
    if (!(gamma > 0.0) || !std::isfinite(gamma)) throw ConfigError("gamma must be positive");
    if (max_iterations == 0) throw ConfigError("max_iterations must be at least 1");
    if (!(tolerance >= 0.0)) throw ConfigError("tolerance must be nonnegative");
    if (!lambda_schedule) lambda_at(0);
  }
};

// ---------------------------------------------------------------------------
// Logging

struct IterationRecord {
  std::size_t n = 0;
  double objective = kInfinity;
  double residual = 0.0;
  double lambda = 0.0;
  double millis = 0.0;
  std::vector<double> prox_millis;
};

class IterationLog {
 public:
  void append(IterationRecord r) { records_.push_back(std::move(r)); }
  const std::vector<IterationRecord>& records() const { return records_; }
  std::size_t size() const { return records_.size(); }
  bool empty() const { return records_.empty(); }
  const IterationRecord& back() const { return records_.back(); }

  /// Columns n,objective,residual,lambda,millis; objectives that were not
  /// computed are written as nan.
  void write_csv(std::ostream& os) const {
    os << "n,objective,residual,lambda,millis\n";
    os.precision(17);
    for (const auto& r : records_) {
      os << r.n << ',' << r.objective << ',' << r.residual << ',' << r.lambda << ',' << r.millis << '\n';
    }
  }
  std::string csv() const {
    std::ostringstream os;
    write_csv(os);
    return os.str();
  }

 private:
  std::vector<IterationRecord> records_;
};

enum class Status { converged, max_iterations };

inline const char* to_string(Status s) { return s == Status::converged ? "converged" : "max_iterations"; }

namespace detail {

using Clock = std::chrono::steady_clock;

inline double millis_since(Clock::time_point t0) {
  return std::chrono::duration<double, std::milli>(Clock::now() - t0).count();
}

inline double relative_step(double step, double previous_norm) { return step / std::max(previous_norm, kStepFloor); }

inline std::string exhaustion_warning(std::size_t iterations, double residual) {
  std::ostringstream os;
  os << "stopped at the iteration cap (" << iterations << ") with relative step " << residual;
  return os.str();
}

inline double total_objective(const std::vector<ProxFn>& fs, const RealArray& x) {
  double s = 0.0;
  for (const auto& f : fs) {
    if (!f.objective) return std::numeric_limits<double>::quiet_NaN();
    s += f.objective(x);
  }
  return s;
}

inline RealArray checked_prox(const ProxFn& f, const RealArray& x, double g, std::size_t i, std::size_t n) {
  RealArray out;
  try {
    out = f.evaluate(x, g);
  } catch (const std::exception& e) {
    throw ProxEvaluationError(i, n, f.name + ": " + e.what());
  }
  if (!(out.shape() == x.shape())) throw ProxEvaluationError(i, n, f.name + ": output shape changed");
  if (!out.all_finite()) throw ProxEvaluationError(i, n, f.name + ": non-finite output");
  return out;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Douglas-Rachford

struct DouglasRachfordResult {
  RealArray y;
  /// prox_{gamma f2}(y); the minimizer is only obtained through this map.
  RealArray minimizer;
  IterationLog log;
  Status status = Status::max_iterations;
  std::string warning;
};

/// y_half   = prox_{gamma f2} y_n + a_n
/// y_{n+1}  = y_n + lambda_n (prox_{gamma f1}(2 y_half - y_n) + b_n - y_half)
/// The logged residual is ||T y_n - y_n|| = 2 ||prox_{gamma f1}(2 y_half - y_n) - y_half||
/// (exact when the errors vanish); the stop rule uses the relative step of y.
inline DouglasRachfordResult douglas_rachford(const ProxFn& f1, const ProxFn& f2, const SolverConfig& cfg,
                                              const RealArray& y0) {
  cfg.validate();
  const double g = cfg.gamma;
  const std::vector<ProxFn> fs{f1, f2};
  DouglasRachfordResult out;
  RealArray y = y0;
  double step = kInfinity;
  for (std::size_t n = 0; n < cfg.max_iterations; ++n) {
    const auto t0 = detail::Clock::now();
    const double lambda = cfg.lambda_at(n);
    IterationRecord rec;
    rec.n = n + 1;
    rec.lambda = lambda;

    auto tp = detail::Clock::now();
    RealArray half = detail::checked_prox(f2, y, g, 1, n);
    rec.prox_millis.push_back(detail::millis_since(tp));
    if (cfg.error) cfg.error(0, n, half);

    RealArray reflected = 2.0 * half - y;
    tp = detail::Clock::now();
    RealArray q = detail::checked_prox(f1, reflected, g, 0, n);
    rec.prox_millis.insert(rec.prox_millis.begin(), detail::millis_since(tp));
    if (cfg.error) cfg.error(1, n, q);

    RealArray delta = q - half;
    const double previous_norm = norm(y);
    y.axpy(lambda, delta);
    step = detail::relative_step(lambda * norm(delta), previous_norm);
    rec.residual = 2.0 * norm(delta);
    if (cfg.log_objective) rec.objective = detail::total_objective(fs, half);
    rec.millis = detail::millis_since(t0);
    out.log.append(std::move(rec));

    if (cfg.observer) {
      SolverState s;
      s.x = half;
      s.y = {y};
      s.p_i = {q, half};
      s.p = q;
      s.n = n + 1;
      cfg.observer(s);
    }
    if (cfg.tolerance > 0.0 && step <= cfg.tolerance) {
      out.status = Status::converged;
      break;
    }
  }
  if (out.status != Status::converged) out.warning = detail::exhaustion_warning(cfg.max_iterations, step);
  out.minimizer = detail::checked_prox(f2, y, g, 1, out.log.size());
  out.y = std::move(y);
  return out;
}

// ---------------------------------------------------------------------------
// Subspace Douglas-Rachford

/// Problem data for minimizing f over a closed vector subspace D of a space V.
/// V needs +, -, scalar *, and copy; norm is the Hilbert norm of V.
template <typename V>
struct SubspaceProblem {
  std::function<V(const V&, double gamma)> prox;
  std::function<V(const V&)> project;
  std::function<double(const V&)> norm;
  std::function<double(const V&)> objective;
  /// Adds a_n to the prox output in place.
  std::function<void(std::size_t n, V&)> error;
  /// Called after each iteration with (n + 1, x_{n+1}, y_{n+1}).
  std::function<void(std::size_t, const V&, const V&)> monitor;
};

template <typename V>
struct SubspaceResult {
  V x;
  V y;
  IterationLog log;
  Status status = Status::max_iterations;
  std::string warning;
};

/// x_0      = P_D y_0
/// y_half   = prox_{gamma f} y_n + a_n
/// p_n      = P_D y_half
/// y_{n+1}  = y_n + lambda_n (2 p_n - x_n - y_half)
/// x_{n+1}  = x_n + lambda_n (p_n - x_n)
/// so that x_n = P_D y_n throughout and x_n itself converges to a minimizer.
template <typename V>
SubspaceResult<V> subspace_dr(const SubspaceProblem<V>& P, const SolverConfig& cfg, const V& y0) {
  cfg.validate();
  SubspaceResult<V> out;
  V y = y0;
  V x = P.project(y);
  double step = kInfinity;
  for (std::size_t n = 0; n < cfg.max_iterations; ++n) {
    const auto t0 = detail::Clock::now();
    const double lambda = cfg.lambda_at(n);
    V half = P.prox(y, cfg.gamma);
    if (P.error) P.error(n, half);
    V p = P.project(half);
    y = y + lambda * (2.0 * p - x - half);
    V dx = lambda * (p - x);
    const double previous_norm = P.norm(x);
    x = x + dx;
    step = detail::relative_step(P.norm(dx), previous_norm);

    IterationRecord rec;
    rec.n = n + 1;
    rec.lambda = lambda;
    rec.residual = step;
    if (cfg.log_objective && P.objective) rec.objective = P.objective(x);
    rec.millis = detail::millis_since(t0);
    out.log.append(std::move(rec));
    if (P.monitor) P.monitor(n + 1, x, y);
    if (cfg.tolerance > 0.0 && step <= cfg.tolerance) {
      out.status = Status::converged;
      break;
    }
  }
  if (out.status != Status::converged) out.warning = detail::exhaustion_warning(cfg.max_iterations, step);
  out.x = std::move(x);
  out.y = std::move(y);
  return out;
}

/// Subspace problem in H itself: f is a ProxFn and D is given by its projector.
inline SubspaceProblem<RealArray> subspace_problem(const ProxFn& f, const Projector& D) {
  SubspaceProblem<RealArray> P;
  P.prox = [f](const RealArray& y, double g) { return f.evaluate(y, g); };
  P.project = [D](const RealArray& y) { return D.project(y); };
  P.norm = [](const RealArray& y) { return norm(y); };
  if (f.objective) P.objective = f.objective;
  return P;
}

// ---------------------------------------------------------------------------
// Product space H^m with <x, y> = sum_i w_i <x_i, y_i>

struct ProductVector {
  std::vector<RealArray> parts;

  std::size_t size() const { return parts.size(); }
  RealArray& operator[](std::size_t i) { return parts[i]; }
  const RealArray& operator[](std::size_t i) const { return parts[i]; }

  friend ProductVector operator+(ProductVector a, const ProductVector& b) {
    for (std::size_t i = 0; i < a.size(); ++i) a[i] += b[i];
    return a;
  }
  friend ProductVector operator-(ProductVector a, const ProductVector& b) {
    for (std::size_t i = 0; i < a.size(); ++i) a[i] -= b[i];
    return a;
  }
  friend ProductVector operator*(double s, ProductVector a) {
    for (auto& v : a.parts) v *= s;
    return a;
  }
};

struct ProductSpace {
  std::vector<double> weights;

  double dot(const ProductVector& a, const ProductVector& b) const {
    double s = 0.0;
    for (std::size_t i = 0; i < weights.size(); ++i) s += weights[i] * proxsplit::dot(a[i], b[i]);
    return s;
  }
  double norm(const ProductVector& a) const { return std::sqrt(dot(a, a)); }

  ProductVector diagonal(const RealArray& x) const { return ProductVector{std::vector<RealArray>(weights.size(), x)}; }

  /// sum_i w_i y_i, accumulated in index order.
  RealArray average(const ProductVector& y) const {
    RealArray s = weights[0] * y[0];
    for (std::size_t i = 1; i < weights.size(); ++i) s.axpy(weights[i], y[i]);
    return s;
  }

  /// Orthogonal projection onto D = {(x, ..., x)} for this inner product.
  ProductVector project_diagonal(const ProductVector& y) const { return diagonal(average(y)); }
};

/// f(y) = sum_i f_i(y_i) on the product space; its prox for the weighted norm
/// is (prox_{gamma f_i / w_i} y_i)_i.
inline SubspaceProblem<ProductVector> product_problem(const std::vector<ProxFn>& fs, std::vector<double> weights) {
  if (fs.size() != weights.size()) throw ConfigError("product_problem: one weight per function required");
  const ProductSpace H{std::move(weights)};
  SubspaceProblem<ProductVector> P;
  P.prox = [fs, H](const ProductVector& y, double g) {
    ProductVector out;
    out.parts.reserve(fs.size());
    for (std::size_t i = 0; i < fs.size(); ++i) out.parts.push_back(fs[i].evaluate(y[i], g / H.weights[i]));
    return out;
  };
  P.project = [H](const ProductVector& y) { return H.project_diagonal(y); };
  P.norm = [H](const ProductVector& y) { return H.norm(y); };
  P.objective = [fs](const ProductVector& x) {
    double s = 0.0;
    for (std::size_t i = 0; i < fs.size(); ++i) {
      if (!fs[i].objective) return std::numeric_limits<double>::quiet_NaN();
      s += fs[i].objective(x[i]);
    }
    return s;
  };
  return P;
}

// ---------------------------------------------------------------------------
// PPXA

struct PpxaResult {
  RealArray x;
  SolverState state;
  IterationLog log;
  Status status = Status::max_iterations;
  std::string warning;
  std::vector<double> weights;
};

/// For i = 1..m:  p_{i,n} = prox_{gamma f_i / w_i} y_{i,n} + a_{i,n}
/// p_n       = sum_i w_i p_{i,n}
/// y_{i,n+1} = y_{i,n} + lambda_n (2 p_n - x_n - p_{i,n})
/// x_{n+1}   = x_n + lambda_n (p_n - x_n),   x_0 = sum_i w_i y_{i,0}
inline PpxaResult ppxa(const std::vector<ProxFn>& fs, const SolverConfig& cfg, std::vector<RealArray> y0) {
  cfg.validate();
  const std::size_t m = fs.size();
  const std::vector<double> w = cfg.resolved_weights(m);
  if (y0.size() != m) {
    throw ConfigError("ppxa: got " + std::to_string(y0.size()) + " initial points for " + std::to_string(m) +
                      " functions");
  }
  for (std::size_t i = 1; i < m; ++i) y0[0].check_same(y0[i], "ppxa initial points");
  const ProductSpace H{w};

  PpxaResult out;
  out.weights = w;
  SolverState& s = out.state;
  s.y = std::move(y0);
  s.x = H.average(ProductVector{s.y});
  s.p_i.assign(m, RealArray());
  double step = kInfinity;

  for (std::size_t n = 0; n < cfg.max_iterations; ++n) {
    const auto t0 = detail::Clock::now();
    const double lambda = cfg.lambda_at(n);
    IterationRecord rec;
    rec.n = n + 1;
    rec.lambda = lambda;
    rec.prox_millis.assign(m, 0.0);

    auto evaluate = [&](std::size_t i) {
      const auto tp = detail::Clock::now();
      s.p_i[i] = detail::checked_prox(fs[i], s.y[i], cfg.gamma / w[i], i, n);
      rec.prox_millis[i] = detail::millis_since(tp);
    };
    if (cfg.parallel && m > 1) {
      std::vector<std::future<void>> jobs;
      jobs.reserve(m - 1);
      for (std::size_t i = 1; i < m; ++i) jobs.push_back(std::async(std::launch::async, evaluate, i));
      std::exception_ptr first;
      try {
        evaluate(0);
      } catch (...) {
        first = std::current_exception();
      }
      // join every job before reporting the lowest failing index
      for (auto& j : jobs) {
        try {
          j.get();
        } catch (...) {
          if (!first) first = std::current_exception();
        }
      }
      if (first) std::rethrow_exception(first);
    } else {
      for (std::size_t i = 0; i < m; ++i) evaluate(i);
    }
    if (cfg.error)
      for (std::size_t i = 0; i < m; ++i) cfg.error(i, n, s.p_i[i]);

    s.p = H.average(ProductVector{s.p_i});
    const RealArray both = 2.0 * s.p - s.x;
    for (std::size_t i = 0; i < m; ++i) s.y[i] = s.y[i] + lambda * (both - s.p_i[i]);
    const RealArray dx = lambda * (s.p - s.x);
    const double previous_norm = norm(s.x);
    s.x = s.x + dx;
    s.n = n + 1;
    step = detail::relative_step(norm(dx), previous_norm);

    rec.residual = step;
    if (cfg.log_objective) rec.objective = detail::total_objective(fs, s.x);
    rec.millis = detail::millis_since(t0);
    out.log.append(std::move(rec));
    if (cfg.observer) cfg.observer(s);
    if (cfg.tolerance > 0.0 && step <= cfg.tolerance) {
      out.status = Status::converged;
      break;
    }
  }
  if (out.status != Status::converged) out.warning = detail::exhaustion_warning(cfg.max_iterations, step);
  out.x = s.x;
  return out;
}

/// Every y_{i,0} = x0.
inline PpxaResult ppxa(const std::vector<ProxFn>& fs, const SolverConfig& cfg, const RealArray& x0) {
  return ppxa(fs, cfg, std::vector<RealArray>(fs.size(), x0));
}

// ---------------------------------------------------------------------------
// Qualification

enum class Qualification { satisfied, unknown };

struct QualificationReport {
  Qualification verdict = Qualification::unknown;
  std::string reason;
  bool satisfied() const { return verdict == Qualification::satisfied; }
};

/// Checks the structured sufficient conditions for the domain qualification
/// (0 in sri{(x - x_1, ..., x - x_m)}). Advisory only.
///  - at most one domain differs from H: dom f_1 meets the interiors of the
///    others trivially;
///  - the caller asserts a point of dom f_1 lying in the relative interiors of
///    all domains (H finite-dimensional).
inline QualificationReport qualification_advisory(const std::vector<DomainKind>& domains,
                                                  bool common_relative_interior_point = false) {
  QualificationReport r;
  std::size_t restricted = 0;
  std::string names;
  for (std::size_t i = 0; i < domains.size(); ++i) {
    if (domains[i] == DomainKind::full) continue;
    ++restricted;
    names += (names.empty() ? "" : ", ") + std::string("f") + std::to_string(i + 1) + " (" + to_string(domains[i]) + ")";
  }
  if (restricted <= 1) {
    r.verdict = Qualification::satisfied;
    r.reason = restricted == 0 ? "all domains are the whole space"
                               : "only " + names + " has a restricted domain; every other domain has full interior";
    return r;
  }
  if (common_relative_interior_point) {
    r.verdict = Qualification::satisfied;
    r.reason = "finite dimension and an asserted point of dom f1 in the relative interior of every domain";
    return r;
  }
  r.verdict = Qualification::unknown;
  r.reason = "restricted domains " + names +
             ": convergence needs 0 in sri{(x - x_1, ..., x - x_m)}, e.g. a point of dom f1 in the relative interior"
             " of every other domain; not checked";
  return r;
}

inline QualificationReport qualification_advisory(const std::vector<ProxFn>& fs,
                                                  bool common_relative_interior_point = false) {
  std::vector<DomainKind> d;
  for (const auto& f : fs) d.push_back(f.domain);
  return qualification_advisory(d, common_relative_interior_point);
}

}  // namespace proxsplit
