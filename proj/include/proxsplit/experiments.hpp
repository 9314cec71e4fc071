#pragma once

// Config-driven reconstructions: constrained image restoration with a phase
// prior (1), frame-domain restoration with l1 and total-variation potentials
// (2) and pulse-shape design under spectral and temporal constraints (3).
// Every run is deterministic for a given config and seed.

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <limits>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "proxsplit/array.hpp"
#include "proxsplit/fft.hpp"
#include "proxsplit/frame.hpp"
#include "proxsplit/io.hpp"
#include "proxsplit/linear_map.hpp"
#include "proxsplit/projectors.hpp"
#include "proxsplit/prox.hpp"
#include "proxsplit/random.hpp"
#include "proxsplit/solvers.hpp"
#include "proxsplit/tv.hpp"

namespace proxsplit {

using json = nlohmann::json;

inline constexpr int kSchemaVersion = 1;

/// Invalid or incomplete experiment config; field() is the dotted JSON path.
class SchemaError : public std::invalid_argument {
 public:
  SchemaError(const std::string& field, const std::string& what)
      : std::invalid_argument("config field '" + field + "': " + what), field_(field) {}
  const std::string& field() const { return field_; }

 private:
  std::string field_;
};

struct ExperimentConfig {
  int schema_version = kSchemaVersion;
  int experiment = 1;
  std::uint64_t seed = 1;

  // image.* (experiments 1, 2)
  std::size_t size = 32;
  /// "synthetic" or a path to a P5 PGM, read on the [0, 255] scale
  std::string source = "synthetic";
  double pixel_max = 255.0;

  // degradation.*
  /// side of the uniform blur kernel; 1 means no blur
  std::size_t blur = 3;
  double noise_sigma = 0.0;

  // model.* (1)
  double alpha = 10.0;
  double p = 1.5;
  /// fraction of frequencies in the low band with measured phase
  double phase_band = 0.8;
  /// phases are multiplied by 1 + u, u uniform on [-phase_perturbation, phase_perturbation]
  double phase_perturbation = 0.05;
  /// pixels farther than vignette_radius * size from the centre are black
  double vignette_radius = 0.6;

  // model.* (2)
  double beta = 0.0;
  int levels = 4;
  bool use_l1 = true;
  bool use_tv = true;

  // signal.* (3)
  double sampling_rate_hz = 2560.0;
  double null_spacing_hz = 50.0;
  double stopband_hz = 300.0;
  double duration_ms = 50.0;
  double zero_crossing_ms = 3.125;
  // model.* (3)
  double rho = 0.031622776601683794;
  double mu = 2.0;
  double p4 = 2.0;
  double p5 = 2.0;

  // solver.*
  double gamma = 1.0;
  std::size_t iterations = 100;
  double lambda = 1.5;
  double tolerance = 1e-8;
  bool parallel = false;

  void validate() const {
    const auto positive = [](const char* field, double v) {
      if (!(v > 0.0) || !std::isfinite(v)) throw SchemaError(field, "must be positive");
    };
    if (schema_version != kSchemaVersion) {
      throw SchemaError("schema_version", "unsupported version " + std::to_string(schema_version));
    }
    if (experiment < 1 || experiment > 3) throw SchemaError("experiment", "must be 1, 2 or 3");
    positive("solver.gamma", gamma);
    if (iterations == 0) throw SchemaError("solver.iterations", "must be at least 1");
    if (!(lambda > 0.0 && lambda < 2.0)) throw SchemaError("solver.lambda", "must lie in (0, 2)");
    if (!(tolerance >= 0.0)) throw SchemaError("solver.tolerance", "must be nonnegative");
    if (!(noise_sigma >= 0.0)) throw SchemaError("degradation.noise_sigma", "must be nonnegative");
    if (experiment == 1 || experiment == 2) {
      if (size < 4) throw SchemaError("image.size", "must be at least 4");
      if (blur == 0 || blur > size) throw SchemaError("degradation.blur", "must lie in [1, image.size]");
      positive("image.pixel_max", pixel_max);
    }
    if (experiment == 1) {
      positive("model.alpha", alpha);
      if (!(p >= 1.0)) throw SchemaError("model.p", "must be >= 1");
      if (!(phase_band >= 0.0 && phase_band <= 1.0)) throw SchemaError("model.phase_band", "must lie in [0, 1]");
      if (!(phase_perturbation >= 0.0 && phase_perturbation < 1.0)) {
        throw SchemaError("model.phase_perturbation", "must lie in [0, 1)");
      }
      positive("model.vignette_radius", vignette_radius);
    }
    if (experiment == 2) {
      if (!(alpha >= 0.0)) throw SchemaError("model.alpha", "must be nonnegative");
      if (!(beta >= 0.0)) throw SchemaError("model.beta", "must be nonnegative");
      if (levels < 1) throw SchemaError("model.levels", "must be at least 1");
      const std::size_t block = std::size_t{1} << levels;
      if (size % block != 0) {
        throw SchemaError("image.size", "must be divisible by 2^levels = " + std::to_string(block));
      }
    }
    if (experiment == 3) {
      if (size < 4 || (size & (size - 1)) != 0) throw SchemaError("signal.length", "must be a power of two >= 4");
      positive("signal.sampling_rate_hz", sampling_rate_hz);
      positive("signal.null_spacing_hz", null_spacing_hz);
      positive("signal.stopband_hz", stopband_hz);
      positive("signal.duration_ms", duration_ms);
      positive("signal.zero_crossing_ms", zero_crossing_ms);
      positive("model.rho", rho);
      positive("model.mu", mu);
      if (!(p4 >= 1.0)) throw SchemaError("model.p4", "must be >= 1");
      if (!(p5 >= 1.0)) throw SchemaError("model.p5", "must be >= 1");
    }
  }

  SolverConfig solver_config() const {
    SolverConfig s;
    s.gamma = gamma;
    s.lambda = lambda;
    s.max_iterations = iterations;
    s.tolerance = tolerance;
    s.parallel = parallel;
    return s;
  }
};

// ---------------------------------------------------------------------------
// JSON

namespace detail {

inline const json* find_path(const json& j, const std::string& path) {
  const json* cur = &j;
  std::size_t start = 0;
  while (true) {
    const std::size_t dot = path.find('.', start);
    const std::string key = path.substr(start, dot == std::string::npos ? std::string::npos : dot - start);
    if (!cur->is_object()) return nullptr;
    const auto it = cur->find(key);
    if (it == cur->end()) return nullptr;
    cur = &*it;
    if (dot == std::string::npos) return cur;
    start = dot + 1;
  }
}

template <typename T>
T read_field(const json& j, const std::string& path) {
  const json* v = find_path(j, path);
  if (!v) throw SchemaError(path, "missing");
  try {
    if constexpr (std::is_same_v<T, bool>) {
      if (!v->is_boolean()) throw SchemaError(path, "expected a boolean");
    } else if constexpr (std::is_arithmetic_v<T>) {
      if (!v->is_number()) throw SchemaError(path, "expected a number");
      if constexpr (std::is_integral_v<T>) {
        const double d = v->get<double>();
        if (d != std::floor(d)) throw SchemaError(path, "expected an integer");
        if constexpr (std::is_unsigned_v<T>) {
          if (d < 0) throw SchemaError(path, "expected a nonnegative integer");
        }
      }
    } else {
      if (!v->is_string()) throw SchemaError(path, "expected a string");
    }
    return v->get<T>();
  } catch (const json::exception& e) {
    throw SchemaError(path, e.what());
  }
}

template <typename T>
void read_optional(const json& j, const std::string& path, T& out) {
  if (find_path(j, path)) out = read_field<T>(j, path);
}

template <typename T>
void read_required(const json& j, const std::string& path, T& out) {
  out = read_field<T>(j, path);
}

}  // namespace detail

/// Reads a version-1 config. Required everywhere: schema_version, experiment,
/// solver.gamma, solver.iterations. Per experiment: image.size and
/// degradation.noise_sigma (1, 2), model.alpha (1, 2), model.beta (2),
/// signal.length, model.rho or model.rho_log10, model.mu (3).
inline ExperimentConfig parse_config(const json& j) {
  if (!j.is_object()) throw SchemaError("<root>", "expected a JSON object");
  ExperimentConfig c;
  using detail::read_optional;
  using detail::read_required;
  read_required(j, "schema_version", c.schema_version);
  if (c.schema_version != kSchemaVersion) {
    throw SchemaError("schema_version", "unsupported version " + std::to_string(c.schema_version));
  }
  read_required(j, "experiment", c.experiment);
  read_optional(j, "seed", c.seed);
  read_required(j, "solver.gamma", c.gamma);
  read_required(j, "solver.iterations", c.iterations);
  read_optional(j, "solver.lambda", c.lambda);
  read_optional(j, "solver.tolerance", c.tolerance);
  read_optional(j, "solver.parallel", c.parallel);

  if (c.experiment == 1 || c.experiment == 2) {
    read_required(j, "image.size", c.size);
    read_optional(j, "image.source", c.source);
    read_optional(j, "image.pixel_max", c.pixel_max);
    read_optional(j, "degradation.blur", c.blur);
    read_required(j, "degradation.noise_sigma", c.noise_sigma);
    read_required(j, "model.alpha", c.alpha);
  }
  if (c.experiment == 1) {
    read_optional(j, "model.p", c.p);
    read_optional(j, "model.phase_band", c.phase_band);
    read_optional(j, "model.phase_perturbation", c.phase_perturbation);
    read_optional(j, "model.vignette_radius", c.vignette_radius);
  } else if (c.experiment == 2) {
    read_required(j, "model.beta", c.beta);
    read_optional(j, "model.levels", c.levels);
    read_optional(j, "model.use_l1", c.use_l1);
    read_optional(j, "model.use_tv", c.use_tv);
  } else if (c.experiment == 3) {
    read_required(j, "signal.length", c.size);
    read_optional(j, "signal.sampling_rate_hz", c.sampling_rate_hz);
    read_optional(j, "signal.null_spacing_hz", c.null_spacing_hz);
    read_optional(j, "signal.stopband_hz", c.stopband_hz);
    read_optional(j, "signal.duration_ms", c.duration_ms);
    read_optional(j, "signal.zero_crossing_ms", c.zero_crossing_ms);
    if (detail::find_path(j, "model.rho_log10")) {
      c.rho = std::pow(10.0, detail::read_field<double>(j, "model.rho_log10"));
    } else {
      read_required(j, "model.rho", c.rho);
    }
    read_required(j, "model.mu", c.mu);
    read_optional(j, "model.p4", c.p4);
    read_optional(j, "model.p5", c.p5);
  }
  c.validate();
  return c;
}

inline ExperimentConfig load_config(const std::filesystem::path& path) {
  const auto bytes = read_bytes(path);
  json j;
  try {
    j = json::parse(bytes.begin(), bytes.end());
  } catch (const json::parse_error& e) {
    throw ParseError(path.string(), e.byte, e.what());
  }
  return parse_config(j);
}

inline json to_json(const ExperimentConfig& c) {
  json j;
  j["schema_version"] = c.schema_version;
  j["experiment"] = c.experiment;
  j["seed"] = c.seed;
  j["solver"] = {{"gamma", c.gamma},
                 {"iterations", c.iterations},
                 {"lambda", c.lambda},
                 {"tolerance", c.tolerance},
                 {"parallel", c.parallel}};
  if (c.experiment == 1 || c.experiment == 2) {
    j["image"] = {{"size", c.size}, {"source", c.source}, {"pixel_max", c.pixel_max}};
    j["degradation"] = {{"blur", c.blur}, {"noise_sigma", c.noise_sigma}};
  }
  if (c.experiment == 1) {
    j["model"] = {{"alpha", c.alpha},
                  {"p", c.p},
                  {"phase_band", c.phase_band},
                  {"phase_perturbation", c.phase_perturbation},
                  {"vignette_radius", c.vignette_radius}};
  } else if (c.experiment == 2) {
    j["model"] = {{"alpha", c.alpha}, {"beta", c.beta}, {"levels", c.levels}, {"use_l1", c.use_l1},
                  {"use_tv", c.use_tv}};
  } else {
    j["signal"] = {{"length", c.size},
                   {"sampling_rate_hz", c.sampling_rate_hz},
                   {"null_spacing_hz", c.null_spacing_hz},
                   {"stopband_hz", c.stopband_hz},
                   {"duration_ms", c.duration_ms},
                   {"zero_crossing_ms", c.zero_crossing_ms}};
    j["model"] = {{"rho", c.rho}, {"mu", c.mu}, {"p4", c.p4}, {"p5", c.p5}};
  }
  return j;
}

// ---------------------------------------------------------------------------
// Metrics

/// 20 log10(||L xbar|| / ||w||).
inline double bsnr_db(const RealArray& blurred, const RealArray& noise) {
  return 20.0 * std::log10(norm(blurred) / norm(noise));
}

/// 20 log10(||u - xbar|| / ||xbar||).
inline double rel_err_db(const RealArray& u, const RealArray& truth) {
  return 20.0 * std::log10(distance(u, truth) / norm(truth));
}

inline json number_or_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

// ---------------------------------------------------------------------------
// Synthetic data

/// Piecewise-constant scene on [0, pixel_max]: background, a rectangle, a disc
/// and a diagonal bar.
inline RealArray synthetic_scene(std::size_t n, double pixel_max = 255.0) {
  RealArray x(static_cast<int>(n), static_cast<int>(n), 0.0);
  const double s = static_cast<double>(n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      const double u = (static_cast<double>(i) + 0.5) / s, v = (static_cast<double>(j) + 0.5) / s;
      double val = 0.25;
      if (u > 0.2 && u < 0.55 && v > 0.15 && v < 0.6) val = 0.7;
      if ((u - 0.62) * (u - 0.62) + (v - 0.62) * (v - 0.62) < 0.04) val = 0.9;
      if (std::abs(u - v + 0.05) < 0.05 && u > 0.55 && u < 0.9) val = 0.45;
      x(i, j) = val * pixel_max;
    }
  }
  return x;
}

/// Cartoon image on [0, pixel_max]: flat regions, a shaded region with a
/// linear ramp and a small checkerboard patch.
inline RealArray synthetic_cartoon(std::size_t n, double pixel_max = 255.0) {
  RealArray x(static_cast<int>(n), static_cast<int>(n), 0.0);
  const double s = static_cast<double>(n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      const double u = (static_cast<double>(i) + 0.5) / s, v = (static_cast<double>(j) + 0.5) / s;
      double val = 0.3 + 0.2 * v;
      if (u > 0.1 && u < 0.45 && v > 0.1 && v < 0.5) val = 0.8;
      if ((u - 0.7) * (u - 0.7) + (v - 0.3) * (v - 0.3) < 0.03) val = 0.1;
      if (u > 0.55 && u < 0.9 && v > 0.55 && v < 0.9) {
        const bool c = ((i * 8 / n) + (j * 8 / n)) % 2 == 0;
        val = c ? 0.65 : 0.45;
      }
      if (u > 0.15 && u < 0.4 && std::abs(v - 0.75) < 0.04) val = 0.95;
      x(i, j) = val * pixel_max;
    }
  }
  return x;
}

/// Pixels farther than radius * n from the image centre.
inline IndexMask vignette_mask(Shape shape, double radius) {
  IndexMask S(shape);
  const double cr = 0.5 * static_cast<double>(shape.rows), cc = 0.5 * static_cast<double>(shape.cols);
  const double r = radius * static_cast<double>(std::max(shape.rows, shape.cols));
  for (std::size_t i = 0; i < shape.rows; ++i) {
    for (std::size_t j = 0; j < shape.cols; ++j) {
      const double a = static_cast<double>(i) + 0.5 - cr, b = static_cast<double>(j) + 0.5 - cc;
      S.on[i * shape.cols + j] = a * a + b * b > r * r;
    }
  }
  return S;
}

/// Square low-frequency band {max(|u|, |v|) <= b} with the smallest b whose
/// share of all frequencies reaches fraction; conjugate-symmetric.
inline IndexMask low_frequency_band(Shape shape, double fraction) {
  IndexMask D(shape);
  if (fraction <= 0.0) return D;
  const std::size_t R = shape.rows, C = shape.cols;
  const std::size_t total = R * C;
  for (std::size_t b = 0; b <= std::max(R, C) / 2; ++b) {
    std::size_t count = 0;
    for (std::size_t u = 0; u < R; ++u)
      for (std::size_t v = 0; v < C; ++v) count += std::min(u, R - u) <= b && std::min(v, C - v) <= b;
    if (static_cast<double>(count) >= fraction * static_cast<double>(total) || b == std::max(R, C) / 2) {
      for (std::size_t u = 0; u < R; ++u)
        for (std::size_t v = 0; v < C; ++v) D.on[u * C + v] = std::min(u, R - u) <= b && std::min(v, C - v) <= b;
      break;
    }
  }
  return D;
}

/// Phases of X on D, each multiplied by 1 + u with u uniform on [-amount, amount].
/// The perturbation is drawn once per conjugate pair (lower flat index first)
/// and mirrored with opposite sign; self-conjugate frequencies keep their
/// exact phase (0 or pi).
inline std::vector<double> perturbed_phases(const ComplexSpectrum& X, const IndexMask& D, double amount, Rng& rng) {
  std::vector<double> phases(X.size(), 0.0);
  for (std::size_t k = 0; k < X.size(); ++k) {
    if (!D[k]) continue;
    const std::size_t m = D.mirror(k);
    if (m < k) continue;
    const double phi = std::arg(X[k]);
    if (m == k) {
      phases[k] = phi;
      continue;
    }
    const double u = amount > 0.0 ? rng.uniform(-amount, amount) : 0.0;
    phases[k] = phi * (1.0 + u);
    phases[m] = -phases[k];
  }
  return phases;
}

struct Degradation {
  LinearMap blur;
  RealArray noise;
  RealArray observed;
};

/// z = L xbar + w with L a uniform k x k periodic blur (identity for k = 1)
/// and w white Gaussian noise drawn from Rng(seed).
inline Degradation degrade(const RealArray& truth, std::size_t blur, double sigma, std::uint64_t seed) {
  Degradation d;
  d.blur = blur <= 1 ? identity_map(truth.shape())
                     : circulant_map(embed_kernel(uniform_kernel(blur), truth.shape()));
  Rng rng(seed);
  d.noise = rng.gaussian_array(truth.shape(), sigma);
  d.observed = d.blur.apply(truth) + d.noise;
  return d;
}

// ---------------------------------------------------------------------------
// Results

struct ExperimentResult {
  int experiment = 0;
  RealArray truth;
  RealArray observed;
  /// restored image (1, 2) or synthesized pulse (3)
  RealArray restored;
  IterationLog log;
  Status status = Status::max_iterations;
  json metrics;
};

namespace detail {

inline RealArray image_truth(const ExperimentConfig& c, RealArray (*synth)(std::size_t, double)) {
  if (c.source == "synthetic") return synth(c.size, c.pixel_max);
  RealArray img = read_pgm(c.source);
  if (img.rows() != c.size || img.cols() != c.size) {
    throw SchemaError("image.size", "does not match " + c.source + " (" + img.shape().str() + ")");
  }
  return img;
}

inline void record_solver(json& m, const PpxaResult& r, const std::vector<ProxFn>& fs) {
  m["iterations"] = r.log.size();
  m["status"] = to_string(r.status);
  if (!r.warning.empty()) m["warning"] = r.warning;
  m["final_residual"] = number_or_null(r.log.empty() ? 0.0 : r.log.back().residual);
  m["final_objective"] = number_or_null(r.log.empty() ? kInfinity : r.log.back().objective);
  std::vector<std::string> names;
  for (const auto& f : fs) names.push_back(f.name);
  m["terms"] = names;
  const auto q = qualification_advisory(fs);
  m["qualification"] = {{"verdict", q.satisfied() ? "satisfied" : "unknown"}, {"reason", q.reason}};
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Experiment 1

/// minimize alpha d_{C3}^p(x) + ||L x - z||^2 over C1 ∩ C2 with
/// C1 = [0, pixel_max]^n ∩ {x = 0 on the vignette}, C2 = {mean(x) = mean(xbar)},
/// C3 = {angle(X_k) = phi_k on a low band D}, phi perturbed.
inline ExperimentResult run_experiment1(const ExperimentConfig& c) {
  c.validate();
  if (c.experiment != 1) throw SchemaError("experiment", "run_experiment1 needs experiment 1");
  ExperimentResult res;
  res.experiment = 1;
  RealArray truth = detail::image_truth(c, &synthetic_scene);
  const IndexMask S = vignette_mask(truth.shape(), c.vignette_radius);
  if (S.count() == S.on.size()) throw SchemaError("model.vignette_radius", "vignette covers the whole image");
  for (std::size_t k = 0; k < truth.size(); ++k)
    if (S[k]) truth[k] = 0.0;
  const double mean = sum(truth) / static_cast<double>(truth.size());
  const Degradation d = degrade(truth, c.blur, c.noise_sigma, c.seed);

  const IndexMask D = low_frequency_band(truth.shape(), c.phase_band);
  Rng phase_rng(c.seed + 1);
  const std::vector<double> phases = perturbed_phases(dft(truth), D, c.phase_perturbation, phase_rng);
  const Projector C3 = project_fourier_phase(D, phases);

  const std::vector<ProxFn> fs{indicator(project_box_and_mask(0.0, c.pixel_max, S)),
                               indicator(project_mean_hyperplane(mean)), prox_distance_power(C3, c.alpha, c.p),
                               prox_quadratic(d.blur, d.observed, 2.0)};
  const PpxaResult r = ppxa(fs, c.solver_config(), d.observed);

  res.truth = truth;
  res.observed = d.observed;
  res.restored = r.x;
  res.log = r.log;
  res.status = r.status;
  json& m = res.metrics;
  m["experiment"] = 1;
  m["bsnr_db"] = number_or_null(bsnr_db(d.blur.apply(truth), d.noise));
  m["degraded_rel_err_db"] = rel_err_db(d.observed, truth);
  m["restored_rel_err_db"] = rel_err_db(r.x, truth);
  m["vignette_pixels"] = S.count();
  m["phase_band_frequencies"] = D.count();
  m["phase_band_fraction"] = static_cast<double>(D.count()) / static_cast<double>(truth.size());
  m["mean"] = mean;
  detail::record_solver(m, r, fs);
  m["config"] = to_json(c);
  return res;
}

// ---------------------------------------------------------------------------
// Experiment 2

/// minimize ||L F* x - z||^2 + alpha ||x||_1 + beta sum_i h(U_i F* x) over
/// {x : F* x in [0, pixel_max]^n}, x the coefficients of a tight frame F
/// (F* F = kappa Id). Terms with a zero weight or disabled are dropped.
inline ExperimentResult run_experiment2(const ExperimentConfig& c) {
  c.validate();
  if (c.experiment != 2) throw SchemaError("experiment", "run_experiment2 needs experiment 2");
  ExperimentResult res;
  res.experiment = 2;
  const RealArray truth = detail::image_truth(c, &synthetic_cartoon);
  const Shape image = truth.shape();
  const Degradation d = degrade(truth, c.blur, c.noise_sigma, c.seed);

  FrameSpec F;
  F.levels = c.levels;
  const double kappa = F.kappa();
  const LinearMap synth = frame_synthesis_map(F, image);

  std::vector<ProxFn> fs;
  fs.push_back(prox_semiorthogonal(indicator(project_box_and_mask(0.0, c.pixel_max, IndexMask(image))), synth, kappa));
  fs.push_back(prox_semiorthogonal(prox_quadratic(d.blur, d.observed, 2.0), synth, kappa));
  if (c.use_l1 && c.alpha > 0.0) fs.push_back(prox_l1(c.alpha));
  if (c.use_tv && c.beta > 0.0)
    for (int i = 0; i < 4; ++i) fs.push_back(prox_tv_i(i, F, c.beta, image));

  const RealArray x0 = (1.0 / kappa) * frame_analysis(F, d.observed);
  const PpxaResult r = ppxa(fs, c.solver_config(), x0);
  const RealArray restored = frame_synthesis(F, r.x, image);

  res.truth = truth;
  res.observed = d.observed;
  res.restored = restored;
  res.log = r.log;
  res.status = r.status;
  json& m = res.metrics;
  m["experiment"] = 2;
  m["bsnr_db"] = number_or_null(bsnr_db(d.blur.apply(truth), d.noise));
  m["degraded_rel_err_db"] = rel_err_db(d.observed, truth);
  m["restored_rel_err_db"] = rel_err_db(restored, truth);
  m["kappa"] = kappa;
  m["l1"] = c.use_l1 && c.alpha > 0.0;
  m["tv"] = c.use_tv && c.beta > 0.0;
  m["total_variation"] = total_variation(restored);
  detail::record_solver(m, r, fs);
  m["config"] = to_json(c);
  return res;
}

// ---------------------------------------------------------------------------
// Experiment 3

struct PulseSets {
  IndexMask nulls;     // D1: zero frequency and multiples of the null spacing
  IndexMask stopband;  // D2: frequencies beyond the stop-band edge
  IndexMask zeros;     // S: outside the support plus the zero-crossing grid
  std::size_t support_begin = 0, support_end = 0;  // [begin, end)
  std::size_t crossing_step = 0;
};

/// Frequencies are |f_k| = min(k, N - k) fs / N. The support of the given
/// duration is centred on the mid-point pair (N/2 - 1, N/2); zero crossings
/// sit every crossing period on either side of that pair.
inline PulseSets pulse_sets(const ExperimentConfig& c) {
  const std::size_t N = c.size;
  const Shape s = Shape::vector(N);
  PulseSets P{IndexMask(s), IndexMask(s), IndexMask(s)};
  const double df = c.sampling_rate_hz / static_cast<double>(N);
  for (std::size_t k = 0; k < N; ++k) {
    const double f = static_cast<double>(std::min(k, N - k)) * df;
    const double q = f / c.null_spacing_hz;
    P.nulls.on[k] = std::abs(q - std::round(q)) <= 1e-9 * std::max(1.0, q);
    P.stopband.on[k] = f > c.stopband_hz * (1.0 + 1e-12);
  }
  const double len = c.duration_ms * 1e-3 * c.sampling_rate_hz;
  const double step = c.zero_crossing_ms * 1e-3 * c.sampling_rate_hz;
  if (std::abs(len - std::round(len)) > 1e-9 * len) {
    throw SchemaError("signal.duration_ms", "must be a whole number of samples");
  }
  if (std::abs(step - std::round(step)) > 1e-9 * step || std::round(step) < 1.0) {
    throw SchemaError("signal.zero_crossing_ms", "must be a whole number of samples");
  }
  const auto L = static_cast<std::size_t>(std::round(len));
  P.crossing_step = static_cast<std::size_t>(std::round(step));
  P.support_begin = N / 2 >= L / 2 ? N / 2 - L / 2 : 0;
  P.support_end = std::min(N, N / 2 + (L - L / 2));
  for (std::size_t k = 0; k < N; ++k) P.zeros.on[k] = k < P.support_begin || k >= P.support_end;
  for (std::size_t j = 1;; ++j) {
    const std::size_t off = P.crossing_step * j;
    bool any = false;
    if (N / 2 + off < P.support_end) P.zeros.on[N / 2 + off] = any = true;
    if (N / 2 >= 1 + off && N / 2 - 1 - off >= P.support_begin) P.zeros.on[N / 2 - 1 - off] = any = true;
    if (!any) break;
  }
  return P;
}

/// Magnitude spectrum |X_k|, k = 0..N/2.
inline std::vector<double> half_spectrum(const RealArray& x) {
  const ComplexSpectrum X = dft(x);
  std::vector<double> m(x.size() / 2 + 1);
  for (std::size_t k = 0; k < m.size(); ++k) m[k] = std::abs(X[k]);
  return m;
}

/// Hard-constraint report for a pulse.
struct PulseFeasibility {
  double null_violation = 0.0;      // max |X_k| on D1
  double stopband_violation = 0.0;  // max (|X_k| - rho)_+ on D2
  double energy_violation = 0.0;    // (||x|| - mu)_+
  double stopband_max = 0.0;        // max |X_k| on D2
  bool feasible(double tol) const {
    return null_violation <= tol && stopband_violation <= tol && energy_violation <= tol;
  }
};

inline PulseFeasibility pulse_feasibility(const RealArray& x, const PulseSets& P, double rho, double mu) {
  PulseFeasibility f;
  const ComplexSpectrum X = dft(x);
  for (std::size_t k = 0; k < X.size(); ++k) {
    const double a = std::abs(X[k]);
    if (P.nulls[k]) f.null_violation = std::max(f.null_violation, a);
    if (P.stopband[k]) {
      f.stopband_max = std::max(f.stopband_max, a);
      f.stopband_violation = std::max(f.stopband_violation, a - rho);
    }
  }
  f.energy_violation = std::max(0.0, norm(x) - mu);
  return f;
}

/// The five potentials: iota_{C1}, iota_{C2}, iota_{C3}, d_{C4}^{p4}, d_{C5}^{p5}.
inline std::vector<ProxFn> pulse_potentials(const ExperimentConfig& c, const PulseSets& P) {
  return {indicator(project_fourier_zero(P.nulls)), indicator(project_fourier_magnitude(P.stopband, c.rho)),
          indicator(project_energy_ball(c.mu)), prox_distance_power(project_symmetry_midpoint(), 1.0, c.p4),
          prox_distance_power(project_time_mask(P.zeros), 1.0, c.p5)};
}

/// minimize d_{C4}^{p4}(x) + d_{C5}^{p5}(x) over C1 ∩ C2 ∩ C3, started from 0.
inline ExperimentResult run_experiment3(const ExperimentConfig& c) {
  c.validate();
  if (c.experiment != 3) throw SchemaError("experiment", "run_experiment3 needs experiment 3");
  ExperimentResult res;
  res.experiment = 3;
  const PulseSets P = pulse_sets(c);
  const std::vector<ProxFn> fs = pulse_potentials(c, P);
  const PpxaResult r = ppxa(fs, c.solver_config(), RealArray(Shape::vector(c.size)));

  res.restored = r.x;
  res.log = r.log;
  res.status = r.status;
  const PulseFeasibility f = pulse_feasibility(r.x, P, c.rho, c.mu);
  json& m = res.metrics;
  m["experiment"] = 3;
  m["null_frequencies"] = P.nulls.count();
  m["stopband_frequencies"] = P.stopband.count();
  m["zero_samples"] = P.zeros.count();
  m["support"] = {P.support_begin, P.support_end};
  m["crossing_step"] = P.crossing_step;
  m["null_violation"] = f.null_violation;
  m["stopband_violation"] = f.stopband_violation;
  m["energy_violation"] = f.energy_violation;
  m["hard_constraints_within_1e-6"] = f.feasible(1e-6);
  m["energy"] = norm(r.x);
  m["stopband_max_db"] = 20.0 * std::log10(std::max(f.stopband_max, 1e-300));
  m["rho_db"] = 20.0 * std::log10(c.rho);
  m["distance_symmetry"] = distance_to(project_symmetry_midpoint(), r.x);
  m["distance_time_mask"] = distance_to(project_time_mask(P.zeros), r.x);
  m["midpoint"] = {r.x[c.size / 2 - 1], r.x[c.size / 2]};
  detail::record_solver(m, r, fs);
  m["config"] = to_json(c);
  return res;
}

inline ExperimentResult run_experiment(const ExperimentConfig& c) {
  switch (c.experiment) {
    case 1: return run_experiment1(c);
    case 2: return run_experiment2(c);
    case 3: return run_experiment3(c);
    default: throw SchemaError("experiment", "must be 1, 2 or 3");
  }
}

// ---------------------------------------------------------------------------
// Output files

/// Images: restored.pgm, degraded.pgm, original.pgm and spectrum.csv
/// (u, v, magnitude of the restored image's DFT). Pulses: pulse.csv (k, t_ms,
/// value) and spectrum.csv (k, frequency_hz, magnitude, magnitude_db).
/// Always log.csv and metrics.json. Only the millis column of log.csv varies
/// between identical runs.
inline void write_outputs(const ExperimentResult& r, const ExperimentConfig& c, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  if (r.experiment == 3) {
    CsvTable pulse({"k", "t_ms", "value"});
    for (std::size_t k = 0; k < r.restored.size(); ++k) {
      pulse.add_row({static_cast<double>(k), 1e3 * static_cast<double>(k) / c.sampling_rate_hz, r.restored[k]});
    }
    pulse.write(dir / "pulse.csv");
    CsvTable spectrum({"k", "frequency_hz", "magnitude", "magnitude_db"});
    const auto mag = half_spectrum(r.restored);
    for (std::size_t k = 0; k < mag.size(); ++k) {
      spectrum.add_row({static_cast<double>(k), static_cast<double>(k) * c.sampling_rate_hz / static_cast<double>(c.size),
                    mag[k], 20.0 * std::log10(std::max(mag[k], 1e-300))});
    }
    spectrum.write(dir / "spectrum.csv");
  } else {
    write_pgm(dir / "restored.pgm", r.restored);
    write_pgm(dir / "degraded.pgm", r.observed);
    write_pgm(dir / "original.pgm", r.truth);
    CsvTable spectrum({"u", "v", "magnitude"});
    const ComplexSpectrum X = dft(r.restored);
    for (std::size_t u = 0; u < r.restored.rows(); ++u)
      for (std::size_t v = 0; v < r.restored.cols(); ++v)
        spectrum.add_row({static_cast<double>(u), static_cast<double>(v), std::abs(X[u * r.restored.cols() + v])});
    spectrum.write(dir / "spectrum.csv");
  }
  write_text(dir / "log.csv", r.log.csv());
  write_text(dir / "metrics.json", r.metrics.dump(2) + "\n");
}

}  // namespace proxsplit
