/**
 * @file analysis.hpp
 * @brief Sampling checks for the structural hypotheses the convergence
 * results rely on: strong quasiconvexity, quadratic growth, the PL
 * inequality, the gradient characterization, the descent lemma, the
 * quasar-type modulus kappa and the growth ratios near the minimizer and at
 * infinity.
 *
 * Sampling can refute a property, never prove it: a passing report means
 * no violation was found among the drawn samples. Sample i depends only on
 * (seed, i), so sample sets for the same seed are nested.
 */
#pragma once

#include "hessdamp/core.hpp"
#include "hessdamp/functions.hpp"

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

namespace hessdamp {

// ---------------------------------------------------------------------------
// Counter-based sampling
// ---------------------------------------------------------------------------

/// Stateless generator: draw(i, j) is a pure function of (seed, i, j).
class CounterRng {
 public:
  explicit CounterRng(std::uint64_t seed) : seed_(seed) {}

  [[nodiscard]] std::uint64_t seed() const { return seed_; }

  /// Uniform double in [0, 1) for sample `index`, stream `slot`.
  [[nodiscard]] double uniform(std::uint64_t index, std::uint64_t slot) const {
    const std::uint64_t bits = mix(mix(seed_ ^ mix(index)) + slot * 0x9E3779B97F4A7C15ULL);
    return static_cast<double>(bits >> 11) * 0x1.0p-53;
  }

  /// Standard normal via Box-Muller on two uniform slots.
  [[nodiscard]] double normal(std::uint64_t index, std::uint64_t slot) const {
    const double u1 = 1.0 - uniform(index, 2 * slot);  // (0, 1]
    const double u2 = uniform(index, 2 * slot + 1);
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * 3.14159265358979323846 * u2);
  }

  /// Uniform point in the box; coordinates use slots [first, first + n).
  [[nodiscard]] Vector in_box(const Box& box, std::uint64_t index, std::uint64_t first = 0) const {
    Vector x(box.lower.size());
    for (Eigen::Index j = 0; j < x.size(); ++j) {
      const double u = uniform(index, first + static_cast<std::uint64_t>(j));
      x[j] = box.lower[j] + u * (box.upper[j] - box.lower[j]);
    }
    return x;
  }

 private:
  // splitmix64 finalizer
  static std::uint64_t mix(std::uint64_t z) {
    z += 0x9E3779B97F4A7C15ULL;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

  std::uint64_t seed_;
};

// ---------------------------------------------------------------------------
// Reports
// ---------------------------------------------------------------------------

inline constexpr double kDefaultSlack = 1e-9;

/// Outcome of one sampled check. `witness` is the sample with the smallest
/// margin; its layout is documented per checker.
struct PropertyReport {
  std::string property;
  bool passed = true;
  double worst_violation = std::numeric_limits<double>::infinity();
  std::vector<double> witness;
  std::size_t samples = 0;  // samples that produced a margin
  std::uint64_t seed = 0;
  double slack = kDefaultSlack;

  void observe(double margin, std::vector<double> sample) {
    ++samples;
    if (margin < worst_violation) {
      worst_violation = margin;
      witness = std::move(sample);
    }
  }

  void finish() { passed = !(worst_violation < -slack); }
};

namespace detail {

inline std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline std::vector<double> concat(std::initializer_list<const Vector*> parts,
                                  std::initializer_list<double> tail = {}) {
  std::vector<double> out;
  for (const Vector* p : parts) out.insert(out.end(), p->data(), p->data() + p->size());
  out.insert(out.end(), tail.begin(), tail.end());
  return out;
}

inline void require_samples(std::size_t n) {
  if (n == 0) throw InvalidInput("sampling check needs at least one sample");
}

}  // namespace detail

/// One line: `property=... passed=... worst_violation=... samples=... seed=... witness=a;b;c`.
[[nodiscard]] inline std::string serialize(const PropertyReport& r) {
  std::ostringstream os;
  os << "property=" << r.property << " passed=" << (r.passed ? "true" : "false")
     << " worst_violation=" << detail::format_double(r.worst_violation)
     << " samples=" << r.samples << " seed=" << r.seed << " witness=";
  for (std::size_t i = 0; i < r.witness.size(); ++i) {
    if (i) os << ';';
    os << detail::format_double(r.witness[i]);
  }
  return os.str();
}

// ---------------------------------------------------------------------------
// Margin formulas (shared by the checkers and by witness replays)
// ---------------------------------------------------------------------------

/// max{h(x), h(y)} - l(1-l) gamma/2 |x - y|^2 - h(l y + (1-l) x).
[[nodiscard]] inline double strong_quasiconvexity_margin(const Objective& obj, double gamma,
                                                         const Vector& x, const Vector& y,
                                                         double lam) {
  const Vector z = lam * y + (1.0 - lam) * x;
  return std::max(obj.eval(y), obj.eval(x)) -
         lam * (1.0 - lam) * (gamma / 2.0) * (x - y).squaredNorm() - obj.eval(z);
}

/// For h(x) <= h(y): -gamma/2 |y - x|^2 - <grad h(y), x - y>.
[[nodiscard]] inline double gradient_characterization_margin(const Objective& obj, double gamma,
                                                             const Vector& x, const Vector& y) {
  return -(gamma / 2.0) * (y - x).squaredNorm() - obj.grad(y).dot(x - y);
}

/// h(x) + <grad h(x), y - x> + L/2 |x - y|^2 - h(y).
[[nodiscard]] inline double descent_lemma_margin(const Objective& obj, double L, const Vector& x,
                                                 const Vector& y) {
  return obj.eval(x) + obj.grad(x).dot(y - x) + (L / 2.0) * (x - y).squaredNorm() - obj.eval(y);
}

/// |grad h(x)|^2 - gamma^2/(2L) (h(x) - h*).
[[nodiscard]] inline double pl_margin(const Objective& obj, const FunctionMetadata& meta,
                                      const Vector& x) {
  const double mu = meta.gamma * meta.gamma / (2.0 * meta.lipschitz_grad);
  return obj.grad(x).squaredNorm() - mu * (obj.eval(x) - *meta.min_value);
}

/// h(x) - h* - gamma/4 |x - xbar|^2.
[[nodiscard]] inline double quadratic_growth_margin(const Objective& obj,
                                                    const FunctionMetadata& meta,
                                                    const Vector& x) {
  return obj.eval(x) - *meta.min_value - meta.gamma / 4.0 * (x - *meta.minimizer).squaredNorm();
}

/// L |x - y| (1 + 1e-9) - |grad h(x) - grad h(y)|.
[[nodiscard]] inline double lipschitz_margin(const Objective& obj, double L, const Vector& x,
                                             const Vector& y) {
  return L * (x - y).norm() * (1.0 + 1e-9) - (obj.grad(x) - obj.grad(y)).norm();
}

// ---------------------------------------------------------------------------
// Checkers
// ---------------------------------------------------------------------------

/// Triples (x, y, lambda) in box x box x [0,1]. Witness: [x, y, lambda].
[[nodiscard]] inline PropertyReport check_strong_quasiconvexity(const TestProblem& problem,
                                                                double gamma,
                                                                std::size_t n_samples,
                                                                std::uint64_t seed) {
  detail::require_samples(n_samples);
  if (!(gamma > 0.0)) throw InvalidInput("strong quasiconvexity check needs gamma > 0");
  const CounterRng rng(seed);
  const auto n = static_cast<std::uint64_t>(problem.dim());
  PropertyReport rep;
  rep.property = "strong_quasiconvexity";
  rep.seed = seed;
  for (std::size_t i = 0; i < n_samples; ++i) {
    const Vector x = rng.in_box(problem.test_box, i, 0);
    const Vector y = rng.in_box(problem.test_box, i, n);
    const double lam = rng.uniform(i, 2 * n);
    const double m = strong_quasiconvexity_margin(problem.objective, gamma, x, y, lam);
    rep.observe(m, detail::concat({&x, &y}, {lam}));
  }
  rep.finish();
  return rep;
}

/// Points in the box; needs gamma, L and h*. Witness: [x].
[[nodiscard]] inline PropertyReport check_pl(const TestProblem& problem, std::size_t n_samples,
                                             std::uint64_t seed) {
  detail::require_samples(n_samples);
  const auto& meta = problem.metadata;
  if (!meta.has_gamma() || !meta.has_lipschitz() || !meta.min_value) {
    throw InvalidInput("PL check needs gamma, L and the minimum value");
  }
  const CounterRng rng(seed);
  PropertyReport rep;
  rep.property = "pl";
  rep.seed = seed;
  for (std::size_t i = 0; i < n_samples; ++i) {
    const Vector x = rng.in_box(problem.test_box, i);
    if (problem.near_kink(x)) continue;
    rep.observe(pl_margin(problem.objective, meta, x), detail::concat({&x}));
  }
  rep.finish();
  return rep;
}

/// Points in the box; needs gamma, xbar and h*. Witness: [x].
[[nodiscard]] inline PropertyReport check_quadratic_growth(const TestProblem& problem,
                                                           std::size_t n_samples,
                                                           std::uint64_t seed) {
  detail::require_samples(n_samples);
  const auto& meta = problem.metadata;
  if (!meta.has_gamma() || !meta.minimizer || !meta.min_value) {
    throw InvalidInput("quadratic growth check needs gamma, minimizer and minimum value");
  }
  const CounterRng rng(seed);
  PropertyReport rep;
  rep.property = "quadratic_growth";
  rep.seed = seed;
  for (std::size_t i = 0; i < n_samples; ++i) {
    const Vector x = rng.in_box(problem.test_box, i);
    rep.observe(quadratic_growth_margin(problem.objective, meta, x), detail::concat({&x}));
  }
  rep.finish();
  return rep;
}

/// Pairs ordered so that h(x) <= h(y). Witness: [x, y].
[[nodiscard]] inline PropertyReport check_gradient_characterization(const TestProblem& problem,
                                                                    double gamma,
                                                                    std::size_t n_samples,
                                                                    std::uint64_t seed) {
  detail::require_samples(n_samples);
  if (!(gamma > 0.0)) throw InvalidInput("gradient characterization check needs gamma > 0");
  const CounterRng rng(seed);
  const auto n = static_cast<std::uint64_t>(problem.dim());
  PropertyReport rep;
  rep.property = "gradient_characterization";
  rep.seed = seed;
  const auto& obj = problem.objective;
  for (std::size_t i = 0; i < n_samples; ++i) {
    Vector x = rng.in_box(problem.test_box, i, 0);
    Vector y = rng.in_box(problem.test_box, i, n);
    if (obj.eval(x) > obj.eval(y)) std::swap(x, y);
    if (problem.near_kink(y)) continue;
    rep.observe(gradient_characterization_margin(obj, gamma, x, y), detail::concat({&x, &y}));
  }
  rep.finish();
  return rep;
}

/// Pairs in the box against the metadata L. Witness: [x, y].
[[nodiscard]] inline PropertyReport check_descent_lemma(const TestProblem& problem,
                                                        std::size_t n_samples,
                                                        std::uint64_t seed) {
  detail::require_samples(n_samples);
  if (!problem.metadata.has_lipschitz()) throw InvalidInput("descent lemma check needs L");
  const CounterRng rng(seed);
  const auto n = static_cast<std::uint64_t>(problem.dim());
  PropertyReport rep;
  rep.property = "descent_lemma";
  rep.seed = seed;
  for (std::size_t i = 0; i < n_samples; ++i) {
    const Vector x = rng.in_box(problem.test_box, i, 0);
    const Vector y = rng.in_box(problem.test_box, i, n);
    if (problem.near_kink(x)) continue;
    rep.observe(descent_lemma_margin(problem.objective, problem.metadata.lipschitz_grad, x, y),
                detail::concat({&x, &y}));
  }
  rep.finish();
  return rep;
}

/// Pairs in the box against the metadata L. Witness: [x, y].
[[nodiscard]] inline PropertyReport check_lipschitz_gradient(const TestProblem& problem,
                                                             std::size_t n_samples,
                                                             std::uint64_t seed) {
  detail::require_samples(n_samples);
  if (!problem.metadata.has_lipschitz()) throw InvalidInput("Lipschitz check needs L");
  const CounterRng rng(seed);
  const auto n = static_cast<std::uint64_t>(problem.dim());
  PropertyReport rep;
  rep.property = "lipschitz_gradient";
  rep.seed = seed;
  for (std::size_t i = 0; i < n_samples; ++i) {
    const Vector x = rng.in_box(problem.test_box, i, 0);
    const Vector y = rng.in_box(problem.test_box, i, n);
    if (problem.near_kink(x) || problem.near_kink(y)) continue;
    rep.observe(lipschitz_margin(problem.objective, problem.metadata.lipschitz_grad, x, y),
                detail::concat({&x, &y}));
  }
  rep.finish();
  return rep;
}

/// Analytic gradient against central differences with step 1e-6; margin is
/// 1e-5 (1 + |g|) - |g - g_fd|, so slack is 0. Witness: [x].
[[nodiscard]] inline PropertyReport check_gradient_fd(const TestProblem& problem,
                                                      std::size_t n_samples, std::uint64_t seed) {
  detail::require_samples(n_samples);
  const CounterRng rng(seed);
  PropertyReport rep;
  rep.property = "gradient_fd";
  rep.seed = seed;
  rep.slack = 0.0;
  for (std::size_t i = 0; i < n_samples; ++i) {
    const Vector x = rng.in_box(problem.test_box, i);
    if (problem.near_kink(x, 1e-4)) continue;
    const Vector g = problem.objective.grad(x);
    const Vector fd = finite_diff_gradient(problem.objective, x, 1e-6);
    rep.observe(1e-5 * (1.0 + g.norm()) - (g - fd).norm(), detail::concat({&x}));
  }
  rep.finish();
  return rep;
}

/// Exact HVP against finite differences of the gradient; margin is
/// 1e-4 (1 + |Hv|) - |Hv - Hv_fd|. Witness: [x, v].
[[nodiscard]] inline PropertyReport check_hvp_fd(const TestProblem& problem,
                                                 std::size_t n_samples, std::uint64_t seed) {
  detail::require_samples(n_samples);
  if (!problem.objective.has_hvp()) throw InvalidInput("objective has no exact HVP");
  const CounterRng rng(seed);
  const auto n = static_cast<std::uint64_t>(problem.dim());
  PropertyReport rep;
  rep.property = "hvp_fd";
  rep.seed = seed;
  rep.slack = 0.0;
  for (std::size_t i = 0; i < n_samples; ++i) {
    const Vector x = rng.in_box(problem.test_box, i, 0);
    Vector v(x.size());
    for (Eigen::Index j = 0; j < v.size(); ++j) v[j] = rng.normal(i, n + static_cast<std::uint64_t>(j));
    if (problem.near_kink(x, 1e-4) || v.isZero(0.0)) continue;
    const Vector hv = problem.objective.hvp(x, v);
    const Vector fd = finite_diff_hvp(problem.objective, x, v);
    rep.observe(1e-4 * (1.0 + hv.norm()) - (hv - fd).norm(), detail::concat({&x, &v}));
  }
  rep.finish();
  return rep;
}

// ---------------------------------------------------------------------------
// kappa estimation
// ---------------------------------------------------------------------------

struct QuasarEstimate {
  double kappa_hat = std::numeric_limits<double>::infinity();
  double gap_floor = 0.0;
  std::size_t samples = 0;  // retained samples
  Vector argmin;            // sample attaining kappa_hat
};

/// kappa_hat = min over box samples of <grad h(x), x - xbar> / (h(x) - h*),
/// skipping samples with h(x) - h* < gap_floor. A negative gap_floor
/// selects the default 1e-8 (1 + |h*|).
[[nodiscard]] inline QuasarEstimate estimate_kappa(const TestProblem& problem,
                                                   std::size_t n_samples, double gap_floor,
                                                   std::uint64_t seed) {
  detail::require_samples(n_samples);
  const auto& meta = problem.metadata;
  if (!meta.minimizer || !meta.min_value) {
    throw InvalidInput("kappa estimation needs the minimizer and minimum value");
  }
  const double hstar = *meta.min_value;
  QuasarEstimate est;
  est.gap_floor = gap_floor >= 0.0 ? gap_floor : 1e-8 * (1.0 + std::abs(hstar));
  const CounterRng rng(seed);
  for (std::size_t i = 0; i < n_samples; ++i) {
    const Vector x = rng.in_box(problem.test_box, i);
    const double gap = problem.objective.eval(x) - hstar;
    if (gap < est.gap_floor || problem.near_kink(x)) continue;
    const double ratio = problem.objective.grad(x).dot(x - *meta.minimizer) / gap;
    ++est.samples;
    if (ratio < est.kappa_hat) {
      est.kappa_hat = ratio;
      est.argmin = x;
    }
  }
  if (est.samples == 0) {
    throw InsufficientSamples("no sample had an objective gap above the floor");
  }
  return est;
}

// ---------------------------------------------------------------------------
// Growth ratios at small and large radii
// ---------------------------------------------------------------------------

struct RadiusDiagnostic {
  double radius = 0.0;
  double outer_ratio = kNaN;  // sup h(x)/|x|^2 over |x| = r
  double inner_ratio = kNaN;  // sup (h(x) - h*)/|x - xbar|^2 over |x - xbar| = r
  std::size_t samples = 0;
};

/// Sphere-sampled growth ratios for each radius. Diagnostic only: the
/// caller reads the trend. Points outside the objective's domain are skipped.
[[nodiscard]] inline std::vector<RadiusDiagnostic> growth_ratio_diagnostics(
    const TestProblem& problem, const std::vector<double>& radii, std::size_t n_directions = 64,
    std::uint64_t seed = 0) {
  if (radii.empty()) throw InvalidInput("growth_ratio_diagnostics needs at least one radius");
  const auto& meta = problem.metadata;
  if (!meta.minimizer || !meta.min_value) {
    throw InvalidInput("growth_ratio_diagnostics needs the minimizer and minimum value");
  }
  const auto n = static_cast<Eigen::Index>(problem.dim());
  const CounterRng rng(seed);

  std::vector<Vector> dirs;
  if (n == 1) {
    dirs = {Vector::Constant(1, 1.0), Vector::Constant(1, -1.0)};
  } else {
    for (std::size_t i = 0; i < n_directions; ++i) {
      Vector d(n);
      for (Eigen::Index j = 0; j < n; ++j) d[j] = rng.normal(i, static_cast<std::uint64_t>(j));
      if (d.norm() > 0.0) dirs.push_back(d.normalized());
    }
  }

  std::vector<RadiusDiagnostic> out;
  for (double r : radii) {
    if (!(r > 0.0)) throw InvalidInput("radii must be positive");
    RadiusDiagnostic d;
    d.radius = r;
    double outer = -std::numeric_limits<double>::infinity();
    double inner = -std::numeric_limits<double>::infinity();
    for (const Vector& u : dirs) {
      try {
        const Vector xo = r * u;
        outer = std::max(outer, problem.objective.eval(xo) / (r * r));
        const Vector xi = *meta.minimizer + r * u;
        inner = std::max(inner, (problem.objective.eval(xi) - *meta.min_value) / (r * r));
        ++d.samples;
      } catch (const DomainViolation&) {
      }
    }
    if (d.samples > 0) {
      d.outer_ratio = outer;
      d.inner_ratio = inner;
    }
    out.push_back(d);
  }
  return out;
}

}  // namespace hessdamp
