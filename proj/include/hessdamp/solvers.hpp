/**
 * @file solvers.hpp
 * @brief Heavy Ball and Nesterov iterations with gradient-difference
 * (Hessian) correction, plain gradient descent, and the parameter
 * validators that certify linear convergence.
 *
 * Both momentum schemes share the extrapolation
 *
 *     y_k     = x_k + alpha (x_k - x_{k-1}) - theta (g(x_k) - g(x_{k-1}))
 *
 * and differ in where the gradient step is taken:
 *
 *     Heavy Ball:  x_{k+1} = y_k - beta g(x_k)
 *     Nesterov:    x_{k+1} = y_k - beta g(y_k)
 *
 * Runs start from x_{-1} := x_0, so the first extrapolation is zero.
 */
#pragma once

#include "hessdamp/core.hpp"
#include "hessdamp/functions.hpp"

#include <cmath>
#include <string>
#include <vector>

namespace hessdamp {

struct HeavyBallParams {
  double alpha = 0.0;  // momentum
  double theta = 0.0;  // Hessian-correction weight
  double beta = 0.0;   // step size

  void validate() const {
    if (!(alpha >= 0.0)) throw InvalidInput("heavy ball: alpha must be >= 0");
    if (!(theta >= 0.0)) throw InvalidInput("heavy ball: theta must be >= 0");
    if (!(beta > 0.0)) throw InvalidInput("heavy ball: beta must be > 0");
  }
};

struct NesterovParams {
  double alpha = 0.0;
  double theta = 0.0;
  double beta = 0.0;
  // Used only by the certificate and the energy.
  double eta = 2.0;
  double epsilon = 0.0;  // 0 selects the midpoint of the admissible range

  void validate() const {
    if (!(alpha >= 0.0 && alpha <= 1.0)) throw InvalidInput("nesterov: alpha must lie in [0, 1]");
    if (!(theta >= 0.0)) throw InvalidInput("nesterov: theta must be >= 0");
    if (!(beta > 0.0)) throw InvalidInput("nesterov: beta must be > 0");
    if (!(eta > 1.0)) throw InvalidInput("nesterov: eta must be > 1");
    if (!(epsilon >= 0.0)) throw InvalidInput("nesterov: epsilon must be >= 0");
  }
};

struct HeavyBallCertificate {
  bool valid = false;
  bool region_satisfied = false;  // every parameter-region inequality holds
  double rho = kNaN;
  double sigma = kNaN;
  double contraction = kNaN;  // 1 - rho/sigma
  std::vector<std::string> violations;
};

struct NesterovCertificate {
  bool valid = false;
  double mu1 = kNaN;
  double mu2 = kNaN;
  double epsilon = kNaN;
  double rate = kNaN;  // mu1 (1 + epsilon)
  double momentum_bound = kNaN;
  std::vector<std::string> violations;
};

// ---------------------------------------------------------------------------
// Certificates
// ---------------------------------------------------------------------------

namespace detail {

inline const double kSqrt2 = std::sqrt(2.0);
inline const double kSqrt3 = std::sqrt(3.0);

}  // namespace detail

/// Linear-convergence certificate for the Heavy Ball iteration. Interval
/// ends follow the admissible region exactly: alpha in [0, sqrt2/2),
/// theta in [0, alpha/(L sqrt3)), beta > theta (sqrt2 - 1),
/// theta + beta in (0, (1 - 2 alpha^2)/L]. Never throws.
[[nodiscard]] inline HeavyBallCertificate validate_heavy_ball(const HeavyBallParams& params,
                                                              const FunctionMetadata& meta) {
  HeavyBallCertificate cert;
  if (!meta.has_gamma() || !meta.has_lipschitz()) {
    cert.violations.emplace_back("missing constants");
    return cert;
  }
  const double a = params.alpha;
  const double t = params.theta;
  const double b = params.beta;
  const double L = meta.lipschitz_grad;
  const double gamma = meta.gamma;
  const double s = t + b;
  auto& v = cert.violations;

  if (!(a >= 0.0)) v.emplace_back("alpha < 0");
  if (!(a < detail::kSqrt2 / 2.0)) v.emplace_back("alpha >= sqrt(2)/2");
  if (!(t >= 0.0)) v.emplace_back("theta < 0");
  // alpha = theta = 0 is gradient descent: the theta interval degenerates
  // but the correction term is absent.
  const bool plain_gd = a == 0.0 && t == 0.0;
  if (!plain_gd && !(t < a / (L * detail::kSqrt3))) v.emplace_back("theta >= alpha/(L*sqrt(3))");
  if (!(b > t * (detail::kSqrt2 - 1.0))) v.emplace_back("beta <= theta*(sqrt(2)-1)");
  if (!(s > 0.0)) v.emplace_back("theta+beta <= 0");
  if (!(s <= (1.0 - 2.0 * a * a) / L)) v.emplace_back("theta+beta > (1-2*alpha^2)/L");
  cert.region_satisfied = v.empty();

  const double denom = a * a - 3.0 * t * t * L * L;
  if (!plain_gd && !(denom > 0.0)) {
    v.emplace_back("alpha^2 - 3 theta^2 L^2 <= 0");
    return cert;
  }
  if (!(s > 0.0)) return cert;

  // At alpha = theta = 0 the alpha^2/(alpha^2 - 3 theta^2 L^2) terms are
  // taken as 0, their value on the alpha = 0 axis.
  const double ratio = plain_gd ? 0.0 : 12.0 * a * a / denom;
  const double ratio_b = plain_gd ? 0.0 : 12.0 * a * a * b * b / (denom * s);

  cert.rho = std::min(s / 2.0 - t * t / s, (1.0 - s * L - 2.0 * a * a) / (2.0 * s));
  cert.sigma = std::max((3.0 + ratio) / s, 2.0 * L / (gamma * gamma) + 3.0 * s + ratio_b);
  cert.contraction = 1.0 - cert.rho / cert.sigma;

  if (!(cert.rho > 0.0)) v.emplace_back("rho <= 0");
  if (!(cert.rho < cert.sigma)) v.emplace_back("rho >= sigma");
  cert.valid = v.empty();
  return cert;
}

/// mu1 = 1/(1 + beta(gamma - eta beta L^2)), mu2 = (1 - 1/eta)/(1 + beta(gamma - beta eta L^2)).
struct NesterovFactors {
  double mu1;
  double mu2;
};

[[nodiscard]] inline NesterovFactors nesterov_factors(double beta, double eta, double gamma,
                                                      double L) {
  const double d = 1.0 + beta * (gamma - eta * beta * L * L);
  return {1.0 / d, (1.0 - 1.0 / eta) / d};
}

/// Right-hand side of the momentum condition
/// alpha + theta L <= mu1 mu2 (1+eps) / (mu1 mu2 (1+eps) + mu1 + mu1/eps + mu2).
[[nodiscard]] inline double nesterov_momentum_bound(double mu1, double mu2, double eps) {
  const double num = mu1 * mu2 * (1.0 + eps);
  return num / (num + mu1 + mu1 / eps + mu2);
}

/// Linear-convergence certificate for the Nesterov iteration. Requires
/// eta > 1, 0 < beta < gamma/(eta L^2), eps in (0, 1/mu1 - 1) and the
/// momentum condition. epsilon = 0 in `params` selects the midpoint
/// (1/mu1 - 1)/2. Never throws.
[[nodiscard]] inline NesterovCertificate validate_nesterov(const NesterovParams& params,
                                                           const FunctionMetadata& meta) {
  NesterovCertificate cert;
  if (!meta.has_gamma() || !meta.has_lipschitz()) {
    cert.violations.emplace_back("missing constants");
    return cert;
  }
  auto& v = cert.violations;
  const double L = meta.lipschitz_grad;
  const double gamma = meta.gamma;
  if (!(params.alpha >= 0.0 && params.alpha <= 1.0)) v.emplace_back("alpha outside [0,1]");
  if (!(params.theta >= 0.0)) v.emplace_back("theta < 0");
  if (!(params.eta > 1.0)) {
    v.emplace_back("eta <= 1");
    return cert;
  }
  if (!(params.beta > 0.0)) v.emplace_back("beta <= 0");
  if (!(params.beta < gamma / (params.eta * L * L))) v.emplace_back("beta upper bound");

  const auto [mu1, mu2] = nesterov_factors(params.beta, params.eta, gamma, L);
  cert.mu1 = mu1;
  cert.mu2 = mu2;
  const double eps_max = 1.0 / mu1 - 1.0;
  cert.epsilon = params.epsilon > 0.0 ? params.epsilon : 0.5 * eps_max;
  if (!(cert.epsilon > 0.0 && cert.epsilon < eps_max)) v.emplace_back("epsilon range");
  cert.rate = mu1 * (1.0 + cert.epsilon);
  cert.momentum_bound = nesterov_momentum_bound(mu1, mu2, cert.epsilon);
  if (!(params.alpha + params.theta * L <= cert.momentum_bound)) v.emplace_back("momentum bound");
  cert.valid = v.empty();
  return cert;
}

// ---------------------------------------------------------------------------
// Iterations
// ---------------------------------------------------------------------------

namespace detail {

inline constexpr double kDivergenceLimit = 1e12;

enum class Scheme { HeavyBall, Nesterov };

/// Energy evaluated on each record; receives (x_k, x_{k-1}, g(x_{k-1}), h(x_k)).
using EnergyFn =
    std::function<double(const Vector&, const Vector&, const Vector&, double)>;

inline IterationRecord make_record(std::size_t k, const Vector& x, double fx, const Vector& g,
                                   double step_norm, const FunctionMetadata& meta,
                                   double energy) {
  IterationRecord r;
  r.k = k;
  r.x = x;
  r.f_gap = meta.min_value ? fx - *meta.min_value : fx;
  r.grad_norm = g.stableNorm();
  r.step_norm = step_norm;
  r.energy = energy;
  return r;
}

inline bool exploded(const Vector& x, double fx) {
  return !std::isfinite(fx) || !x.allFinite() || std::abs(fx) > kDivergenceLimit ||
         x.norm() > kDivergenceLimit;
}

inline IterationTrace run_momentum(Scheme scheme, const TestProblem& problem, double alpha,
                                   double theta, double beta, const Vector& init,
                                   const StoppingRule& stop, const EnergyFn& energy) {
  const Objective& obj = problem.objective;
  obj.require_dim(init, "initial point");
  stop.validate();

  IterationTrace trace;
  trace.gap_is_relative = problem.metadata.min_value.has_value();

  Vector x = init;
  Vector x_prev = init;
  double fx = obj.eval(x);
  Vector g = obj.grad(x);
  Vector g_prev = g;
  if (exploded(x, fx) || !g.allFinite()) {
    trace.status = RunStatus::Diverged;
    trace.message = "non-finite objective or gradient at the initial point";
    return trace;
  }
  trace.records.push_back(
      make_record(0, x, fx, g, 0.0, problem.metadata, energy(x, x_prev, g_prev, fx)));
  if (trace.records.back().grad_norm <= stop.grad_tol) {
    trace.status = RunStatus::Converged;
    return trace;
  }

  for (std::size_t k = 1; k <= stop.max_iters; ++k) {
    const Vector y = x + alpha * (x - x_prev) - theta * (g - g_prev);
    Vector x_next;
    if (scheme == Scheme::HeavyBall) {
      x_next = y - beta * g;
    } else {
      const Vector gy = obj.grad(y);
      if (!gy.allFinite()) {
        trace.status = RunStatus::Diverged;
        trace.message = "non-finite gradient at extrapolated point, step " + std::to_string(k);
        return trace;
      }
      x_next = y - beta * gy;
    }
    if (!x_next.allFinite() || x_next.norm() > kDivergenceLimit) {
      trace.status = RunStatus::Diverged;
      trace.message = "iterate exploded at step " + std::to_string(k);
      return trace;
    }
    const double f_next = obj.eval(x_next);
    const Vector g_next = obj.grad(x_next);
    if (exploded(x_next, f_next) || !g_next.allFinite()) {
      trace.status = RunStatus::Diverged;
      trace.message = "objective or gradient exploded at step " + std::to_string(k);
      return trace;
    }
    const double step = (x_next - x).norm();
    x_prev = std::move(x);
    g_prev = std::move(g);
    x = std::move(x_next);
    g = g_next;
    fx = f_next;
    trace.records.push_back(
        make_record(k, x, fx, g, step, problem.metadata, energy(x, x_prev, g_prev, fx)));

    if (trace.records.back().grad_norm <= stop.grad_tol) {
      trace.status = RunStatus::Converged;
      return trace;
    }
    if (stop.step_tol && step <= *stop.step_tol) {
      trace.status = RunStatus::StepTolerance;
      return trace;
    }
  }
  trace.status = RunStatus::MaxIterations;
  return trace;
}

}  // namespace detail

/// Heavy Ball energy h(x_k) - h* + alpha^2/(theta+beta) |x_k - x_{k-1}|^2
/// + theta^2/(theta+beta) |g(x_{k-1})|^2, NaN when h* is unknown.
[[nodiscard]] inline double heavy_ball_energy(const HeavyBallParams& p, const FunctionMetadata& meta,
                                              double fx, const Vector& x, const Vector& x_prev,
                                              const Vector& g_prev) {
  if (!meta.min_value) return kNaN;
  const double s = p.theta + p.beta;
  return fx - *meta.min_value + p.alpha * p.alpha / s * (x - x_prev).squaredNorm() +
         p.theta * p.theta / s * g_prev.squaredNorm();
}

/// Nesterov energy |x_k - xbar|^2 + mu2 (1 - (alpha + theta L)) |x_k - x_{k-1}|^2,
/// NaN unless xbar, gamma and L are known.
[[nodiscard]] inline double nesterov_energy(const NesterovParams& p, const FunctionMetadata& meta,
                                            const Vector& x, const Vector& x_prev) {
  if (!meta.minimizer || !meta.has_gamma() || !meta.has_lipschitz()) return kNaN;
  const double L = meta.lipschitz_grad;
  const double mu2 = nesterov_factors(p.beta, p.eta, meta.gamma, L).mu2;
  return (x - *meta.minimizer).squaredNorm() +
         mu2 * (1.0 - (p.alpha + p.theta * L)) * (x - x_prev).squaredNorm();
}

[[nodiscard]] inline IterationTrace heavy_ball_hessian(const TestProblem& problem,
                                                       const HeavyBallParams& params,
                                                       const Vector& init,
                                                       const StoppingRule& stop) {
  params.validate();
  const auto& meta = problem.metadata;
  return detail::run_momentum(
      detail::Scheme::HeavyBall, problem, params.alpha, params.theta, params.beta, init, stop,
      [&](const Vector& x, const Vector& xp, const Vector& gp, double fx) {
        return heavy_ball_energy(params, meta, fx, x, xp, gp);
      });
}

/// Classical Heavy Ball: the Hessian-corrected iteration with theta = 0.
[[nodiscard]] inline IterationTrace heavy_ball(const TestProblem& problem, HeavyBallParams params,
                                               const Vector& init, const StoppingRule& stop) {
  params.theta = 0.0;
  return heavy_ball_hessian(problem, params, init, stop);
}

[[nodiscard]] inline IterationTrace nesterov_hessian(const TestProblem& problem,
                                                     const NesterovParams& params,
                                                     const Vector& init,
                                                     const StoppingRule& stop) {
  params.validate();
  const auto& meta = problem.metadata;
  return detail::run_momentum(
      detail::Scheme::Nesterov, problem, params.alpha, params.theta, params.beta, init, stop,
      [&](const Vector& x, const Vector& xp, const Vector&, double) {
        return nesterov_energy(params, meta, x, xp);
      });
}

[[nodiscard]] inline IterationTrace nesterov(const TestProblem& problem, NesterovParams params,
                                             const Vector& init, const StoppingRule& stop) {
  params.theta = 0.0;
  return nesterov_hessian(problem, params, init, stop);
}

/// x_{k+1} = x_k - beta g(x_k). Energy is h(x_k) - h* when h* is known.
[[nodiscard]] inline IterationTrace gradient_descent(const TestProblem& problem, double beta,
                                                     const Vector& init,
                                                     const StoppingRule& stop) {
  if (!(beta > 0.0)) throw InvalidInput("gradient descent: beta must be > 0");
  const Objective& obj = problem.objective;
  const auto& meta = problem.metadata;
  obj.require_dim(init, "initial point");
  stop.validate();

  auto energy = [&](double fx) { return meta.min_value ? fx - *meta.min_value : kNaN; };

  IterationTrace trace;
  trace.gap_is_relative = meta.min_value.has_value();
  Vector x = init;
  double fx = obj.eval(x);
  Vector g = obj.grad(x);
  if (detail::exploded(x, fx) || !g.allFinite()) {
    trace.status = RunStatus::Diverged;
    trace.message = "non-finite objective or gradient at the initial point";
    return trace;
  }
  trace.records.push_back(detail::make_record(0, x, fx, g, 0.0, meta, energy(fx)));
  if (trace.records.back().grad_norm <= stop.grad_tol) {
    trace.status = RunStatus::Converged;
    return trace;
  }
  for (std::size_t k = 1; k <= stop.max_iters; ++k) {
    Vector x_next = x - beta * g;
    const double f_next = x_next.allFinite() ? obj.eval(x_next) : kNaN;
    if (detail::exploded(x_next, f_next)) {
      trace.status = RunStatus::Diverged;
      trace.message = "iterate exploded at step " + std::to_string(k);
      return trace;
    }
    Vector g_next = obj.grad(x_next);
    if (!g_next.allFinite()) {
      trace.status = RunStatus::Diverged;
      trace.message = "non-finite gradient at step " + std::to_string(k);
      return trace;
    }
    const double step = (x_next - x).norm();
    x = std::move(x_next);
    g = std::move(g_next);
    fx = f_next;
    trace.records.push_back(detail::make_record(k, x, fx, g, step, meta, energy(fx)));
    if (trace.records.back().grad_norm <= stop.grad_tol) {
      trace.status = RunStatus::Converged;
      return trace;
    }
    if (stop.step_tol && step <= *stop.step_tol) {
      trace.status = RunStatus::StepTolerance;
      return trace;
    }
  }
  trace.status = RunStatus::MaxIterations;
  return trace;
}

/// Number of sign changes of coordinate `coord` of (x_k - xbar) along a
/// trace; exact zeros are skipped.
[[nodiscard]] inline std::size_t sign_changes(const IterationTrace& trace, const Vector& xbar,
                                              Eigen::Index coord = 0) {
  std::size_t changes = 0;
  int last = 0;
  for (const auto& r : trace.records) {
    const double d = r.x[coord] - xbar[coord];
    const int s = (d > 0.0) - (d < 0.0);
    if (s == 0) continue;
    if (last != 0 && s != last) ++changes;
    last = s;
  }
  return changes;
}

}  // namespace hessdamp
