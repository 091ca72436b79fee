/**
 * @file continuous.hpp
 * @brief Fixed-step integration of the inertial system with Hessian-driven
 * damping
 *
 *     x'' + alpha x' + beta Hess h(x) x' + grad h(x) = 0,
 *
 * written as x' = v, v' = -alpha v - beta Hess h(x) v - grad h(x), plus the
 * exponential-decay and weighted-integral diagnostics for its trajectories.
 */
#pragma once

#include "hessdamp/core.hpp"
#include "hessdamp/functions.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

namespace hessdamp {

struct ContinuousParams {
  double alpha = 1.0;  // viscous damping
  double beta = 0.0;   // Hessian-driven damping
  double kappa = 1.0;  // quasar-type modulus of the objective
  double lambda = 2.0 / 3.0;  // 2 alpha / (kappa + 2)
  double t_end = 1.0;
  double dt = 1e-3;
  Vector x0;
  Vector v0;

  /// Builds a parameter set with lambda derived from alpha and kappa.
  [[nodiscard]] static ContinuousParams make(double alpha, double beta, double kappa,
                                             double t_end, double dt, Vector x0, Vector v0) {
    ContinuousParams p;
    p.alpha = alpha;
    p.beta = beta;
    p.kappa = kappa;
    p.lambda = 2.0 * alpha / (kappa + 2.0);
    p.t_end = t_end;
    p.dt = dt;
    p.x0 = std::move(x0);
    p.v0 = std::move(v0);
    return p;
  }

  void validate() const {
    if (!(alpha > 0.0)) throw InvalidInput("continuous: alpha must be > 0");
    if (!(beta >= 0.0)) throw InvalidInput("continuous: beta must be >= 0");
    if (!(kappa > 0.0)) throw InvalidInput("continuous: kappa must be > 0");
    if (lambda != 2.0 * alpha / (kappa + 2.0)) {
      throw InvalidInput("continuous: lambda must equal 2 alpha / (kappa + 2)");
    }
    if (!(dt > 0.0)) throw InvalidInput("continuous: dt must be > 0");
    if (!(t_end >= dt)) throw InvalidInput("continuous: t_end must be >= dt");
    if (x0.size() != v0.size()) throw InvalidInput("continuous: x0 and v0 differ in length");
  }
};

enum class Integrator { Euler, RK4 };

[[nodiscard]] inline const char* to_string(Integrator m) {
  return m == Integrator::Euler ? "euler" : "rk4";
}

struct TrajectoryRecord {
  double t = 0.0;
  Vector x;
  Vector v;
  double f_gap = kNaN;
  double grad_norm = 0.0;
  double energy = kNaN;
};

struct TrajectoryTrace {
  std::vector<TrajectoryRecord> records;
  RunStatus status = RunStatus::MaxIterations;  // Diverged on failure
  std::string message;

  [[nodiscard]] bool diverged() const { return status == RunStatus::Diverged; }
};

/// E = h(x) - h* + 1/2 |lambda (x - xbar) + v + beta grad h(x)|^2.
[[nodiscard]] inline double continuous_energy(const ContinuousParams& p,
                                              const FunctionMetadata& meta, double fx,
                                              const Vector& x, const Vector& v, const Vector& g) {
  if (!meta.minimizer || !meta.min_value) return kNaN;
  const Vector w = p.lambda * (x - *meta.minimizer) + v + p.beta * g;
  return fx - *meta.min_value + 0.5 * w.squaredNorm();
}

namespace detail {

struct PhaseState {
  Vector x;
  Vector v;
};

inline PhaseState damped_rhs(const Objective& obj, const ContinuousParams& p,
                             const PhaseState& s) {
  Vector accel = -p.alpha * s.v - obj.grad(s.x);
  if (p.beta != 0.0) accel -= p.beta * hessian_vector(obj, s.x, s.v);
  return {s.v, std::move(accel)};
}

}  // namespace detail

/// Integrates on the grid t_i = i dt, i = 0..N with N = round(t_end/dt),
/// recording every step. Uses the exact HVP when available, finite
/// differences of the gradient otherwise.
[[nodiscard]] inline TrajectoryTrace integrate(const TestProblem& problem,
                                               const ContinuousParams& params,
                                               Integrator method = Integrator::RK4) {
  params.validate();
  const Objective& obj = problem.objective;
  obj.require_dim(params.x0, "x0");
  const auto& meta = problem.metadata;

  const auto steps = static_cast<std::size_t>(std::llround(params.t_end / params.dt));
  const double dt = params.dt;

  TrajectoryTrace trace;
  trace.records.reserve(steps + 1);
  detail::PhaseState s{params.x0, params.v0};

  auto record = [&](std::size_t i) -> bool {
    const double fx = obj.eval(s.x);
    const Vector g = obj.grad(s.x);
    if (!std::isfinite(fx) || !g.allFinite() || !s.x.allFinite() || !s.v.allFinite()) {
      trace.status = RunStatus::Diverged;
      trace.message = "non-finite state at t = " + std::to_string(static_cast<double>(i) * dt);
      return false;
    }
    TrajectoryRecord r;
    r.t = static_cast<double>(i) * dt;
    r.x = s.x;
    r.v = s.v;
    r.f_gap = meta.min_value ? fx - *meta.min_value : fx;
    r.grad_norm = g.norm();
    r.energy = continuous_energy(params, meta, fx, s.x, s.v, g);
    trace.records.push_back(std::move(r));
    return true;
  };

  if (!record(0)) return trace;
  for (std::size_t i = 1; i <= steps; ++i) {
    if (method == Integrator::Euler) {
      const auto k1 = detail::damped_rhs(obj, params, s);
      s.x += dt * k1.x;
      s.v += dt * k1.v;
    } else {
      const auto k1 = detail::damped_rhs(obj, params, s);
      const auto k2 =
          detail::damped_rhs(obj, params, {s.x + 0.5 * dt * k1.x, s.v + 0.5 * dt * k1.v});
      const auto k3 =
          detail::damped_rhs(obj, params, {s.x + 0.5 * dt * k2.x, s.v + 0.5 * dt * k2.v});
      const auto k4 = detail::damped_rhs(obj, params, {s.x + dt * k3.x, s.v + dt * k3.v});
      s.x += dt / 6.0 * (k1.x + 2.0 * k2.x + 2.0 * k3.x + k4.x);
      s.v += dt / 6.0 * (k1.v + 2.0 * k2.v + 2.0 * k3.v + k4.v);
    }
    if (!record(i)) return trace;
  }
  trace.status = RunStatus::Converged;
  return trace;
}

// ---------------------------------------------------------------------------
// Exponential decay
// ---------------------------------------------------------------------------

/// Hypotheses of the exponential-decay result:
/// 0 < alpha <= sqrt(gamma (kappa+2)^2 / (8 kappa)), 0 < beta <= (kappa+2)/(kappa alpha).
struct ContinuousCertificate {
  bool valid = false;
  double alpha_max = kNaN;
  double beta_max = kNaN;
  double rate = kNaN;  // lambda kappa / 2
  std::vector<std::string> violations;
};

[[nodiscard]] inline ContinuousCertificate validate_continuous(const ContinuousParams& p,
                                                               const FunctionMetadata& meta) {
  ContinuousCertificate c;
  if (!meta.has_gamma() || !meta.minimizer || !meta.min_value) {
    c.violations.emplace_back("missing constants");
    return c;
  }
  if (!(p.kappa > 0.0)) {
    c.violations.emplace_back("kappa <= 0");
    return c;
  }
  c.alpha_max = std::sqrt(meta.gamma * (p.kappa + 2.0) * (p.kappa + 2.0) / (8.0 * p.kappa));
  if (!(p.alpha > 0.0)) c.violations.emplace_back("alpha <= 0");
  if (!(p.alpha <= c.alpha_max)) c.violations.emplace_back("alpha above bound");
  if (p.alpha > 0.0) {
    c.beta_max = (p.kappa + 2.0) / (p.kappa * p.alpha);
    if (!(p.beta > 0.0)) c.violations.emplace_back("beta <= 0");
    if (!(p.beta <= c.beta_max)) c.violations.emplace_back("beta above bound");
  }
  c.rate = p.lambda * p.kappa / 2.0;
  c.valid = c.violations.empty();
  return c;
}

struct DecayReport {
  double C = kNaN;       // h(x0) - h* + 1/2 |lambda (x0 - xbar) + v0 + beta g(x0)|^2
  double rate = kNaN;    // lambda kappa / 2
  double slack = kNaN;   // absolute slack used for pass/fail
  double max_upper_excess = kNaN;  // max_t (h - h*) e^{rate t} - C
  double min_lower_margin = kNaN;  // min_t h - h* - gamma/4 |x - xbar|^2
  double max_energy_growth = kNaN;  // max_i (W_{i+1} - W_i)/W_i, W = E e^{rate t}
  bool upper_ok = false;
  bool lower_ok = false;
  bool passed = false;
};

/// Checks gamma/4 |x(t) - xbar|^2 <= h(x(t)) - h* <= C e^{-lambda kappa t / 2}
/// along a trajectory. `relative_slack` scales with C.
[[nodiscard]] inline DecayReport check_energy_decay(const TrajectoryTrace& trace,
                                                   const ContinuousParams& params,
                                                   const FunctionMetadata& meta,
                                                   double relative_slack = 1e-6) {
  if (!meta.has_gamma() || !meta.minimizer || !meta.min_value) {
    throw InvalidInput("check_energy_decay needs gamma, minimizer and minimum value");
  }
  if (trace.records.empty()) throw InvalidInput("check_energy_decay: empty trajectory");
  const auto& xbar = *meta.minimizer;

  DecayReport rep;
  // The first record sits at (x0, v0), where the energy equals C.
  const auto& first = trace.records.front();
  if (first.t != 0.0 || !std::isfinite(first.energy)) {
    throw InvalidInput("check_energy_decay: trajectory must start at t = 0 with a finite energy");
  }
  rep.C = first.energy;
  rep.rate = params.lambda * params.kappa / 2.0;
  rep.slack = relative_slack * std::max(rep.C, 1e-300);
  rep.max_upper_excess = -std::numeric_limits<double>::infinity();
  rep.min_lower_margin = std::numeric_limits<double>::infinity();
  rep.max_energy_growth = -std::numeric_limits<double>::infinity();

  double prev_w = kNaN;
  for (const auto& r : trace.records) {
    const double gap = r.f_gap;
    const double weight = std::exp(rep.rate * r.t);
    rep.max_upper_excess = std::max(rep.max_upper_excess, gap * weight - rep.C);
    rep.min_lower_margin =
        std::min(rep.min_lower_margin, gap - meta.gamma / 4.0 * (r.x - xbar).squaredNorm());
    const double w = r.energy * weight;
    if (std::isfinite(prev_w) && prev_w > 0.0) {
      rep.max_energy_growth = std::max(rep.max_energy_growth, (w - prev_w) / prev_w);
    }
    prev_w = w;
  }
  rep.upper_ok = rep.max_upper_excess <= rep.slack;
  rep.lower_ok = rep.min_lower_margin >= -rep.slack;
  rep.passed = rep.upper_ok && rep.lower_ok;
  return rep;
}

// ---------------------------------------------------------------------------
// Weighted integrals
// ---------------------------------------------------------------------------

/// Which row of the weighted-integral table applies for a given kappa.
/// At kappa = 2 the first two rows coincide; it is grouped with kappa > 2.
enum class KappaRegime { AboveTwo, OneToTwo, BelowOne };

[[nodiscard]] inline KappaRegime kappa_regime(double kappa) {
  if (kappa >= 2.0) return KappaRegime::AboveTwo;
  if (kappa >= 1.0) return KappaRegime::OneToTwo;
  return KappaRegime::BelowOne;
}

[[nodiscard]] inline const char* to_string(KappaRegime r) {
  switch (r) {
    case KappaRegime::AboveTwo:
      return "(2,inf)";
    case KappaRegime::OneToTwo:
      return "[1,2)";
    case KappaRegime::BelowOne:
      return "(0,1)";
  }
  return "unknown";
}

/// Normalized weighted integrals along a trajectory. For regime
///   (2,inf): N(t) = int_0^t e^{lambda s} q(s) ds
///   [1,2):   N(t) = e^{-lambda t} int_0^t e^{lambda s} q(s) ds / e^{-lambda kappa t/2}
///   (0,1):   N(t) = e^{-lambda kappa t} int_0^t e^{lambda kappa s} q(s) ds / e^{-lambda kappa t/2}
/// with q = |grad h|^2 (gradient series) or |x'|^2 (velocity series). Each
/// series should stay bounded by a constant.
struct IntegralReport {
  KappaRegime regime = KappaRegime::BelowOne;
  double lambda = kNaN;
  double kappa = kNaN;
  std::vector<double> t;
  std::vector<double> grad_series;
  std::vector<double> velocity_series;
  double grad_bound = 0.0;      // fitted constant: max of grad_series
  double velocity_bound = 0.0;  // fitted constant: max of velocity_series

  /// Ratio of the post-burn-in maximum to the running maximum at the
  /// burn-in time. Bounded series settle at <= 1 for late enough burn-in.
  [[nodiscard]] double growth_after(double burn_in, bool velocity) const {
    const auto& s = velocity ? velocity_series : grad_series;
    double before = 0.0;
    double after = 0.0;
    for (std::size_t i = 0; i < s.size(); ++i) {
      double& slot = t[i] <= burn_in ? before : after;
      slot = std::max(slot, s[i]);
    }
    if (before <= 0.0) return after <= 0.0 ? 0.0 : std::numeric_limits<double>::infinity();
    return after / before;
  }
};

[[nodiscard]] inline IntegralReport weighted_integrals(const TrajectoryTrace& trace,
                                                         const ContinuousParams& params) {
  if (trace.records.size() < 2) {
    throw InvalidInput("weighted_integrals needs at least two trajectory records");
  }
  IntegralReport rep;
  rep.regime = kappa_regime(params.kappa);
  rep.lambda = params.lambda;
  rep.kappa = params.kappa;
  const double decay = params.lambda * params.kappa / 2.0;
  // Exponent a of the weight e^{a s}; the normalizer is e^{-a t} for the
  // decaying rows and 1 for the first row.
  const double a = rep.regime == KappaRegime::BelowOne ? params.lambda * params.kappa
                                                       : params.lambda;

  const std::size_t n = trace.records.size();
  rep.t.resize(n);
  rep.grad_series.resize(n);
  rep.velocity_series.resize(n);

  // Trapezoid on the damped integral J(t) = e^{-a t} int_0^t e^{a s} q ds:
  // J_{i+1} = e^{-a h} J_i + h/2 (e^{-a h} q_i + q_{i+1}).
  double jg = 0.0;
  double jv = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const auto& r = trace.records[i];
    const double qg = r.grad_norm * r.grad_norm;
    const double qv = r.v.squaredNorm();
    if (i > 0) {
      const auto& p = trace.records[i - 1];
      const double h = r.t - p.t;
      const double damp = std::exp(-a * h);
      jg = damp * jg + 0.5 * h * (damp * p.grad_norm * p.grad_norm + qg);
      jv = damp * jv + 0.5 * h * (damp * p.v.squaredNorm() + qv);
    }
    rep.t[i] = r.t;
    const double scale = rep.regime == KappaRegime::AboveTwo ? std::exp(a * r.t)
                                                             : std::exp(decay * r.t);
    rep.grad_series[i] = jg * scale;
    rep.velocity_series[i] = jv * scale;
  }
  rep.grad_bound = *std::max_element(rep.grad_series.begin(), rep.grad_series.end());
  rep.velocity_bound = *std::max_element(rep.velocity_series.begin(), rep.velocity_series.end());
  return rep;
}

}  // namespace hessdamp
