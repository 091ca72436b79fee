/**
 * @file core.hpp
 * @brief Shared domain types: objectives, metadata, iteration records,
 * stopping rules and the error taxonomy.
 */
#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace hessdamp {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

inline constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

// ---------------------------------------------------------------------------
// Errors
// ---------------------------------------------------------------------------

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Contract violation on the caller's side (bad dimension, bad parameter).
class InvalidInput : public Error {
 public:
  using Error::Error;
};

/// Gradient or Hessian requested at a kink of a nonsmooth objective.
class NonDifferentiablePoint : public Error {
 public:
  using Error::Error;
};

/// Objective evaluated outside the set on which it is defined.
class DomainViolation : public Error {
 public:
  using Error::Error;
};

/// A run produced non-finite or exploding values.
class NumericalDivergence : public Error {
 public:
  using Error::Error;
};

/// A sampling estimator had no usable samples.
class InsufficientSamples : public Error {
 public:
  using Error::Error;
};

// ---------------------------------------------------------------------------
// Objective
// ---------------------------------------------------------------------------

using ScalarMap = std::function<double(const Vector&)>;
using VectorMap = std::function<Vector(const Vector&)>;
using HvpMap = std::function<Vector(const Vector&, const Vector&)>;

/// A scalar function h: R^n -> R with gradient and an optional
/// Hessian-vector product. All callables must be pure.
struct Objective {
  std::size_t dim = 0;
  ScalarMap eval;
  VectorMap grad;
  HvpMap hvp;  // empty when no exact Hessian is available

  [[nodiscard]] bool has_hvp() const { return static_cast<bool>(hvp); }

  void require_dim(const Vector& x, const char* what = "point") const {
    if (static_cast<std::size_t>(x.size()) != dim) {
      throw InvalidInput(std::string(what) + " has length " +
                         std::to_string(x.size()) + ", objective dimension is " +
                         std::to_string(dim));
    }
  }
};

/// Known structural constants of an objective. Zero means "unknown".
struct FunctionMetadata {
  double gamma = 0.0;           // strong-quasiconvexity modulus
  double lipschitz_grad = 0.0;  // Lipschitz constant of the gradient
  std::optional<Vector> minimizer;
  std::optional<double> min_value;

  [[nodiscard]] bool has_gamma() const { return gamma > 0.0; }
  [[nodiscard]] bool has_lipschitz() const { return lipschitz_grad > 0.0; }
};

// ---------------------------------------------------------------------------
// Traces
// ---------------------------------------------------------------------------

struct IterationRecord {
  std::size_t k = 0;
  Vector x;
  double f_gap = kNaN;  // h(x_k) - h* when h* is known, else h(x_k)
  double grad_norm = 0.0;
  double step_norm = 0.0;
  double energy = kNaN;
};

enum class RunStatus {
  Converged,      // gradient tolerance met
  StepTolerance,  // step tolerance met
  MaxIterations,
  Diverged,
};

[[nodiscard]] inline const char* to_string(RunStatus s) {
  switch (s) {
    case RunStatus::Converged:
      return "converged";
    case RunStatus::StepTolerance:
      return "step_tolerance";
    case RunStatus::MaxIterations:
      return "max_iterations";
    case RunStatus::Diverged:
      return "diverged";
  }
  return "unknown";
}

/// Records of a discrete run. On divergence the trace holds every finite
/// record before the failure and `message` names the cause.
struct IterationTrace {
  std::vector<IterationRecord> records;
  RunStatus status = RunStatus::MaxIterations;
  std::string message;
  bool gap_is_relative = false;  // f_gap holds h - h* rather than raw h

  [[nodiscard]] bool diverged() const { return status == RunStatus::Diverged; }
  [[nodiscard]] const IterationRecord& back() const { return records.back(); }
  [[nodiscard]] std::size_t iterations() const {
    return records.empty() ? 0 : records.back().k;
  }
};

struct StoppingRule {
  double grad_tol = 1e-10;
  std::size_t max_iters = 1000;
  std::optional<double> step_tol;

  void validate() const {
    if (!(grad_tol > 0.0)) throw InvalidInput("grad_tol must be positive");
    if (max_iters < 1) throw InvalidInput("max_iters must be at least 1");
    if (step_tol && !(*step_tol > 0.0)) throw InvalidInput("step_tol must be positive");
  }
};

// ---------------------------------------------------------------------------
// Finite-difference oracles
// ---------------------------------------------------------------------------

/// Central differences: component i is (h(x + s e_i) - h(x - s e_i)) / 2s.
[[nodiscard]] inline Vector finite_diff_gradient(const Objective& obj, const Vector& x,
                                                 double h_step) {
  obj.require_dim(x);
  if (!(h_step > 0.0)) throw InvalidInput("finite-difference step must be positive");
  Vector g(x.size());
  Vector probe = x;
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    probe[i] = x[i] + h_step;
    const double up = obj.eval(probe);
    probe[i] = x[i] - h_step;
    const double down = obj.eval(probe);
    probe[i] = x[i];
    g[i] = (up - down) / (2.0 * h_step);
  }
  return g;
}

/// Directional central difference of the gradient along v, with
/// eps = sqrt(machine eps) * (1 + |x|) / |v|.
[[nodiscard]] inline Vector finite_diff_hvp(const Objective& obj, const Vector& x,
                                            const Vector& v) {
  obj.require_dim(x);
  obj.require_dim(v, "direction");
  const double vn = v.norm();
  if (!(vn > 0.0)) throw InvalidInput("finite-difference HVP needs a nonzero direction");
  const double eps =
      std::sqrt(std::numeric_limits<double>::epsilon()) * (1.0 + x.norm()) / vn;
  return (obj.grad(x + eps * v) - obj.grad(x - eps * v)) / (2.0 * eps);
}

/// Exact HVP when the objective provides one, finite differences otherwise.
/// A zero direction yields the zero vector.
[[nodiscard]] inline Vector hessian_vector(const Objective& obj, const Vector& x,
                                           const Vector& v) {
  if (v.isZero(0.0)) return Vector::Zero(x.size());
  if (obj.has_hvp()) return obj.hvp(x, v);
  return finite_diff_hvp(obj, x, v);
}

[[nodiscard]] inline bool all_finite(const Vector& v) { return v.allFinite(); }

}  // namespace hessdamp
