/**
 * @file functions.hpp
 * @brief Strongly quasiconvex test objectives and the combinators that
 * preserve strong quasiconvexity (powers of the norm, quadratic ratios,
 * linear composition, pointwise max).
 */
#pragma once

#include "hessdamp/core.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include <algorithm>
#include <cmath>
#include <memory>
#include <string>
#include <utility>

namespace hessdamp {

struct Box {
  Vector lower;
  Vector upper;

  [[nodiscard]] bool contains(const Vector& x) const {
    return x.size() == lower.size() && (x.array() >= lower.array()).all() &&
           (x.array() <= upper.array()).all();
  }

  [[nodiscard]] static Box cube(std::size_t n, double half_width) {
    return {Vector::Constant(static_cast<Eigen::Index>(n), -half_width),
            Vector::Constant(static_cast<Eigen::Index>(n), half_width)};
  }
};

struct TestProblem {
  std::string name;
  Objective objective;
  FunctionMetadata metadata;
  Box test_box;
  Vector default_init;

  /// True when the gradient may fail to exist on a thin set (e.g. the tie
  /// set of a pointwise max). `kink_distance` then measures closeness to
  /// that set; smooth-only checks skip points where it is below 1e-8.
  bool nonsmooth = false;
  ScalarMap kink_distance;

  [[nodiscard]] std::size_t dim() const { return objective.dim; }

  [[nodiscard]] bool near_kink(const Vector& x, double tol = 1e-8) const {
    return nonsmooth && kink_distance && kink_distance(x) < tol;
  }
};

// ---------------------------------------------------------------------------
// Experiment functions
// ---------------------------------------------------------------------------

/// h(x) = x^2 + 2 sin^2(x): nonconvex, strongly quasiconvex with gamma = 1/2,
/// gradient 6-Lipschitz, unique minimizer 0.
[[nodiscard]] inline TestProblem example1() {
  TestProblem p;
  p.name = "example1";
  p.objective.dim = 1;
  p.objective.eval = [](const Vector& x) {
    const double s = std::sin(x[0]);
    return x[0] * x[0] + 2.0 * s * s;
  };
  p.objective.grad = [](const Vector& x) {
    Vector g(1);
    g[0] = 2.0 * x[0] + 2.0 * std::sin(2.0 * x[0]);
    return g;
  };
  p.objective.hvp = [](const Vector& x, const Vector& v) {
    Vector r(1);
    r[0] = (2.0 + 4.0 * std::cos(2.0 * x[0])) * v[0];
    return r;
  };
  p.metadata.gamma = 0.5;
  p.metadata.lipschitz_grad = 6.0;
  p.metadata.minimizer = Vector::Zero(1);
  p.metadata.min_value = 0.0;
  p.test_box = Box::cube(1, 5.0);
  p.default_init = Vector::Constant(1, 3.0);
  return p;
}

/// h(x, y) = x^2 + a y^2 - 1/(x^2 + a y^2 + b) + c. The moduli are not known
/// in closed form, so gamma and L stay 0 unless the caller supplies them.
[[nodiscard]] inline TestProblem example2(double a, double b, double c) {
  if (!(a > 0.0) || !(b > 0.0) || !(c > 0.0)) {
    throw InvalidInput("example2 requires a, b, c > 0");
  }
  TestProblem p;
  p.name = "example2";
  p.objective.dim = 2;
  p.objective.eval = [a, b, c](const Vector& z) {
    const double q = z[0] * z[0] + a * z[1] * z[1];
    return q - 1.0 / (q + b) + c;
  };
  p.objective.grad = [a, b](const Vector& z) {
    const double s = z[0] * z[0] + a * z[1] * z[1] + b;
    const double w = 1.0 + 1.0 / (s * s);
    Vector g(2);
    g[0] = 2.0 * z[0] * w;
    g[1] = 2.0 * a * z[1] * w;
    return g;
  };
  // H = 2(1 + 1/s^2) D - (8/s^3) (Dz)(Dz)^T with D = diag(1, a).
  p.objective.hvp = [a, b](const Vector& z, const Vector& v) {
    const double s = z[0] * z[0] + a * z[1] * z[1] + b;
    const double w = 1.0 + 1.0 / (s * s);
    const double dz0 = z[0];
    const double dz1 = a * z[1];
    const double proj = dz0 * v[0] + dz1 * v[1];
    const double c3 = 8.0 / (s * s * s);
    Vector r(2);
    r[0] = 2.0 * w * v[0] - c3 * dz0 * proj;
    r[1] = 2.0 * w * a * v[1] - c3 * dz1 * proj;
    return r;
  };
  p.metadata.minimizer = Vector::Zero(2);
  p.metadata.min_value = c - 1.0 / b;
  p.test_box = Box::cube(2, 4.0);
  p.default_init = Vector::Constant(2, 3.0);
  return p;
}

// ---------------------------------------------------------------------------
// Constructions
// ---------------------------------------------------------------------------

/// h(x) = |x|^alpha with 0 < alpha < 1. Strongly quasiconvex on bounded
/// convex sets with a set-dependent modulus, so gamma is left unknown.
/// Derivatives are refused inside a ball of radius 1e-12 around the kink.
[[nodiscard]] inline TestProblem norm_power(double alpha, std::size_t n) {
  if (!(alpha > 0.0 && alpha < 1.0)) throw InvalidInput("norm_power requires 0 < alpha < 1");
  if (n == 0) throw InvalidInput("norm_power requires n >= 1");
  constexpr double kGuard = 1e-12;
  TestProblem p;
  p.name = "norm_power";
  p.objective.dim = n;
  p.objective.eval = [alpha](const Vector& x) { return std::pow(x.norm(), alpha); };
  p.objective.grad = [alpha](const Vector& x) -> Vector {
    const double r = x.norm();
    if (r < kGuard) throw NonDifferentiablePoint("norm_power gradient undefined at 0");
    return alpha * std::pow(r, alpha - 2.0) * x;
  };
  // Hessian: alpha r^(alpha-2) (I + (alpha-2) x x^T / r^2).
  p.objective.hvp = [alpha](const Vector& x, const Vector& v) -> Vector {
    const double r = x.norm();
    if (r < kGuard) throw NonDifferentiablePoint("norm_power Hessian undefined at 0");
    const double scale = alpha * std::pow(r, alpha - 2.0);
    return scale * (v + (alpha - 2.0) * x * (x.dot(v) / (r * r)));
  };
  p.metadata.minimizer = Vector::Zero(static_cast<Eigen::Index>(n));
  p.metadata.min_value = 0.0;
  p.test_box = Box::cube(n, 2.0);
  p.default_init = Vector::Constant(static_cast<Eigen::Index>(n), 1.0);
  p.nonsmooth = true;
  p.kink_distance = [](const Vector& x) { return x.norm(); };
  return p;
}

/// Which sufficient condition the caller asserts for a quadratic ratio.
/// Only the matrix part of (b) and (c) can be checked; the sign of h on
/// the level set is the caller's responsibility.
enum class RatioCondition {
  ZeroDenominatorMatrix,     // B = 0
  NonnegativeNegSemidefinite,  // h >= 0 on K, B <= 0
  NonpositivePosSemidefinite,  // h <= 0 on K, B >= 0
};

struct QuadraticRatioSpec {
  Matrix A;
  Vector a;
  double alpha = 0.0;
  Matrix B;
  Vector b;
  double beta = 1.0;
  double m = 1.0;
  double M = 1.0;
  RatioCondition condition = RatioCondition::ZeroDenominatorMatrix;
  std::optional<Box> test_box;
};

namespace detail {

inline bool is_symmetric(const Matrix& S) {
  const double scale = std::max(1.0, S.cwiseAbs().maxCoeff());
  return S.rows() == S.cols() && (S - S.transpose()).cwiseAbs().maxCoeff() <= 1e-12 * scale;
}

inline Eigen::VectorXd symmetric_eigenvalues(const Matrix& S) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(S, Eigen::EigenvaluesOnly);
  return es.eigenvalues();
}

}  // namespace detail

/// h = f/g with f = 1/2<Ax,x> + <a,x> + alpha and g = 1/2<Bx,x> + <b,x> + beta,
/// restricted to K = {m <= g <= M}. Strongly quasiconvex on K with modulus
/// lambda_min(A)/M. Evaluations with g outside [m, M] throw DomainViolation.
[[nodiscard]] inline TestProblem quadratic_ratio(const QuadraticRatioSpec& spec) {
  const auto n = spec.A.rows();
  if (n == 0) throw InvalidInput("quadratic_ratio: empty A");
  if (!detail::is_symmetric(spec.A)) throw InvalidInput("quadratic_ratio: A is not symmetric");
  if (spec.B.rows() != n || spec.B.cols() != n || spec.a.size() != n || spec.b.size() != n) {
    throw InvalidInput("quadratic_ratio: inconsistent shapes");
  }
  if (!detail::is_symmetric(spec.B)) throw InvalidInput("quadratic_ratio: B is not symmetric");
  if (!(spec.m > 0.0 && spec.m <= spec.M)) {
    throw InvalidInput("quadratic_ratio: requires 0 < m <= M");
  }
  const Eigen::VectorXd eig_a = detail::symmetric_eigenvalues(spec.A);
  const double lambda_min = eig_a.minCoeff();
  if (!(lambda_min > 0.0)) throw InvalidInput("quadratic_ratio: A is not positive definite");

  const Eigen::VectorXd eig_b = detail::symmetric_eigenvalues(spec.B);
  const double btol = 1e-12 * std::max(1.0, spec.B.cwiseAbs().maxCoeff());
  switch (spec.condition) {
    case RatioCondition::ZeroDenominatorMatrix:
      if (!spec.B.isZero(0.0)) throw InvalidInput("quadratic_ratio: condition (a) needs B = 0");
      break;
    case RatioCondition::NonnegativeNegSemidefinite:
      if (eig_b.maxCoeff() > btol) {
        throw InvalidInput("quadratic_ratio: condition (b) needs B negative semidefinite");
      }
      break;
    case RatioCondition::NonpositivePosSemidefinite:
      if (eig_b.minCoeff() < -btol) {
        throw InvalidInput("quadratic_ratio: condition (c) needs B positive semidefinite");
      }
      break;
  }

  struct Data {
    Matrix A, B;
    Vector a, b;
    double alpha, beta, m, M;
  };
  auto d = std::make_shared<const Data>(
      Data{spec.A, spec.B, spec.a, spec.b, spec.alpha, spec.beta, spec.m, spec.M});

  auto denominator = [d](const Vector& x) {
    const double g = 0.5 * x.dot(d->B * x) + d->b.dot(x) + d->beta;
    if (!(g >= d->m && g <= d->M)) {
      throw DomainViolation("quadratic_ratio: denominator " + std::to_string(g) +
                            " outside [m, M]");
    }
    return g;
  };

  TestProblem p;
  p.name = "quadratic_ratio";
  p.objective.dim = static_cast<std::size_t>(n);
  p.objective.eval = [d, denominator](const Vector& x) {
    const double g = denominator(x);
    return (0.5 * x.dot(d->A * x) + d->a.dot(x) + d->alpha) / g;
  };
  p.objective.grad = [d, denominator](const Vector& x) -> Vector {
    const double g = denominator(x);
    const double f = 0.5 * x.dot(d->A * x) + d->a.dot(x) + d->alpha;
    return ((d->A * x + d->a) * g - f * (d->B * x + d->b)) / (g * g);
  };
  p.metadata.gamma = lambda_min / spec.M;

  // With a constant denominator h is a quadratic, so L and the minimizer
  // are available in closed form.
  const bool constant_denominator = spec.B.isZero(0.0) && spec.b.isZero(0.0);
  if (constant_denominator) {
    p.objective.hvp = [d](const Vector&, const Vector& v) -> Vector {
      return d->A * v / d->beta;
    };
    p.metadata.lipschitz_grad = eig_a.maxCoeff() / spec.beta;
    const Vector xbar = -spec.A.ldlt().solve(spec.a);
    p.metadata.minimizer = xbar;
    p.metadata.min_value = (0.5 * xbar.dot(spec.A * xbar) + spec.a.dot(xbar) + spec.alpha) / spec.beta;
  }

  p.test_box = spec.test_box.value_or(Box::cube(static_cast<std::size_t>(n), 1.0));
  if (p.metadata.minimizer) {
    p.test_box.lower = p.test_box.lower.cwiseMin(*p.metadata.minimizer);
    p.test_box.upper = p.test_box.upper.cwiseMax(*p.metadata.minimizer);
  }
  p.default_init = 0.5 * (p.test_box.lower + p.test_box.upper) +
                   0.25 * (p.test_box.upper - p.test_box.lower);
  return p;
}

/// x -> h(Ax) for A with p.dim() rows. Modulus gamma * sigma_min(A); the
/// gradient Lipschitz constant scales by sigma_max(A)^2.
[[nodiscard]] inline TestProblem compose_linear(const TestProblem& p, const Matrix& A) {
  if (A.rows() != static_cast<Eigen::Index>(p.dim()) || A.cols() == 0) {
    throw InvalidInput("compose_linear: A must have " + std::to_string(p.dim()) + " rows");
  }
  auto inner = std::make_shared<const TestProblem>(p);
  auto op = std::make_shared<const Matrix>(A);
  const auto m = A.cols();

  Eigen::JacobiSVD<Matrix> svd(A, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const Eigen::VectorXd sv = svd.singularValues();
  // sigma_min over all n directions: zero when A has a nontrivial kernel.
  const double sigma_min = (A.rows() >= A.cols()) ? sv.minCoeff() : 0.0;
  const double sigma_max = sv.maxCoeff();

  TestProblem q;
  q.name = p.name + "_composed";
  q.objective.dim = static_cast<std::size_t>(m);
  q.objective.eval = [inner, op](const Vector& x) { return inner->objective.eval(*op * x); };
  q.objective.grad = [inner, op](const Vector& x) -> Vector {
    return op->transpose() * inner->objective.grad(*op * x);
  };
  if (p.objective.has_hvp()) {
    q.objective.hvp = [inner, op](const Vector& x, const Vector& v) -> Vector {
      return op->transpose() * inner->objective.hvp(*op * x, *op * v);
    };
  }
  q.metadata.gamma = p.metadata.gamma * sigma_min;
  q.metadata.lipschitz_grad = p.metadata.lipschitz_grad * sigma_max * sigma_max;
  q.nonsmooth = p.nonsmooth;
  if (p.kink_distance) {
    q.kink_distance = [inner, op](const Vector& x) { return inner->kink_distance(*op * x); };
  }

  const bool invertible = A.rows() == A.cols() && sigma_min > 0.0;
  if (invertible && p.metadata.minimizer) {
    q.metadata.minimizer = A.fullPivLu().solve(*p.metadata.minimizer);
    q.metadata.min_value = p.metadata.min_value;
  }

  // A box of radius r keeps |Ax|_2 <= sigma_max sqrt(m) r inside the inner box.
  const double inner_radius =
      std::min(p.test_box.upper.minCoeff(), -p.test_box.lower.maxCoeff());
  const double r = (sigma_max > 0.0 && inner_radius > 0.0)
                       ? inner_radius / (sigma_max * std::sqrt(static_cast<double>(m)))
                       : 1.0;
  q.test_box = Box::cube(static_cast<std::size_t>(m), r);
  q.default_init = Vector::Constant(m, 0.5 * r);
  if (invertible) {
    const Vector pulled = A.fullPivLu().solve(p.default_init);
    q.default_init = pulled;
  }
  if (q.metadata.minimizer) {
    q.test_box.lower = q.test_box.lower.cwiseMin(*q.metadata.minimizer);
    q.test_box.upper = q.test_box.upper.cwiseMax(*q.metadata.minimizer);
  }
  q.test_box.lower = q.test_box.lower.cwiseMin(q.default_init);
  q.test_box.upper = q.test_box.upper.cwiseMax(q.default_init);
  return q;
}

/// x -> max{h1(x), h2(x)}, modulus min(gamma1, gamma2). The gradient is the
/// active branch's, ties going to p1; the result is flagged nonsmooth.
[[nodiscard]] inline TestProblem max_combine(const TestProblem& p1, const TestProblem& p2) {
  if (p1.dim() != p2.dim()) throw InvalidInput("max_combine: dimension mismatch");
  auto a = std::make_shared<const TestProblem>(p1);
  auto b = std::make_shared<const TestProblem>(p2);

  TestProblem q;
  q.name = "max(" + p1.name + "," + p2.name + ")";
  q.objective.dim = p1.dim();
  q.objective.eval = [a, b](const Vector& x) {
    return std::max(a->objective.eval(x), b->objective.eval(x));
  };
  q.objective.grad = [a, b](const Vector& x) -> Vector {
    return a->objective.eval(x) >= b->objective.eval(x) ? a->objective.grad(x)
                                                        : b->objective.grad(x);
  };
  if (p1.objective.has_hvp() && p2.objective.has_hvp()) {
    q.objective.hvp = [a, b](const Vector& x, const Vector& v) -> Vector {
      return a->objective.eval(x) >= b->objective.eval(x) ? a->objective.hvp(x, v)
                                                          : b->objective.hvp(x, v);
    };
  }
  if (p1.metadata.has_gamma() && p2.metadata.has_gamma()) {
    q.metadata.gamma = std::min(p1.metadata.gamma, p2.metadata.gamma);
  }
  // A max of smooth functions has no global Lipschitz gradient.
  q.metadata.lipschitz_grad = 0.0;
  if (p1.metadata.minimizer && p2.metadata.minimizer &&
      *p1.metadata.minimizer == *p2.metadata.minimizer && p1.metadata.min_value &&
      p2.metadata.min_value) {
    q.metadata.minimizer = p1.metadata.minimizer;
    q.metadata.min_value = std::max(*p1.metadata.min_value, *p2.metadata.min_value);
  }
  q.nonsmooth = true;
  q.kink_distance = [a, b](const Vector& x) {
    double d = std::abs(a->objective.eval(x) - b->objective.eval(x));
    if (a->kink_distance) d = std::min(d, a->kink_distance(x));
    if (b->kink_distance) d = std::min(d, b->kink_distance(x));
    return d;
  };
  q.test_box = {p1.test_box.lower.cwiseMax(p2.test_box.lower),
                p1.test_box.upper.cwiseMin(p2.test_box.upper)};
  if ((q.test_box.lower.array() > q.test_box.upper.array()).any()) {
    throw InvalidInput("max_combine: test boxes do not intersect");
  }
  q.default_init = q.test_box.contains(p1.default_init)
                       ? p1.default_init
                       : Vector(0.5 * (q.test_box.lower + q.test_box.upper));
  return q;
}

/// h(x) = 1/2 |x|^2 in n dimensions (gamma = L = 1). Built through
/// quadratic_ratio with A = I, B = 0, beta = 1.
[[nodiscard]] inline TestProblem half_squared_norm(std::size_t n, double half_width = 5.0) {
  const auto d = static_cast<Eigen::Index>(n);
  QuadraticRatioSpec s;
  s.A = Matrix::Identity(d, d);
  s.a = Vector::Zero(d);
  s.B = Matrix::Zero(d, d);
  s.b = Vector::Zero(d);
  s.test_box = Box::cube(n, half_width);
  TestProblem p = quadratic_ratio(s);
  p.name = "quadratic";
  p.default_init = Vector::Constant(d, 1.0);
  return p;
}

/// Replaces the metadata moduli, e.g. to attach estimated constants.
[[nodiscard]] inline TestProblem with_constants(TestProblem p, double gamma, double lipschitz) {
  if (gamma < 0.0 || lipschitz < 0.0) throw InvalidInput("moduli must be nonnegative");
  p.metadata.gamma = gamma;
  p.metadata.lipschitz_grad = lipschitz;
  return p;
}

}  // namespace hessdamp
