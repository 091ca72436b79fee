// Shared helpers for the unit tests.
#pragma once

#include "hessdamp/hessdamp.hpp"

#include <cmath>
#include <functional>
#include <string>

namespace hessdamp::testing {

/// One-dimensional problem from scalar callables. `d2` may be empty.
inline TestProblem scalar_problem(std::string name, std::function<double(double)> f,
                                  std::function<double(double)> df,
                                  std::function<double(double)> d2, double half_width) {
  TestProblem p;
  p.name = std::move(name);
  p.objective.dim = 1;
  p.objective.eval = [f](const Vector& x) { return f(x[0]); };
  p.objective.grad = [df](const Vector& x) { return Vector::Constant(1, df(x[0])); };
  if (d2) {
    p.objective.hvp = [d2](const Vector& x, const Vector& v) {
      return Vector::Constant(1, d2(x[0]) * v[0]);
    };
  }
  p.test_box = Box::cube(1, half_width);
  p.default_init = Vector::Constant(1, half_width / 2.0);
  return p;
}

inline Vector vec(std::initializer_list<double> xs) {
  Vector v(static_cast<Eigen::Index>(xs.size()));
  Eigen::Index i = 0;
  for (double x : xs) v[i++] = x;
  return v;
}

inline Vector scalar(double x) { return Vector::Constant(1, x); }

}  // namespace hessdamp::testing
