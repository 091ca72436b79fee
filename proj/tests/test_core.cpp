#include "support.hpp"

#include <gtest/gtest.h>

using namespace hessdamp;
using hessdamp::testing::scalar;
using hessdamp::testing::vec;

namespace {

Objective square() {
  Objective o;
  o.dim = 1;
  o.eval = [](const Vector& x) { return x[0] * x[0]; };
  o.grad = [](const Vector& x) { return Vector::Constant(1, 2.0 * x[0]); };
  return o;
}

Objective half_norm(std::size_t n) {
  Objective o;
  o.dim = n;
  o.eval = [](const Vector& x) { return 0.5 * x.squaredNorm(); };
  o.grad = [](const Vector& x) { return x; };
  return o;
}

}  // namespace

TEST(FiniteDiffGradient, SquareAtZeroIsZero) {
  const Vector g = finite_diff_gradient(square(), scalar(0.0), 1e-5);
  EXPECT_EQ(g[0], 0.0);
}

TEST(FiniteDiffGradient, Example1MatchesAnalytic) {
  const auto p = example1();
  const Vector g = finite_diff_gradient(p.objective, scalar(1.0), 1e-6);
  EXPECT_NEAR(g[0], 2.0 + 2.0 * std::sin(2.0), 1e-8);
}

TEST(FiniteDiffGradient, WrongDimensionThrows) {
  EXPECT_THROW((void)finite_diff_gradient(half_norm(2), vec({1, 2, 3}), 1e-6), InvalidInput);
}

TEST(FiniteDiffGradient, NonPositiveStepThrows) {
  EXPECT_THROW((void)finite_diff_gradient(square(), scalar(1.0), 0.0), InvalidInput);
}

TEST(FiniteDiffHvp, IdentityHessian) {
  const Vector hv = finite_diff_hvp(half_norm(3), vec({0.3, -1.2, 2.0}), vec({1, 0, 0}));
  EXPECT_NEAR((hv - vec({1, 0, 0})).norm(), 0.0, 1e-7);
}

TEST(FiniteDiffHvp, Example1SecondDerivative) {
  auto obj = example1().objective;
  obj.hvp = nullptr;
  const Vector hv = finite_diff_hvp(obj, scalar(0.5), scalar(1.0));
  EXPECT_NEAR(hv[0], 2.0 + 4.0 * std::cos(1.0), 1e-6);
}

TEST(FiniteDiffHvp, ZeroDirectionThrows) {
  EXPECT_THROW((void)finite_diff_hvp(half_norm(2), vec({1, 1}), vec({0, 0})), InvalidInput);
}

TEST(HessianVector, ZeroDirectionGivesZero) {
  EXPECT_EQ(hessian_vector(half_norm(2), vec({1, 1}), vec({0, 0})), vec({0, 0}));
}

TEST(HessianVector, PrefersExactProduct) {
  auto obj = half_norm(1);
  obj.hvp = [](const Vector&, const Vector& v) { return Vector(7.0 * v); };
  EXPECT_EQ(hessian_vector(obj, scalar(1.0), scalar(2.0))[0], 14.0);
}

TEST(StoppingRule, RejectsBadValues) {
  StoppingRule s;
  s.grad_tol = 0.0;
  EXPECT_THROW(s.validate(), InvalidInput);
  s = {};
  s.max_iters = 0;
  EXPECT_THROW(s.validate(), InvalidInput);
  s = {};
  s.step_tol = -1.0;
  EXPECT_THROW(s.validate(), InvalidInput);
}

TEST(RunStatus, Names) {
  EXPECT_STREQ(to_string(RunStatus::Converged), "converged");
  EXPECT_STREQ(to_string(RunStatus::Diverged), "diverged");
}
