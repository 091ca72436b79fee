#include "support.hpp"

#include <gtest/gtest.h>

#include <cmath>

using namespace hessdamp;
using hessdamp::testing::scalar;
using hessdamp::testing::scalar_problem;
using hessdamp::testing::vec;

namespace {

TestProblem cubic() {
  return scalar_problem(
      "cubic", [](double x) { return x * x * x; }, [](double x) { return 3 * x * x; },
      [](double x) { return 6 * x; }, 1.0);
}

// strictly but not strongly quasiconvex
TestProblem saturating() {
  return scalar_problem(
      "saturating", [](double x) { return x / (1 + std::abs(x)); },
      [](double x) { return 1 / ((1 + std::abs(x)) * (1 + std::abs(x))); }, {}, 3.0);
}

Vector slice(const std::vector<double>& w, std::size_t from, std::size_t n) {
  return Eigen::Map<const Vector>(w.data() + from, static_cast<Eigen::Index>(n));
}

}  // namespace

TEST(CounterRng, PureAndNested) {
  const CounterRng a(5), b(5), c(6);
  EXPECT_EQ(a.uniform(10, 2), b.uniform(10, 2));
  EXPECT_NE(a.uniform(10, 2), c.uniform(10, 2));
  for (std::uint64_t i = 0; i < 1000; ++i) {
    const double u = a.uniform(i, 0);
    ASSERT_GE(u, 0.0);
    ASSERT_LT(u, 1.0);
  }
}

TEST(StrongQuasiconvexity, Example1Passes) {
  const auto p = example1();
  const auto rep = check_strong_quasiconvexity(p, 0.5, 1000, 1);
  EXPECT_TRUE(rep.passed) << serialize(rep);
  EXPECT_EQ(rep.samples, 1000u);
}

TEST(StrongQuasiconvexity, CubicFailsWithReplayableWitness) {
  const auto p = cubic();
  const auto rep = check_strong_quasiconvexity(p, 1.0, 1000, 1);
  ASSERT_FALSE(rep.passed);
  ASSERT_EQ(rep.witness.size(), 3u);
  const double replay = strong_quasiconvexity_margin(p.objective, 1.0, scalar(rep.witness[0]),
                                                     scalar(rep.witness[1]), rep.witness[2]);
  EXPECT_NEAR(replay, rep.worst_violation, 1e-12);
  EXPECT_LT(replay, 0.0);
}

TEST(StrongQuasiconvexity, InflatedModulusFails) {
  const auto rep = check_strong_quasiconvexity(example1(), 10.0, 1000, 1);
  EXPECT_FALSE(rep.passed);
  EXPECT_EQ(rep.witness.size(), 3u);
}

TEST(StrongQuasiconvexity, MoreSamplesNeverRecover) {
  const auto p = example1();
  bool failed = false;
  for (std::size_t n : {10u, 50u, 200u, 1000u}) {
    const auto rep = check_strong_quasiconvexity(p, 3.0, n, 9);
    if (failed) EXPECT_FALSE(rep.passed) << n;
    failed = failed || !rep.passed;
  }
}

TEST(StrongQuasiconvexity, Deterministic) {
  const auto a = check_strong_quasiconvexity(example1(), 0.5, 200, 4);
  const auto b = check_strong_quasiconvexity(example1(), 0.5, 200, 4);
  EXPECT_EQ(serialize(a), serialize(b));
}

TEST(PL, Example1Passes) {
  const auto p = example1();
  EXPECT_DOUBLE_EQ(p.metadata.gamma * p.metadata.gamma / (2 * p.metadata.lipschitz_grad), 1.0 / 48);
  EXPECT_TRUE(check_pl(p, 1000, 2).passed);
}

TEST(PL, MarginZeroAtMinimizer) {
  const auto p = example1();
  EXPECT_EQ(pl_margin(p.objective, p.metadata, scalar(0)), 0.0);
}

TEST(PL, MissingLipschitzThrows) {
  auto p = example1();
  p.metadata.lipschitz_grad = 0.0;
  EXPECT_THROW((void)check_pl(p, 10, 0), InvalidInput);
}

TEST(QuadraticGrowth, Example1PassesAndInflatedFails) {
  const auto p = example1();
  EXPECT_TRUE(check_quadratic_growth(p, 1000, 3).passed);
  EXPECT_EQ(quadratic_growth_margin(p.objective, p.metadata, scalar(0)), 0.0);
  const auto bad = check_quadratic_growth(with_constants(p, 50.0, 6.0), 1000, 3);
  EXPECT_FALSE(bad.passed);
  EXPECT_NEAR(quadratic_growth_margin(p.objective, with_constants(p, 50.0, 6.0).metadata,
                                      scalar(bad.witness[0])),
              bad.worst_violation, 1e-12);
}

TEST(GradientCharacterization, Example1Passes) {
  EXPECT_TRUE(check_gradient_characterization(example1(), 0.5, 1000, 4).passed);
}

TEST(GradientCharacterization, EqualPointsGiveZero) {
  EXPECT_EQ(gradient_characterization_margin(example1().objective, 0.5, scalar(1.3), scalar(1.3)), 0.0);
}

TEST(GradientCharacterization, SaturatingFunctionFails) {
  const auto p = saturating();
  const auto rep = check_gradient_characterization(p, 0.1, 1000, 4);
  ASSERT_FALSE(rep.passed);
  ASSERT_EQ(rep.witness.size(), 2u);
  const double replay = gradient_characterization_margin(p.objective, 0.1, scalar(rep.witness[0]),
                                                         scalar(rep.witness[1]));
  EXPECT_NEAR(replay, rep.worst_violation, 1e-12);
  EXPECT_LE(p.objective.eval(scalar(rep.witness[0])), p.objective.eval(scalar(rep.witness[1])));
}

TEST(DescentLemma, Example1Passes) {
  EXPECT_TRUE(check_descent_lemma(example1(), 1000, 5).passed);
  EXPECT_EQ(descent_lemma_margin(example1().objective, 6.0, scalar(2), scalar(2)), 0.0);
}

TEST(Lipschitz, Example1PassesAndHalfFails) {
  const auto p = example1();
  EXPECT_TRUE(check_lipschitz_gradient(p, 1000, 6).passed);
  const auto bad = check_lipschitz_gradient(with_constants(p, 0.5, 3.0), 1000, 6);
  EXPECT_FALSE(bad.passed);
  const auto& w = bad.witness;
  EXPECT_NEAR(lipschitz_margin(p.objective, 3.0, slice(w, 0, 1), slice(w, 1, 1)),
              bad.worst_violation, 1e-12);
}

TEST(FiniteDifferenceOracles, WholeZooAgrees) {
  Matrix A(2, 2);
  A << 1.0, 0.5, -0.3, 2.0;
  const std::vector<TestProblem> zoo{
      example1(),
      example2(100, 1, 1),
      norm_power(0.5, 1),
      norm_power(0.7, 3),
      half_squared_norm(4),
      compose_linear(example2(100, 1, 1), A),
      max_combine(with_constants(half_squared_norm(2), 1, 1), example2(1, 1, 1)),
  };
  for (const auto& p : zoo) {
    EXPECT_TRUE(check_gradient_fd(p, 200, 11).passed) << p.name;
    EXPECT_TRUE(check_hvp_fd(p, 200, 11).passed) << p.name;
  }
}

TEST(EstimateKappa, HalfSquaredNormIsTwo) {
  const auto est = estimate_kappa(half_squared_norm(3), 500, -1.0, 1);
  EXPECT_GE(est.kappa_hat, 2.0 - 1e-6);
  EXPECT_LE(est.kappa_hat, 2.0 + 1e-6);
}

TEST(EstimateKappa, Example1AboveGammaOverL) {
  const auto est = estimate_kappa(example1(), 2000, -1.0, 1);
  EXPECT_GE(est.kappa_hat, 1.0 / 12 - 1e-6);
}

TEST(EstimateKappa, AllSamplesBelowFloor) {
  EXPECT_THROW((void)estimate_kappa(example1(), 100, 1e6, 1), InsufficientSamples);
}

TEST(GrowthRatioDiagnostics, HalfSquaredNorm) {
  const auto out = growth_ratio_diagnostics(half_squared_norm(2), {0.01, 1, 100});
  for (const auto& d : out) {
    EXPECT_NEAR(d.outer_ratio, 0.5, 1e-12);
    EXPECT_NEAR(d.inner_ratio, 0.5, 1e-12);
  }
}

TEST(GrowthRatioDiagnostics, Example1Bounded) {
  const auto out = growth_ratio_diagnostics(example1(), {0.01, 0.1, 1, 10, 100});
  for (const auto& d : out) {
    EXPECT_LE(d.outer_ratio, 3.0);
    EXPECT_GE(d.outer_ratio, 1.0);
  }
  EXPECT_NEAR(out.back().outer_ratio, 1.0, 1e-3);
}

TEST(GrowthRatioDiagnostics, EmptyRadiiThrows) {
  EXPECT_THROW((void)growth_ratio_diagnostics(example1(), {}), InvalidInput);
}

TEST(Serialize, OneLineRoundTripDigits) {
  const auto rep = check_strong_quasiconvexity(cubic(), 1.0, 100, 3);
  const auto line = serialize(rep);
  EXPECT_EQ(line.find('\n'), std::string::npos);
  EXPECT_NE(line.find("property=strong_quasiconvexity passed=false"), std::string::npos);
  const auto pos = line.find("worst_violation=") + 16;
  EXPECT_EQ(std::stod(line.substr(pos)), rep.worst_violation);
}
