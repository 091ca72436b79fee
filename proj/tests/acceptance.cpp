// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any failure.
#include "hessdamp/hessdamp.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

using namespace hessdamp;

namespace {

struct Outcome {
  bool passed = true;
  std::ostringstream detail;

  void require(bool ok, const std::string& what) {
    if (!ok) {
      passed = false;
      detail << " [failed: " << what << "]";
    }
  }
};

Vector scalar(double x) { return Vector::Constant(1, x); }

Vector vec2(double a, double b) {
  Vector v(2);
  v << a, b;
  return v;
}

StoppingRule rule(double tol, std::size_t iters) {
  StoppingRule s;
  s.grad_tol = tol;
  s.max_iters = iters;
  return s;
}

bool contains(const std::vector<std::string>& v, const std::string& s) {
  return std::find(v.begin(), v.end(), s) != v.end();
}

// Largest E_{k+1} - (c E_k + 1e-12) over a trace, from record `first`.
double worst_contraction_excess(const IterationTrace& tr, double c, std::size_t first = 0) {
  double worst = -std::numeric_limits<double>::infinity();
  for (std::size_t k = first; k + 1 < tr.records.size(); ++k) {
    worst = std::max(worst, tr.records[k + 1].energy - (c * tr.records[k].energy + 1e-12));
  }
  return worst;
}

// Largest E_{k+1}/E_k over steps with E_k above 1e-200.
double worst_ratio(const IterationTrace& tr) {
  double worst = 0.0;
  for (std::size_t k = 0; k + 1 < tr.records.size(); ++k) {
    if (tr.records[k].energy > 1e-200) {
      worst = std::max(worst, tr.records[k + 1].energy / tr.records[k].energy);
    }
  }
  return worst;
}

// 1. Certified Heavy Ball contraction
void heavy_ball_contraction(Outcome& o) {
  const auto p = example1();
  const double a = 0.3, t = 0.01;

  const HeavyBallParams interior{a, t, (1 - 2 * a * a) / (2 * 6.0) - t};
  const auto c = validate_heavy_ball(interior, p.metadata);
  o.require(c.valid, "interior parameters certified");
  const double tiny = std::numeric_limits<double>::denorm_min();
  const auto tr = heavy_ball_hessian(p, interior, scalar(3), rule(tiny, 2000));
  // in double precision the iterate reaches an exact stationary point well before 2000 steps
  o.require(tr.records.size() == 2001 || tr.back().grad_norm <= tiny,
            "2000 iterations or an exact stationary point");
  const double excess = worst_contraction_excess(tr, c.contraction);
  o.require(excess <= 0.0, "E_{k+1} <= (1 - rho/sigma) E_k + 1e-12 at interior point");

  // closed end of the step interval: rho = 0 up to rounding
  const HeavyBallParams boundary{a, t, (1 - 2 * a * a) / 6.0 - t};
  const auto cb = validate_heavy_ball(boundary, p.metadata);
  o.require(cb.region_satisfied, "boundary point inside the parameter region");
  const auto trb = heavy_ball_hessian(p, boundary, scalar(3), rule(1e-300, 2000));
  const double excess_b = worst_contraction_excess(trb, cb.contraction);
  o.require(excess_b <= 0.0, "E_{k+1} <= (1 - rho/sigma) E_k + 1e-12 at boundary point");

  o.detail << "rho=" << c.rho << " sigma=" << c.sigma << " rate=" << c.contraction
           << " steps=" << tr.iterations() << " final_energy=" << tr.back().energy
           << " worst_excess=" << excess << " max_step_ratio=" << worst_ratio(tr)
           << " boundary_rho=" << cb.rho
           << " boundary_worst_excess=" << excess_b;
}

// 2. Certified Nesterov contraction
void nesterov_contraction(Outcome& o) {
  const auto p = example1();
  const NesterovParams np{1e-4, 5e-6, 0.005, 2.0, 3e-4};
  const auto c = validate_nesterov(np, p.metadata);
  o.require(c.valid, "parameters certified");
  const auto tr = nesterov_hessian(p, np, scalar(3), rule(1e-300, 2000));
  const double excess = worst_contraction_excess(tr, c.rate);
  o.require(excess <= 0.0, "E_{k+1} <= mu1 (1+eps) E_k + 1e-12");

  double worst_dist = -std::numeric_limits<double>::infinity();
  const double e1 = tr.records.at(1).energy;
  for (std::size_t k = 1; k < tr.records.size(); ++k) {
    const double d = tr.records[k].x.squaredNorm();
    const double bound = std::pow(c.rate, static_cast<double>(k - 1)) * e1;
    worst_dist = std::max(worst_dist, d - bound);
  }
  o.require(worst_dist <= 0.0, "|x_k - xbar|^2 <= q^{k-1} E_1");
  o.detail << "mu1=" << c.mu1 << " mu2=" << c.mu2 << " eps=" << c.epsilon << " q=" << c.rate
           << " momentum_bound=" << c.momentum_bound << " worst_excess=" << excess
           << " max_step_ratio=" << worst_ratio(tr)
           << " worst_distance_excess=" << worst_dist;
}

struct FourRuns {
  IterationTrace hb, hbh, nes, nesh;
};

// 3. Example 1 reproduction
void example1_reproduction(Outcome& o) {
  const auto p = example1();
  const double beta = 1.0 / 24;
  const auto stop = rule(1e-9, 500);
  FourRuns r{heavy_ball(p, {0.8, 0.0, beta}, scalar(3), stop),
             heavy_ball_hessian(p, {0.8, 0.05, beta}, scalar(3), stop),
             nesterov(p, {0.9, 0.0, beta}, scalar(3), stop),
             nesterov_hessian(p, {0.6, 0.05, beta}, scalar(3), stop)};
  const char* names[] = {"hb", "hb_hessian", "nesterov", "nesterov_hessian"};
  const IterationTrace* traces[] = {&r.hb, &r.hbh, &r.nes, &r.nesh};
  std::size_t counts[4];
  for (int i = 0; i < 4; ++i) {
    const auto& tr = *traces[i];
    std::size_t hit = 0;
    for (const auto& rec : tr.records) {
      if (std::abs(rec.x[0]) <= 1e-6) {
        hit = rec.k;
        break;
      }
    }
    const bool reached = std::abs(tr.records.front().x[0]) <= 1e-6 || hit > 0;
    o.require(reached && hit <= 500, std::string(names[i]) + " reaches |x| <= 1e-6");
    counts[i] = sign_changes(tr, scalar(0));
    o.detail << names[i] << ":k=" << hit << ",osc=" << counts[i] << ' ';
  }
  o.require(counts[1] <= counts[0], "hb_hessian oscillates no more than hb");
  o.require(counts[3] <= counts[2], "nesterov_hessian oscillates no more than nesterov");
}

// 4. Example 2 reproduction
void example2_reproduction(Outcome& o) {
  const auto p = example2(100, 1, 1);
  const double beta = 0.0025;
  const Vector x0 = vec2(3, 3);
  const auto stop = rule(1e-4, 20000);
  FourRuns r{heavy_ball(p, {0.8, 0.0, beta}, x0, stop),
             heavy_ball_hessian(p, {0.8, 0.004, beta}, x0, stop),
             nesterov(p, {0.9, 0.0, beta}, x0, stop),
             nesterov_hessian(p, {0.9, 0.009, beta}, x0, stop)};
  const char* names[] = {"hb", "hb_hessian", "nesterov", "nesterov_hessian"};
  const IterationTrace* traces[] = {&r.hb, &r.hbh, &r.nes, &r.nesh};
  std::size_t counts[4];
  for (int i = 0; i < 4; ++i) {
    const auto& tr = *traces[i];
    o.require(!tr.diverged() && tr.iterations() <= 20000 && tr.back().f_gap <= 1e-8,
              std::string(names[i]) + " reaches h <= 1e-8");
    counts[i] = sign_changes(tr, vec2(0, 0));
    o.detail << names[i] << ":k=" << tr.iterations() << ",h=" << tr.back().f_gap
             << ",osc=" << counts[i] << ' ';
  }
  o.require(counts[1] <= counts[0], "hb_hessian oscillates no more than hb");
  o.require(counts[3] <= counts[2], "nesterov_hessian oscillates no more than nesterov");
}

// 5. Exponential energy decay of the continuous system
void continuous_decay(Outcome& o) {
  const auto p = example1();
  const double gamma = 0.5, kappa = 1.0 / 12;
  const double alpha = std::sqrt(gamma * (kappa + 2) * (kappa + 2) / (8 * kappa));
  const double beta = (kappa + 2) / (kappa * alpha);
  const auto params = ContinuousParams::make(alpha, beta, kappa, 20.0, 1e-3, scalar(3), scalar(0));
  const auto cert = validate_continuous(params, p.metadata);
  o.require(cert.valid, "parameters satisfy the hypotheses");
  const auto tr = integrate(p, params, Integrator::RK4);
  const auto rep = check_energy_decay(tr, params, p.metadata, 1e-6);
  o.require(rep.max_energy_growth <= 1e-6, "E(t) e^{rate t} nonincreasing within 1e-6");
  o.require(rep.lower_ok, "gamma/4 |x - xbar|^2 <= h - h*");
  o.require(rep.upper_ok, "h - h* <= C e^{-rate t}");
  o.detail << "C=" << rep.C << " rate=" << rep.rate
           << " max_energy_growth=" << rep.max_energy_growth
           << " max_upper_excess=" << rep.max_upper_excess
           << " min_lower_margin=" << rep.min_lower_margin;
}

// 6. PL and structural inequalities on sampled points
void structure_suite(Outcome& o) {
  const auto p = example1();
  const std::uint64_t seed = 2024;
  const auto qg = check_quadratic_growth(p, 1000, seed);
  const auto sq = check_strong_quasiconvexity(p, 0.5, 1000, seed);
  const auto pl = check_pl(p, 1000, seed);
  const auto gc = check_gradient_characterization(p, 0.5, 1000, seed);
  o.require(qg.passed, "quadratic growth");
  o.require(sq.passed, "strong quasiconvexity");
  o.require(pl.passed, "PL with mu = 1/48");
  o.require(gc.passed, "gradient characterization");

  TestProblem sat;
  sat.name = "x/(1+|x|)";
  sat.objective.dim = 1;
  sat.objective.eval = [](const Vector& x) { return x[0] / (1 + std::abs(x[0])); };
  sat.objective.grad = [](const Vector& x) {
    const double d = 1 + std::abs(x[0]);
    return Vector::Constant(1, 1 / (d * d));
  };
  sat.test_box = Box::cube(1, 3.0);
  const auto bad = check_gradient_characterization(sat, 0.1, 1000, seed);
  o.require(!bad.passed && bad.witness.size() == 2, "x/(1+|x|) fails with a witness");
  if (bad.witness.size() == 2) {
    const double replay = gradient_characterization_margin(sat.objective, 0.1, scalar(bad.witness[0]),
                                                           scalar(bad.witness[1]));
    o.require(replay < 0.0, "witness replays as a violation");
  }
  o.detail << "mu=" << 0.5 * 0.5 / 12.0 << " margins: qg=" << qg.worst_violation
           << " sq=" << sq.worst_violation << " pl=" << pl.worst_violation
           << " gc=" << gc.worst_violation << " counterexample: " << serialize(bad);
}

// 7. Oracle equivalences
void oracle_equivalences(Outcome& o) {
  std::size_t mismatches = 0;
  for (const auto& p : {example1(), example2(100, 1, 1)}) {
    const auto gd = gradient_descent(p, 0.01, p.default_init, rule(1e-300, 100));
    const auto hb = heavy_ball_hessian(p, {0.0, 0.0, 0.01}, p.default_init, rule(1e-300, 100));
    const auto nes = nesterov_hessian(p, {0.0, 0.0, 0.01}, p.default_init, rule(1e-300, 100));
    if (gd.records.size() != 101 || hb.records.size() != 101 || nes.records.size() != 101) {
      ++mismatches;
      continue;
    }
    for (std::size_t k = 0; k <= 100; ++k) {
      if (!(gd.records[k].x.array() == hb.records[k].x.array()).all()) ++mismatches;
      if (!(gd.records[k].x.array() == nes.records[k].x.array()).all()) ++mismatches;
    }
  }
  o.require(mismatches == 0, "alpha = theta = 0 equals gradient descent bitwise");

  // x'' + x' + x = 0, x(0) = 1, x'(0) = 0
  const double w = std::sqrt(3.0) / 2.0;
  const double exact = std::exp(-0.5) * (std::cos(w) + std::sin(w) / (2 * w));
  auto err = [&](double dt) {
    const auto params = ContinuousParams::make(1.0, 0.0, 2.0, 1.0, dt, scalar(1), scalar(0));
    return std::abs(integrate(half_squared_norm(1), params).records.back().x[0] - exact);
  };
  const double e_fine = err(1e-4);
  const double ratio = err(0.1) / err(0.05);
  o.require(e_fine <= 1e-4, "RK4 within 1e-4 of the closed form at t = 1");
  o.require(ratio >= 12.0, "RK4 error drops at least 12x on dt halving");

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
  std::size_t fd_failures = 0;
  for (const auto& p : zoo) {
    if (!check_gradient_fd(p, 200, 7).passed) ++fd_failures;
    if (!check_hvp_fd(p, 200, 7).passed) ++fd_failures;
  }
  o.require(fd_failures == 0, "finite-difference oracles agree on the problem zoo");
  o.detail << "bitwise_mismatches=" << mismatches << " rk4_error=" << e_fine
           << " rk4_halving_ratio=" << ratio << " fd_failures=" << fd_failures << "/"
           << 2 * zoo.size();
}

// 8. Validator truth table
void validator_table(Outcome& o) {
  const auto meta = example1().metadata;
  const double L = 6.0, s2 = std::sqrt(2.0), s3 = std::sqrt(3.0);
  int rows = 0;
  auto row = [&](bool ok, const std::string& what) {
    ++rows;
    o.require(ok, what);
  };

  const auto example = validate_heavy_ball({0.8, 0.05, 1.0 / 24}, meta);
  row(!example.valid && contains(example.violations, "alpha >= sqrt(2)/2") &&
          contains(example.violations, "theta+beta > (1-2*alpha^2)/L"),
      "alpha = 0.8 rejected naming the alpha and theta+beta bounds");
  row(contains(validate_heavy_ball({s2 / 2, 0.0, 0.01}, meta).violations, "alpha >= sqrt(2)/2"),
      "alpha = sqrt2/2 excluded");
  row(!contains(validate_heavy_ball({0.0, 0.0, 0.05}, meta).violations, "alpha < 0"),
      "alpha = 0 admitted");
  row(contains(validate_heavy_ball({0.3, 0.3 / (L * s3), 0.05}, meta).violations,
               "theta >= alpha/(L*sqrt(3))"),
      "theta = alpha/(L sqrt3) excluded");
  row(contains(validate_heavy_ball({0.3, 0.01, 0.01 * (s2 - 1)}, meta).violations,
               "beta <= theta*(sqrt(2)-1)"),
      "beta = theta(sqrt2 - 1) excluded");
  row(validate_heavy_ball({0.0, 0.0, 1.0 / L}, meta).region_satisfied,
      "theta+beta = (1-2 alpha^2)/L admitted");
  row(contains(validate_heavy_ball({0.0, 0.0, std::nextafter(1.0 / L, 1.0)}, meta).violations,
               "theta+beta > (1-2*alpha^2)/L"),
      "theta+beta just above the bound excluded");
  row(validate_heavy_ball({0.0, 0.0, 1.0 / (2 * L)}, meta).valid, "gradient-descent case certified");

  NesterovParams edge{0.0, 0.0, 0.5 / (2.0 * L * L), 2.0, 0.0};
  row(contains(validate_nesterov(edge, meta).violations, "beta upper bound"),
      "beta = gamma/(eta L^2) excluded");
  const auto f = nesterov_factors(0.005, 2.0, 0.5, L);
  NesterovParams eps_edge{0.0, 0.0, 0.005, 2.0, 1.0 / f.mu1 - 1.0};
  row(contains(validate_nesterov(eps_edge, meta).violations, "epsilon range"),
      "eps = 1/mu1 - 1 excluded");
  const double mb = nesterov_momentum_bound(f.mu1, f.mu2, 3e-4);
  row(validate_nesterov({mb, 0.0, 0.005, 2.0, 3e-4}, meta).valid, "alpha at the momentum bound admitted");

  const double kappa = 1.0 / 12;
  const double amax = std::sqrt(0.5 * (kappa + 2) * (kappa + 2) / (8 * kappa));
  const auto at = ContinuousParams::make(amax, (kappa + 2) / (kappa * amax), kappa, 1, 1e-3,
                                         scalar(3), scalar(0));
  row(validate_continuous(at, meta).valid, "continuous bounds are closed");
  const auto above = ContinuousParams::make(std::nextafter(amax, 10.0), 1.0, kappa, 1, 1e-3,
                                            scalar(3), scalar(0));
  row(contains(validate_continuous(above, meta).violations, "alpha above bound"),
      "alpha just above the continuous bound excluded");
  o.detail << "rows=" << rows << " example_violations=";
  for (const auto& v : example.violations) o.detail << '"' << v << "\" ";
}

}  // namespace

int main() {
  struct Criterion {
    int id;
    const char* name;
    double budget_s;
    std::function<void(Outcome&)> body;
  };
  const std::vector<Criterion> criteria{
      {1, "certified Heavy Ball energy contraction", 1.0, heavy_ball_contraction},
      {2, "certified Nesterov energy contraction", 1.0, nesterov_contraction},
      {3, "example 1: four methods converge, Hessian variants oscillate less", 1.0,
       example1_reproduction},
      {4, "example 2: four methods converge, Hessian variants oscillate less", 5.0,
       example2_reproduction},
      {5, "continuous system: exponential energy decay and sandwich bound", 5.0, continuous_decay},
      {6, "PL and structural inequalities, counterexample witness", 1.0, structure_suite},
      {7, "oracle equivalences (GD reduction, RK4, finite differences)", 5.0, oracle_equivalences},
      {8, "validator truth table and interval ends", 1.0, validator_table},
  };

  int failures = 0;
  for (const auto& c : criteria) {
    Outcome o;
    const auto start = std::chrono::steady_clock::now();
    try {
      c.body(o);
    } catch (const std::exception& ex) {
      o.passed = false;
      o.detail << " [exception: " << ex.what() << "]";
    }
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (secs > c.budget_s) {
      o.passed = false;
      o.detail << " [failed: over time budget " << c.budget_s << " s]";
    }
    if (!o.passed) ++failures;
    std::printf("%s criterion %d: %s (%.3f s) %s\n", o.passed ? "PASS" : "FAIL", c.id, c.name, secs,
                o.detail.str().c_str());
  }
  std::printf("%d/%zu criteria passed\n", static_cast<int>(criteria.size()) - failures,
              criteria.size());
  return failures == 0 ? 0 : 1;
}
