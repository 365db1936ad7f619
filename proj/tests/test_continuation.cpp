#include "starshape/continuation.hpp"

#include "support.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <random>

using namespace starshape;
using starshape::testing::benchmark_spec;
using starshape::testing::nonradial_spec;

namespace {

void expect_decreasing(const std::vector<double>& history) {
  for (std::size_t i = 1; i < history.size(); ++i) EXPECT_LT(history[i], history[i - 1]) << i;
}

void expect_same_steps(const SolveReport& a, const SolveReport& b) {
  ASSERT_EQ(a.steps.size(), b.steps.size());
  for (std::size_t i = 0; i < a.steps.size(); ++i) {
    const auto& x = a.steps[i];
    const auto& y = b.steps[i];
    EXPECT_EQ(x.t, y.t);
    EXPECT_EQ(x.newton_iters, y.newton_iters);
    EXPECT_EQ(x.residual_inf, y.residual_inf);
    EXPECT_EQ(x.rho_min, y.rho_min);
    EXPECT_EQ(x.rho_max, y.rho_max);
    EXPECT_EQ(x.support_min, y.support_min);
    EXPECT_EQ(x.sigma_min, y.sigma_min);
    EXPECT_EQ(x.kappa_abs_max, y.kappa_abs_max);
    EXPECT_EQ(x.H_max, y.H_max);
  }
  EXPECT_EQ(a.warnings, b.warnings);
}

}  // namespace

TEST(Hypotheses, BenchmarkMargins) {
  const auto report = check_hypotheses(benchmark_spec(), 32);
  EXPECT_TRUE(report.passed());
  // 2 alpha_1 rho + rho^2 alpha_0 = 0.5 + 0.6 - 0.05 rho, compared with 1.
  EXPECT_NEAR(*report.get("ASS1").boundary_margin, (1 - 0.9) / 16, 1e-15);
  EXPECT_NEAR(*report.get("ASS2").boundary_margin, 0.05, 1e-15);
  for (const char* name : {"ASS1", "ASS2", "ASS3", "alpha_positive", "phi_positive",
                           "phi_above_one", "phi_below_one", "phi_decreasing"})
    EXPECT_TRUE(report.get(name).passed) << name;
  EXPECT_THROW(report.get("nonexistent"), std::out_of_range);
}

TEST(Hypotheses, NonradialMargins) {
  const auto report = check_hypotheses(nonradial_spec(), 32);
  EXPECT_TRUE(report.passed());
  // Worst numerators 0.5 + 0.4 * 1.05 = 0.92 at rho = 4 and 0.5 + 0.55 * 0.95 = 1.0225 at rho = 1.
  EXPECT_NEAR(*report.get("ASS1").boundary_margin, (1 - 0.92) / 16, 1e-15);
  EXPECT_NEAR(*report.get("ASS2").boundary_margin, 0.0225, 1e-15);
}

TEST(Hypotheses, Violations) {
  ProblemSpec spec = benchmark_spec();
  spec.alpha[1] = Expr::parse("0.6/rho");
  auto report = check_hypotheses(spec, 32);
  EXPECT_FALSE(report.passed());
  EXPECT_FALSE(report.get("ASS1").passed);
  EXPECT_NEAR(report.get("ASS1").worst_location.norm(), 4.0, 1e-12);
  EXPECT_LT(*report.get("ASS1").boundary_margin, 0.0);

  spec = benchmark_spec();
  spec.alpha[0] = Expr::parse("0.1*rho");
  report = check_hypotheses(spec, 32);
  EXPECT_FALSE(report.get("ASS3").passed);
  EXPECT_EQ(report.get("ASS3").detail, "l=0");

  spec = benchmark_spec();
  spec.phi = Expr::parse("0.5");
  report = check_hypotheses(spec, 32);
  EXPECT_FALSE(report.get("phi_above_one").passed);
  EXPECT_FALSE(report.get("phi_decreasing").passed);
  EXPECT_TRUE(report.get("phi_below_one").passed);

  spec = benchmark_spec();
  spec.alpha[1] = Expr::parse("(0.25 - 0.3*u)/rho");
  report = check_hypotheses(spec, 32);
  EXPECT_FALSE(report.get("alpha_positive").passed);

  EXPECT_THROW(check_hypotheses(benchmark_spec(), 8), std::invalid_argument);
}

TEST(InitialSolution, Examples) {
  ProblemSpec spec = benchmark_spec(8, 16);
  EXPECT_NEAR(initial_radius(spec), 2.5, 1e-12);
  const Eigen::VectorXd rho = initial_solution(spec);
  EXPECT_EQ(rho.size(), 128);
  EXPECT_EQ(rho.minCoeff(), rho.maxCoeff());

  spec.phi = Expr::parse("(2.5/rho)^2");
  EXPECT_NEAR(initial_radius(spec), 2.5, 1e-12);

  spec.phi = Expr::parse("0.5");
  EXPECT_THROW(initial_solution(spec), InitializationError);
}

TEST(Newton, RecoversTheStartingSphere) {
  const ProblemSpec spec = benchmark_spec();
  const auto grid = make_grid(spec);
  const auto result = newton_solve(spec, Eigen::VectorXd::Constant(grid.size(), 2.6), 0.0);
  EXPECT_LE((result.rho.array() - 2.5).abs().maxCoeff(), 1e-8);
  EXPECT_LE(result.residual_history.back(), spec.solver.tol);
  expect_decreasing(result.residual_history);
}

TEST(Newton, FixedPoint) {
  const ProblemSpec spec = benchmark_spec();
  const auto grid = make_grid(spec);
  const auto result = newton_solve(spec, Eigen::VectorXd::Constant(grid.size(), 2.5), 0.0);
  EXPECT_LE(result.iterations, 1);
  EXPECT_LE(result.residual_history.back(), spec.solver.tol);
}

TEST(Newton, TargetProblem) {
  const ProblemSpec spec = benchmark_spec();
  const auto grid = make_grid(spec);
  const auto result = newton_solve(spec, Eigen::VectorXd::Constant(grid.size(), 2.2), 1.0);
  EXPECT_LE((result.rho.array() - 2.0).abs().maxCoeff(), 1e-6);
  expect_decreasing(result.residual_history);
}

TEST(Newton, InadmissibleStart) {
  const ProblemSpec spec = benchmark_spec(8, 16);
  const auto grid = make_grid(spec);
  Eigen::VectorXd rho = Eigen::VectorXd::Constant(grid.size(), 2.0);
  rho(grid.index(4, 3)) = 1.0;
  EXPECT_THROW(newton_solve(spec, rho, 1.0), ConeExitError);
}

TEST(Newton, LocalUniquenessAtTimeZero) {
  const ProblemSpec spec = benchmark_spec();
  const auto grid = make_grid(spec);
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> coef(-1, 1);
  for (int trial = 0; trial < 10; ++trial) {
    // Smooth eta from low spherical modes, scaled to sup norm 1.
    const double a = coef(rng), b = coef(rng), c = coef(rng), d = coef(rng);
    Eigen::VectorXd eta = sample_field(grid, [&](double th, double ph) {
      return a + b * std::cos(th) + c * std::sin(th) * std::cos(ph) +
             d * std::sin(th) * std::sin(th) * std::sin(2 * ph);
    });
    eta /= eta.cwiseAbs().maxCoeff();
    const Eigen::VectorXd start = 2.5 * (1.0 + 0.05 * eta.array()).matrix();
    const auto result = newton_solve(spec, start, 0.0);
    EXPECT_LE((result.rho.array() - 2.5).abs().maxCoeff(), 1e-8) << trial;
    expect_decreasing(result.residual_history);
  }
}

TEST(Continuation, Benchmark) {
  const ProblemSpec spec = benchmark_spec();
  const auto result = continue_to_one(spec);
  EXPECT_TRUE(result.report.reached_one);
  EXPECT_LE((result.rho.array() - 2.0).abs().maxCoeff(), 1e-6);
  ASSERT_FALSE(result.report.steps.empty());
  EXPECT_EQ(result.report.steps.front().t, 0.0);
  EXPECT_EQ(result.report.steps.back().t, 1.0);
  double last_t = -1;
  for (const auto& step : result.report.steps) {
    EXPECT_GT(step.t, last_t);
    last_t = step.t;
    EXPECT_TRUE(step.barrier_ok);
    EXPECT_TRUE(step.support_ok);
    EXPECT_TRUE(step.admissible_ok);
    EXPECT_TRUE(step.kappa_finite);
    EXPECT_GT(step.rho_min, spec.r1);
    EXPECT_LT(step.rho_max, spec.r2);
    ASSERT_EQ(step.sigma_min.size(), 2u);
    EXPECT_GT(step.sigma_min[0], 0.0);
    EXPECT_GT(step.sigma_min[1], 0.0);
    EXPECT_LE(step.residual_inf, spec.solver.tol);
  }
  EXPECT_TRUE(result.report.warnings.empty());
}

TEST(Continuation, NonradialSolution) {
  const ProblemSpec spec = nonradial_spec();
  const auto result = continue_to_one(spec);
  const auto grid = make_grid(spec);
  EXPECT_LE(residual(spec, grid, result.rho, 1.0).cwiseAbs().maxCoeff(), 1e-8);
  EXPECT_GT(result.rho.minCoeff(), 1.0);
  EXPECT_LT(result.rho.maxCoeff(), 4.0);
  EXPECT_GT(result.rho.maxCoeff() - result.rho.minCoeff(), 1e-3);
  // For alpha_0 scaled by (1 + eps) the radial balance point is 12 - 10/(1 + eps),
  // so the northern side (u > 0) sits further out.
  EXPECT_GT(result.rho(grid.index(0, 0)), result.rho(grid.index(grid.n_theta() - 1, 0)));
  for (const auto& step : result.report.steps) {
    EXPECT_TRUE(step.barrier_ok);
    EXPECT_TRUE(step.support_ok);
    EXPECT_TRUE(step.admissible_ok);
  }
}

TEST(Continuation, Deterministic) {
  const ProblemSpec spec = nonradial_spec();
  const auto a = continue_to_one(spec);
  const auto b = continue_to_one(spec);
  EXPECT_TRUE((a.rho.array() == b.rho.array()).all());
  expect_same_steps(a.report, b.report);
}

TEST(Continuation, RefusesFailedHypotheses) {
  ProblemSpec spec = benchmark_spec();
  spec.alpha[1] = Expr::parse("0.6/rho");
  try {
    continue_to_one(spec);
    FAIL() << "expected a hypothesis failure";
  } catch (const HypothesisFailure& e) {
    EXPECT_FALSE(e.report().get("ASS1").passed);
  }
}

TEST(Monitors, Measure) {
  const ProblemSpec spec = benchmark_spec(16, 32);
  const auto grid = make_grid(spec);
  Eigen::VectorXd rho = Eigen::VectorXd::Constant(grid.size(), 2.0);
  auto rec = measure(spec, grid, rho, 1.0);
  EXPECT_TRUE(rec.barrier_ok && rec.support_ok && rec.admissible_ok && rec.gamma_k);
  EXPECT_NEAR(rec.sigma_min[0], 1.0, 1e-14);
  EXPECT_NEAR(rec.sigma_min[1], 0.25, 1e-14);
  EXPECT_NEAR(rec.H_max, 1.0, 1e-14);
  EXPECT_NEAR(rec.kappa_abs_max, 0.5, 1e-14);
  rho(7) = 4.2;
  rec = measure(spec, grid, rho, 1.0);
  EXPECT_FALSE(rec.barrier_ok);
}
