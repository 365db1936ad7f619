#include "starshape/curvop.hpp"

#include "support.hpp"

#include <Eigen/Eigenvalues>
#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <set>

using namespace starshape;
using starshape::testing::benchmark_spec;

namespace {

// The benchmark residual for rho = R constant, written out by hand:
// kappa = (1/R, 1/R), sigma_2/sigma_1 = 1/(2R), sigma_0/sigma_1 = R/2.
double radial_residual(double r, double t) {
  const double alpha0 = (0.6 - 0.05 * r) / (r * r);
  const double alpha1 = 0.25 / r;
  const double phi = 2.5 / r;
  return 1 / (2 * r) - t * alpha0 * r / 2 - t * alpha1 - (1 - t) * phi / (2 * r);
}

Eigen::VectorXd wavy(const SphereGrid<double>& grid) {
  return sample_field(grid, [](double th, double ph) {
    return 2.3 + 0.05 * std::cos(th) + 0.03 * std::sin(th) * std::cos(ph) +
           0.02 * std::sin(th) * std::sin(th) * std::cos(2 * ph);
  });
}

// Symmetric noise on a random diagonal, so that a fair share lands in the cones.
Eigen::MatrixXd random_symmetric(std::mt19937_64& rng, int n) {
  std::uniform_real_distribution<double> noise(-1, 1), diag(-0.5, 3);
  Eigen::MatrixXd m(n, n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < i; ++j) m(i, j) = m(j, i) = noise(rng);
    m(i, i) = diag(rng);
  }
  return m;
}

}  // namespace

TEST(AlphaBlend, Examples) {
  const ProblemSpec spec = benchmark_spec();
  const EvalEnv env = EvalEnv::from_direction(2.5, Eigen::Vector3d::UnitZ());
  EXPECT_NEAR(alpha_blend(spec, env, 0.0), 0.2, 1e-16);
  EXPECT_EQ(alpha_blend(spec, env, 1.0), spec.alpha[1].evaluate(env));
  EXPECT_NEAR(alpha_blend(spec, env, 0.5), 0.5 * (0.2 + 0.1), 1e-16);
}

TEST(Residual, ClosedFormExamples) {
  const ProblemSpec spec = benchmark_spec();
  const auto grid = make_grid(spec);
  auto constant = [&](double r) { return Eigen::VectorXd::Constant(grid.size(), r); };
  EXPECT_LE(residual(spec, grid, constant(2.0), 1.0).cwiseAbs().maxCoeff(), 1e-14);
  EXPECT_LE(residual(spec, grid, constant(2.5), 0.0).cwiseAbs().maxCoeff(), 1e-14);
  const auto f = residual(spec, grid, constant(2.0), 0.0);
  EXPECT_LE((f.array() + 0.0625).abs().maxCoeff(), 1e-14);
}

TEST(Residual, RoundSpheresMatchRadialFormula) {
  const ProblemSpec spec = benchmark_spec(16, 32);
  const auto grid = make_grid(spec);
  for (const double r : {0.7, 1.0, 1.6, 2.0, 2.5, 3.3, 4.0, 6.0}) {
    for (const double t : {0.0, 0.3, 1.0}) {
      const auto f = residual(spec, grid, Eigen::VectorXd::Constant(grid.size(), r), t);
      EXPECT_LE(f.maxCoeff() - f.minCoeff(), 1e-12);
      EXPECT_NEAR(f(0), radial_residual(r, t), 1e-12) << r << " " << t;
    }
  }
}

TEST(Residual, BarrierSigns) {
  const ProblemSpec spec = benchmark_spec(8, 16);
  const auto grid = make_grid(spec);
  for (const double r : {4.0, 4.5, 6.0, 10.0}) {
    const auto f = residual(spec, grid, Eigen::VectorXd::Constant(grid.size(), r), 1.0);
    EXPECT_GE(f.minCoeff(), 0.0) << r;
  }
  for (const double r : {1.0, 0.8, 0.5, 0.25}) {
    const auto f = residual(spec, grid, Eigen::VectorXd::Constant(grid.size(), r), 1.0);
    EXPECT_LE(f.maxCoeff(), 0.0) << r;
  }
}

TEST(Residual, LeavingTheConeIsReported) {
  const ProblemSpec spec = benchmark_spec(8, 16);
  const auto grid = make_grid(spec);
  // A deep dent makes the mean curvature negative at its centre.
  Eigen::VectorXd rho = Eigen::VectorXd::Constant(grid.size(), 2.0);
  const Eigen::Index node = grid.index(4, 3);
  rho(node) = 1.0;
  try {
    residual(spec, grid, rho, 1.0);
    FAIL() << "expected an admissibility error";
  } catch (const AdmissibilityError& e) {
    EXPECT_EQ(e.node(), node);
  }
}

TEST(Jacobian, ConstantVectorAction) {
  const ProblemSpec spec = benchmark_spec();
  const auto grid = make_grid(spec);
  const auto jac = jacobian(spec, grid, Eigen::VectorXd::Constant(grid.size(), 2.5), 0.0);
  const Eigen::VectorXd action = jac * Eigen::VectorXd::Ones(grid.size());
  // d/dR [1/(2R) - 1.25/R^2] at R = 2.5.
  EXPECT_LE((action.array() - 0.08).abs().maxCoeff(), 1e-6);
}

TEST(Jacobian, CommutesWithAzimuthalShift) {
  const ProblemSpec spec = benchmark_spec(16, 32);
  const auto grid = make_grid(spec);
  const Eigen::MatrixXd jac(jacobian(spec, grid, Eigen::VectorXd::Constant(grid.size(), 2.2), 0.4));
  Eigen::VectorXi perm(grid.size());
  for (Eigen::Index p = 0; p < grid.size(); ++p)
    perm(p) = static_cast<int>(grid.wrapped_index(grid.ring(p), grid.column(p) + 1));
  const Eigen::PermutationMatrix<Eigen::Dynamic> shift(perm);
  const Eigen::MatrixXd conj = shift * jac * shift.transpose();
  EXPECT_LE((conj - jac).cwiseAbs().maxCoeff(), 1e-12 * jac.cwiseAbs().maxCoeff());
}

TEST(Jacobian, MatchesDirectionalDifference) {
  ProblemSpec spec = starshape::testing::nonradial_spec();
  spec.grid = {16, 32};
  const auto grid = make_grid(spec);
  const Eigen::VectorXd rho = wavy(grid);
  std::mt19937_64 rng(6);
  std::uniform_real_distribution<double> u(-1, 1);
  for (const double t : {0.0, 0.5, 1.0}) {
    const auto jac = jacobian(spec, grid, rho, t);
    for (int trial = 0; trial < 3; ++trial) {
      Eigen::VectorXd dir(grid.size());
      for (auto& d : dir) d = u(rng);
      const double eps = 1e-7;
      const Eigen::VectorXd fd = (residual(spec, grid, rho + eps * dir, t) -
                                  residual(spec, grid, rho - eps * dir, t)) /
                                 (2 * eps);
      const Eigen::VectorXd jv = jac * dir;
      EXPECT_LE((jv - fd).cwiseAbs().maxCoeff(), 1e-5 * jv.cwiseAbs().maxCoeff());
    }
  }
}

TEST(Jacobian, SparsityAndReproducibility) {
  ProblemSpec spec = benchmark_spec(16, 32);
  const auto grid = make_grid(spec);
  const Eigen::VectorXd rho = wavy(grid);
  const Eigen::SparseMatrix<double, Eigen::RowMajor> jac = jacobian(spec, grid, rho, 0.7);
  for (Eigen::Index p = 0; p < grid.size(); ++p) {
    std::set<Eigen::Index> allowed;
    for (const auto& row : grid.stencil(grid.ring(p), grid.column(p)))
      allowed.insert(row.begin(), row.end());
    EXPECT_LE(jac.outerIndexPtr()[p + 1] - jac.outerIndexPtr()[p], 9);
    for (Eigen::SparseMatrix<double, Eigen::RowMajor>::InnerIterator it(jac, p); it; ++it)
      EXPECT_TRUE(allowed.count(it.col())) << p << " " << it.col();
  }

  const Eigen::MatrixXd a(jacobian(spec, grid, rho, 0.7));
  const Eigen::MatrixXd b(jacobian(spec, grid, rho, 0.7));
  spec.solver.threads = 4;
  const Eigen::MatrixXd c(jacobian(spec, grid, rho, 0.7));
  EXPECT_TRUE((a.array() == b.array()).all());
  EXPECT_TRUE((a.array() == c.array()).all());
}

TEST(Ellipticity, UnitVector) {
  const std::vector<double> alphas{0.0};
  const auto r = ellipticity_check(Eigen::Vector2d(1, 1), alphas, 2);
  EXPECT_TRUE(r.elliptic);
  EXPECT_EQ(r.diagonal(0), 0.25);
  EXPECT_EQ(r.diagonal(1), 0.25);
  EXPECT_EQ(r.trace, 0.5);
  EXPECT_EQ(r.min_eigenvalue, 0.25);
}

TEST(Ellipticity, SampledCone) {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> entry(-2, 3), weight(0, 1);
  int checked = 0;
  while (checked < 1000) {
    const Eigen::Vector2d lambda(entry(rng), entry(rng));
    if (!in_gamma_cone(lambda, 1)) continue;
    const std::vector<double> alphas{weight(rng)};
    const auto r = ellipticity_check(lambda, alphas, 2);
    EXPECT_TRUE(r.elliptic) << lambda.transpose();
    EXPECT_GE(r.trace, 0.5 - 1e-10);
    ++checked;
  }
}

TEST(Ellipticity, HigherDimensions) {
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> entry(-1, 3), weight(0, 1);
  int checked = 0;
  while (checked < 1000) {
    const int n = 3 + checked % 3;
    const int k = 2 + checked % (n - 1);
    Eigen::VectorXd lambda(n);
    for (auto& x : lambda) x = entry(rng);
    if (!in_gamma_cone(lambda, k - 1)) continue;
    std::vector<double> alphas(static_cast<std::size_t>(k - 1));
    for (auto& a : alphas) a = weight(rng);
    const auto r = ellipticity_check(lambda, alphas, k);
    EXPECT_TRUE(r.elliptic) << lambda.transpose();
    EXPECT_GE(r.trace, double(n - k + 1) / k - 1e-10) << lambda.transpose();
    ++checked;
  }
}

TEST(Ellipticity, ScaleInvariance) {
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> entry(0.1, 3);
  const std::vector<double> none{0.0};
  for (int i = 0; i < 100; ++i) {
    const Eigen::Vector2d lambda(entry(rng), entry(rng));
    const auto a = ellipticity_check(lambda, none, 2);
    const auto b = ellipticity_check(Eigen::Vector2d(2 * lambda), none, 2);
    EXPECT_EQ(a.diagonal, b.diagonal);
  }
}

TEST(Ellipticity, Errors) {
  const std::vector<double> alphas{0.0};
  EXPECT_THROW(ellipticity_check(Eigen::Vector2d(-1, 0.5), alphas, 2), std::domain_error);
  const std::vector<double> negative{-0.1};
  EXPECT_THROW(ellipticity_check(Eigen::Vector2d(1, 1), negative, 2), std::domain_error);
}

TEST(Concavity, Examples) {
  const std::vector<double> none{0.0};
  const Eigen::Matrix2d a = Eigen::Vector2d(1, 1).asDiagonal();
  const Eigen::Matrix2d b = Eigen::Vector2d(2, 0.5).asDiagonal();
  EXPECT_TRUE(concavity_check(a, a, none, 2));
  EXPECT_TRUE(concavity_check(a, b, none, 2));
  // sigma_2/sigma_1 of the three matrices: 0.5, 0.4, 1.5*0.75/2.25.
  EXPECT_NEAR(quotient_operator_of_matrix(a, none, 2), 0.5, 1e-15);
  EXPECT_NEAR(quotient_operator_of_matrix(b, none, 2), 0.4, 1e-15);
  EXPECT_NEAR(quotient_operator_of_matrix((a + b) / 2, none, 2), 0.5, 1e-15);
  const Eigen::Matrix2d bad = Eigen::Vector2d(-1, -1).asDiagonal();
  EXPECT_THROW(concavity_check(a, bad, none, 2), std::domain_error);
}

TEST(Concavity, SampledPairs) {
  std::mt19937_64 rng(10);
  std::uniform_real_distribution<double> weight(0, 1);
  int checked = 0;
  while (checked < 1000) {
    const int n = 2 + checked % 3;
    const int k = 2 + checked % (n - 1);
    const Eigen::MatrixXd a = random_symmetric(rng, n);
    const Eigen::MatrixXd b = random_symmetric(rng, n);
    const Eigen::VectorXd la = Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(a).eigenvalues();
    const Eigen::VectorXd lb = Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(b).eigenvalues();
    if (!in_gamma_cone(la, k - 1) || !in_gamma_cone(lb, k - 1)) continue;
    std::vector<double> alphas(static_cast<std::size_t>(k - 1));
    for (auto& x : alphas) x = weight(rng);
    EXPECT_TRUE(concavity_check(a, b, alphas, k));
    ++checked;
  }
}

TEST(ProblemSpec, Validation) {
  ProblemSpec spec = benchmark_spec();
  EXPECT_NO_THROW(spec.validate());
  spec.r2 = 0.5;
  EXPECT_THROW(spec.validate(), std::invalid_argument);
  spec = benchmark_spec();
  spec.alpha.pop_back();
  EXPECT_THROW(spec.validate(), std::invalid_argument);
  spec = benchmark_spec(8, 15);
  EXPECT_THROW(spec.validate(), std::invalid_argument);
  spec = benchmark_spec(600, 64);
  EXPECT_THROW(spec.validate(), std::invalid_argument);
}
