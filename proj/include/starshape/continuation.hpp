// Hypothesis checks, the t = 0 initializer, the damped Newton corrector and
// t-continuation from the round sphere to the target equation.
#pragma once

#include "starshape/curvop.hpp"

#include <Eigen/Core>

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace starshape {

// ---------------------------------------------------------------------------
// Hypotheses

struct HypothesisCheck {
  std::string name;
  bool strict = false;     // margin must be > 0 rather than >= -slack
  bool passed = true;
  double worst_margin = 0; // signed; negative means violated
  Eigen::Vector3d worst_location = Eigen::Vector3d::Zero();
  std::optional<double> boundary_margin;  // ASS1 at |X| = r2, ASS2 at |X| = r1
  std::string detail;
};

struct HypothesisReport {
  std::vector<HypothesisCheck> checks;
  std::vector<std::string> warnings;

  bool passed() const;
  const HypothesisCheck& get(const std::string& name) const;
};

/// Samples the structural assumptions on a radius x direction lattice:
///   ASS1  sigma_k(e)/rho^k >= sum alpha_l sigma_l(e)/rho^l   on [r2, 2 r2]
///   ASS2  sigma_k(e)/rho^k <= sum alpha_l sigma_l(e)/rho^l   on [r1/2, r1]
///   ASS3  d/drho [rho^(k-l) alpha_l] <= 0                    on [r1, r2]
///   alpha_positive on [r1, r2] (warnings outside),
///   phi_positive, phi_above_one (rho <= r1), phi_below_one (rho >= r2),
///   phi_decreasing, all on [r1/2, 2 r2].
HypothesisReport check_hypotheses(const ProblemSpec& spec, int samples);

/// Slack for the non-strict checks ASS1/ASS2 (algebraic) and ASS3 (finite differences).
inline constexpr double kAlgebraicSlack = 1e-12;
inline constexpr double kDerivativeSlack = 1e-8;

// ---------------------------------------------------------------------------
// Errors

class SolverError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class InitializationError : public SolverError {
 public:
  using SolverError::SolverError;
};

class StagnationError : public SolverError {
 public:
  using SolverError::SolverError;
};

class ConeExitError : public SolverError {
 public:
  using SolverError::SolverError;
};

class NewtonDivergence : public SolverError {
 public:
  using SolverError::SolverError;
};

class HypothesisFailure : public std::runtime_error {
 public:
  explicit HypothesisFailure(HypothesisReport report);
  const HypothesisReport& report() const { return report_; }

 private:
  HypothesisReport report_;
};

// ---------------------------------------------------------------------------
// Solvers

/// Constant field rho0 with phi(rho0) = 1, bracketed on [r1, r2] by bisection.
Eigen::VectorXd initial_solution(const ProblemSpec& spec);
double initial_radius(const ProblemSpec& spec);

struct NewtonResult {
  Eigen::VectorXd rho;
  int iterations = 0;
  std::vector<double> residual_history;  // infinity norms, one per accepted iterate
};

/// Damped Newton on the discrete residual at fixed t.
NewtonResult newton_solve(const ProblemSpec& spec, const Eigen::VectorXd& rho0, double t);

struct StepRecord {
  double t = 0;
  int newton_iters = 0;
  double residual_inf = 0;
  double rho_min = 0, rho_max = 0;
  double support_min = 0;
  std::vector<double> sigma_min;  // min over nodes of sigma_j(kappa), j = 1..k
  double kappa_abs_max = 0;
  double H_max = 0;
  double wall_ms = 0;
  bool barrier_ok = false;     // r1 < rho < r2
  bool support_ok = false;     // <X, nu> > 0
  bool admissible_ok = false;  // kappa in Gamma_{k-1}
  bool gamma_k = false;        // kappa in Gamma_k (reported, not enforced)
  bool kappa_finite = false;
};

struct SolveReport {
  std::vector<StepRecord> steps;
  std::vector<std::string> warnings;
  bool reached_one = false;
};

/// Evaluates the monitors on a field. The caller fills t, newton_iters, wall_ms.
StepRecord measure(const ProblemSpec& spec, const SphereGrid<double>& grid,
                   const Eigen::VectorXd& rho, double t);

class ContinuationFailure : public SolverError {
 public:
  ContinuationFailure(const std::string& message, double last_t, Eigen::VectorXd last_rho,
                      SolveReport report);
  double last_t() const { return last_t_; }
  const Eigen::VectorXd& last_rho() const { return last_rho_; }
  const SolveReport& report() const { return report_; }

 private:
  double last_t_;
  Eigen::VectorXd last_rho_;
  SolveReport report_;
};

struct ContinuationResult {
  Eigen::VectorXd rho;
  SolveReport report;
};

/// Checks hypotheses (throws HypothesisFailure), then continues from t = 0 to t = 1.
ContinuationResult continue_to_one(const ProblemSpec& spec);

}  // namespace starshape
