#include "starshape/continuation.hpp"

#include <Eigen/SparseLU>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numbers>

namespace starshape {

bool HypothesisReport::passed() const {
  return std::all_of(checks.begin(), checks.end(), [](const auto& c) { return c.passed; });
}

const HypothesisCheck& HypothesisReport::get(const std::string& name) const {
  for (const auto& c : checks)
    if (c.name == name) return c;
  throw std::out_of_range("no hypothesis check named " + name);
}

HypothesisFailure::HypothesisFailure(HypothesisReport report)
    : std::runtime_error("structural hypotheses not satisfied"), report_(std::move(report)) {}

ContinuationFailure::ContinuationFailure(const std::string& message, double last_t,
                                         Eigen::VectorXd last_rho, SolveReport report)
    : SolverError(message), last_t_(last_t), last_rho_(std::move(last_rho)),
      report_(std::move(report)) {}

namespace {

std::string format_point(const Eigen::Vector3d& x) {
  char buf[128];
  std::snprintf(buf, sizeof buf, "X=(%.6g, %.6g, %.6g), rho=%.6g", x.x(), x.y(), x.z(), x.norm());
  return buf;
}

/// Unit directions on a (samples x samples) polar lattice; both poles included.
std::vector<Eigen::Vector3d> direction_lattice(int samples) {
  std::vector<Eigen::Vector3d> dirs;
  for (int m = 0; m < samples; ++m) {
    const double theta = std::numbers::pi * m / (samples - 1);
    const int n_phi = (m == 0 || m == samples - 1) ? 1 : samples;
    for (int j = 0; j < n_phi; ++j) {
      const double phi = 2.0 * std::numbers::pi * j / n_phi;
      dirs.emplace_back(std::sin(theta) * std::cos(phi), std::sin(theta) * std::sin(phi),
                        std::cos(theta));
    }
  }
  return dirs;
}

std::vector<double> radius_lattice(double lo, double hi, int samples) {
  std::vector<double> r(static_cast<std::size_t>(samples));
  for (int i = 0; i < samples; ++i) r[static_cast<std::size_t>(i)] = lo + (hi - lo) * i / (samples - 1);
  r.back() = hi;
  return r;
}

/// Tracks the minimum margin of one check and its location.
class MarginTracker {
 public:
  MarginTracker(std::string name, bool strict) {
    check_.name = std::move(name);
    check_.strict = strict;
    check_.worst_margin = std::numeric_limits<double>::infinity();
  }
  void add(double margin, const Eigen::Vector3d& where, double tolerance = 0.0) {
    if (margin < check_.worst_margin) {
      check_.worst_margin = margin;
      check_.worst_location = where;
    }
    const bool ok = check_.strict ? margin > 0 : margin >= -tolerance;
    if (!ok) check_.passed = false;
  }
  HypothesisCheck& check() { return check_; }

 private:
  HypothesisCheck check_;
};

template <typename F>
auto at_sample(const Eigen::Vector3d& x, F&& f) {
  try {
    return f();
  } catch (const EvalError& e) {
    throw EvalError(std::string(e.what()) + " while sampling " + format_point(x), e.offset());
  }
}

}  // namespace

HypothesisReport check_hypotheses(const ProblemSpec& spec, int samples) {
  spec.validate();
  if (samples < 16) throw std::invalid_argument("check_hypotheses needs at least 16 samples");
  const int k = spec.k;
  const Eigen::VectorXd ones = Eigen::VectorXd::Ones(spec.n);
  const Eigen::VectorXd sig = sigma_all(ones, k);
  const auto dirs = direction_lattice(samples);

  // sigma_k(e)/rho^k and sum_l alpha_l sigma_l(e)/rho^l at a point.
  auto sides = [&](const EvalEnv& env) {
    const double rho = env.rho();
    const double lhs = sig(k) / std::pow(rho, k);
    double rhs = 0.0;
    for (int l = 0; l < k; ++l)
      rhs += spec.alpha[static_cast<std::size_t>(l)].evaluate(env) * sig(l) / std::pow(rho, l);
    return std::pair{lhs, rhs};
  };

  HypothesisReport report;

  MarginTracker ass1("ASS1", false);
  double ass1_boundary = std::numeric_limits<double>::infinity();
  for (const double rho : radius_lattice(spec.r2, 2.0 * spec.r2, samples)) {
    for (const auto& d : dirs) {
      const EvalEnv env = EvalEnv::from_direction(rho, d);
      const auto [lhs, rhs] = at_sample(env.x(), [&] { return sides(env); });
      const double margin = lhs - rhs;
      ass1.add(margin, env.x(), kAlgebraicSlack * (std::abs(lhs) + std::abs(rhs)));
      if (rho == spec.r2) ass1_boundary = std::min(ass1_boundary, margin);
    }
  }
  ass1.check().boundary_margin = ass1_boundary;
  report.checks.push_back(ass1.check());

  MarginTracker ass2("ASS2", false);
  double ass2_boundary = std::numeric_limits<double>::infinity();
  for (const double rho : radius_lattice(0.5 * spec.r1, spec.r1, samples)) {
    for (const auto& d : dirs) {
      const EvalEnv env = EvalEnv::from_direction(rho, d);
      const auto [lhs, rhs] = at_sample(env.x(), [&] { return sides(env); });
      const double margin = rhs - lhs;
      ass2.add(margin, env.x(), kAlgebraicSlack * (std::abs(lhs) + std::abs(rhs)));
      if (rho == spec.r1) ass2_boundary = std::min(ass2_boundary, margin);
    }
  }
  ass2.check().boundary_margin = ass2_boundary;
  report.checks.push_back(ass2.check());

  // rho^(k-l) alpha_l must be non-increasing along rays inside the shell.
  MarginTracker ass3("ASS3", false);
  MarginTracker alpha_positive("alpha_positive", true);
  std::vector<Expr> scaled;
  for (int l = 0; l < k; ++l) {
    scaled.push_back(Expr::parse("rho^" + std::to_string(k - l) + " * (" +
                                 spec.alpha[static_cast<std::size_t>(l)].to_string() + ")"));
  }
  for (const double rho : radius_lattice(spec.r1, spec.r2, samples)) {
    for (const auto& d : dirs) {
      const EvalEnv env = EvalEnv::from_direction(rho, d);
      for (int l = 0; l < k; ++l) {
        const auto idx = static_cast<std::size_t>(l);
        const double slope =
            at_sample(env.x(), [&] { return radial_derivative(scaled[idx], env, 1e-5 * rho); });
        ass3.add(-slope, env.x(), kDerivativeSlack);
        if (!ass3.check().passed && ass3.check().detail.empty())
          ass3.check().detail = "l=" + std::to_string(l);
        alpha_positive.add(at_sample(env.x(), [&] { return spec.alpha[idx].evaluate(env); }),
                           env.x());
      }
    }
  }
  report.checks.push_back(ass3.check());
  report.checks.push_back(alpha_positive.check());

  // Positivity outside the shell is only advisory.
  auto warn_alpha_outside = [&](double lo, double hi) {
    for (const double rho : radius_lattice(lo, hi, samples)) {
      for (const auto& d : dirs) {
        const EvalEnv env = EvalEnv::from_direction(rho, d);
        for (int l = 0; l < k; ++l) {
          const double a = at_sample(env.x(), [&] {
            return spec.alpha[static_cast<std::size_t>(l)].evaluate(env);
          });
          if (!(a > 0)) {
            report.warnings.push_back("alpha" + std::to_string(l) + " not positive at " +
                                      format_point(env.x()));
            return;
          }
        }
      }
    }
  };
  warn_alpha_outside(0.5 * spec.r1, spec.r1);
  warn_alpha_outside(spec.r2, 2.0 * spec.r2);

  MarginTracker phi_positive("phi_positive", true);
  MarginTracker phi_above("phi_above_one", true);
  MarginTracker phi_below("phi_below_one", true);
  MarginTracker phi_decreasing("phi_decreasing", true);
  for (const double rho : radius_lattice(0.5 * spec.r1, 2.0 * spec.r2, 4 * samples)) {
    for (const auto& d : dirs) {
      const EvalEnv env = EvalEnv::from_direction(rho, d);
      const double value = at_sample(env.x(), [&] { return spec.phi.evaluate(env); });
      phi_positive.add(value, env.x());
      if (rho <= spec.r1) phi_above.add(value - 1.0, env.x());
      if (rho >= spec.r2) phi_below.add(1.0 - value, env.x());
      phi_decreasing.add(
          -at_sample(env.x(), [&] { return radial_derivative(spec.phi, env, 1e-5 * rho); }),
          env.x());
    }
  }
  // The bands must hit the boundary radii exactly.
  for (const auto& d : dirs) {
    const EvalEnv inner = EvalEnv::from_direction(spec.r1, d);
    const EvalEnv outer = EvalEnv::from_direction(spec.r2, d);
    phi_above.add(at_sample(inner.x(), [&] { return spec.phi.evaluate(inner); }) - 1.0, inner.x());
    phi_below.add(1.0 - at_sample(outer.x(), [&] { return spec.phi.evaluate(outer); }), outer.x());
  }
  report.checks.push_back(phi_positive.check());
  report.checks.push_back(phi_above.check());
  report.checks.push_back(phi_below.check());
  report.checks.push_back(phi_decreasing.check());
  return report;
}

double initial_radius(const ProblemSpec& spec) {
  const Eigen::Vector3d axis(0.0, 0.0, 1.0);
  auto gap = [&](double rho) { return spec.phi.evaluate(EvalEnv::from_direction(rho, axis)) - 1.0; };
  double lo = spec.r1, hi = spec.r2;
  const double g_lo = gap(lo), g_hi = gap(hi);
  if (!(g_lo > 0) || !(g_hi < 0)) {
    throw InitializationError("phi - 1 does not change sign on [r1, r2]");
  }
  for (int it = 0; it < 200 && hi - lo > 1e-12; ++it) {
    const double mid = 0.5 * (lo + hi);
    (gap(mid) > 0 ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

Eigen::VectorXd initial_solution(const ProblemSpec& spec) {
  return Eigen::VectorXd::Constant(spec.grid.n_theta * spec.grid.n_phi, initial_radius(spec));
}

namespace {

/// Residual of a trial iterate, or nullopt if it is not admissible.
std::optional<ResidualField> try_residual(const ProblemSpec& spec, const SphereGrid<double>& grid,
                                          const Eigen::VectorXd& rho, double t) {
  if (!(rho.array() > 0).all()) return std::nullopt;
  try {
    return residual(spec, grid, rho, t);
  } catch (const AdmissibilityError&) {
    return std::nullopt;
  } catch (const GeometryError&) {
    return std::nullopt;
  } catch (const SingularQuotientError&) {
    return std::nullopt;
  }
}

}  // namespace

NewtonResult newton_solve(const ProblemSpec& spec, const Eigen::VectorXd& rho0, double t) {
  const auto grid = make_grid(spec);
  check_field_size(grid, rho0);
  NewtonResult result;
  result.rho = rho0;
  auto current = try_residual(spec, grid, result.rho, t);
  if (!current) throw ConeExitError("starting field is not admissible");
  double norm = current->lpNorm<Eigen::Infinity>();
  result.residual_history.push_back(norm);

  Eigen::SparseLU<Eigen::SparseMatrix<double>, Eigen::COLAMDOrdering<int>> lu;
  while (norm > spec.solver.tol) {
    if (result.iterations >= spec.solver.max_iter) {
      throw NewtonDivergence("no convergence after " + std::to_string(spec.solver.max_iter) +
                             " iterations (residual " + std::to_string(norm) + ")");
    }
    Eigen::SparseMatrix<double> jac;
    try {
      jac = jacobian(spec, grid, result.rho, t);
    } catch (const AdmissibilityError& e) {
      throw ConeExitError(std::string("admissibility lost while probing: ") + e.what());
    }
    lu.compute(jac);
    if (lu.info() != Eigen::Success) throw NewtonDivergence("singular Jacobian");
    const Eigen::VectorXd delta = lu.solve(-*current);
    if (lu.info() != Eigen::Success || !delta.allFinite())
      throw NewtonDivergence("linear solve failed");

    bool accepted = false, any_admissible = false;
    double step = 1.0;
    for (int halving = 0; halving <= spec.solver.max_halvings; ++halving, step *= 0.5) {
      const Eigen::VectorXd trial = result.rho + step * delta;
      auto trial_residual = try_residual(spec, grid, trial, t);
      if (!trial_residual) continue;
      any_admissible = true;
      const double trial_norm = trial_residual->lpNorm<Eigen::Infinity>();
      if (trial_norm < norm) {
        result.rho = trial;
        current = std::move(trial_residual);
        norm = trial_norm;
        accepted = true;
        break;
      }
    }
    if (!accepted) {
      if (any_admissible) {
        throw StagnationError("line search exhausted at residual " + std::to_string(norm));
      }
      throw ConeExitError("every trial step left the admissible cone");
    }
    ++result.iterations;
    result.residual_history.push_back(norm);
  }
  return result;
}

StepRecord measure(const ProblemSpec& spec, const SphereGrid<double>& grid,
                   const Eigen::VectorXd& rho, double t) {
  const auto geom = geometry(grid, rho);
  StepRecord rec;
  rec.t = t;
  rec.rho_min = rho.minCoeff();
  rec.rho_max = rho.maxCoeff();
  rec.sigma_min.assign(static_cast<std::size_t>(spec.k), std::numeric_limits<double>::infinity());
  rec.support_min = std::numeric_limits<double>::infinity();
  rec.kappa_abs_max = 0;
  rec.H_max = -std::numeric_limits<double>::infinity();
  rec.kappa_finite = true;
  rec.admissible_ok = true;
  rec.gamma_k = true;
  for (const auto& g : geom) {
    const Eigen::VectorXd kappa = g.curvatures;
    const auto s = sigma_all(kappa, spec.k);
    for (int j = 1; j <= spec.k; ++j) {
      auto& m = rec.sigma_min[static_cast<std::size_t>(j - 1)];
      m = std::min(m, s(j));
    }
    rec.admissible_ok = rec.admissible_ok && in_gamma_cone(kappa, spec.k - 1);
    rec.gamma_k = rec.gamma_k && in_gamma_cone(kappa, spec.k);
    rec.support_min = std::min(rec.support_min, g.support);
    rec.kappa_abs_max = std::max(rec.kappa_abs_max, kappa.cwiseAbs().maxCoeff());
    rec.H_max = std::max(rec.H_max, g.mean_curvature);
    rec.kappa_finite = rec.kappa_finite && kappa.allFinite();
  }
  rec.barrier_ok = rec.rho_min > spec.r1 && rec.rho_max < spec.r2;
  rec.support_ok = rec.support_min > 0;
  rec.residual_inf = rec.admissible_ok ? residual(spec, geom, t).lpNorm<Eigen::Infinity>()
                                       : std::numeric_limits<double>::infinity();
  return rec;
}

namespace {

void note_monitors(const StepRecord& rec, std::vector<std::string>& warnings) {
  char buf[160];
  if (!rec.barrier_ok) {
    std::snprintf(buf, sizeof buf, "t=%.6g: barrier violated, rho in [%.10g, %.10g]", rec.t,
                  rec.rho_min, rec.rho_max);
    warnings.emplace_back(buf);
  }
  if (!rec.support_ok) {
    std::snprintf(buf, sizeof buf, "t=%.6g: support function not positive", rec.t);
    warnings.emplace_back(buf);
  }
  if (!rec.admissible_ok) {
    std::snprintf(buf, sizeof buf, "t=%.6g: curvature left the admissible cone", rec.t);
    warnings.emplace_back(buf);
  }
  if (!rec.kappa_finite) {
    std::snprintf(buf, sizeof buf, "t=%.6g: non-finite curvature", rec.t);
    warnings.emplace_back(buf);
  }
}

double elapsed_ms(std::chrono::steady_clock::time_point since) {
  return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - since).count();
}

}  // namespace

ContinuationResult continue_to_one(const ProblemSpec& spec) {
  spec.validate();
  HypothesisReport hypotheses = check_hypotheses(spec, spec.solver.hypothesis_samples);
  if (!hypotheses.passed()) throw HypothesisFailure(std::move(hypotheses));

  const auto grid = make_grid(spec);
  SolveReport report;
  report.warnings = hypotheses.warnings;

  auto record = [&](const NewtonResult& solved, double t,
                    std::chrono::steady_clock::time_point started) {
    StepRecord rec = measure(spec, grid, solved.rho, t);
    rec.newton_iters = solved.iterations;
    rec.wall_ms = elapsed_ms(started);
    note_monitors(rec, report.warnings);
    report.steps.push_back(std::move(rec));
  };

  auto started = std::chrono::steady_clock::now();
  Eigen::VectorXd rho = initial_solution(spec);
  NewtonResult start;
  try {
    start = newton_solve(spec, rho, 0.0);
  } catch (const SolverError& e) {
    throw ContinuationFailure(std::string("t = 0 solve failed: ") + e.what(), 0.0, rho, report);
  }
  rho = start.rho;
  record(start, 0.0, started);

  double t = 0.0;
  double dt = spec.solver.dt_initial;
  int streak = 0;
  while (t < 1.0) {
    const double next = std::min(1.0, t + dt);
    started = std::chrono::steady_clock::now();
    NewtonResult solved;
    try {
      solved = newton_solve(spec, rho, next);
    } catch (const SolverError& e) {
      dt *= 0.5;
      streak = 0;
      if (dt < spec.solver.dt_min) {
        throw ContinuationFailure(std::string("step size underflow after: ") + e.what(), t, rho,
                                  report);
      }
      continue;
    }
    rho = std::move(solved.rho);
    t = next;
    solved.rho = rho;
    record(solved, t, started);
    if (++streak == 2) {
      dt = std::min(2.0 * dt, spec.solver.dt_max);
      streak = 0;
    }
  }
  report.reached_one = true;
  return {rho, report};
}

}  // namespace starshape
