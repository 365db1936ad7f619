#include "starshape/commands.hpp"

#include "starshape/config.hpp"
#include "starshape/continuation.hpp"
#include "starshape/io.hpp"

#include <cstdio>
#include <ostream>

namespace starshape {

namespace {

RunConfig load(const std::filesystem::path& path, const CommandOptions& options) {
  RunConfig cfg = load_config(path);
  if (options.output_dir) cfg.output_dir = *options.output_dir;
  cfg.problem.solver.threads = options.threads;
  return cfg;
}

void print_hypotheses(const HypothesisReport& report, std::ostream& out) {
  char buf[200];
  std::snprintf(buf, sizeof buf, "%-16s %-6s %16s %12s\n", "check", "status", "worst margin", "at rho");
  out << buf;
  for (const auto& c : report.checks) {
    std::snprintf(buf, sizeof buf, "%-16s %-6s %16.8g %12.6g", c.name.c_str(),
                  c.passed ? "pass" : "fail", c.worst_margin, c.worst_location.norm());
    out << buf;
    if (c.boundary_margin) {
      std::snprintf(buf, sizeof buf, "   boundary margin %.8g", *c.boundary_margin);
      out << buf;
    }
    if (!c.passed) {
      std::snprintf(buf, sizeof buf, "   fail at rho=%g", c.worst_location.norm());
      out << buf;
      if (!c.detail.empty()) out << " (" << c.detail << ")";
    }
    out << '\n';
  }
  for (const auto& w : report.warnings) out << "warning: " << w << '\n';
}

void print_step(const StepRecord& s, std::ostream& out) {
  char buf[240];
  std::snprintf(buf, sizeof buf,
                "t=%-8.5g iters=%-2d |F|=%-10.3e rho=[%.10g, %.10g] s_min=%.6g sigma_min=(%.4g",
                s.t, s.newton_iters, s.residual_inf, s.rho_min, s.rho_max, s.support_min,
                s.sigma_min.empty() ? 0.0 : s.sigma_min[0]);
  out << buf;
  for (std::size_t j = 1; j < s.sigma_min.size(); ++j) {
    std::snprintf(buf, sizeof buf, ", %.4g", s.sigma_min[j]);
    out << buf;
  }
  std::snprintf(buf, sizeof buf, ") H_max=%.6g %.1fms\n", s.H_max, s.wall_ms);
  out << buf;
}

template <typename Body>
int guarded(std::ostream& err, Body&& body) {
  try {
    return body();
  } catch (const InputError& e) {
    err << "error: " << e.what() << '\n';
    return kExitInputError;
  } catch (const EvalError& e) {
    err << "error: " << e.what() << '\n';
    return kExitInputError;
  } catch (const std::filesystem::filesystem_error& e) {
    err << "error: " << e.what() << '\n';
    return kExitInputError;
  }
}

}  // namespace

int cmd_check(const std::filesystem::path& config, const CommandOptions& options, std::ostream& out,
              std::ostream& err) {
  return guarded(err, [&] {
    const RunConfig cfg = load(config, options);
    const HypothesisReport report =
        check_hypotheses(cfg.problem, cfg.problem.solver.hypothesis_samples);
    print_hypotheses(report, out);
    if (cfg.write_report) write_text(cfg.output_dir / "hypotheses.json", hypothesis_json(report));
    out << (report.passed() ? "all hypotheses pass\n" : "hypotheses violated\n");
    return report.passed() ? kExitSuccess : kExitFailure;
  });
}

int cmd_solve(const std::filesystem::path& config, const CommandOptions& options, std::ostream& out,
              std::ostream& err) {
  return guarded(err, [&]() -> int {
    const RunConfig cfg = load(config, options);
    const auto grid = make_grid(cfg.problem);
    ContinuationResult result;
    try {
      result = continue_to_one(cfg.problem);
    } catch (const HypothesisFailure& e) {
      print_hypotheses(e.report(), out);
      if (cfg.write_report) write_text(cfg.output_dir / "hypotheses.json", hypothesis_json(e.report()));
      err << "refusing to solve: hypotheses violated\n";
      return kExitFailure;
    } catch (const ContinuationFailure& e) {
      for (const auto& s : e.report().steps) print_step(s, out);
      if (cfg.write_report) write_text(cfg.output_dir / "report.json", report_json(e.report()));
      char buf[64];
      std::snprintf(buf, sizeof buf, "%.10g", e.last_t());
      err << "continuation failed; last good t=" << buf << ": " << e.what() << '\n';
      return kExitContinuation;
    } catch (const SolverError& e) {
      err << "continuation failed: " << e.what() << '\n';
      return kExitContinuation;
    }

    if (cfg.verbosity > 0)
      for (const auto& s : result.report.steps) print_step(s, out);
    for (const auto& w : result.report.warnings) out << "warning: " << w << '\n';
    if (cfg.write_csv) write_solution_csv(cfg.output_dir / "solution.csv", grid, result.rho);
    if (cfg.write_mesh) write_obj(cfg.output_dir / "surface.obj", grid, result.rho);
    if (cfg.write_report) write_text(cfg.output_dir / "report.json", report_json(result.report));
    char buf[128];
    std::snprintf(buf, sizeof buf, "reached t=1: rho in [%.12g, %.12g]\n", result.rho.minCoeff(),
                  result.rho.maxCoeff());
    out << buf;
    return kExitSuccess;
  });
}

int cmd_verify(const std::filesystem::path& solution, const std::filesystem::path& config,
               const CommandOptions& options, std::ostream& out, std::ostream& err) {
  return guarded(err, [&]() -> int {
    const RunConfig cfg = load(config, options);
    const auto grid = make_grid(cfg.problem);
    const Eigen::VectorXd rho = read_solution_csv(solution, grid);
    StepRecord rec;
    try {
      rec = measure(cfg.problem, grid, rho, 1.0);
    } catch (const GeometryError& e) {
      out << "FAIL: " << e.what() << '\n';
      return kExitFailure;
    }
    const double limit = 10.0 * cfg.problem.solver.tol;
    const bool residual_ok = rec.residual_inf <= limit;
    print_step(rec, out);
    auto line = [&](const char* name, bool ok) {
      out << (ok ? "pass " : "FAIL ") << name << '\n';
    };
    char buf[96];
    std::snprintf(buf, sizeof buf, "residual <= %.3g", limit);
    line(buf, residual_ok);
    line("admissible cone", rec.admissible_ok);
    line("support positive", rec.support_ok);
    line("barrier r1 < rho < r2", rec.barrier_ok);
    line("curvatures finite", rec.kappa_finite);
    out << "k-convex (reported only): " << (rec.gamma_k ? "yes" : "no") << '\n';
    const bool ok = residual_ok && rec.admissible_ok && rec.support_ok && rec.barrier_ok && rec.kappa_finite;
    return ok ? kExitSuccess : kExitFailure;
  });
}

int cmd_export(const std::filesystem::path& solution, const std::filesystem::path& config,
               ExportFormat format, const std::filesystem::path& destination,
               const CommandOptions& options, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    const RunConfig cfg = load(config, options);
    const auto grid = make_grid(cfg.problem);
    const Eigen::VectorXd rho = read_solution_csv(solution, grid);
    if (format == ExportFormat::Obj) {
      write_obj(destination, grid, rho);
    } else {
      write_solution_csv(destination, grid, rho);
    }
    out << "wrote " << destination.string() << '\n';
    return kExitSuccess;
  });
}

}  // namespace starshape
