// Shared fixtures for the test binaries.
#pragma once

#include "starshape/config.hpp"
#include "starshape/curvop.hpp"

#include <filesystem>
#include <string>

namespace starshape::testing {

inline std::filesystem::path config_path(const std::string& name) {
  return std::filesystem::path(STARSHAPE_CONFIG_DIR) / name;
}

/// k = 2, n = 2, alpha_1 = 0.25/rho, alpha_0 = (0.6 - 0.05 rho)/rho^2, phi = 2.5/rho on [1, 4].
/// Constant solutions: rho = 2.5 at t = 0, rho = 2 at t = 1.
inline ProblemSpec benchmark_spec(Eigen::Index n_theta = 32, Eigen::Index n_phi = 64) {
  ProblemSpec spec;
  spec.k = 2;
  spec.n = 2;
  spec.r1 = 1.0;
  spec.r2 = 4.0;
  spec.alpha = {Expr::parse("(0.6 - 0.05*rho)/rho^2"), Expr::parse("0.25/rho")};
  spec.phi = Expr::parse("2.5/rho");
  spec.grid = {n_theta, n_phi};
  return spec;
}

inline ProblemSpec nonradial_spec() {
  ProblemSpec spec = benchmark_spec();
  spec.alpha[0] = Expr::parse("(0.6 - 0.05*rho)*(1 + 0.05*u)/rho^2");
  return spec;
}

inline std::filesystem::path scratch_dir(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / ("starshape_test_" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

}  // namespace starshape::testing
