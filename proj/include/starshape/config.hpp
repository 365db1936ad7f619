// Run configuration files.
//
//   # comment
//   [problem]
//   k = 2
//   r1 = 1
//   r2 = 4
//   alpha0 = "(0.6 - 0.05*rho)/rho^2"
//   alpha1 = "0.25/rho"
//   phi = "2.5/rho"
//   [grid]
//   n_theta = 32
//   n_phi = 64
//   [solver]
//   tol = 1e-10
//   [output]
//   dir = "out"
//
// Keys outside the known set are rejected.
#pragma once

#include "starshape/curvop.hpp"

#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <string_view>

namespace starshape {

/// Malformed or unreadable input; maps to exit code 2.
class InputError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct RunConfig {
  ProblemSpec problem;
  std::filesystem::path output_dir = "out";
  bool write_mesh = true;
  bool write_csv = true;
  bool write_report = true;
  std::uint64_t seed = 12345;
  int verbosity = 1;
};

RunConfig parse_config(std::string_view text);
RunConfig load_config(const std::filesystem::path& path);

}  // namespace starshape
