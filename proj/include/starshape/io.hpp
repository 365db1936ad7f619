// Solution CSV, OBJ surface mesh and JSON reports.
#pragma once

#include "starshape/continuation.hpp"
#include "starshape/spheregeom.hpp"

#include <Eigen/Core>

#include <filesystem>
#include <iosfwd>
#include <string>

namespace starshape {

/// Columns theta,phi,rho; one row per node, theta-major; 17 significant digits.
void write_solution_csv(std::ostream& out, const SphereGrid<double>& grid, const Eigen::VectorXd& rho);
void write_solution_csv(const std::filesystem::path& path, const SphereGrid<double>& grid,
                        const Eigen::VectorXd& rho);

/// Reads a solution CSV and checks that its nodes coincide with the grid.
/// Throws InputError on malformed files or shape mismatch.
Eigen::VectorXd read_solution_csv(std::istream& in, const SphereGrid<double>& grid);
Eigen::VectorXd read_solution_csv(const std::filesystem::path& path, const SphereGrid<double>& grid);

/// Closed triangle mesh of X = rho x: split grid quads plus two pole fans whose
/// apex radius is the mean of the adjacent ring. Faces are outward-oriented.
void write_obj(std::ostream& out, const SphereGrid<double>& grid, const Eigen::VectorXd& rho);
void write_obj(const std::filesystem::path& path, const SphereGrid<double>& grid,
               const Eigen::VectorXd& rho);

std::string report_json(const SolveReport& report);
std::string hypothesis_json(const HypothesisReport& report);
void write_text(const std::filesystem::path& path, const std::string& text);

}  // namespace starshape
