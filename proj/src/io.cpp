#include "starshape/io.hpp"

#include "starshape/config.hpp"

#include <nlohmann/json.hpp>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace starshape {

namespace {

std::string g17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::ofstream open_for_writing(const std::filesystem::path& path) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out) throw InputError("cannot write " + path.string());
  return out;
}

double parse_double(const std::string& cell, int line) {
  char* end = nullptr;
  const double v = std::strtod(cell.c_str(), &end);
  if (cell.empty() || end != cell.c_str() + cell.size() || !std::isfinite(v))
    throw InputError("csv line " + std::to_string(line) + ": bad number '" + cell + "'");
  return v;
}

}  // namespace

void write_solution_csv(std::ostream& out, const SphereGrid<double>& grid, const Eigen::VectorXd& rho) {
  check_field_size(grid, rho);
  out << "theta,phi,rho\n";
  for (Eigen::Index i = 0; i < grid.n_theta(); ++i)
    for (Eigen::Index j = 0; j < grid.n_phi(); ++j)
      out << g17(grid.theta(i)) << ',' << g17(grid.phi(j)) << ',' << g17(rho(grid.index(i, j)))
          << '\n';
}

void write_solution_csv(const std::filesystem::path& path, const SphereGrid<double>& grid,
                        const Eigen::VectorXd& rho) {
  auto out = open_for_writing(path);
  write_solution_csv(out, grid, rho);
}

Eigen::VectorXd read_solution_csv(std::istream& in, const SphereGrid<double>& grid) {
  std::string line;
  if (!std::getline(in, line)) throw InputError("empty solution file");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != "theta,phi,rho") throw InputError("solution file must start with theta,phi,rho");

  Eigen::VectorXd rho(grid.size());
  Eigen::Index row = 0;
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::stringstream cells(line);
    std::string a, b, c, extra;
    if (!std::getline(cells, a, ',') || !std::getline(cells, b, ',') || !std::getline(cells, c, ',') ||
        std::getline(cells, extra, ','))
      throw InputError("csv line " + std::to_string(line_no) + ": expected three columns");
    if (row >= grid.size()) throw InputError("solution has more rows than the grid has nodes");
    const double theta = parse_double(a, line_no);
    const double phi = parse_double(b, line_no);
    const Eigen::Index i = grid.ring(row), j = grid.column(row);
    if (std::abs(theta - grid.theta(i)) > 1e-12 || std::abs(phi - grid.phi(j)) > 1e-12)
      throw InputError("csv line " + std::to_string(line_no) + ": node does not match the grid");
    rho(row++) = parse_double(c, line_no);
  }
  if (row != grid.size())
    throw InputError("solution has " + std::to_string(row) + " rows, grid has " +
                     std::to_string(grid.size()) + " nodes");
  return rho;
}

Eigen::VectorXd read_solution_csv(const std::filesystem::path& path, const SphereGrid<double>& grid) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open solution file " + path.string());
  return read_solution_csv(in, grid);
}

void write_obj(std::ostream& out, const SphereGrid<double>& grid, const Eigen::VectorXd& rho) {
  check_field_size(grid, rho);
  const Eigen::Index nt = grid.n_theta(), np = grid.n_phi();
  const double north = rho.head(np).mean();
  const double south = rho.tail(np).mean();

  out << "# star-shaped surface, " << nt << " x " << np << " grid\n";
  // Vertex 1 is the north pole, then nodes theta-major, then the south pole.
  out << "v 0 0 " << g17(north) << '\n';
  for (Eigen::Index i = 0; i < nt; ++i) {
    for (Eigen::Index j = 0; j < np; ++j) {
      const Eigen::Vector3d x = rho(grid.index(i, j)) * grid.direction(i, j);
      out << "v " << g17(x.x()) << ' ' << g17(x.y()) << ' ' << g17(x.z()) << '\n';
    }
  }
  out << "v 0 0 " << g17(-south) << '\n';

  const auto vid = [&](Eigen::Index i, Eigen::Index j) { return 2 + grid.index(i, j % np); };
  const Eigen::Index north_id = 1, south_id = grid.size() + 2;
  for (Eigen::Index j = 0; j < np; ++j) out << "f " << north_id << ' ' << vid(0, j) << ' ' << vid(0, j + 1) << '\n';
  for (Eigen::Index i = 0; i + 1 < nt; ++i) {
    for (Eigen::Index j = 0; j < np; ++j) {
      out << "f " << vid(i, j) << ' ' << vid(i + 1, j) << ' ' << vid(i + 1, j + 1) << '\n';
      out << "f " << vid(i, j) << ' ' << vid(i + 1, j + 1) << ' ' << vid(i, j + 1) << '\n';
    }
  }
  for (Eigen::Index j = 0; j < np; ++j)
    out << "f " << south_id << ' ' << vid(nt - 1, j + 1) << ' ' << vid(nt - 1, j) << '\n';
}

void write_obj(const std::filesystem::path& path, const SphereGrid<double>& grid,
               const Eigen::VectorXd& rho) {
  auto out = open_for_writing(path);
  write_obj(out, grid, rho);
}

std::string report_json(const SolveReport& report) {
  nlohmann::ordered_json steps = nlohmann::ordered_json::array();
  for (const auto& s : report.steps) {
    nlohmann::ordered_json row;
    row["t"] = s.t;
    row["newton_iters"] = s.newton_iters;
    row["residual_inf"] = s.residual_inf;
    row["rho_min"] = s.rho_min;
    row["rho_max"] = s.rho_max;
    row["support_min"] = s.support_min;
    for (std::size_t j = 0; j < s.sigma_min.size(); ++j)
      row["sigma" + std::to_string(j + 1) + "_min"] = s.sigma_min[j];
    row["H_max"] = s.H_max;
    row["wall_ms"] = s.wall_ms;
    row["kappa_abs_max"] = s.kappa_abs_max;
    row["barrier_ok"] = s.barrier_ok;
    row["support_ok"] = s.support_ok;
    row["admissible_ok"] = s.admissible_ok;
    row["gamma_k"] = s.gamma_k;
    steps.push_back(std::move(row));
  }
  nlohmann::ordered_json doc;
  doc["steps"] = std::move(steps);
  doc["reached_one"] = report.reached_one;
  doc["warnings"] = report.warnings;
  return doc.dump(2) + "\n";
}

std::string hypothesis_json(const HypothesisReport& report) {
  nlohmann::ordered_json checks = nlohmann::ordered_json::array();
  for (const auto& c : report.checks) {
    nlohmann::ordered_json row;
    row["name"] = c.name;
    row["status"] = c.passed ? "pass" : "fail";
    row["strict"] = c.strict;
    row["worst_margin"] = c.worst_margin;
    row["worst_location"] = {c.worst_location.x(), c.worst_location.y(), c.worst_location.z()};
    row["worst_rho"] = c.worst_location.norm();
    if (c.boundary_margin) row["boundary_margin"] = *c.boundary_margin;
    if (!c.detail.empty()) row["detail"] = c.detail;
    checks.push_back(std::move(row));
  }
  nlohmann::ordered_json doc;
  doc["passed"] = report.passed();
  doc["checks"] = std::move(checks);
  doc["warnings"] = report.warnings;
  return doc.dump(2) + "\n";
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  auto out = open_for_writing(path);
  out << text;
}

}  // namespace starshape
