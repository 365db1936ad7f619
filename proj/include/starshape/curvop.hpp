// The homotopy family of curvature equations
//
//   sigma_k/sigma_{k-1} - sum_{l<=k-2} t alpha_l sigma_l/sigma_{k-1} - alpha_{k-1}(X, t) = 0,
//   alpha_{k-1}(X, t) = t alpha_{k-1}(X) + (1-t) phi(|X|) sigma_k(e)/sigma_{k-1}(e) / |X|,
//
// evaluated on principal curvatures of a radial graph, plus its discrete
// linearization and pointwise ellipticity/concavity diagnostics.
#pragma once

#include "starshape/exprlang.hpp"
#include "starshape/spheregeom.hpp"
#include "starshape/symmfunc.hpp"

#include <Eigen/Core>
#include <Eigen/SparseCore>

#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace starshape {

struct GridSpec {
  Eigen::Index n_theta = 32;
  Eigen::Index n_phi = 64;
};

struct SolverSettings {
  double tol = 1e-10;       // residual infinity-norm target
  int max_iter = 50;        // Newton iterations per solve
  int max_halvings = 8;     // backtracking line search
  double dt_initial = 0.1;  // continuation step control
  double dt_max = 0.25;
  double dt_min = 1e-4;
  int hypothesis_samples = 32;
  int threads = 1;  // residual/Jacobian assembly
};

inline constexpr int kMaxDimension = 16;

struct ProblemSpec {
  int k = 2;
  int n = 2;
  double r1 = 1.0;
  double r2 = 2.0;
  std::vector<Expr> alpha;  // alpha_0 .. alpha_{k-1}
  Expr phi = Expr::constant(1.0);
  GridSpec grid;
  SolverSettings solver;

  /// Throws std::invalid_argument on inconsistent settings.
  void validate() const;
};

SphereGrid<double> make_grid(const ProblemSpec& spec);

using ResidualField = Eigen::VectorXd;

/// An iterate whose curvature vector left Gamma_{k-1} at some node.
class AdmissibilityError : public std::runtime_error {
 public:
  AdmissibilityError(const std::string& message, Eigen::Index node)
      : std::runtime_error(message + " at node " + std::to_string(node)), node_(node) {}
  Eigen::Index node() const { return node_; }

 private:
  Eigen::Index node_;
};

/// alpha_{k-1}(X, t).
double alpha_blend(const ProblemSpec& spec, const EvalEnv& env, double t);

/// sigma_k/sigma_{k-1} - sum_{l<=k-2} weights[l] sigma_l/sigma_{k-1}; lambda in Gamma_{k-1}.
double quotient_operator(const Eigen::Ref<const Eigen::VectorXd>& lambda,
                         std::span<const double> weights, int k);

/// Residual at one node, from its geometry.
double node_residual(const ProblemSpec& spec, const NodeGeometry<double>& geo, Eigen::Index node,
                     double t);

ResidualField residual(const ProblemSpec& spec, const GeometryState<double>& geom, double t);

/// Geometry followed by residual.
ResidualField residual(const ProblemSpec& spec, const SphereGrid<double>& grid,
                       const Eigen::Ref<const Eigen::VectorXd>& rho, double t);

/// dF_p/d rho_q of the discrete residual. The geometric part is differentiated
/// in forward mode through the 3x3 stencil of each node; the coefficients,
/// which depend on rho only along the ray, by a central difference.
/// Each row holds at most the 9 stencil entries.
Eigen::SparseMatrix<double> jacobian(const ProblemSpec& spec, const SphereGrid<double>& grid,
                                     const Eigen::Ref<const Eigen::VectorXd>& rho, double t);

struct EllipticityResult {
  bool elliptic;
  double min_eigenvalue;
  double trace;
  Eigen::VectorXd diagonal;  // dG/d lambda_i
};

/// Diagonal derivative of G(lambda) = sigma_k/sigma_{k-1} - sum_{l<=k-2} alphas[l] sigma_l/sigma_{k-1}.
/// alphas holds alpha_0 .. alpha_{k-2}, all >= 0; lambda must lie in Gamma_{k-1}.
EllipticityResult ellipticity_check(const Eigen::Ref<const Eigen::VectorXd>& lambda,
                                    std::span<const double> alphas, int k);

/// G((A+B)/2) >= (G(A) + G(B))/2 - 1e-10 for symmetric A, B with spectra in Gamma_{k-1}.
bool concavity_check(const Eigen::Ref<const Eigen::MatrixXd>& a,
                     const Eigen::Ref<const Eigen::MatrixXd>& b, std::span<const double> alphas,
                     int k);

/// G evaluated on the eigenvalues of a symmetric matrix.
double quotient_operator_of_matrix(const Eigen::Ref<const Eigen::MatrixXd>& m,
                                   std::span<const double> alphas, int k);

}  // namespace starshape
