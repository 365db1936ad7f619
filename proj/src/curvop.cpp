#include "starshape/curvop.hpp"

#include "parallel.hpp"

#include <Eigen/Eigenvalues>
#include <unsupported/Eigen/AutoDiff>

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>

namespace starshape {

void ProblemSpec::validate() const {
  if (n < 1 || n > kMaxDimension) throw std::invalid_argument("n must lie in [1, 16]");
  if (k < 2 || k > n) throw std::invalid_argument("k must satisfy 2 <= k <= n");
  if (static_cast<int>(alpha.size()) != k)
    throw std::invalid_argument("expected " + std::to_string(k) + " alpha expressions");
  if (!(r1 > 0) || !(r1 < r2)) throw std::invalid_argument("radii must satisfy 0 < r1 < r2");
  if (grid.n_theta < 4 || grid.n_theta > 512)
    throw std::invalid_argument("n_theta must lie in [4, 512]");
  if (grid.n_phi < 8 || grid.n_phi > 1024 || grid.n_phi % 2 != 0)
    throw std::invalid_argument("n_phi must be even and lie in [8, 1024]");
  if (!(solver.tol > 0)) throw std::invalid_argument("solver tolerance must be positive");
  if (solver.max_iter < 1) throw std::invalid_argument("max_iter must be >= 1");
  if (solver.max_halvings < 0) throw std::invalid_argument("max_halvings must be >= 0");
  if (!(solver.dt_min > 0) || !(solver.dt_initial >= solver.dt_min) ||
      !(solver.dt_max >= solver.dt_initial))
    throw std::invalid_argument("continuation steps must satisfy 0 < dt_min <= dt_initial <= dt_max");
  if (solver.hypothesis_samples < 16) throw std::invalid_argument("hypothesis_samples must be >= 16");
  if (solver.threads < 1) throw std::invalid_argument("threads must be >= 1");
}

SphereGrid<double> make_grid(const ProblemSpec& spec) {
  return SphereGrid<double>(spec.grid.n_theta, spec.grid.n_phi);
}

double alpha_blend(const ProblemSpec& spec, const EvalEnv& env, double t) {
  const Eigen::VectorXd e = Eigen::VectorXd::Ones(spec.n);
  const double ratio = sigma(e, spec.k) / sigma(e, spec.k - 1);
  const double target = spec.alpha[static_cast<std::size_t>(spec.k - 1)].evaluate(env);
  if (t == 1.0) return target;
  const double start = spec.phi.evaluate(env) * ratio / env.rho();
  return t * target + (1.0 - t) * start;
}

double quotient_operator(const Eigen::Ref<const Eigen::VectorXd>& lambda,
                         std::span<const double> weights, int k) {
  const auto e = sigma_all(lambda, k);
  if (e(k - 1) == 0) throw SingularQuotientError("sigma_{k-1} vanishes");
  double value = e(k);
  for (std::size_t l = 0; l < weights.size(); ++l) value -= weights[l] * e(static_cast<Eigen::Index>(l));
  return value / e(k - 1);
}

namespace {

// Central-difference step, relative to |X|, for the coefficients along a ray.
constexpr double kRadialStep = 6e-6;

// sigma_k/sigma_{k-1} - sum weights[l] sigma_l/sigma_{k-1} - blend, with the
// sigmas taken from the shape operator invariants.
template <typename Scalar>
Scalar residual_at(const ProblemSpec& spec, const NodeGeometry<Scalar>& geo, Eigen::Index node,
                   const std::array<Scalar, kMaxDimension>& weights, const Scalar& blend) {
  if (spec.n != geo.curvatures.size()) throw std::invalid_argument("curvature dimension differs from n");
  for (int m = 1; m < spec.k; ++m)
    if (!(detail::value_of(geo.sigmas(m)) > 0))
      throw AdmissibilityError("curvature vector outside Gamma_" + std::to_string(spec.k - 1), node);
  Scalar value = geo.sigmas(spec.k);
  for (int l = 0; l < spec.k - 1; ++l) value -= weights[static_cast<std::size_t>(l)] * geo.sigmas(l);
  return value / geo.sigmas(spec.k - 1) - blend;
}

}  // namespace

double node_residual(const ProblemSpec& spec, const NodeGeometry<double>& geo, Eigen::Index node,
                     double t) {
  const EvalEnv env(geo.position.norm(), geo.position);
  std::array<double, kMaxDimension> weights{};
  for (int l = 0; l < spec.k - 1; ++l)
    weights[static_cast<std::size_t>(l)] = t * spec.alpha[static_cast<std::size_t>(l)].evaluate(env);
  return residual_at(spec, geo, node, weights, alpha_blend(spec, env, t));
}

ResidualField residual(const ProblemSpec& spec, const GeometryState<double>& geom, double t) {
  ResidualField f(static_cast<Eigen::Index>(geom.size()));
  for (std::size_t p = 0; p < geom.size(); ++p) {
    const auto node = static_cast<Eigen::Index>(p);
    f(node) = node_residual(spec, geom[p], node, t);
  }
  return f;
}

ResidualField residual(const ProblemSpec& spec, const SphereGrid<double>& grid,
                       const Eigen::Ref<const Eigen::VectorXd>& rho, double t) {
  check_field_size(grid, rho);
  for (Eigen::Index p = 0; p < rho.size(); ++p)
    if (!(rho(p) > 0)) throw GeometryError("radial function must be positive", p);
  ResidualField f(grid.size());
  detail::parallel_chunks(grid.size(), spec.solver.threads,
                          [&](int, std::ptrdiff_t begin, std::ptrdiff_t end) {
                            for (auto p = begin; p < end; ++p) {
                              const auto geo =
                                  node_geometry(grid, rho, grid.ring(p), grid.column(p));
                              f(p) = node_residual(spec, geo, p, t);
                            }
                          });
  return f;
}

Eigen::SparseMatrix<double> jacobian(const ProblemSpec& spec, const SphereGrid<double>& grid,
                                     const Eigen::Ref<const Eigen::VectorXd>& rho, double t) {
  check_field_size(grid, rho);
  using Jet = Eigen::AutoDiffScalar<Eigen::Matrix<double, 9, 1>>;
  constexpr int kCenter = 4;
  const Eigen::Index size = grid.size();
  const int workers = std::max(1, spec.solver.threads);
  std::vector<std::vector<Eigen::Triplet<double>>> parts(static_cast<std::size_t>(workers));

  detail::parallel_chunks(size, workers, [&](int w, std::ptrdiff_t begin, std::ptrdiff_t end) {
    auto& triplets = parts[static_cast<std::size_t>(w)];
    triplets.reserve(static_cast<std::size_t>(9 * (end - begin)));
    for (auto p = begin; p < end; ++p) {
      const Eigen::Index i = grid.ring(p), j = grid.column(p);
      if (!(rho(p) > 0)) throw GeometryError("radial function must be positive", p);
      const auto s = grid.stencil(i, j);
      StencilValues<Jet> values;
      for (std::size_t a = 0; a < 3; ++a)
        for (std::size_t b = 0; b < 3; ++b)
          values[a][b] = Jet(rho(s[a][b]), 9, static_cast<int>(3 * a + b));
      const auto geo = node_geometry(grid, i, j, stencil_jet(grid, values, i));

      // The coefficients see rho only through X = rho(p) x.
      const Eigen::Vector3d position = rho(p) * grid.direction(i, j);
      const EvalEnv env(position.norm(), position);
      const double h = kRadialStep * env.rho();
      auto lift = [&](double value, double slope) {
        Jet out(value, Eigen::Matrix<double, 9, 1>::Zero());
        out.derivatives()(kCenter) = slope;
        return out;
      };
      std::array<Jet, kMaxDimension> weights;
      for (int l = 0; l < spec.k - 1; ++l) {
        const Expr& alpha = spec.alpha[static_cast<std::size_t>(l)];
        weights[static_cast<std::size_t>(l)] =
            lift(t * alpha.evaluate(env), t * radial_derivative(alpha, env, h));
      }
      const double blend_slope = (alpha_blend(spec, env.with_radius(env.rho() + h), t) -
                                  alpha_blend(spec, env.with_radius(env.rho() - h), t)) /
                                 (2.0 * h);
      const Jet f = residual_at(spec, geo, p, weights, lift(alpha_blend(spec, env, t), blend_slope));

      for (std::size_t a = 0; a < 3; ++a)
        for (std::size_t b = 0; b < 3; ++b)
          triplets.emplace_back(p, s[a][b], f.derivatives()(static_cast<Eigen::Index>(3 * a + b)));
    }
  });

  // Entries for a node that appears twice in a stencil are summed here.
  std::vector<Eigen::Triplet<double>> all;
  for (auto& part : parts) all.insert(all.end(), part.begin(), part.end());
  Eigen::SparseMatrix<double> jac(size, size);
  jac.setFromTriplets(all.begin(), all.end());
  jac.makeCompressed();
  return jac;
}

namespace {

void check_alphas(std::span<const double> alphas, int k) {
  if (static_cast<int>(alphas.size()) != k - 1)
    throw std::domain_error("expected " + std::to_string(k - 1) + " lower-order coefficients");
  for (const double a : alphas)
    if (!(a >= 0)) throw std::domain_error("coefficients must be non-negative");
}

}  // namespace

EllipticityResult ellipticity_check(const Eigen::Ref<const Eigen::VectorXd>& lambda,
                                    std::span<const double> alphas, int k) {
  const Eigen::Index n = lambda.size();
  if (k < 2 || k > n) throw std::domain_error("ellipticity_check: need 2 <= k <= n");
  check_alphas(alphas, k);
  if (!in_gamma_cone(lambda, k - 1)) throw std::domain_error("ellipticity_check: lambda outside Gamma_{k-1}");

  const auto e = sigma_all(lambda, k);
  const double denom = e(k - 1) * e(k - 1);
  const Eigen::VectorXd dk1 = sigma_deleted(lambda, k - 1);
  const Eigen::VectorXd dk2 = sigma_deleted(lambda, k - 2);

  // d(sigma_m/sigma_{k-1})/d lambda_i = [sigma_{m-1}(l|i) sigma_{k-1} - sigma_m sigma_{k-2}(l|i)] / sigma_{k-1}^2
  auto quotient_derivative = [&](int m) -> Eigen::VectorXd {
    const Eigen::VectorXd prev =
        m == 0 ? Eigen::VectorXd::Zero(n) : Eigen::VectorXd(sigma_deleted(lambda, m - 1));
    return (prev * e(k - 1) - e(m) * dk2) / denom;
  };

  Eigen::VectorXd diag = (dk1 * e(k - 1) - e(k) * dk2) / denom;
  for (int l = 0; l < k - 1; ++l) diag -= alphas[static_cast<std::size_t>(l)] * quotient_derivative(l);

  EllipticityResult out;
  out.diagonal = diag;
  out.min_eigenvalue = diag.minCoeff();
  out.trace = diag.sum();
  out.elliptic = out.min_eigenvalue > 0;
  return out;
}

double quotient_operator_of_matrix(const Eigen::Ref<const Eigen::MatrixXd>& m,
                                   std::span<const double> alphas, int k) {
  if (m.rows() != m.cols()) throw std::domain_error("matrix must be square");
  check_alphas(alphas, k);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(0.5 * (m + m.transpose()),
                                                     Eigen::EigenvaluesOnly);
  const Eigen::VectorXd lambda = eig.eigenvalues();
  if (k < 2 || k > lambda.size()) throw std::domain_error("need 2 <= k <= n");
  if (!in_gamma_cone(lambda, k - 1)) throw std::domain_error("spectrum outside Gamma_{k-1}");
  return quotient_operator(lambda, alphas, k);
}

bool concavity_check(const Eigen::Ref<const Eigen::MatrixXd>& a,
                     const Eigen::Ref<const Eigen::MatrixXd>& b, std::span<const double> alphas,
                     int k) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) throw std::domain_error("shape mismatch");
  const double ga = quotient_operator_of_matrix(a, alphas, k);
  const double gb = quotient_operator_of_matrix(b, alphas, k);
  const Eigen::MatrixXd mid = 0.5 * (a + b);
  const double gm = quotient_operator_of_matrix(mid, alphas, k);
  return gm >= 0.5 * (ga + gb) - 1e-10;
}

}  // namespace starshape
