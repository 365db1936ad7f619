// Staggered latitude-longitude grid on S^2, second-order covariant derivatives
// in the round metric, and the geometry of the radial graph X = rho(x) x.
//
// Coordinates are (theta, phi) with theta the polar angle. Tensors are stored
// in coordinate components: sigma = diag(1, sin^2 theta), D_i rho = d_i rho.
// Rings sit at theta_i = (i + 1/2) pi / N_theta, so no node lies on a pole; the
// stencil across a pole reads the antipodal meridian, (-theta, phi) ~ (theta, phi + pi).
#pragma once

#include <Eigen/Core>
#include <Eigen/LU>

#include <array>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>
#include <vector>

namespace starshape {

template <typename Scalar>
using RadialField = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

class GeometryError : public std::runtime_error {
 public:
  GeometryError(const std::string& message, Eigen::Index node)
      : std::runtime_error(message + " at node " + std::to_string(node)), node_(node) {}
  Eigen::Index node() const { return node_; }

 private:
  Eigen::Index node_;
};

template <typename Scalar = double>
class SphereGrid {
 public:
  using Index = Eigen::Index;
  using Vector2 = Eigen::Matrix<Scalar, 2, 1>;
  using Vector3 = Eigen::Matrix<Scalar, 3, 1>;
  using Matrix2 = Eigen::Matrix<Scalar, 2, 2>;

  SphereGrid(Index n_theta, Index n_phi) : n_theta_(n_theta), n_phi_(n_phi) {
    if (n_theta < 4) throw std::invalid_argument("SphereGrid: n_theta must be >= 4");
    if (n_phi < 8 || n_phi % 2 != 0)
      throw std::invalid_argument("SphereGrid: n_phi must be even and >= 8");
    dtheta_ = std::numbers::pi_v<Scalar> / Scalar(n_theta);
    dphi_ = Scalar(2) * std::numbers::pi_v<Scalar> / Scalar(n_phi);
    sin_.resize(n_theta);
    cos_.resize(n_theta);
    for (Index i = 0; i < n_theta; ++i) {
      sin_[i] = std::sin(theta(i));
      cos_[i] = std::cos(theta(i));
    }
  }

  Index n_theta() const { return n_theta_; }
  Index n_phi() const { return n_phi_; }
  Index size() const { return n_theta_ * n_phi_; }
  Scalar dtheta() const { return dtheta_; }
  Scalar dphi() const { return dphi_; }

  Scalar theta(Index i) const { return (Scalar(i) + Scalar(0.5)) * dtheta_; }
  Scalar phi(Index j) const { return Scalar(j) * dphi_; }
  Scalar sin_theta(Index i) const { return sin_[i]; }
  Scalar cos_theta(Index i) const { return cos_[i]; }

  /// Row-major node index, theta-major.
  Index index(Index i, Index j) const { return i * n_phi_ + j; }
  Index ring(Index p) const { return p / n_phi_; }
  Index column(Index p) const { return p % n_phi_; }

  /// Node index for a ring offset that may step one ring past either pole and a
  /// column that may wrap.
  Index wrapped_index(Index i, Index j) const {
    if (i < 0) {
      i = -1 - i;
      j += n_phi_ / 2;
    } else if (i >= n_theta_) {
      i = 2 * n_theta_ - 1 - i;
      j += n_phi_ / 2;
    }
    j %= n_phi_;
    if (j < 0) j += n_phi_;
    return index(i, j);
  }

  Vector3 direction(Index i, Index j) const {
    const Scalar ph = phi(j);
    return Vector3(sin_[i] * std::cos(ph), sin_[i] * std::sin(ph), cos_[i]);
  }
  Vector3 e_theta(Index i, Index j) const {
    const Scalar ph = phi(j);
    return Vector3(cos_[i] * std::cos(ph), cos_[i] * std::sin(ph), -sin_[i]);
  }
  Vector3 e_phi(Index /*i*/, Index j) const {
    const Scalar ph = phi(j);
    return Vector3(-std::sin(ph), std::cos(ph), Scalar(0));
  }

  Matrix2 round_metric(Index i) const {
    Matrix2 s;
    s << Scalar(1), Scalar(0), Scalar(0), sin_[i] * sin_[i];
    return s;
  }
  Matrix2 round_metric_inverse(Index i) const {
    Matrix2 s;
    s << Scalar(1), Scalar(0), Scalar(0), Scalar(1) / (sin_[i] * sin_[i]);
    return s;
  }

  /// The 3x3 stencil around (i, j) after pole and seam wrapping; entry
  /// [a][b] holds the node at ring offset a-1 and column offset b-1.
  std::array<std::array<Index, 3>, 3> stencil(Index i, Index j) const {
    std::array<std::array<Index, 3>, 3> s{};
    for (Index a = 0; a < 3; ++a)
      for (Index b = 0; b < 3; ++b) s[a][b] = wrapped_index(i + a - 1, j + b - 1);
    return s;
  }

 private:
  Index n_theta_, n_phi_;
  Scalar dtheta_, dphi_;
  std::vector<Scalar> sin_, cos_;
};

namespace detail {

inline double value_of(double x) { return x; }
template <typename T>
auto value_of(const T& x) -> decltype(value_of(x.value())) {
  return value_of(x.value());
}

}  // namespace detail

/// Value, covariant gradient and covariant Hessian of a field at one node.
template <typename Scalar>
struct LocalJet {
  Scalar value;
  Eigen::Matrix<Scalar, 2, 1> gradient;
  Eigen::Matrix<Scalar, 2, 2> hessian;
};

template <typename Scalar>
using StencilValues = std::array<std::array<Scalar, 3>, 3>;

/// Jet on ring i from the 3x3 values laid out as SphereGrid::stencil.
template <typename Scalar, typename GridScalar>
LocalJet<Scalar> stencil_jet(const SphereGrid<GridScalar>& grid, const StencilValues<Scalar>& v,
                             Eigen::Index i) {
  const Scalar& c = v[1][1];
  const Scalar& n = v[0][1];
  const Scalar& so = v[2][1];
  const Scalar& w = v[1][0];
  const Scalar& e = v[1][2];
  const GridScalar ht = grid.dtheta(), hp = grid.dphi();

  const Scalar d_t = (so - n) / (GridScalar(2) * ht);
  const Scalar d_p = (e - w) / (GridScalar(2) * hp);
  const Scalar d_tt = (so - GridScalar(2) * c + n) / (ht * ht);
  const Scalar d_pp = (e - GridScalar(2) * c + w) / (hp * hp);
  const Scalar d_tp = ((v[2][2] - v[2][0]) - (v[0][2] - v[0][0])) / (GridScalar(4) * ht * hp);

  // Christoffels of the round metric: G^t_pp = -sin cos, G^p_tp = cot.
  const GridScalar st = grid.sin_theta(i), ct = grid.cos_theta(i);
  LocalJet<Scalar> jet;
  jet.value = c;
  jet.gradient << d_t, d_p;
  const Scalar mixed = d_tp - (ct / st) * d_p;
  jet.hessian << d_tt, mixed, mixed, d_pp + (st * ct) * d_t;
  return jet;
}

template <typename GridScalar, typename Derived>
LocalJet<typename Derived::Scalar> local_jet(const SphereGrid<GridScalar>& grid,
                                             const Eigen::MatrixBase<Derived>& rho, Eigen::Index i,
                                             Eigen::Index j) {
  const auto s = grid.stencil(i, j);
  StencilValues<typename Derived::Scalar> v;
  for (std::size_t a = 0; a < 3; ++a)
    for (std::size_t b = 0; b < 3; ++b) v[a][b] = rho(s[a][b]);
  return stencil_jet(grid, v, i);
}

template <typename Scalar, typename Derived>
void check_field_size(const SphereGrid<Scalar>& grid, const Eigen::MatrixBase<Derived>& rho) {
  if (rho.size() != grid.size()) {
    throw std::invalid_argument("field has " + std::to_string(rho.size()) +
                                " values, grid has " + std::to_string(grid.size()) + " nodes");
  }
}

/// Per-node (D_theta rho, D_phi rho), one row per node.
template <typename Scalar, typename Derived>
Eigen::Matrix<Scalar, Eigen::Dynamic, 2> covariant_gradient(const SphereGrid<Scalar>& grid,
                                                            const Eigen::MatrixBase<Derived>& rho) {
  check_field_size(grid, rho);
  Eigen::Matrix<Scalar, Eigen::Dynamic, 2> out(grid.size(), 2);
  for (Eigen::Index i = 0; i < grid.n_theta(); ++i)
    for (Eigen::Index j = 0; j < grid.n_phi(); ++j)
      out.row(grid.index(i, j)) = local_jet(grid, rho, i, j).gradient.transpose();
  return out;
}

template <typename Scalar>
using Matrix2List = std::vector<Eigen::Matrix<Scalar, 2, 2>>;

/// Per-node D_i D_j rho = d_i d_j rho - Gamma^k_ij d_k rho.
template <typename Scalar, typename Derived>
Matrix2List<Scalar> covariant_hessian(const SphereGrid<Scalar>& grid,
                                      const Eigen::MatrixBase<Derived>& rho) {
  check_field_size(grid, rho);
  Matrix2List<Scalar> out(static_cast<std::size_t>(grid.size()));
  for (Eigen::Index i = 0; i < grid.n_theta(); ++i)
    for (Eigen::Index j = 0; j < grid.n_phi(); ++j)
      out[static_cast<std::size_t>(grid.index(i, j))] = local_jet(grid, rho, i, j).hessian;
  return out;
}

/// Geometry of the radial graph at one node.
template <typename Scalar>
struct NodeGeometry {
  using Vector2 = Eigen::Matrix<Scalar, 2, 1>;
  using Vector3 = Eigen::Matrix<Scalar, 3, 1>;
  using Matrix2 = Eigen::Matrix<Scalar, 2, 2>;

  Vector3 position;        // X = rho x
  Scalar slope_factor;     // v = sqrt(1 + |D rho|^2 / rho^2)
  Vector3 normal;          // outward unit normal
  Matrix2 metric;          // g_ij
  Matrix2 metric_inverse;  // g^ij, closed form
  Matrix2 second_form;     // h_ij
  Matrix2 shape_operator;  // h^i_j = g^ik h_kj
  Vector3 sigmas;          // sigma_0, sigma_1, sigma_2 of the curvatures
  Vector2 curvatures;      // ascending
  Scalar support;          // <X, nu> = rho^2 / sqrt(rho^2 + |D rho|^2)
  Scalar mean_curvature;   // kappa_1 + kappa_2
};

template <typename Scalar>
using GeometryState = std::vector<NodeGeometry<Scalar>>;

/// Geometry at node (i, j) from a precomputed jet. Requires rho > 0.
///
/// sigma_1 and sigma_2 are the trace and determinant of g^{-1/2} h g^{-1/2},
/// so they stay smooth through umbilic points where the sorted curvatures do not.
template <typename Scalar, typename GridScalar>
NodeGeometry<Scalar> node_geometry(const SphereGrid<GridScalar>& grid, Eigen::Index i,
                                   Eigen::Index j, const LocalJet<Scalar>& jet) {
  using std::sqrt;
  using detail::value_of;
  using Matrix2 = Eigen::Matrix<Scalar, 2, 2>;
  using Vector2 = Eigen::Matrix<Scalar, 2, 1>;
  using Vector3 = Eigen::Matrix<Scalar, 3, 1>;
  const Eigen::Index node = grid.index(i, j);
  const Scalar rho = jet.value;
  if (!(value_of(rho) > 0)) throw GeometryError("radial function must be positive", node);

  const Matrix2 sigma = grid.round_metric(i).template cast<Scalar>();
  const Matrix2 sigma_inv = grid.round_metric_inverse(i).template cast<Scalar>();
  const Vector2& d = jet.gradient;
  const Vector2 d_up = sigma_inv * d;  // D^i rho
  const Scalar grad_sq = d.dot(d_up);
  const Scalar rho_sq = rho * rho;
  const Scalar v = sqrt(Scalar(1) + grad_sq / rho_sq);

  NodeGeometry<Scalar> geo;
  const Vector3 x = grid.direction(i, j).template cast<Scalar>();
  geo.position = rho * x;
  geo.slope_factor = v;
  // Tangential part of the normal is the round-sphere gradient divided by rho.
  const Vector3 tangent = d_up(0) * grid.e_theta(i, j).template cast<Scalar>() +
                          (d_up(1) * grid.sin_theta(i)) * grid.e_phi(i, j).template cast<Scalar>();
  geo.normal = (x - tangent / rho) / v;
  geo.metric = rho_sq * sigma + d * d.transpose();
  geo.metric_inverse = (sigma_inv - d_up * d_up.transpose() / (rho_sq * v * v)) / rho_sq;
  geo.second_form = (-jet.hessian + rho * sigma + (Scalar(2) / rho) * d * d.transpose()) / v;
  geo.shape_operator = geo.metric_inverse * geo.second_form;

  // Symmetric similarity g^{-1/2} h g^{-1/2} with the closed-form square root
  // of a 2x2 SPD matrix: sqrt(g) = (g + sqrt(det g) I) / sqrt(tr g + 2 sqrt(det g)).
  const Scalar root_det = sqrt(geo.metric.determinant());
  const Matrix2 shifted = geo.metric + root_det * Matrix2::Identity();
  const Matrix2 g_inv_sqrt = shifted.inverse() * sqrt(geo.metric.trace() + Scalar(2) * root_det);
  const Matrix2 m = g_inv_sqrt * geo.second_form * g_inv_sqrt;
  const Scalar off = (m(0, 1) + m(1, 0)) / Scalar(2);
  const Scalar trace = m(0, 0) + m(1, 1);
  geo.sigmas << Scalar(1), trace, m(0, 0) * m(1, 1) - off * off;
  const Scalar half_gap = (m(0, 0) - m(1, 1)) / Scalar(2);
  const Scalar root = sqrt(half_gap * half_gap + off * off);
  geo.curvatures << trace / Scalar(2) - root, trace / Scalar(2) + root;
  geo.support = rho_sq / sqrt(rho_sq + grad_sq);
  geo.mean_curvature = trace;

  const bool finite = std::isfinite(value_of(trace)) && std::isfinite(value_of(geo.sigmas(2))) &&
                      std::isfinite(value_of(geo.support)) && std::isfinite(value_of(root)) &&
                      std::isfinite(value_of(geo.normal(0))) &&
                      std::isfinite(value_of(geo.normal(1))) &&
                      std::isfinite(value_of(geo.normal(2)));
  if (!finite) throw GeometryError("non-finite geometry", node);
  return geo;
}

template <typename GridScalar, typename Derived>
NodeGeometry<typename Derived::Scalar> node_geometry(const SphereGrid<GridScalar>& grid,
                                                     const Eigen::MatrixBase<Derived>& rho,
                                                     Eigen::Index i, Eigen::Index j) {
  return node_geometry(grid, i, j, local_jet(grid, rho, i, j));
}

template <typename Scalar, typename Derived>
GeometryState<Scalar> geometry(const SphereGrid<Scalar>& grid,
                               const Eigen::MatrixBase<Derived>& rho) {
  check_field_size(grid, rho);
  for (Eigen::Index p = 0; p < rho.size(); ++p)
    if (!(rho(p) > 0)) throw GeometryError("radial function must be positive", p);
  GeometryState<Scalar> out;
  out.reserve(static_cast<std::size_t>(grid.size()));
  for (Eigen::Index i = 0; i < grid.n_theta(); ++i)
    for (Eigen::Index j = 0; j < grid.n_phi(); ++j) out.push_back(node_geometry(grid, rho, i, j));
  return out;
}

/// Samples f(theta, phi) at every node.
template <typename Scalar, typename F>
RadialField<Scalar> sample_field(const SphereGrid<Scalar>& grid, F&& f) {
  RadialField<Scalar> out(grid.size());
  for (Eigen::Index i = 0; i < grid.n_theta(); ++i)
    for (Eigen::Index j = 0; j < grid.n_phi(); ++j)
      out(grid.index(i, j)) = f(grid.theta(i), grid.phi(j));
  return out;
}

}  // namespace starshape
