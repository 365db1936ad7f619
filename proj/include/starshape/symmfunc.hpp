// Elementary symmetric functions, Garding cones and the Newton-Maclaurin
// inequalities on real n-vectors.
//
// All functions accept any Eigen vector expression. sigma_k is evaluated with
// the product recurrence prod_i (1 + lambda_i x), coefficient by coefficient,
// which costs O(n k) and never enumerates subsets.
#pragma once

#include <Eigen/Core>

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace starshape {

template <typename Scalar>
using CurvatureVector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

/// Raised when a sigma quotient has a vanishing denominator, which for the
/// solver means the iterate has left the admissible cone.
class SingularQuotientError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

namespace detail {

template <typename Derived>
void check_curvature_vector(const Eigen::MatrixBase<Derived>& lambda) {
  static_assert(Derived::IsVectorAtCompileTime, "curvature vector must be a vector");
  if (lambda.size() < 1) throw std::domain_error("curvature vector is empty");
  if (!lambda.allFinite()) throw std::domain_error("curvature vector has non-finite entries");
}

inline void check_index(Eigen::Index k, Eigen::Index lo, Eigen::Index hi, const char* what) {
  if (k < lo || k > hi) {
    throw std::domain_error(std::string(what) + ": index " + std::to_string(k) +
                            " outside [" + std::to_string(lo) + ", " + std::to_string(hi) + "]");
  }
}

}  // namespace detail

/// Binomial coefficient C(n, k) as a floating value; exact for the sizes used here.
template <typename Scalar = double>
Scalar binomial(Eigen::Index n, Eigen::Index k) {
  if (k < 0 || k > n) return Scalar(0);
  k = std::min(k, n - k);
  Scalar c(1);
  for (Eigen::Index i = 1; i <= k; ++i) c = c * Scalar(n - k + i) / Scalar(i);
  return std::round(c);
}

/// sigma_0 .. sigma_{max_order} of lambda, in that order.
template <typename Derived>
CurvatureVector<typename Derived::Scalar> sigma_all(const Eigen::MatrixBase<Derived>& lambda,
                                                    Eigen::Index max_order) {
  using Scalar = typename Derived::Scalar;
  detail::check_curvature_vector(lambda);
  detail::check_index(max_order, 0, lambda.size(), "sigma_all");
  CurvatureVector<Scalar> e = CurvatureVector<Scalar>::Zero(max_order + 1);
  e(0) = Scalar(1);
  for (Eigen::Index i = 0; i < lambda.size(); ++i) {
    const Eigen::Index top = std::min<Eigen::Index>(i + 1, max_order);
    for (Eigen::Index j = top; j >= 1; --j) e(j) += lambda(i) * e(j - 1);
  }
  return e;
}

template <typename Derived>
typename Derived::Scalar sigma(const Eigen::MatrixBase<Derived>& lambda, Eigen::Index k) {
  detail::check_curvature_vector(lambda);
  detail::check_index(k, 0, lambda.size(), "sigma");
  return sigma_all(lambda, k)(k);
}

/// lambda with entry i removed.
template <typename Derived>
CurvatureVector<typename Derived::Scalar> drop_entry(const Eigen::MatrixBase<Derived>& lambda,
                                                     Eigen::Index i) {
  const Eigen::Index n = lambda.size();
  CurvatureVector<typename Derived::Scalar> out(n - 1);
  out.head(i) = lambda.head(i);
  out.tail(n - 1 - i) = lambda.tail(n - 1 - i);
  return out;
}

/// sigma_j(lambda | i): sigma_j of lambda with entry i deleted, for every i.
/// sigma_j of an empty vector is 1 for j = 0 and 0 otherwise.
template <typename Derived>
CurvatureVector<typename Derived::Scalar> sigma_deleted(const Eigen::MatrixBase<Derived>& lambda,
                                                        Eigen::Index j) {
  using Scalar = typename Derived::Scalar;
  const Eigen::Index n = lambda.size();
  CurvatureVector<Scalar> out(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    if (j == 0) {
      out(i) = Scalar(1);
    } else if (j > n - 1) {
      out(i) = Scalar(0);
    } else {
      out(i) = sigma(drop_entry(lambda, i), j);
    }
  }
  return out;
}

/// d sigma_k / d lambda_i = sigma_{k-1}(lambda | i).
template <typename Derived>
CurvatureVector<typename Derived::Scalar> sigma_gradient(const Eigen::MatrixBase<Derived>& lambda,
                                                         Eigen::Index k) {
  detail::check_curvature_vector(lambda);
  detail::check_index(k, 1, lambda.size(), "sigma_gradient");
  return sigma_deleted(lambda, k - 1);
}

/// Strict membership in the open Garding cone: sigma_j > 0 for 1 <= j <= k.
template <typename Derived>
bool in_gamma_cone(const Eigen::MatrixBase<Derived>& lambda, Eigen::Index k) {
  detail::check_curvature_vector(lambda);
  detail::check_index(k, 1, lambda.size(), "in_gamma_cone");
  const auto e = sigma_all(lambda, k);
  return (e.tail(k).array() > 0).all();
}

/// Relative slack used by the inequality checks.
inline constexpr double kInequalitySlack = 1e-10;

/// k (n-l+1) sigma_{l-1} sigma_k <= l (n-k+1) sigma_l sigma_{k-1}, for 1 <= l < k <= n.
template <typename Derived>
bool newton_maclaurin_holds(const Eigen::MatrixBase<Derived>& lambda, Eigen::Index k,
                            Eigen::Index l) {
  using Scalar = typename Derived::Scalar;
  detail::check_curvature_vector(lambda);
  const Eigen::Index n = lambda.size();
  detail::check_index(k, 2, n, "newton_maclaurin_holds(k)");
  detail::check_index(l, 1, k - 1, "newton_maclaurin_holds(l)");
  const auto e = sigma_all(lambda, k);
  const Scalar lhs = Scalar(k * (n - l + 1)) * e(l - 1) * e(k);
  const Scalar rhs = Scalar(l * (n - k + 1)) * e(l) * e(k - 1);
  return lhs <= rhs + Scalar(kInequalitySlack) * (std::abs(lhs) + std::abs(rhs));
}

/// sigma_k / sigma_l for 0 <= l < k <= n.
template <typename Derived>
typename Derived::Scalar sigma_quotient(const Eigen::MatrixBase<Derived>& lambda, Eigen::Index k,
                                        Eigen::Index l) {
  detail::check_curvature_vector(lambda);
  detail::check_index(k, 1, lambda.size(), "sigma_quotient(k)");
  detail::check_index(l, 0, k - 1, "sigma_quotient(l)");
  const auto e = sigma_all(lambda, k);
  if (e(l) == 0) {
    throw SingularQuotientError("sigma_" + std::to_string(l) + " vanishes in sigma quotient");
  }
  return e(k) / e(l);
}

/// [(sigma_k / C(n,k)) / (sigma_l / C(n,l))]^(1/(k-l)), defined on Gamma_k.
template <typename Derived>
typename Derived::Scalar normalized_quotient(const Eigen::MatrixBase<Derived>& lambda,
                                             Eigen::Index k, Eigen::Index l) {
  using Scalar = typename Derived::Scalar;
  const Eigen::Index n = lambda.size();
  const Scalar q = sigma_quotient(lambda, k, l) * binomial<Scalar>(n, l) / binomial<Scalar>(n, k);
  return std::pow(q, Scalar(1) / Scalar(k - l));
}

/// Normalized quotient monotonicity on Gamma_k: the (k,l) normalized quotient is
/// bounded by the (r,s) one whenever r > s >= 0, k >= r, l >= s.
template <typename Derived>
bool quotient_monotonicity_holds(const Eigen::MatrixBase<Derived>& lambda, Eigen::Index k,
                                 Eigen::Index l, Eigen::Index r, Eigen::Index s) {
  using Scalar = typename Derived::Scalar;
  detail::check_curvature_vector(lambda);
  const Eigen::Index n = lambda.size();
  detail::check_index(k, 1, n, "quotient_monotonicity_holds(k)");
  detail::check_index(l, 0, k - 1, "quotient_monotonicity_holds(l)");
  detail::check_index(s, 0, l, "quotient_monotonicity_holds(s)");
  detail::check_index(r, s + 1, k, "quotient_monotonicity_holds(r)");
  if (!in_gamma_cone(lambda, k)) {
    throw std::domain_error("quotient_monotonicity_holds: lambda outside Gamma_k");
  }
  const Scalar lhs = normalized_quotient(lambda, k, l);
  const Scalar rhs = normalized_quotient(lambda, r, s);
  return lhs <= rhs + Scalar(kInequalitySlack) * (std::abs(lhs) + std::abs(rhs));
}

}  // namespace starshape
