#pragma once

#include <cmath>
#include <stdexcept>

#include "pushstab/common.hpp"

namespace pushstab {

/// Cost |x - y|^p on a ball of radius R, with its derived constants.
struct PCost {
  double p;
  double radius;

  PCost(double p_, double radius_) : p(p_), radius(radius_) {
    if (!(p >= 2.0) || !std::isfinite(p)) throw std::invalid_argument("PCost: p must be >= 2");
    if (!(radius > 0.0) || !std::isfinite(radius)) throw std::invalid_argument("PCost: radius must be > 0");
  }

  /// p R^(p-1)
  double lipschitz() const { return p * std::pow(radius, p - 1.0); }
  /// p (p-1) R^(p-2): phi is (-C)-concave, C |x|^2 / 2 - phi is convex.
  double concavity() const { return p * (p - 1.0) * std::pow(radius, p - 2.0); }
  /// 3 / p^(1/(p-1))
  double holder_constant() const { return 3.0 / std::pow(p, 1.0 / (p - 1.0)); }
  /// 1 / (p-1)
  double holder_exponent() const { return 1.0 / (p - 1.0); }
  /// p^2 R^(p-1), Lipschitz constant of the convex side.
  double convex_lipschitz() const { return p * p * std::pow(radius, p - 1.0); }
};

namespace detail {
// |z|^e through exp/log; tiny norms map to zero.
inline double norm_power(double n, double e) { return n < 1e-300 ? 0.0 : std::exp(e * std::log(n)); }
}  // namespace detail

/// grad |z|^p = p z |z|^(p-2); zero at the origin.
template <typename Derived>
Eigen::Matrix<typename Derived::Scalar, Derived::RowsAtCompileTime, 1> grad_xi_p(const Eigen::MatrixBase<Derived>& z,
                                                                                 double p) {
  using Out = Eigen::Matrix<typename Derived::Scalar, Derived::RowsAtCompileTime, 1>;
  const double n = z.norm();
  if (n < 1e-300) return Out::Zero(z.size());
  if (p == 2.0) return 2.0 * z;
  return (p * detail::norm_power(n, p - 2.0)) * z;
}

/// Inverse of grad_xi_p: z / (p^(1/(p-1)) |z|^((p-2)/(p-1))); zero at the origin.
template <typename Derived>
Eigen::Matrix<typename Derived::Scalar, Derived::RowsAtCompileTime, 1> grad_xi_p_inverse(
    const Eigen::MatrixBase<Derived>& z, double p) {
  using Out = Eigen::Matrix<typename Derived::Scalar, Derived::RowsAtCompileTime, 1>;
  const double n = z.norm();
  if (n < 1e-300) return Out::Zero(z.size());
  if (p == 2.0) return 0.5 * z;
  const double denom = std::pow(p, 1.0 / (p - 1.0)) * detail::norm_power(n, (p - 2.0) / (p - 1.0));
  return z / denom;
}

/// Hessian of |z|^p: p |z|^(p-2) (I + (p-2) z z^T / |z|^2).
template <typename Derived>
Mat hessian_xi_p(const Eigen::MatrixBase<Derived>& z, double p) {
  const auto d = z.size();
  const double n = z.norm();
  if (n < 1e-300) return p == 2.0 ? Mat(2.0 * Mat::Identity(d, d)) : Mat(Mat::Zero(d, d));
  const Vec u = z / n;
  return p * detail::norm_power(n, p - 2.0) * (Mat::Identity(d, d) + (p - 2.0) * u * u.transpose());
}

}  // namespace pushstab
