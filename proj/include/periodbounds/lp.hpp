#pragma once

#include <cmath>

#include <Eigen/Core>

namespace periodbounds {

// |x|^p with the two cheap exponents special-cased.
template <typename Scalar>
inline Scalar abs_pow(Scalar x, Scalar p) {
  const Scalar a = std::abs(x);
  if (p == Scalar(2)) return a * a;
  if (p == Scalar(1)) return a;
  return std::pow(a, p);
}

/// Sum of |x_i|^p over a dense expression.
template <typename Derived>
typename Derived::Scalar lp_power(const Eigen::DenseBase<Derived> &x, typename Derived::Scalar p) {
  using Scalar = typename Derived::Scalar;
  if (p == Scalar(2)) return x.derived().array().square().sum();
  return x.derived().array().abs().pow(p).sum();
}

template <typename Derived>
typename Derived::Scalar lp_norm(const Eigen::DenseBase<Derived> &x, typename Derived::Scalar p) {
  using Scalar = typename Derived::Scalar;
  if (p == Scalar(2)) return x.derived().matrix().norm();
  return std::pow(lp_power(x, p), Scalar(1) / p);
}

/// Weighted norm (sum_i w_i |x_i|^p)^(1/p): the L^p norm of a finite atom space.
template <typename DerivedX, typename DerivedW>
typename DerivedX::Scalar weighted_lp_norm(const Eigen::DenseBase<DerivedX> &x,
                                           const Eigen::DenseBase<DerivedW> &weights,
                                           typename DerivedX::Scalar p) {
  using Scalar = typename DerivedX::Scalar;
  const auto a = x.derived().array().abs();
  if (p == Scalar(2)) return std::sqrt((weights.derived().array() * a.square()).sum());
  return std::pow((weights.derived().array() * a.pow(p)).sum(), Scalar(1) / p);
}

} // namespace periodbounds
