#pragma once

#include <Eigen/Core>

#include <cmath>
#include <stdexcept>

namespace dshfl {

template <typename Scalar>
using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

template <typename Scalar>
using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

/// Model parameters x in R^d.
using ModelVector = Vector<double>;

template <typename Derived>
bool all_finite(const Eigen::MatrixBase<Derived>& v) {
  return v.allFinite();
}

/// Projects g onto the ball of radius `bound`: g if ||g|| <= bound, else
/// g * bound / ||g||.
template <typename Derived>
Vector<typename Derived::Scalar> clip_gradient(const Eigen::MatrixBase<Derived>& g,
                                               typename Derived::Scalar bound) {
  using Scalar = typename Derived::Scalar;
  if (!(bound > Scalar(0))) throw std::invalid_argument("clip_gradient: bound must be positive");
  if (!g.allFinite()) throw std::domain_error("clip_gradient: non-finite gradient");
  const Scalar norm = g.norm();
  if (norm <= bound) return g;
  return g * (bound / norm);
}

}  // namespace dshfl
