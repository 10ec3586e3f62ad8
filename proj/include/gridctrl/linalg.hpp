#pragma once

#include <compare>
#include <vector>

#include <Eigen/Dense>

namespace gridctrl {

template <typename Scalar>
using MatrixX = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
template <typename Scalar>
using VectorX = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

// Relative singular-value threshold used for every rank decision.
inline constexpr double kRankTolerance = 1e-8;

// Number of singular values above tol * largest.
template <typename Derived>
int numerical_rank(const Eigen::MatrixBase<Derived>& m, double tol = kRankTolerance) {
  using Scalar = typename Derived::Scalar;
  if (m.rows() == 0 || m.cols() == 0) return 0;
  Eigen::JacobiSVD<MatrixX<Scalar>> svd(m.derived().template cast<Scalar>());
  const auto& s = svd.singularValues();
  if (s.size() == 0 || s(0) == Scalar(0)) return 0;
  int rank = 0;
  for (Eigen::Index i = 0; i < s.size(); ++i) {
    if (s(i) > Scalar(tol) * s(0)) ++rank;
  }
  return rank;
}

// HVDC terminals or any other unordered-by-meaning pair of bus ids.
struct BusPair {
  int m = 0;
  int n = 0;

  auto operator<=>(const BusPair&) const = default;
};

}  // namespace gridctrl
