#pragma once

#include <Eigen/Dense>

namespace geneprofile {

using Eigen::Index;
using Eigen::MatrixXd;
using Eigen::VectorXd;

template <typename Scalar>
using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
template <typename Scalar>
using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

/// Singular values below this fraction of the largest one count as zero.
inline constexpr double kRankTolerance = 1e-10;

/// Numerical rank by SVD with a relative singular-value cutoff.
template <typename Derived>
Index numerical_rank(const Eigen::MatrixBase<Derived>& m,
                     typename Derived::RealScalar rel_tol = kRankTolerance) {
  using Scalar = typename Derived::Scalar;
  if (m.rows() == 0 || m.cols() == 0) return 0;
  const Eigen::JacobiSVD<Matrix<Scalar>> svd(m.eval());
  const auto& sv = svd.singularValues();
  if (sv.size() == 0 || sv(0) == 0) return 0;
  const auto cutoff = rel_tol * sv(0);
  return static_cast<Index>((sv.array() > cutoff).count());
}

template <typename Scalar>
struct LeastSquaresSolution {
  Vector<Scalar> coef;
  Vector<Scalar> residuals;
  Scalar rss{};
  // sqrt of the diagonal of (X'X)^-1
  Vector<Scalar> unscaled_se;
};

/// Least squares by Householder QR. `x` must have full column rank; callers
/// check that with numerical_rank first.
template <typename DerivedX, typename DerivedY>
LeastSquaresSolution<typename DerivedX::Scalar> solve_least_squares(
    const Eigen::MatrixBase<DerivedX>& x, const Eigen::MatrixBase<DerivedY>& y) {
  using Scalar = typename DerivedX::Scalar;
  const Index k = x.cols();
  const Eigen::HouseholderQR<Matrix<Scalar>> qr(x.eval());

  LeastSquaresSolution<Scalar> out;
  out.coef = qr.solve(y.eval());
  out.residuals = y - x * out.coef;
  out.rss = out.residuals.squaredNorm();

  // (X'X)^-1 = R^-1 R^-T, so its diagonal is the squared row norms of R^-1.
  const Matrix<Scalar> r = qr.matrixQR().topLeftCorner(k, k).template triangularView<Eigen::Upper>();
  const Matrix<Scalar> r_inv =
      r.template triangularView<Eigen::Upper>().solve(Matrix<Scalar>::Identity(k, k));
  out.unscaled_se = r_inv.rowwise().norm();
  return out;
}

}  // namespace geneprofile
