#pragma once

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>

#include <cmath>
#include <optional>

#include "cgssm/types.hpp"

namespace cgssm {

/// Replaces a square matrix by (A + A') / 2 in place.
template <typename Derived>
void symmetrize(Eigen::MatrixBase<Derived>& a) {
  a = (0.5 * (a + a.transpose())).eval();
}

template <typename Derived>
typename Derived::Scalar min_eigenvalue(const Eigen::MatrixBase<Derived>& a) {
  using Scalar = typename Derived::Scalar;
  if (a.rows() == 0) return Scalar(0);
  Eigen::SelfAdjointEigenSolver<MatrixX<Scalar>> es(a.derived(),
                                                    Eigen::EigenvaluesOnly);
  return es.eigenvalues()(0);
}

/// Rank-revealing square root of a symmetric PSD matrix: returns C with
/// C C' = A, keeping only eigen-directions with eigenvalue above
/// rel_tol * max eigenvalue. C has as many columns as retained directions.
template <typename Derived>
MatrixX<typename Derived::Scalar> psd_sqrt(
    const Eigen::MatrixBase<Derived>& a,
    typename Derived::Scalar rel_tol = typename Derived::Scalar(1e-12)) {
  using Scalar = typename Derived::Scalar;
  const Index m = a.rows();
  if (m == 0) return MatrixX<Scalar>(0, 0);
  MatrixX<Scalar> sym = a.derived();
  symmetrize(sym);
  Eigen::SelfAdjointEigenSolver<MatrixX<Scalar>> es(sym);
  const auto& ev = es.eigenvalues();
  const Scalar top = ev(m - 1);
  if (!(top > Scalar(0))) return MatrixX<Scalar>(m, 0);
  const Scalar cut = rel_tol * top;
  Index first = 0;
  while (first < m && !(ev(first) > cut)) ++first;
  const Index keep = m - first;
  MatrixX<Scalar> c = es.eigenvectors().rightCols(keep);
  for (Index j = 0; j < keep; ++j) c.col(j) *= std::sqrt(ev(first + j));
  return c;
}

/// Cholesky factorization of a symmetric positive definite matrix. A failed
/// factorization is retried once with 1e-10 * trace / dim added to the
/// diagonal; a second failure leaves the factor invalid.
class SpdFactor {
 public:
  SpdFactor() = default;

  template <typename Derived>
  explicit SpdFactor(const Eigen::MatrixBase<Derived>& a) {
    compute(a);
  }

  template <typename Derived>
  bool compute(const Eigen::MatrixBase<Derived>& a) {
    Matrix sym = a.derived();
    symmetrize(sym);
    llt_.compute(sym);
    jittered_ = false;
    ok_ = llt_.info() == Eigen::Success && positive_diagonal();
    if (!ok_ && sym.rows() > 0) {
      const double jitter = 1e-10 * sym.trace() / double(sym.rows());
      if (jitter > 0.0 && std::isfinite(jitter)) {
        sym.diagonal().array() += jitter;
        llt_.compute(sym);
        jittered_ = true;
        ok_ = llt_.info() == Eigen::Success && positive_diagonal();
      }
    }
    if (sym.rows() == 0) ok_ = true;
    return ok_;
  }

  bool ok() const noexcept { return ok_; }
  bool jittered() const noexcept { return jittered_; }
  Index dim() const { return llt_.rows(); }

  /// ln|A| from the factor's diagonal.
  double log_det() const {
    if (llt_.rows() == 0) return 0.0;
    return 2.0 * llt_.matrixLLT().diagonal().array().log().sum();
  }

  template <typename Rhs>
  Matrix solve(const Eigen::MatrixBase<Rhs>& b) const {
    if (llt_.rows() == 0) return Matrix(0, b.cols());
    return llt_.solve(b);
  }

  Matrix inverse() const {
    return solve(Matrix::Identity(dim(), dim()));
  }

  /// Lower-triangular L with L L' = A.
  Matrix lower() const { return llt_.matrixL(); }

  /// y' A^{-1} y.
  double quad_inv(const Vector& y) const {
    if (llt_.rows() == 0) return 0.0;
    const Vector z = llt_.matrixL().solve(y);
    return z.squaredNorm();
  }

 private:
  bool positive_diagonal() const {
    if (llt_.rows() == 0) return true;
    const auto d = llt_.matrixLLT().diagonal();
    return (d.array() > 0.0).all() && d.allFinite();
  }

  Eigen::LLT<Matrix> llt_;
  bool ok_ = false;
  bool jittered_ = false;
};

inline constexpr double kLog2Pi = 1.8378770664093454835606594728112;

}  // namespace cgssm
