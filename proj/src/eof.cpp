#include "cgssm/eof.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include <algorithm>
#include <cmath>

namespace cgssm {

EofBasis compute_eof(const Matrix& data, double threshold, Index k_max,
                     bool standardize) {
  const Index n = data.rows();
  const Index p = data.cols();
  if (n < 2 || p < 1) throw DataError("eof: need at least 2 time points and 1 series");
  if (!data.allFinite()) throw DataError("eof: data contain non-finite values");
  if (!(threshold >= 0.0 && threshold < 1.0)) {
    throw ConfigError("eof: threshold must lie in [0, 1)");
  }
  EofBasis out;
  out.col_means = data.colwise().mean().transpose();
  Matrix X = data.rowwise() - out.col_means.transpose();
  out.col_scales = Vector::Ones(p);
  if (standardize) {
    for (Index j = 0; j < p; ++j) {
      const double sd = std::sqrt(X.col(j).squaredNorm() / double(n - 1));
      if (sd > 0.0) {
        out.col_scales(j) = sd;
        X.col(j) /= sd;
      }
    }
  }

  // squared singular values (descending) and right singular vectors
  Vector s2;
  Matrix V;
  const Index rank_max = std::min(n, p);
  if (p > n) {
    Eigen::SelfAdjointEigenSolver<Matrix> es(X * X.transpose());
    s2 = es.eigenvalues().reverse().cwiseMax(0.0);
    const Matrix U = es.eigenvectors().rowwise().reverse();
    V.resize(p, rank_max);
    for (Index j = 0; j < rank_max; ++j) {
      const double s = std::sqrt(s2(j));
      V.col(j) = s > 0.0 ? (X.transpose() * U.col(j) / s).eval()
                         : Vector::Zero(p).eval();
    }
  } else {
    Eigen::BDCSVD<Matrix> svd(X, Eigen::ComputeThinV);
    s2 = svd.singularValues().array().square();
    V = svd.matrixV();
  }
  const double total = s2.sum();
  if (!(total > 0.0) || s2(0) <= 1e-14 * X.cwiseAbs2().sum()) {
    throw DataError("eof: data have zero variance; basis is degenerate");
  }
  Index k = 0;
  while (k < std::min(k_max, rank_max) && s2(k) / total >= threshold &&
         s2(k) > 1e-12 * s2(0)) {
    ++k;
  }
  if (k == 0) throw DataError("eof: no component reaches the threshold");
  out.Theta = V.leftCols(k);
  out.explained = s2.head(k) / total;
  for (Index j = 0; j < k; ++j) {
    Index arg = 0;
    out.Theta.col(j).cwiseAbs().maxCoeff(&arg);
    if (out.Theta(arg, j) < 0.0) out.Theta.col(j) *= -1.0;
  }
  return out;
}

}  // namespace cgssm
