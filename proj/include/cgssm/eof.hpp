#pragma once

#include "cgssm/types.hpp"

namespace cgssm {

/// Empirical orthogonal functions of a space-time data matrix.
struct EofBasis {
  Matrix Theta;      // p x k, orthonormal columns
  Vector explained;  // k fractions of total variance, non-increasing
  Vector col_means;  // p temporal means removed before the decomposition
  Vector col_scales; // p, ones unless standardized
};

/// Centres each series over time (and scales it to unit variance when
/// `standardize`), decomposes the n x p matrix and keeps the leading k <=
/// k_max directions whose explained fraction is at least `threshold`.
/// For p > n the decomposition goes through the n x n Gram matrix. Each
/// column's entry of largest magnitude is made positive.
EofBasis compute_eof(const Matrix& data, double threshold, Index k_max,
                     bool standardize = false);

}  // namespace cgssm
