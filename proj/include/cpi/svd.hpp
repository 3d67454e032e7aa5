// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <random>

#include <Eigen/QR>
#include <Eigen/SVD>

#include "cpi/sparse.hpp"

namespace cpi {

// Leading singular triplets: sigma non-increasing, left/right orthonormal columns.
struct SvdTriplet {
  Vector sigma;
  Matrix left;
  Matrix right;

  Index rank() const { return sigma.size(); }
};

enum class SvdMode { Dense, SubspaceIteration };

// A linear map given only through its action on blocks of vectors.
struct LinearMap {
  Index rows = 0;
  Index cols = 0;
  std::function<Matrix(const Matrix&)> apply;
  std::function<Matrix(const Matrix&)> apply_transpose;

  static LinearMap from_dense(const Matrix& b) {
    return {b.rows(), b.cols(), [&b](const Matrix& x) -> Matrix { return b * x; },
            [&b](const Matrix& y) -> Matrix { return b.transpose() * y; }};
  }
};

struct SubspaceOptions {
  Index oversampling = 10;
  int max_iterations = 200;
  double tol = 1e-10;
  std::uint64_t seed = 0x5eedULL;
};

namespace detail {

// Singular values below this relative level are numerical zeros.
inline double numerical_rank_floor(Index rows, Index cols, double sigma_max) {
  return static_cast<double>(std::max(rows, cols)) * std::numeric_limits<double>::epsilon() * sigma_max;
}

inline Index keep_count(const Vector& sigma, Index rows, Index cols, Index rank_bound, double cutoff) {
  if (sigma.size() == 0 || sigma(0) == 0.0) return 0;
  const double floor = numerical_rank_floor(rows, cols, sigma(0));
  Index k = 0;
  while (k < sigma.size() && k < rank_bound && sigma(k) > floor && sigma(k) >= cutoff) ++k;
  return k;
}

}  // namespace detail

inline SvdTriplet truncated_svd(const Matrix& b, Index rank_bound, double cutoff = 0.0) {
  Eigen::BDCSVD<Matrix> svd(b, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const Index keep = detail::keep_count(svd.singularValues(), b.rows(), b.cols(), rank_bound, cutoff);
  return {svd.singularValues().head(keep), svd.matrixU().leftCols(keep), svd.matrixV().leftCols(keep)};
}

// Subspace iteration on B B^T; only products with B and B^T are used and at
// most rank_bound + oversampling vectors are held at a time.
inline SvdTriplet truncated_svd(const LinearMap& b, Index rank_bound, double cutoff = 0.0,
                                const SubspaceOptions& opts = {}) {
  const Index block = std::min({rank_bound + opts.oversampling, b.rows, b.cols});
  if (block <= 0) return {Vector(0), Matrix(b.rows, 0), Matrix(b.cols, 0)};

  std::mt19937_64 rng(opts.seed);
  std::normal_distribution<double> normal;
  Matrix x(b.rows, block);
  for (Index j = 0; j < block; ++j)
    for (Index i = 0; i < b.rows; ++i) x(i, j) = normal(rng);
  x = Eigen::HouseholderQR<Matrix>(x).householderQ() * Matrix::Identity(b.rows, block);

  Vector previous = Vector::Constant(block, -1.0);
  for (int it = 0; it < opts.max_iterations; ++it) {
    // Rayleigh-Ritz: X^T B = U S V^T gives B ~ (X U) S V^T.
    const Matrix bt_x = b.apply_transpose(x);
    Eigen::JacobiSVD<Matrix> small(bt_x, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const Vector& sigma = small.singularValues();

    bool converged = it > 0;
    const double significant = std::max(cutoff, 1e-8 * sigma(0));
    for (Index i = 0; i < std::min(rank_bound, block) && converged; ++i) {
      if (sigma(i) <= significant) break;
      if (std::abs(sigma(i) - previous(i)) > opts.tol * sigma(i)) converged = false;
    }
    if (converged || sigma(0) == 0.0) {
      const Index keep = detail::keep_count(sigma, b.rows, b.cols, rank_bound, cutoff);
      return {sigma.head(keep), x * small.matrixV().leftCols(keep), small.matrixU().leftCols(keep)};
    }
    previous = sigma;
    x = b.apply(bt_x);
    x = Eigen::HouseholderQR<Matrix>(x).householderQ() * Matrix::Identity(b.rows, block);
  }
  throw Error(ErrorCode::ConvergenceFailure,
              "subspace iteration stagnated after " + std::to_string(opts.max_iterations) + " iterations");
}

inline SvdTriplet truncated_svd(const Matrix& b, SvdMode mode, Index rank_bound, double cutoff = 0.0) {
  if (mode == SvdMode::Dense) return truncated_svd(b, rank_bound, cutoff);
  return truncated_svd(LinearMap::from_dense(b), rank_bound, cutoff);
}

}  // namespace cpi
