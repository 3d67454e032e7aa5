// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <random>

#include "support/oracles.hpp"

using namespace cpi;

namespace {

double orthonormality_defect(const Matrix& x) {
  return (x.transpose() * x - Matrix::Identity(x.cols(), x.cols())).cwiseAbs().maxCoeff();
}

// Matrix with prescribed singular values.
Matrix with_spectrum(Index rows, Index cols, const Vector& sigma, std::mt19937_64& rng) {
  const Matrix u = Eigen::HouseholderQR<Matrix>(oracle::random_matrix(rows, sigma.size(), rng)).householderQ() *
                   Matrix::Identity(rows, sigma.size());
  const Matrix w = Eigen::HouseholderQR<Matrix>(oracle::random_matrix(cols, sigma.size(), rng)).householderQ() *
                   Matrix::Identity(cols, sigma.size());
  return u * sigma.asDiagonal() * w.transpose();
}

}  // namespace

TEST(TruncatedSvd, Diagonal) {
  Matrix b = Matrix::Zero(3, 3);
  b.diagonal() << 1, 3, 2;
  for (SvdMode mode : {SvdMode::Dense, SvdMode::SubspaceIteration}) {
    const SvdTriplet s = truncated_svd(b, mode, 3);
    ASSERT_EQ(s.rank(), 3);
    EXPECT_NEAR(s.sigma(0), 3.0, 1e-12);
    EXPECT_NEAR(s.sigma(1), 2.0, 1e-12);
    EXPECT_NEAR(s.sigma(2), 1.0, 1e-12);
  }
}

TEST(TruncatedSvd, RankOne) {
  std::mt19937_64 rng(31);
  const Vector u = oracle::random_matrix(7, 1, rng);
  const Vector w = oracle::random_matrix(4, 1, rng);
  const Matrix b = u * w.transpose();
  for (SvdMode mode : {SvdMode::Dense, SvdMode::SubspaceIteration}) {
    const SvdTriplet s = truncated_svd(b, mode, 4);
    ASSERT_EQ(s.rank(), 1);
    EXPECT_NEAR(s.sigma(0), u.norm() * w.norm(), 1e-12 * u.norm() * w.norm());
  }
}

TEST(TruncatedSvd, ModesAgreeOnRandomMatrix) {
  std::mt19937_64 rng(32);
  Vector sigma(40);
  for (Index i = 0; i < 40; ++i) sigma(i) = std::pow(10.0, -0.2 * static_cast<double>(i));
  const Matrix b = with_spectrum(200, 40, sigma, rng);
  const SvdTriplet dense = truncated_svd(b, SvdMode::Dense, 40);
  const SvdTriplet iter = truncated_svd(b, SvdMode::SubspaceIteration, 40);
  ASSERT_EQ(dense.rank(), 40);
  ASSERT_EQ(iter.rank(), 40);
  for (Index i = 0; i < 40; ++i) {
    EXPECT_NEAR(iter.sigma(i), dense.sigma(i), 1e-8 * dense.sigma(i)) << i;
    EXPECT_NEAR(dense.sigma(i), sigma(i), 1e-10 * sigma(0)) << i;
  }
  EXPECT_LE(orthonormality_defect(iter.left), 1e-8);
  EXPECT_LE(orthonormality_defect(iter.right), 1e-8);
}

TEST(TruncatedSvd, TruncationErrorEqualsNextSingularValue) {
  std::mt19937_64 rng(33);
  const Matrix b = oracle::random_matrix(60, 25, rng);
  const Vector all = Eigen::JacobiSVD<Matrix>(b).singularValues();
  for (Index r : {1, 5, 12, 24}) {
    for (SvdMode mode : {SvdMode::Dense, SvdMode::SubspaceIteration}) {
      const SvdTriplet s = truncated_svd(b, mode, r);
      ASSERT_EQ(s.rank(), r);
      const Matrix approx = s.left * s.sigma.asDiagonal() * s.right.transpose();
      const double err = Eigen::JacobiSVD<Matrix>(b - approx).singularValues()(0);
      EXPECT_NEAR(err, all(r), 1e-8 * all(0)) << "r=" << r;
    }
  }
}

TEST(TruncatedSvd, CutoffAndRankFloor) {
  std::mt19937_64 rng(34);
  Vector sigma(6);
  sigma << 10, 5, 1, 1e-3, 1e-20, 0;
  const Matrix b = with_spectrum(30, 12, sigma, rng);
  EXPECT_EQ(truncated_svd(b, 12, 0.5).rank(), 3);
  EXPECT_EQ(truncated_svd(b, 12).rank(), 4);
  EXPECT_EQ(truncated_svd(b, SvdMode::SubspaceIteration, 12, 0.5).rank(), 3);
  EXPECT_EQ(truncated_svd(Matrix::Zero(5, 3), 3).rank(), 0);
}

TEST(TruncatedSvd, ImplicitMapNeverNeedsTheMatrix) {
  std::mt19937_64 rng(35);
  const Matrix b = oracle::random_matrix(80, 30, rng);
  LinearMap map;
  map.rows = 80;
  map.cols = 30;
  int products = 0;
  map.apply = [&](const Matrix& x) -> Matrix {
    ++products;
    EXPECT_LE(x.cols(), 30);
    return b * x;
  };
  map.apply_transpose = [&](const Matrix& y) -> Matrix {
    ++products;
    return b.transpose() * y;
  };
  const SvdTriplet s = truncated_svd(map, 10);
  const SvdTriplet ref = truncated_svd(b, 10);
  EXPECT_GT(products, 0);
  for (Index i = 0; i < 10; ++i) EXPECT_NEAR(s.sigma(i), ref.sigma(i), 1e-8 * ref.sigma(i));
}

TEST(TruncatedSvd, StagnationIsReported) {
  std::mt19937_64 rng(36);
  const Matrix b = oracle::random_matrix(50, 20, rng);
  SubspaceOptions opts;
  opts.max_iterations = 1;
  try {
    truncated_svd(LinearMap::from_dense(b), 5, 0.0, opts);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::ConvergenceFailure);
  }
}
