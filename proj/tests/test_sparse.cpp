// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <vector>

#include "cpi/sparse.hpp"

using namespace cpi;

namespace {

ErrorCode code_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no cpi::Error thrown";
  return ErrorCode::IoError;
}

}  // namespace

TEST(SymSparseMatrix, SumsDuplicatesAndDropsZeros) {
  const std::vector<Triplet> t{{0, 0, 1.0}, {0, 0, 2.0}, {1, 1, 4.0}, {0, 1, 0.0}, {1, 0, 0.0}};
  const SymSparseMatrix m = SymSparseMatrix::from_triplets(2, t);
  EXPECT_EQ(m.nonzeros(), 2);
  EXPECT_DOUBLE_EQ(m.dense()(0, 0), 3.0);
  EXPECT_DOUBLE_EQ(m.dense()(1, 1), 4.0);
}

TEST(SymSparseMatrix, LowerOnlyMirrorsOffDiagonal) {
  const std::vector<Triplet> t{{0, 0, 2.0}, {1, 0, -1.0}, {1, 1, 2.0}};
  const SymSparseMatrix m = SymSparseMatrix::from_triplets(2, t, true);
  EXPECT_EQ(m.nonzeros(), 4);
  EXPECT_DOUBLE_EQ(m.dense()(0, 1), -1.0);
  EXPECT_DOUBLE_EQ(m.dense()(1, 0), -1.0);
}

TEST(SymSparseMatrix, RejectsAsymmetryAboveThreshold) {
  Matrix d(2, 2);
  d << 1.0, 0.5, 0.5 + 1e-6, 1.0;
  EXPECT_EQ(code_of([&] { SymSparseMatrix::from_dense(d); }), ErrorCode::NotSymmetric);
}

TEST(SymSparseMatrix, SymmetrizesSmallAsymmetryExactly) {
  Matrix d(2, 2);
  d << 1.0, 0.5, 0.5 * (1.0 + 1e-11), 1.0;
  testing::internal::CaptureStderr();
  const SymSparseMatrix m = SymSparseMatrix::from_dense(d);
  const std::string log = testing::internal::GetCapturedStderr();
  EXPECT_NE(log.find("warning"), std::string::npos);
  EXPECT_EQ(m.dense()(0, 1), m.dense()(1, 0));
  EXPECT_EQ(relative_asymmetry(m.matrix()), 0.0);
}

TEST(SymSparseMatrix, RoundoffAsymmetryIsSilent) {
  Matrix d(2, 2);
  d << 1.0, 0.5, 0.5 * (1.0 + 1e-14), 1.0;
  testing::internal::CaptureStderr();
  SymSparseMatrix::from_dense(d);
  EXPECT_TRUE(testing::internal::GetCapturedStderr().empty());
}

TEST(SymSparseMatrix, DimensionErrors) {
  EXPECT_EQ(code_of([] { SymSparseMatrix::from_sparse(SparseMatrix(2, 3)); }), ErrorCode::DimensionMismatch);
  const std::vector<Triplet> t{{0, 2, 1.0}};
  EXPECT_EQ(code_of([&] { SymSparseMatrix::from_triplets(2, t); }), ErrorCode::DimensionMismatch);
}

TEST(SymSparseMatrix, EntriesAndBlocks) {
  Matrix d(3, 3);
  d << 4, 1, 0, 1, 5, 2, 0, 2, 6;
  const SymSparseMatrix m = SymSparseMatrix::from_dense(d);
  EXPECT_EQ(m.entries().size(), 7u);
  const Matrix b = Matrix(m.block(1, 1, 2, 2));
  EXPECT_DOUBLE_EQ(b(0, 0), 5.0);
  EXPECT_DOUBLE_EQ(b(1, 0), 2.0);
  EXPECT_DOUBLE_EQ(b(1, 1), 6.0);
}

TEST(Identical, DetectsValueAndStructureChanges) {
  Matrix d = Matrix::Identity(3, 3);
  const SparseMatrix a = d.sparseView();
  SparseMatrix b = a;
  EXPECT_TRUE(identical(a, b));
  b.coeffRef(1, 1) = std::nextafter(1.0, 2.0);
  EXPECT_FALSE(identical(a, b));
  d(0, 2) = 1.0;
  EXPECT_FALSE(identical(a, SparseMatrix(d.sparseView())));
}

TEST(NonzeroColumns, SkipsEmptyAndExplicitZeroColumns) {
  SparseMatrix m(3, 4);
  m.insert(0, 1) = 1.0;
  m.insert(2, 3) = -2.0;
  m.insert(1, 2) = 0.0;
  m.makeCompressed();
  EXPECT_EQ(nonzero_columns(m), (std::vector<Index>{1, 3}));
}
