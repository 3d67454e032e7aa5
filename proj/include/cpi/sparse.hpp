// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include <algorithm>
#include <cmath>
#include <iostream>
#include <span>
#include <string>
#include <vector>

#include "cpi/error.hpp"

namespace cpi {

using Index = Eigen::Index;
using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;
using SparseMatrix = Eigen::SparseMatrix<double, Eigen::ColMajor, int>;
using Triplet = Eigen::Triplet<double, int>;

inline void log_warning(const std::string& message) { std::clog << "warning: " << message << '\n'; }

struct Coordinate {
  Index row;
  Index col;
  double value;
};

// Largest |x_ij - x_ji| relative to the largest |x_ij|; zero for an empty matrix.
inline double relative_asymmetry(const SparseMatrix& m) {
  const double scale = m.nonZeros() > 0 ? m.coeffs().cwiseAbs().maxCoeff() : 0.0;
  if (scale == 0.0) return 0.0;
  SparseMatrix diff = m - SparseMatrix(m.transpose());
  if (diff.nonZeros() == 0) return 0.0;
  return diff.coeffs().cwiseAbs().maxCoeff() / scale;
}

// Square, numerically symmetric sparse matrix in canonical form: duplicates
// summed, explicit zeros dropped, both triangles stored, exact symmetry.
class SymSparseMatrix {
 public:
  // Relative asymmetry accepted silently; above this a warning is logged.
  static constexpr double kSymmetryTolerance = 1e-12;
  // Relative asymmetry above which the input is rejected as NotSymmetric.
  static constexpr double kRejectTolerance = 1e-9;

  SymSparseMatrix() = default;

  // `lower_only` mirrors every off-diagonal entry (Matrix Market "symmetric").
  static SymSparseMatrix from_triplets(Index n, std::span<const Triplet> entries,
                                       bool lower_only = false) {
    std::vector<Triplet> all;
    all.reserve(entries.size() * (lower_only ? 2 : 1));
    for (const Triplet& t : entries) {
      if (t.row() < 0 || t.col() < 0 || t.row() >= n || t.col() >= n) {
        throw Error(ErrorCode::DimensionMismatch,
                    "entry (" + std::to_string(t.row()) + "," + std::to_string(t.col()) +
                        ") outside a " + std::to_string(n) + "x" + std::to_string(n) + " matrix");
      }
      all.push_back(t);
      if (lower_only && t.row() != t.col()) all.emplace_back(t.col(), t.row(), t.value());
    }
    SparseMatrix m(n, n);
    m.setFromTriplets(all.begin(), all.end());
    return from_sparse(std::move(m));
  }

  static SymSparseMatrix from_sparse(SparseMatrix m) {
    if (m.rows() != m.cols()) {
      throw Error(ErrorCode::DimensionMismatch, "matrix is " + std::to_string(m.rows()) + "x" +
                                                    std::to_string(m.cols()) + ", expected square");
    }
    m.prune(0.0, 0.0);
    m.makeCompressed();
    const double asym = relative_asymmetry(m);
    if (asym > kRejectTolerance) {
      throw Error(ErrorCode::NotSymmetric, "relative asymmetry " + std::to_string(asym));
    }
    if (asym > kSymmetryTolerance) {
      log_warning("symmetrizing matrix with relative asymmetry " + std::to_string(asym));
    }
    if (asym > 0.0) {
      SparseMatrix t = m.transpose();
      m = 0.5 * (m + t);
      m.prune(0.0, 0.0);
      m.makeCompressed();
    }
    return SymSparseMatrix(std::move(m));
  }

  static SymSparseMatrix from_dense(const Matrix& dense) {
    return from_sparse(dense.sparseView(0.0, 0.0));
  }

  Index size() const { return m_.rows(); }
  Index nonzeros() const { return m_.nonZeros(); }
  const SparseMatrix& matrix() const { return m_; }
  Matrix dense() const { return Matrix(m_); }

  std::vector<Coordinate> entries() const {
    std::vector<Coordinate> out;
    out.reserve(static_cast<std::size_t>(m_.nonZeros()));
    for (Index c = 0; c < m_.outerSize(); ++c) {
      for (SparseMatrix::InnerIterator it(m_, c); it; ++it) out.push_back({it.row(), it.col(), it.value()});
    }
    return out;
  }

  SparseMatrix block(Index row, Index col, Index rows, Index cols) const {
    SparseMatrix b = m_.block(row, col, rows, cols);
    b.makeCompressed();
    return b;
  }

 private:
  explicit SymSparseMatrix(SparseMatrix m) : m_(std::move(m)) {}

  SparseMatrix m_;
};

// Bitwise equality of two compressed sparse matrices (structure and values).
inline bool identical(const SparseMatrix& a, const SparseMatrix& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols() || a.nonZeros() != b.nonZeros()) return false;
  SparseMatrix ca = a;
  SparseMatrix cb = b;
  ca.makeCompressed();
  cb.makeCompressed();
  const auto nnz = static_cast<std::size_t>(ca.nonZeros());
  return std::equal(ca.outerIndexPtr(), ca.outerIndexPtr() + ca.outerSize() + 1, cb.outerIndexPtr()) &&
         std::equal(ca.innerIndexPtr(), ca.innerIndexPtr() + nnz, cb.innerIndexPtr()) &&
         std::equal(ca.valuePtr(), ca.valuePtr() + nnz, cb.valuePtr());
}

// Indices of columns holding at least one stored nonzero.
inline std::vector<Index> nonzero_columns(const SparseMatrix& m) {
  std::vector<Index> cols;
  for (Index c = 0; c < m.outerSize(); ++c) {
    for (SparseMatrix::InnerIterator it(m, c); it; ++it) {
      if (it.value() != 0.0) {
        cols.push_back(c);
        break;
      }
    }
  }
  return cols;
}

inline Matrix symmetrized(const Matrix& x) { return 0.5 * (x + x.transpose()); }

}  // namespace cpi
