// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <atomic>
#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/SparseCholesky>

#include "cpi/sparse.hpp"

namespace cpi {

using SparseLLT = Eigen::SimplicialLLT<SparseMatrix, Eigen::Lower, Eigen::AMDOrdering<int>>;
using SparseLDLT = Eigen::SimplicialLDLT<SparseMatrix, Eigen::Lower, Eigen::AMDOrdering<int>>;

// Returns the (original) index of the first non-positive pivot of an LDL^T
// factorization, -1 when the factorization broke down on an exact zero pivot,
// or nullopt when the matrix is positive definite.
inline std::optional<Index> find_nonpositive_pivot(const SparseMatrix& m) {
  SparseLDLT ldlt(m);
  if (ldlt.info() != Eigen::Success) return Index{-1};
  const Vector& d = ldlt.vectorD();
  const auto& to_original = ldlt.permutationPinv().indices();
  for (Index p = 0; p < d.size(); ++p) {
    if (!(d(p) > 0.0)) return static_cast<Index>(to_original(p));
  }
  return std::nullopt;
}

// Symmetric positive definite pencil (A, M) with the interior/exterior split at n1.
// Interior unknowns come first. Blocks are extracted once at construction.
class BlockPencil {
 public:
  BlockPencil() = default;

  // Builds a pencil without the definiteness check; for internally produced
  // pencils whose definiteness follows from construction.
  static BlockPencil assemble_unchecked(SymSparseMatrix a, SymSparseMatrix m, Index n1) {
    BlockPencil p;
    p.a_ = std::move(a);
    p.m_ = std::move(m);
    p.n1_ = n1;
    const Index n2 = p.a_.size() - n1;
    p.a11_ = p.a_.block(0, 0, n1, n1);
    p.a12_ = p.a_.block(0, n1, n1, n2);
    p.a21_ = p.a_.block(n1, 0, n2, n1);
    p.a22_ = p.a_.block(n1, n1, n2, n2);
    p.m11_ = p.m_.block(0, 0, n1, n1);
    p.m12_ = p.m_.block(0, n1, n1, n2);
    p.m21_ = p.m_.block(n1, 0, n2, n1);
    p.m22_ = p.m_.block(n1, n1, n2, n2);
    return p;
  }

  const SymSparseMatrix& A() const { return a_; }
  const SymSparseMatrix& M() const { return m_; }
  Index size() const { return a_.size(); }
  Index n1() const { return n1_; }
  Index n2() const { return a_.size() - n1_; }

  const SparseMatrix& A11() const { return a11_; }
  const SparseMatrix& A12() const { return a12_; }
  const SparseMatrix& A21() const { return a21_; }
  const SparseMatrix& A22() const { return a22_; }
  const SparseMatrix& M11() const { return m11_; }
  const SparseMatrix& M12() const { return m12_; }
  const SparseMatrix& M21() const { return m21_; }
  const SparseMatrix& M22() const { return m22_; }

 private:
  SymSparseMatrix a_;
  SymSparseMatrix m_;
  Index n1_ = 0;
  SparseMatrix a11_, a12_, a21_, a22_;
  SparseMatrix m11_, m12_, m21_, m22_;
};

inline BlockPencil build_pencil(SymSparseMatrix a, SymSparseMatrix m, Index n1) {
  if (a.size() != m.size()) {
    throw Error(ErrorCode::DimensionMismatch,
                "A is " + std::to_string(a.size()) + ", M is " + std::to_string(m.size()));
  }
  if (n1 <= 0 || n1 >= a.size()) {
    throw Error(ErrorCode::DimensionMismatch,
                "split n1=" + std::to_string(n1) + " must lie in (0, " + std::to_string(a.size()) + ")");
  }
  for (const auto& [name, mat] : {std::pair{"A", &a}, std::pair{"M", &m}}) {
    if (auto pivot = find_nonpositive_pivot(mat->matrix())) {
      throw Error(ErrorCode::NotPositiveDefinite,
                  std::string(name) + " fails Cholesky at pivot " +
                      (*pivot >= 0 ? std::to_string(*pivot) : std::string("(zero pivot)")));
    }
  }
  return BlockPencil::assemble_unchecked(std::move(a), std::move(m), n1);
}

// Numerical rank of [M21 A21], i.e. the number of exterior directions the
// interior couples into. Only nonzero rows and columns enter the SVD.
inline Index interface_rank(const BlockPencil& pencil, double rel_tol = 1e-10) {
  const std::vector<Index> mass_cols = nonzero_columns(pencil.M21());
  const std::vector<Index> stiff_cols = nonzero_columns(pencil.A21());
  if (mass_cols.empty() && stiff_cols.empty()) return 0;

  std::vector<Index> row_map(static_cast<std::size_t>(pencil.n2()), -1);
  Index rows = 0;
  for (const SparseMatrix* block : {&pencil.M21(), &pencil.A21()}) {
    for (Index c = 0; c < block->outerSize(); ++c) {
      for (SparseMatrix::InnerIterator it(*block, c); it; ++it) {
        auto& slot = row_map[static_cast<std::size_t>(it.row())];
        if (slot < 0 && it.value() != 0.0) slot = rows++;
      }
    }
  }

  const Index cols = static_cast<Index>(mass_cols.size() + stiff_cols.size());
  Matrix coupling = Matrix::Zero(rows, cols);
  Index out = 0;
  for (const auto& [block, list] : {std::pair{&pencil.M21(), &mass_cols}, std::pair{&pencil.A21(), &stiff_cols}}) {
    for (Index c : *list) {
      for (SparseMatrix::InnerIterator it(*block, c); it; ++it) {
        const Index r = row_map[static_cast<std::size_t>(it.row())];
        if (r >= 0) coupling(r, out) = it.value();
      }
      ++out;
    }
  }
  const Vector sv = Eigen::BDCSVD<Matrix>(coupling).singularValues();
  if (sv.size() == 0 || sv(0) == 0.0) return 0;
  return static_cast<Index>((sv.array() > rel_tol * sv(0)).count());
}

namespace stats {
// Number of exterior projections Q^T X22 Q formed so far (instrumentation).
inline std::atomic<std::uint64_t> exterior_projections{0};
}  // namespace stats

// Q^T X Q with the result symmetrized; shared by fresh and recycled reductions.
inline Matrix project_exterior(const SparseMatrix& x22, const Matrix& q22) {
  stats::exterior_projections.fetch_add(1, std::memory_order_relaxed);
  Matrix xq = x22 * q22;
  Matrix qtxq = q22.transpose() * xq;
  return symmetrized(qtxq);
}

// Assembles [[X11, X12Q], [Q^T X21, Q^T X22 Q]] in sparse storage.
inline SymSparseMatrix assemble_reduced(const SparseMatrix& x11, const Matrix& x12q, const Matrix& qtxq) {
  const Index n1 = x11.rows();
  const Index m = qtxq.rows();
  std::vector<Triplet> t;
  t.reserve(static_cast<std::size_t>(x11.nonZeros() + 2 * x12q.size() + qtxq.size()));
  for (Index c = 0; c < x11.outerSize(); ++c) {
    for (SparseMatrix::InnerIterator it(x11, c); it; ++it) t.emplace_back(it.row(), it.col(), it.value());
  }
  for (Index j = 0; j < m; ++j) {
    for (Index i = 0; i < n1; ++i) {
      const double v = x12q(i, j);
      if (v == 0.0) continue;
      t.emplace_back(static_cast<int>(i), static_cast<int>(n1 + j), v);
      t.emplace_back(static_cast<int>(n1 + j), static_cast<int>(i), v);
    }
  }
  for (Index j = 0; j < m; ++j) {
    for (Index i = 0; i < m; ++i) {
      if (qtxq(i, j) != 0.0) t.emplace_back(static_cast<int>(n1 + i), static_cast<int>(n1 + j), qtxq(i, j));
    }
  }
  SparseMatrix out(n1 + m, n1 + m);
  out.setFromTriplets(t.begin(), t.end());
  return SymSparseMatrix::from_sparse(std::move(out));
}

// The exterior part of a Rayleigh-Ritz reduction: the basis Q22 and the
// version-independent projected blocks Q22^T A22 Q22 and Q22^T M22 Q22.
struct ExteriorReduction {
  std::shared_ptr<const Matrix> basis;
  std::shared_ptr<const Matrix> stiffness;
  std::shared_ptr<const Matrix> mass;

  Index rows() const { return basis->rows(); }
  Index dim() const { return basis->cols(); }
};

inline ExteriorReduction make_exterior_reduction(const SparseMatrix& a22, const SparseMatrix& m22, Matrix q22) {
  if (q22.rows() != a22.rows()) {
    throw Error(ErrorCode::DimensionMismatch, "basis has " + std::to_string(q22.rows()) + " rows, exterior block " +
                                                  std::to_string(a22.rows()));
  }
  Matrix qtaq = project_exterior(a22, q22);
  if (q22.cols() == 0 || Eigen::LLT<Matrix>(qtaq).info() != Eigen::Success) {
    throw Error(ErrorCode::RankDeficientBasis, "Gram matrix Q^T A22 Q is not positive definite");
  }
  Matrix qtmq = project_exterior(m22, q22);
  return {std::make_shared<const Matrix>(std::move(q22)), std::make_shared<const Matrix>(std::move(qtaq)),
          std::make_shared<const Matrix>(std::move(qtmq))};
}

// Reduced pencil for a (possibly new) interior, reusing the cached exterior blocks;
// only the coupling products A12 Q22 and M12 Q22 are recomputed.
inline BlockPencil recycle_reduced_blocks(const ExteriorReduction& cache, const SparseMatrix& a11,
                                          const SparseMatrix& m11, const SparseMatrix& a12,
                                          const SparseMatrix& m12) {
  const Index n1 = a11.rows();
  if (a11.cols() != n1 || m11.rows() != n1 || m11.cols() != n1 || a12.rows() != n1 || m12.rows() != n1 ||
      a12.cols() != cache.rows() || m12.cols() != cache.rows()) {
    throw Error(ErrorCode::DimensionMismatch, "interior blocks do not conform to the cached exterior basis");
  }
  const Matrix& q = *cache.basis;
  Matrix a12q = a12 * q;
  Matrix m12q = m12 * q;
  return BlockPencil::assemble_unchecked(assemble_reduced(a11, a12q, *cache.stiffness),
                                         assemble_reduced(m11, m12q, *cache.mass), n1);
}

inline BlockPencil reduce_pencil(const BlockPencil& pencil, const Matrix& q22) {
  if (q22.rows() != pencil.n2() || q22.cols() > pencil.n2()) {
    throw Error(ErrorCode::DimensionMismatch, "Q22 must be n2 x m with m <= n2");
  }
  const ExteriorReduction cache = make_exterior_reduction(pencil.A22(), pencil.M22(), q22);
  return recycle_reduced_blocks(cache, pencil.A11(), pencil.M11(), pencil.A12(), pencil.M12());
}

// X = R^T R with R = [[R11, R11^{-T} X12], [0, R22]] and R22 the Cholesky
// factor of the Schur complement X22 - X12^T X11^{-1} X12. The leading factor
// is sparse with a fill-reducing permutation, R11 = L^T P.
class BlockCholesky {
 public:
  BlockCholesky(const SparseMatrix& x, Index n1) : n1_(n1) {
    const Index n = x.rows();
    if (n1 <= 0 || n1 >= n) throw Error(ErrorCode::DimensionMismatch, "split must lie strictly inside the matrix");
    const Index m = n - n1;
    SparseMatrix x11 = x.block(0, 0, n1, n1);
    leading_.compute(x11);
    if (leading_.info() != Eigen::Success) {
      throw Error(ErrorCode::NotPositiveDefinite, "leading block fails Cholesky");
    }
    SparseMatrix x12 = x.block(0, n1, n1, m);
    Matrix permuted = leading_.permutationP() * Matrix(x12);
    leading_.matrixL().solveInPlace(permuted);
    coupling_ = std::move(permuted);
    Matrix schur = Matrix(x.block(n1, n1, m, m));
    schur.noalias() -= coupling_.transpose() * coupling_;
    schur_.compute(symmetrized(schur));
    if (schur_.info() != Eigen::Success) {
      throw Error(ErrorCode::NotPositiveDefinite, "Schur complement block fails Cholesky");
    }
  }

  Index split() const { return n1_; }
  Index size() const { return n1_ + coupling_.cols(); }

  // R11^{-T} X12 (n1 x m).
  const Matrix& coupling() const { return coupling_; }

  Matrix leading_factor() const {
    Matrix lt = Matrix(leading_.matrixU());
    return lt * leading_.permutationP();
  }

  Matrix schur_factor() const { return schur_.matrixU(); }

  Matrix upper_factor() const {
    const Index m = coupling_.cols();
    Matrix r = Matrix::Zero(size(), size());
    r.topLeftCorner(n1_, n1_) = leading_factor();
    r.topRightCorner(n1_, m) = coupling_;
    r.bottomRightCorner(m, m) = schur_factor();
    return r;
  }

  // Solves R^T R y = b.
  Vector solve(const Vector& b) const {
    const Index m = coupling_.cols();
    Vector z1 = leading_.permutationP() * b.head(n1_);
    leading_.matrixL().solveInPlace(z1);
    Vector z2 = b.tail(m) - coupling_.transpose() * z1;
    schur_.matrixL().solveInPlace(z2);
    schur_.matrixU().solveInPlace(z2);
    Vector y(size());
    y.tail(m) = z2;
    z1.noalias() -= coupling_ * z2;
    leading_.matrixU().solveInPlace(z1);
    y.head(n1_) = leading_.permutationPinv() * z1;
    return y;
  }

 private:
  Index n1_;
  SparseLLT leading_;
  Matrix coupling_;
  Eigen::LLT<Matrix> schur_;
};

inline BlockCholesky block_cholesky(const SymSparseMatrix& x, Index n1) { return BlockCholesky(x.matrix(), n1); }

}  // namespace cpi
