// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <memory>
#include <vector>

#include "cpi/cpi_basis.hpp"

namespace cpi {

// Component mode synthesis: static condensation of the interior through
// Phi = -A22^{-1} A21 plus the K lowest exterior modes.
struct CmsBasis {
  Index n1 = 0;
  Index modes = 0;
  std::shared_ptr<const SparseLLT> a22_factor;
  SparseMatrix a21;
  Matrix vectors;        // n2 x K, M22-orthonormal
  Vector exterior_values;

  Index dim() const { return modes; }
};

// Exterior modes come from the dense solver up to this exterior size.
inline constexpr Index kCmsDenseLimit = 400;

inline CmsBasis cms_build(const BlockPencil& pencil, Index modes, const LanczosOptions& opts = {.shift = 0.0,
                                                                                                 .tol = 1e-11}) {
  if (modes < 1 || modes > pencil.n2()) {
    throw Error(ErrorCode::DomainError, "CMS mode count must lie in [1, " + std::to_string(pencil.n2()) + "]");
  }
  CmsBasis out;
  out.n1 = pencil.n1();
  out.modes = modes;
  auto factor = std::make_shared<SparseLLT>(pencil.A22());
  if (factor->info() != Eigen::Success) throw Error(ErrorCode::FactorizationFailure, "A22 fails Cholesky");
  out.a22_factor = std::move(factor);
  out.a21 = pencil.A21();

  EigenPairSet ext;
  if (pencil.n2() <= kCmsDenseLimit || 2 * modes > pencil.n2()) {
    ext = dense_geneig(Matrix(pencil.A22()), Matrix(pencil.M22()), std::max<Index>(pencil.n2(), 2000));
  } else {
    ext = lanczos_smallest(pencil.A22(), pencil.M22(), SpectrumRequest::smallest(modes), opts);
  }
  out.vectors = ext.vectors.leftCols(modes);
  out.exterior_values = ext.values.head(modes);
  return out;
}

// Phi = -A22^{-1} A21, solved only on the nonzero columns of A21.
inline SparseMatrix cms_condensation(const CmsBasis& basis) {
  const std::vector<Index> cols = nonzero_columns(basis.a21);
  std::vector<Triplet> t;
  if (!cols.empty()) {
    Matrix rhs(basis.a21.rows(), static_cast<Index>(cols.size()));
    for (std::size_t c = 0; c < cols.size(); ++c) rhs.col(static_cast<Index>(c)) = basis.a21.col(cols[c]);
    const Matrix phi = -basis.a22_factor->solve(rhs);
    t.reserve(static_cast<std::size_t>(phi.size()));
    for (std::size_t c = 0; c < cols.size(); ++c) {
      for (Index i = 0; i < phi.rows(); ++i) {
        const double v = phi(i, static_cast<Index>(c));
        if (v != 0.0) t.emplace_back(static_cast<int>(i), static_cast<int>(cols[c]), v);
      }
    }
  }
  SparseMatrix phi(basis.a21.rows(), basis.a21.cols());
  phi.setFromTriplets(t.begin(), t.end());
  return phi;
}

// The reduced pencil (Q^T A Q, Q^T M Q) for Q = G blockdiag(I, V).
inline BlockPencil cms_reduce(const BlockPencil& pencil, const CmsBasis& basis, const SparseMatrix& phi) {
  const SparseMatrix phit = phi.transpose();
  SparseMatrix a11 = pencil.A11() + pencil.A12() * phi;
  SparseMatrix m11 = pencil.M11() + pencil.M12() * phi + phit * pencil.M21() + phit * (pencil.M22() * phi);
  a11 = SparseMatrix(0.5 * (a11 + SparseMatrix(a11.transpose())));
  m11 = SparseMatrix(0.5 * (m11 + SparseMatrix(m11.transpose())));
  const SparseMatrix m12_full = pencil.M12() + phit * pencil.M22();
  const Matrix m12v = m12_full * basis.vectors;
  const Matrix zero = Matrix::Zero(basis.n1, basis.modes);
  return BlockPencil::assemble_unchecked(
      assemble_reduced(a11, zero, project_exterior(pencil.A22(), basis.vectors)),
      assemble_reduced(m11, m12v, project_exterior(pencil.M22(), basis.vectors)), basis.n1);
}

inline SpectralResult cms_solve(const BlockPencil& pencil, const CmsBasis& basis, double upper,
                                const SolveOptions& opts = {}) {
  if (basis.vectors.rows() != pencil.n2() || basis.n1 != pencil.n1()) {
    throw Error(ErrorCode::DimensionMismatch, "CMS basis does not conform to the pencil");
  }
  const SparseMatrix phi = cms_condensation(basis);
  const BlockPencil reduced = cms_reduce(pencil, basis, phi);
  const SpectrumRequest request = opts.count ? SpectrumRequest::smallest(*opts.count) : SpectrumRequest::below(upper);
  const EigenPairSet eigs = solve_reduced(reduced, request, opts.lanczos, opts.factorization);

  SpectralResult out;
  out.values = eigs.values;
  out.vectors.resize(pencil.size(), eigs.values.size());
  const Matrix y1 = eigs.vectors.topRows(pencil.n1());
  out.vectors.topRows(pencil.n1()) = y1;
  out.vectors.bottomRows(pencil.n2()) = phi * y1 + basis.vectors * eigs.vectors.bottomRows(basis.modes);
  out.residuals = relative_residuals(pencil.A().matrix(), pencil.M().matrix(), out.values, out.vectors);
  out.exterior_dim = basis.modes;
  out.reduced_dim = reduced.size();
  return out;
}

}  // namespace cpi
