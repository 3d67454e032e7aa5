// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <algorithm>
#include <cmath>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/SparseLU>

#include "cpi/eigensolve.hpp"
#include "cpi/pencil.hpp"
#include "cpi/planner.hpp"
#include "cpi/svd.hpp"

namespace cpi {

enum class BasisMode { Automatic, Dense, MatrixFree };

inline std::string to_string(BasisMode mode) {
  switch (mode) {
    case BasisMode::Automatic: return "automatic";
    case BasisMode::Dense: return "dense";
    case BasisMode::MatrixFree: return "matrix-free";
  }
  return "unknown";
}

// Parameters of one basis construction. upper is Lambda, the top of the
// eigenvalue window; the projector covers exterior modes below gamma * upper.
struct CpiPlan {
  double upper = 0;
  double gamma = 0;
  int points = 0;
  std::vector<double> xi;
  double tol = 0;
  double alpha_bound = 1;
  BasisMode mode = BasisMode::Automatic;

  double extended() const { return gamma * upper; }

  static CpiPlan make(double upper, double gamma, int points, double tol, double alpha_bound = 1.0,
                      BasisMode mode = BasisMode::Automatic) {
    CpiPlan p{upper, gamma, points, {}, tol, alpha_bound, mode};
    if (!(upper > 0.0) || points < 1) throw Error(ErrorCode::DomainError, "plan needs Lambda > 0 and N >= 1");
    p.xi = planner::chebyshev_points(upper, points);
    p.validate();
    return p;
  }

  void validate() const {
    if (!(upper > 0.0)) throw Error(ErrorCode::DomainError, "Lambda must be positive");
    if (!(gamma > 1.0)) throw Error(ErrorCode::DomainError, "gamma must exceed 1");
    if (points < 1 || static_cast<int>(xi.size()) != points) {
      throw Error(ErrorCode::DomainError, "plan holds " + std::to_string(xi.size()) + " points for N=" +
                                              std::to_string(points));
    }
    if (tol < 0.0) throw Error(ErrorCode::DomainError, "truncation tol must be non-negative");
    if (!(alpha_bound >= 1.0)) throw Error(ErrorCode::DomainError, "alpha bound must be at least 1");
    for (std::size_t i = 0; i < xi.size(); ++i) {
      if (!(xi[i] > 0.0 && xi[i] < upper)) throw Error(ErrorCode::DomainError, "point outside (0, Lambda)");
      for (std::size_t j = 0; j < i; ++j) {
        if (xi[i] == xi[j]) throw Error(ErrorCode::DomainError, "interpolation points must be distinct");
      }
    }
  }
};

// Default alpha bound with lambda = Lambda; ||M^-1|| from the mesh width when
// known (c h^-d), else by inverse power iteration on M.
struct MeshScale {
  double h = 0;
  int dimension = 2;
  double constant = 1.0;

  double inverse_mass_norm() const { return constant * std::pow(h, -dimension); }
};

inline double default_alpha_bound(int points, double upper, const SparseMatrix& m,
                                  std::optional<MeshScale> mesh = std::nullopt) {
  const double inv_norm = mesh ? mesh->inverse_mass_norm() : planner::estimate_inverse_norm(m);
  return planner::alpha_bound(points, upper, inv_norm);
}

// Minimum relative distance required between interpolation points and exterior eigenvalues.
inline constexpr double kCollisionGap = 1e-6;
inline constexpr int kCollisionRetries = 5;

inline double point_separation(std::span<const double> xi, const Vector& mu) {
  double gap = std::numeric_limits<double>::infinity();
  for (double x : xi)
    for (Index k = 0; k < mu.size(); ++k) gap = std::min(gap, std::abs(x - mu(k)));
  return gap;
}

// Raises N until every point keeps kCollisionGap * Lambda away from the exterior spectrum.
inline CpiPlan guard_collisions(CpiPlan plan, const Vector& mu) {
  const double need = kCollisionGap * plan.upper;
  for (int extra = 0; extra <= kCollisionRetries; ++extra) {
    if (point_separation(plan.xi, mu) >= need) return plan;
    if (extra == kCollisionRetries) break;
    plan.points += 1;
    plan.xi = planner::chebyshev_points(plan.upper, plan.points);
  }
  std::ostringstream msg;
  msg << "interpolation points stay within " << need << " of exterior eigenvalues:";
  for (double x : plan.xi)
    for (Index k = 0; k < mu.size(); ++k)
      if (std::abs(x - mu(k)) < need) msg << " (xi=" << x << ", mu=" << mu(k) << ")";
  throw Error(ErrorCode::NearSingularShift, msg.str());
}

// M22-orthogonal projector onto the exterior eigenvectors below gamma * Lambda.
class SpectralProjector {
 public:
  SpectralProjector() = default;
  SpectralProjector(Matrix vectors, const SparseMatrix& m22)
      : vectors_(std::move(vectors)), mass_vectors_(m22 * vectors_) {}

  Index rows() const { return vectors_.rows(); }
  Index rank() const { return vectors_.cols(); }
  const Matrix& vectors() const { return vectors_; }
  const Matrix& mass_vectors() const { return mass_vectors_; }

  Matrix apply(const Matrix& x) const { return vectors_ * (mass_vectors_.transpose() * x); }
  // (I - P) x
  Matrix complement(const Matrix& x) const { return x - apply(x); }
  // (I - P)^T y = y - M22 V V^T y
  Matrix complement_transpose(const Matrix& y) const { return y - mass_vectors_ * (vectors_.transpose() * y); }

 private:
  Matrix vectors_;
  Matrix mass_vectors_;
};

inline SpectralProjector build_projector(const EigenPairSet& ext, const SparseMatrix& a22, const SparseMatrix& m22,
                                         double extended) {
  const Index expected = count_below(a22, m22, extended);
  const Index inside = count_below(ext, extended);
  if (expected != ext.size() || inside != ext.size()) {
    throw Error(ErrorCode::IncompleteSpectrum, "inertia counts " + std::to_string(expected) +
                                                   " exterior eigenvalues below " + std::to_string(extended) +
                                                   ", projector given " + std::to_string(ext.size()));
  }
  return SpectralProjector(ext.vectors, m22);
}

// Nonzero columns of M21, then nonzero columns of A21, as an n2 x r sparse matrix.
inline SparseMatrix coupling_columns(const BlockPencil& pencil) {
  const std::vector<Index> mass_cols = nonzero_columns(pencil.M21());
  const std::vector<Index> stiff_cols = nonzero_columns(pencil.A21());
  const Index r = static_cast<Index>(mass_cols.size() + stiff_cols.size());
  if (r == 0) throw Error(ErrorCode::EmptyCoupling, "A21 and M21 vanish; interior and exterior are decoupled");
  if (r == 2 * pencil.n1()) log_warning("every interior column couples to the exterior (r = 2 n1)");
  std::vector<Triplet> t;
  Index out = 0;
  for (const auto& [block, list] : {std::pair{&pencil.M21(), &mass_cols}, std::pair{&pencil.A21(), &stiff_cols}}) {
    for (Index c : *list) {
      for (SparseMatrix::InnerIterator it(*block, c); it; ++it) {
        t.emplace_back(static_cast<int>(it.row()), static_cast<int>(out), it.value());
      }
      ++out;
    }
  }
  SparseMatrix p(pencil.n2(), r);
  p.setFromTriplets(t.begin(), t.end());
  return p;
}

// Factorization of A22 - xi M22 (symmetric indefinite), with a residual check
// and an LU fallback for columns the LDL^T solve does not resolve.
class ShiftedSystem {
 public:
  static constexpr double kResidualTolerance = 1e-10;

  ShiftedSystem(const SparseMatrix& a22, const SparseMatrix& m22, double xi)
      : xi_(xi), op_(a22 - xi * m22), ldlt_(std::make_unique<SparseLDLT>(op_)) {
    op_.makeCompressed();
    if (ldlt_->info() != Eigen::Success) ldlt_.reset();
  }

  double shift() const { return xi_; }
  bool used_fallback() const { return lu_ != nullptr; }

  Matrix solve(const Matrix& rhs) const {
    Matrix x(rhs.rows(), rhs.cols());
    if (ldlt_) x = ldlt_->solve(rhs);
    for (Index j = 0; j < rhs.cols(); ++j) {
      const double scale = rhs.col(j).norm();
      if (ldlt_ && (op_ * x.col(j) - rhs.col(j)).norm() <= kResidualTolerance * scale) continue;
      x.col(j) = lu().solve(Vector(rhs.col(j)));
      const double res = (op_ * x.col(j) - rhs.col(j)).norm();
      if (!(res <= kResidualTolerance * scale)) {
        throw Error(ErrorCode::FactorizationFailure, "shifted system at xi=" + std::to_string(xi_) +
                                                         " leaves relative residual " +
                                                         std::to_string(res / scale));
      }
    }
    return x;
  }

 private:
  const Eigen::SparseLU<SparseMatrix>& lu() const {
    if (!lu_) {
      lu_ = std::make_unique<Eigen::SparseLU<SparseMatrix>>();
      lu_->analyzePattern(op_);
      lu_->factorize(op_);
      if (lu_->info() != Eigen::Success) {
        throw Error(ErrorCode::FactorizationFailure, "A22 - xi M22 is singular at xi=" + std::to_string(xi_));
      }
    }
    return *lu_;
  }

  double xi_;
  SparseMatrix op_;
  std::unique_ptr<SparseLDLT> ldlt_;
  mutable std::unique_ptr<Eigen::SparseLU<SparseMatrix>> lu_;
};

using ShiftedSystems = std::vector<std::shared_ptr<const ShiftedSystem>>;

inline ShiftedSystems factor_shifts(const BlockPencil& pencil, std::span<const double> xi) {
  ShiftedSystems out;
  out.reserve(xi.size());
  for (double x : xi) out.push_back(std::make_shared<const ShiftedSystem>(pencil.A22(), pencil.M22(), x));
  return out;
}

// Column index of the deflated sample (I-P) q_ij in B2: points vary fastest.
inline Index sample_column(Index i, Index j, Index points) { return j * points + i; }

// Deflated samples (I - P) q_ij with (A22 - xi_i M22) q_ij = p_j.
inline Matrix sample_vectors(const ShiftedSystems& systems, const SpectralProjector& projector,
                             const SparseMatrix& p) {
  const Index n_points = static_cast<Index>(systems.size());
  Matrix out(p.rows(), n_points * p.cols());
  const Matrix rhs = Matrix(p);
  for (Index i = 0; i < n_points; ++i) {
    const Matrix q = projector.complement(systems[static_cast<std::size_t>(i)]->solve(rhs));
    for (Index j = 0; j < p.cols(); ++j) out.col(sample_column(i, j, n_points)) = q.col(j);
  }
  return out;
}

inline Matrix sample_vectors(const BlockPencil& pencil, const SpectralProjector& projector,
                             std::span<const double> xi, const SparseMatrix& p) {
  return sample_vectors(factor_shifts(pencil, xi), projector, p);
}

// B = [V, (I-P) q_11, ..., (I-P) q_Nr].
inline Matrix assemble_B(const SpectralProjector& projector, const Matrix& samples) {
  Matrix b(projector.rows(), projector.rank() + samples.cols());
  b.leftCols(projector.rank()) = projector.vectors();
  b.rightCols(samples.cols()) = samples;
  return b;
}

// B applied through the stored factorizations, without forming its columns.
inline LinearMap implicit_B(std::shared_ptr<const SpectralProjector> projector, ShiftedSystems systems,
                            std::shared_ptr<const SparseMatrix> p) {
  const Index k = projector->rank();
  const Index n_points = static_cast<Index>(systems.size());
  const Index r = p->cols();
  LinearMap map;
  map.rows = projector->rows();
  map.cols = k + n_points * r;
  map.apply = [=](const Matrix& x) -> Matrix {
    Matrix y = projector->vectors() * x.topRows(k);
    Matrix acc = Matrix::Zero(projector->rows(), x.cols());
    for (Index i = 0; i < n_points; ++i) {
      Matrix coeff(r, x.cols());
      for (Index j = 0; j < r; ++j) coeff.row(j) = x.row(k + sample_column(i, j, n_points));
      acc += systems[static_cast<std::size_t>(i)]->solve(*p * coeff);
    }
    y += projector->complement(acc);
    return y;
  };
  map.apply_transpose = [=](const Matrix& y) -> Matrix {
    Matrix out(k + n_points * r, y.cols());
    out.topRows(k) = projector->vectors().transpose() * y;
    const Matrix z = projector->complement_transpose(y);
    for (Index i = 0; i < n_points; ++i) {
      // The shifted operator is symmetric, so S^{-T} = S^{-1}.
      const Matrix pts = p->transpose() * systems[static_cast<std::size_t>(i)]->solve(z);
      for (Index j = 0; j < r; ++j) out.row(k + sample_column(i, j, n_points)) = pts.row(j);
    }
    return out;
  };
  return map;
}

// A22 = R^T R with R = L^T P from a fill-reducing sparse Cholesky.
class ExteriorCholesky {
 public:
  explicit ExteriorCholesky(const SparseMatrix& a22) : llt_(std::make_unique<SparseLLT>(a22)) {
    if (llt_->info() != Eigen::Success) throw Error(ErrorCode::NotPositiveDefinite, "A22 fails Cholesky");
    lower_ = llt_->matrixL();
  }

  Matrix apply_r(const Matrix& x) const {
    Matrix px = llt_->permutationP() * x;
    return lower_.transpose() * px;
  }
  Matrix apply_rt(const Matrix& y) const {
    Matrix ly = lower_ * y;
    return llt_->permutationPinv() * ly;
  }
  Matrix solve_r(const Matrix& y) const {
    Matrix z = llt_->matrixU().solve(y);
    return llt_->permutationPinv() * z;
  }

 private:
  std::unique_ptr<SparseLLT> llt_;
  SparseMatrix lower_;
};

// Truncation index: largest i with sigma_i^2 alpha^2 > tol.
inline Index truncation_index(const Vector& sigma, double alpha_bound, double tol) {
  Index kc = 0;
  for (Index i = 0; i < sigma.size(); ++i)
    if (sigma(i) * sigma(i) * alpha_bound * alpha_bound > tol) kc = i + 1;
  return kc;
}

// Immutable exterior basis with its provenance. Shared between versions.
struct ReducedBasis {
  CpiPlan plan;
  ExteriorReduction exterior;
  Vector sigma;               // computed singular values of R B (numerically nonzero)
  Index projector_rank = 0;   // K
  Index coupling_count = 0;   // r
  Index sample_columns = 0;   // K + N r
  BasisMode mode = BasisMode::Dense;
  bool used_lu_fallback = false;
  std::shared_ptr<const SparseMatrix> a22;
  std::shared_ptr<const SparseMatrix> m22;

  Index dim() const { return exterior.dim(); }
  Index rows() const { return exterior.rows(); }
  const Matrix& q() const { return *exterior.basis; }
};

// Q~22 = R^{-1} [u_1 .. u_Kc] from the SVD of R B.
// A fixed dimension, when given, replaces the tol rule.
inline ReducedBasis truncate_basis(const SvdTriplet& svd, const ExteriorCholesky& r, const SparseMatrix& a22,
                                   const SparseMatrix& m22, double alpha_bound, double tol,
                                   std::optional<Index> fixed_dim = std::nullopt) {
  if (!(alpha_bound >= 1.0) || tol < 0.0) throw Error(ErrorCode::DomainError, "need alpha bound >= 1 and tol >= 0");
  const Index kc = fixed_dim ? std::min(*fixed_dim, svd.rank()) : truncation_index(svd.sigma, alpha_bound, tol);
  if (kc == 0) {
    std::ostringstream msg;
    msg << "truncation keeps no column (sigma_1 = " << (svd.sigma.size() ? svd.sigma(0) : 0.0)
        << ", alpha = " << alpha_bound << ", tol = " << tol << ")";
    throw Error(ErrorCode::AllTruncated, msg.str());
  }
  ReducedBasis out;
  out.exterior = make_exterior_reduction(a22, m22, r.solve_r(svd.left.leftCols(kc)));
  out.sigma = svd.sigma;
  out.a22 = std::make_shared<const SparseMatrix>(a22);
  out.m22 = std::make_shared<const SparseMatrix>(m22);
  return out;
}

inline ReducedBasis truncate_basis(const Matrix& b, const SparseMatrix& a22, const SparseMatrix& m22,
                                   double alpha_bound, double tol) {
  const ExteriorCholesky r(a22);
  const Matrix rb = r.apply_r(b);
  ReducedBasis out = truncate_basis(truncated_svd(rb, std::min(rb.rows(), rb.cols())), r, a22, m22, alpha_bound, tol);
  out.sample_columns = b.cols();
  return out;
}

struct BuildOptions {
  LanczosOptions lanczos{.shift = 0.0, .tol = 1e-11};
  SubspaceOptions subspace;
  // Dense B when n2 * (K + N r) stays within this many entries.
  double matrix_free_threshold = 5e7;
  // Keep exactly this many singular directions instead of applying the tol rule.
  std::optional<Index> fixed_dim;
};

inline ReducedBasis build_basis(const BlockPencil& pencil, CpiPlan plan, const BuildOptions& opts = {}) {
  plan.validate();
  const EigenPairSet ext = exterior_eigs(pencil, plan.extended(), opts.lanczos);
  plan = guard_collisions(std::move(plan), ext.values);
  auto projector = std::make_shared<const SpectralProjector>(
      build_projector(ext, pencil.A22(), pencil.M22(), plan.extended()));
  // A decoupled exterior is spanned by its own modes below the extended window.
  const bool decoupled = nonzero_columns(pencil.A21()).empty() && nonzero_columns(pencil.M21()).empty();
  auto p = std::make_shared<const SparseMatrix>(decoupled && projector->rank() > 0 ? SparseMatrix(pencil.n2(), 0)
                                                                                   : coupling_columns(pencil));
  const ShiftedSystems systems = decoupled ? ShiftedSystems{} : factor_shifts(pencil, plan.xi);
  const Index columns = projector->rank() + plan.points * p->cols();

  BasisMode mode = plan.mode;
  if (mode == BasisMode::Automatic) {
    const double entries = static_cast<double>(pencil.n2()) * static_cast<double>(columns);
    mode = entries <= opts.matrix_free_threshold ? BasisMode::Dense : BasisMode::MatrixFree;
  }

  const ExteriorCholesky r(pencil.A22());
  SvdTriplet svd;
  if (mode == BasisMode::Dense) {
    const Matrix b = assemble_B(*projector, sample_vectors(systems, *projector, *p));
    const Matrix rb = r.apply_r(b);
    svd = truncated_svd(rb, std::min(rb.rows(), rb.cols()));
  } else {
    const LinearMap b = implicit_B(projector, systems, p);
    LinearMap rb;
    rb.rows = b.rows;
    rb.cols = b.cols;
    rb.apply = [&](const Matrix& x) -> Matrix { return r.apply_r(b.apply(x)); };
    rb.apply_transpose = [&](const Matrix& y) -> Matrix { return b.apply_transpose(r.apply_rt(y)); };
    const Index rank_bound =
        std::min({pencil.n2(), columns, projector->rank() + plan.points * interface_rank(pencil)});
    const double cutoff = plan.tol > 0.0 && !opts.fixed_dim ? std::sqrt(plan.tol) / plan.alpha_bound : 0.0;
    svd = truncated_svd(rb, rank_bound, cutoff, opts.subspace);
  }

  ReducedBasis out = truncate_basis(svd, r, pencil.A22(), pencil.M22(), plan.alpha_bound, plan.tol, opts.fixed_dim);
  out.plan = std::move(plan);
  out.projector_rank = projector->rank();
  out.coupling_count = p->cols();
  out.sample_columns = columns;
  out.mode = mode;
  out.used_lu_fallback = std::any_of(systems.begin(), systems.end(), [](const auto& s) { return s->used_fallback(); });
  return out;
}

// The method matrix blockdiag(I, Q~22) as an operator.
class MethodOperator {
 public:
  MethodOperator(Index n1, std::shared_ptr<const Matrix> q) : n1_(n1), q_(std::move(q)) {}

  Index rows() const { return n1_ + q_->rows(); }
  Index cols() const { return n1_ + q_->cols(); }

  Matrix apply(const Matrix& y) const {
    Matrix x(rows(), y.cols());
    x.topRows(n1_) = y.topRows(n1_);
    x.bottomRows(q_->rows()) = *q_ * y.bottomRows(q_->cols());
    return x;
  }
  Matrix apply_transpose(const Matrix& x) const {
    Matrix y(cols(), x.cols());
    y.topRows(n1_) = x.topRows(n1_);
    y.bottomRows(q_->cols()) = q_->transpose() * x.bottomRows(q_->rows());
    return y;
  }

 private:
  Index n1_;
  std::shared_ptr<const Matrix> q_;
};

inline MethodOperator build_method_matrix(const ReducedBasis& basis, Index n1) {
  return MethodOperator(n1, basis.exterior.basis);
}

struct SpectralResult {
  Vector values;
  Matrix vectors;    // back-mapped, M-orthonormal
  Vector residuals;  // against the full pencil
  Index projector_rank = 0;
  Index sample_columns = 0;
  Index exterior_dim = 0;
  Index reduced_dim = 0;
  double bound = 0;
};

enum class ReducedFactorization { Sparse, Block };

struct SolveOptions {
  // Number of smallest eigenvalues to return; default all in (0, Lambda).
  std::optional<Index> count;
  LanczosOptions lanczos{.shift = 0.0, .tol = 1e-11};
  ReducedFactorization factorization = ReducedFactorization::Sparse;
};

inline void check_basis_matches(const ReducedBasis& basis, const BlockPencil& pencil, double rel_tol = 1e-12) {
  if (basis.rows() != pencil.n2()) {
    throw Error(ErrorCode::BasisMismatch, "basis has " + std::to_string(basis.rows()) + " exterior rows, pencil " +
                                              std::to_string(pencil.n2()));
  }
  if (!basis.a22 || !basis.m22) return;
  for (const auto& [stored, current, name] :
       {std::tuple{basis.a22.get(), &pencil.A22(), "A22"}, std::tuple{basis.m22.get(), &pencil.M22(), "M22"}}) {
    const double diff = (*stored - *current).norm();
    if (diff > rel_tol * current->norm()) {
      throw Error(ErrorCode::BasisMismatch, std::string(name) + " differs from the basis build by " +
                                                std::to_string(diff / current->norm()) + " (relative)");
    }
  }
}

// Shift-invert Lanczos on the reduced pencil. The sparse factorization of the
// whole reduced matrix keeps the dense exterior block last; the block variant
// holds the coupling R11^{-T} A12 Q densely.
inline EigenPairSet solve_reduced(const BlockPencil& reduced, const SpectrumRequest& request,
                                  const LanczosOptions& opts,
                                  ReducedFactorization factorization = ReducedFactorization::Sparse) {
  if (factorization == ReducedFactorization::Block) {
    const BlockCholesky factor(reduced.A().matrix(), reduced.n1());
    return lanczos_smallest_with(factor, reduced.A().matrix(), reduced.M().matrix(), request, opts);
  }
  SparseShiftedSolver inv;
  inv.factor.compute(reduced.A().matrix());
  if (inv.factor.info() != Eigen::Success) {
    throw Error(ErrorCode::NotPositiveDefinite, "reduced stiffness fails Cholesky");
  }
  return lanczos_smallest_with(inv, reduced.A().matrix(), reduced.M().matrix(), request, opts);
}

// Rayleigh-Ritz solve in the reduced space; the basis is reused when given.
inline SpectralResult cpi_solve(const BlockPencil& pencil, const ReducedBasis& basis, const SolveOptions& opts = {}) {
  check_basis_matches(basis, pencil);
  const BlockPencil reduced =
      recycle_reduced_blocks(basis.exterior, pencil.A11(), pencil.M11(), pencil.A12(), pencil.M12());
  const SpectrumRequest request =
      opts.count ? SpectrumRequest::smallest(*opts.count) : SpectrumRequest::below(basis.plan.upper);
  const EigenPairSet eigs = solve_reduced(reduced, request, opts.lanczos, opts.factorization);

  SpectralResult out;
  out.values = eigs.values;
  out.vectors = build_method_matrix(basis, pencil.n1()).apply(eigs.vectors);
  out.residuals = relative_residuals(pencil.A().matrix(), pencil.M().matrix(), out.values, out.vectors);
  out.projector_rank = basis.projector_rank;
  out.sample_columns = basis.sample_columns;
  out.exterior_dim = basis.dim();
  out.reduced_dim = reduced.size();
  out.bound = planner::theoretical_bound(basis.plan.upper, basis.plan.gamma, basis.plan.points);
  return out;
}

inline SpectralResult cpi_solve(const BlockPencil& pencil, const CpiPlan& plan, const SolveOptions& opts = {},
                                const BuildOptions& build = {}) {
  return cpi_solve(pencil, build_basis(pencil, plan, build), opts);
}

}  // namespace cpi
