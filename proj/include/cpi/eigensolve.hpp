// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <algorithm>
#include <cmath>
#include <concepts>
#include <cstdint>
#include <limits>
#include <numeric>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Eigenvalues>

#include "cpi/pencil.hpp"

namespace cpi {

// Eigenpairs of a symmetric definite pencil, ascending, M-orthonormal vectors.
struct EigenPairSet {
  Vector values;
  Matrix vectors;
  Vector residuals;

  Index size() const { return values.size(); }
  bool empty() const { return values.size() == 0; }
};

class ConvergenceError : public Error {
 public:
  ConvergenceError(const std::string& what, EigenPairSet partial)
      : Error(ErrorCode::ConvergenceFailure, what), partial_(std::move(partial)) {}
  const EigenPairSet& converged() const { return partial_; }

 private:
  EigenPairSet partial_;
};

// ||A x - lambda M x||_2 / (lambda ||x||_M) per column.
template <class MatA, class MatM>
Vector relative_residuals(const MatA& a, const MatM& m, const Vector& values, const Matrix& vectors) {
  Vector res(values.size());
  for (Index k = 0; k < values.size(); ++k) {
    const Vector x = vectors.col(k);
    const Vector mx = m * x;
    const Vector r = a * x - values(k) * mx;
    res(k) = r.norm() / (std::abs(values(k)) * std::sqrt(std::max(x.dot(mx), 0.0)));
  }
  return res;
}

inline EigenPairSet dense_geneig(const Matrix& a, const Matrix& m, Index dense_limit = 2000) {
  if (a.rows() != a.cols() || m.rows() != m.cols() || a.rows() != m.rows()) {
    throw Error(ErrorCode::DimensionMismatch, "dense pencil blocks must be square and conforming");
  }
  if (a.rows() > dense_limit) {
    throw Error(ErrorCode::OutOfRange, "dimension " + std::to_string(a.rows()) + " exceeds the dense limit " +
                                           std::to_string(dense_limit));
  }
  if (Eigen::LLT<Matrix>(m).info() != Eigen::Success) {
    throw Error(ErrorCode::NotPositiveDefinite, "M fails Cholesky");
  }
  Eigen::GeneralizedSelfAdjointEigenSolver<Matrix> es(symmetrized(a), symmetrized(m),
                                                      Eigen::ComputeEigenvectors | Eigen::Ax_lBx);
  if (es.info() != Eigen::Success) throw Error(ErrorCode::ConvergenceFailure, "dense eigensolver failed");
  EigenPairSet out{es.eigenvalues(), es.eigenvectors(), {}};
  out.residuals = relative_residuals(a, m, out.values, out.vectors);
  return out;
}

// Eigenvalues only; cheaper oracle for large reference spectra.
inline Vector dense_geneig_values(const Matrix& a, const Matrix& m) {
  if (Eigen::LLT<Matrix>(m).info() != Eigen::Success) {
    throw Error(ErrorCode::NotPositiveDefinite, "M fails Cholesky");
  }
  Eigen::GeneralizedSelfAdjointEigenSolver<Matrix> es(symmetrized(a), symmetrized(m),
                                                      Eigen::EigenvaluesOnly | Eigen::Ax_lBx);
  return es.eigenvalues();
}

// #{lambda < l} from the inertia of A - l M (Sylvester's law of inertia).
inline Index count_below(const SparseMatrix& a, const SparseMatrix& m, double l) {
  SparseMatrix shifted = a - l * m;
  SparseLDLT ldlt(shifted);
  if (ldlt.info() != Eigen::Success) {
    throw Error(ErrorCode::SingularShift, "A - l M is singular at l=" + std::to_string(l));
  }
  const Vector& d = ldlt.vectorD();
  const double scale = d.cwiseAbs().maxCoeff();
  if (d.cwiseAbs().minCoeff() <= 1e-12 * scale) {
    throw Error(ErrorCode::SingularShift, "l=" + std::to_string(l) + " is within roundoff of an eigenvalue");
  }
  return static_cast<Index>((d.array() < 0.0).count());
}

inline Index count_below(const EigenPairSet& eigs, double l) {
  return static_cast<Index>((eigs.values.array() < l).count());
}

// Exterior count K(l) of the pencil (A22, M22).
inline Index count_below(const BlockPencil& pencil, double l) { return count_below(pencil.A22(), pencil.M22(), l); }

// Either the `count` smallest eigenvalues or all eigenvalues in (0, upper).
struct SpectrumRequest {
  Index count = 0;
  std::optional<double> upper;

  static SpectrumRequest smallest(Index k) { return {k, std::nullopt}; }
  static SpectrumRequest below(double l) { return {0, l}; }
};

struct LanczosOptions {
  double shift = 0.0;
  // Converged when the Ritz estimate of ||Op x - theta x||_M is below tol * theta.
  double tol = 1e-9;
  int max_restarts = 12;
  std::uint64_t seed = 0x9e3779b97f4a7c15ULL;
};

template <class S>
concept ShiftedSolver = requires(const S& s, const Vector& v) {
  { s.solve(v) } -> std::convertible_to<Vector>;
};

namespace detail {

struct RitzHarvest {
  std::vector<double> values;
  std::vector<Vector> vectors;
};

// One Lanczos run for Op = (A + shift M)^{-1} M in the M-inner product, with
// full reorthogonalization against the run's basis and the locked vectors.
template <ShiftedSolver Solver>
RitzHarvest lanczos_run(const Solver& inv, const SparseMatrix& m, const Matrix& locked, const Matrix& locked_m,
                        Index need, Index max_steps, double tol, std::mt19937_64& rng) {
  const Index n = m.rows();
  Matrix q(n, max_steps + 1);
  Matrix mq(n, max_steps + 1);
  std::normal_distribution<double> normal;

  Vector r(n);
  for (Index i = 0; i < n; ++i) r(i) = normal(rng);
  for (int pass = 0; pass < 2; ++pass) r.noalias() -= locked * (locked_m.transpose() * r);
  Vector mr = m * r;
  double norm = std::sqrt(r.dot(mr));
  q.col(0) = r / norm;
  mq.col(0) = mr / norm;

  std::vector<double> alpha, beta{0.0};
  const Index check_every = std::max<Index>(4, max_steps / 12);
  double op_scale = 0.0;
  RitzHarvest out;

  for (Index j = 0; j < max_steps; ++j) {
    Vector w = inv.solve(mq.col(j));
    const double a = mq.col(j).dot(w);
    alpha.push_back(a);
    op_scale = std::max(op_scale, std::abs(a));
    w.noalias() -= a * q.col(j);
    if (j > 0) w.noalias() -= beta[static_cast<std::size_t>(j)] * q.col(j - 1);
    for (int pass = 0; pass < 2; ++pass) {
      const Vector c = mq.leftCols(j + 1).transpose() * w;
      w.noalias() -= q.leftCols(j + 1) * c;
      if (locked.cols() > 0) w.noalias() -= locked * (locked_m.transpose() * w);
    }
    Vector mw = m * w;
    const double b = std::sqrt(std::max(w.dot(mw), 0.0));
    beta.push_back(b);

    const Index steps = j + 1;
    const bool breakdown = b <= 1e-13 * op_scale;
    const bool last = steps == max_steps || breakdown;
    if (steps >= need && (last || steps % check_every == 0)) {
      Matrix t = Matrix::Zero(steps, steps);
      for (Index i = 0; i < steps; ++i) {
        t(i, i) = alpha[static_cast<std::size_t>(i)];
        if (i + 1 < steps) t(i, i + 1) = t(i + 1, i) = beta[static_cast<std::size_t>(i + 1)];
      }
      Eigen::SelfAdjointEigenSolver<Matrix> es(t);
      const Vector& theta = es.eigenvalues();
      const Matrix& s = es.eigenvectors();
      const Index take = std::min(need, steps);
      bool all = true;
      std::vector<Index> converged;
      for (Index k = 0; k < take; ++k) {
        const Index idx = steps - 1 - k;
        const bool ok = theta(idx) > 0.0 && std::abs(b * s(steps - 1, idx)) <= tol * theta(idx);
        if (ok || breakdown) {
          if (theta(idx) > 0.0) converged.push_back(idx);
        } else {
          all = false;
        }
      }
      if (all || last) {
        for (Index idx : converged) {
          Vector x = q.leftCols(steps) * s.col(idx);
          x /= std::sqrt(x.dot(m * x));
          out.values.push_back(theta(idx));
          out.vectors.push_back(std::move(x));
        }
        return out;
      }
    }
    if (breakdown) break;
    q.col(j + 1) = w / b;
    mq.col(j + 1) = mw / b;
  }
  return out;
}

}  // namespace detail

// Smallest eigenpairs of (A, M) by shift-invert Lanczos with a caller-supplied
// factorization of A + shift M. Completeness is verified by an inertia count;
// missed eigenvalues (multiplicities) are recovered by restarting against the
// locked set.
template <ShiftedSolver Solver>
EigenPairSet lanczos_smallest_with(const Solver& inv, const SparseMatrix& a, const SparseMatrix& m,
                                   SpectrumRequest request, const LanczosOptions& opts = {}) {
  const Index n = a.rows();
  std::optional<double> upper = request.upper;
  Index target = 0;
  if (upper) {
    try {
      target = count_below(a, m, *upper);
    } catch (const Error& e) {
      if (e.code() != ErrorCode::SingularShift) throw;
      *upper *= 1.0 - 1e-9;
      target = count_below(a, m, *upper);
    }
  } else {
    target = std::min(request.count, n);
  }
  if (target <= 0) return {Vector(0), Matrix(n, 0), Vector(0)};

  std::mt19937_64 rng(opts.seed);
  std::vector<double> lambdas;
  Matrix locked(n, 0);
  Matrix locked_m(n, 0);
  Index cap = std::max<Index>(2 * target + 20, 40);

  auto assemble = [&](Index keep) {
    std::vector<Index> order(lambdas.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](Index i, Index j) { return lambdas[i] < lambdas[j]; });
    keep = std::min<Index>(keep, static_cast<Index>(order.size()));
    EigenPairSet out{Vector(keep), Matrix(n, keep), {}};
    for (Index k = 0; k < keep; ++k) {
      out.values(k) = lambdas[static_cast<std::size_t>(order[static_cast<std::size_t>(k)])];
      out.vectors.col(k) = locked.col(order[static_cast<std::size_t>(k)]);
    }
    out.residuals = relative_residuals(a, m, out.values, out.vectors);
    return out;
  };

  for (int attempt = 0; attempt <= opts.max_restarts; ++attempt) {
    const Index have = static_cast<Index>(lambdas.size());
    const Index free = n - have;
    if (free > 0) {
      const Index need = std::max<Index>(1, std::min(target - have, free));
      const Index steps = std::min(free, std::max(cap, need + 20));
      detail::RitzHarvest h = detail::lanczos_run(inv, m, locked, locked_m, need, steps, opts.tol, rng);
      const Index added = static_cast<Index>(h.values.size());
      locked.conservativeResize(n, have + added);
      locked_m.conservativeResize(n, have + added);
      for (Index k = 0; k < added; ++k) {
        const auto uk = static_cast<std::size_t>(k);
        lambdas.push_back(1.0 / h.values[uk] - opts.shift);
        locked.col(have + k) = h.vectors[uk];
        locked_m.col(have + k) = m * h.vectors[uk];
      }
    }

    if (static_cast<Index>(lambdas.size()) >= target) {
      EigenPairSet candidate = assemble(target);
      if (upper) {
        if (count_below(candidate, *upper) == target) return candidate;
      } else {
        const double edge = candidate.values(target - 1);
        Index expected = 0;
        double probe = edge * (1.0 + 1e-9);
        try {
          expected = count_below(a, m, probe);
        } catch (const Error& e) {
          if (e.code() != ErrorCode::SingularShift) throw;
          probe = edge * (1.0 + 1e-7);
          expected = count_below(a, m, probe);
        }
        const auto found = static_cast<Index>(std::count_if(lambdas.begin(), lambdas.end(),
                                                            [&](double l) { return l < probe; }));
        if (expected <= found) return candidate;
      }
      if (free == 0) break;
    }
    cap *= 2;
  }
  throw ConvergenceError("Lanczos did not find all " + std::to_string(target) + " requested eigenpairs",
                         assemble(static_cast<Index>(lambdas.size())));
}

struct SparseShiftedSolver {
  SparseLLT factor;
  Vector solve(const Vector& b) const { return factor.solve(b); }
};

inline EigenPairSet lanczos_smallest(const SparseMatrix& a, const SparseMatrix& m, SpectrumRequest request,
                                     const LanczosOptions& opts = {}) {
  if (a.rows() != m.rows() || a.rows() != a.cols() || m.rows() != m.cols()) {
    throw Error(ErrorCode::DimensionMismatch, "pencil blocks must be square and conforming");
  }
  SparseShiftedSolver inv;
  SparseMatrix shifted = opts.shift == 0.0 ? a : SparseMatrix(a + opts.shift * m);
  inv.factor.compute(shifted);
  if (inv.factor.info() != Eigen::Success) {
    throw Error(ErrorCode::FactorizationFailure, "A + shift M fails Cholesky");
  }
  return lanczos_smallest_with(inv, a, m, request, opts);
}

inline EigenPairSet lanczos_smallest(const SymSparseMatrix& a, const SymSparseMatrix& m, SpectrumRequest request,
                                     const LanczosOptions& opts = {}) {
  return lanczos_smallest(a.matrix(), m.matrix(), request, opts);
}

// All exterior eigenpairs (mu_k, v_k) of (A22, M22) with mu_k in (0, upper).
inline EigenPairSet exterior_eigs(const BlockPencil& pencil, double upper, const LanczosOptions& opts = {}) {
  if (!(upper > 0.0)) throw Error(ErrorCode::DomainError, "exterior bound must be positive");
  return lanczos_smallest(pencil.A22(), pencil.M22(), SpectrumRequest::below(upper), opts);
}

}  // namespace cpi
