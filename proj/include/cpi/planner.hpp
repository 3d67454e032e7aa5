// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cmath>
#include <numbers>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Eigenvalues>

#include "cpi/eigensolve.hpp"
#include "cpi/pencil.hpp"

namespace cpi::planner {

// Inputs of the a-priori parameter choice.
struct ProblemProfile {
  int dimension = 2;           // d
  double exterior_volume = 0;  // vol(Omega_2)
  double interface_rank = 0;   // n_Gamma
  double spectral_bound = 0;   // Lambda
  double cost_exponent = 2;    // r in (1, 3)
  double target = 1e-6;        // eta

  void validate() const {
    if (dimension != 2 && dimension != 3) {
      throw Error(ErrorCode::UnsupportedDimension, "d=" + std::to_string(dimension));
    }
    if (!(exterior_volume > 0 && interface_rank > 0 && spectral_bound > 0 && target > 0)) {
      throw Error(ErrorCode::DomainError, "profile entries must be positive");
    }
    if (!(cost_exponent > 1 && cost_exponent < 3)) {
      throw Error(ErrorCode::DomainError, "cost exponent must lie in (1, 3)");
    }
  }
};

struct ErrorBudget {
  double gamma = 0;
  int points = 0;
  double ntol = 0;
  double bound = 0;
  double c_m = 1;
  double lebesgue = 1;
  double alpha_bound = 1;
};

// log of gamma^3 (4(gamma-1))^{-(2N+2)}.
inline double log_ntol(double gamma, double n) {
  if (!(gamma > 1.0)) throw Error(ErrorCode::DomainError, "gamma must exceed 1, got " + std::to_string(gamma));
  return 3.0 * std::log(gamma) - (2.0 * n + 2.0) * std::log(4.0 * (gamma - 1.0));
}

inline double ntol(double gamma, double n) { return std::exp(log_ntol(gamma, n)); }

// C(d) = (2 pi)^{-d} vol(B_d).
inline double weyl_constant(int d) {
  constexpr double pi = std::numbers::pi;
  if (d == 2) return pi / (4.0 * pi * pi);
  if (d == 3) return (4.0 * pi / 3.0) / (8.0 * pi * pi * pi);
  throw Error(ErrorCode::UnsupportedDimension, "d=" + std::to_string(d));
}

inline double weyl_count(int d, double volume, double l) {
  const double c = weyl_constant(d);
  if (!(volume > 0 && l > 0)) throw Error(ErrorCode::DomainError, "Weyl count needs positive volume and level");
  return c * volume * std::pow(l, 0.5 * d);
}

inline double cost(const ProblemProfile& p, double gamma, double n) {
  if (!(gamma > 1.0) || n < 1.0) throw Error(ErrorCode::DomainError, "cost needs gamma > 1 and N >= 1");
  const double k = weyl_count(p.dimension, p.exterior_volume, gamma * p.spectral_bound);
  return std::pow(k + p.interface_rank * n, p.cost_exponent);
}

// Optimal point count for a given gamma from the Lagrange conditions of the
// cost minimization under ntol(gamma, N) = eta.
inline double optimal_points(const ProblemProfile& p, double gamma) {
  const double d = p.dimension;
  const double lead = d * weyl_constant(p.dimension) * std::pow(p.spectral_bound, 0.5 * d) * p.exterior_volume /
                      (2.0 * p.interface_rank);
  return lead * std::pow(gamma, 0.5 * d - 1.0) * (gamma - 1.0) * std::log(4.0 * (gamma - 1.0)) - 2.0;
}

struct OptimalParameters {
  double gamma = 0;
  double points_real = 0;  // N(gamma*) before rounding
  int points = 0;          // ceil(N(gamma*)), at least 1
  double ntol = 0;
};

// Without an explicit upper end the bracket starts at 64 and doubles up to 2^20.
inline OptimalParameters optimize_parameters(const ProblemProfile& p, double lo = 1.0 + 1e-6,
                                             std::optional<double> upper_end = std::nullopt) {
  p.validate();
  if (!(p.target < 1.0)) throw Error(ErrorCode::DomainError, "target must lie in (0, 1)");
  const double log_eta = std::log(p.target);
  // N(gamma) < 0 below gamma = 5/4; clamping to N = 0 keeps the residual positive there.
  auto residual = [&](double g) { return log_ntol(g, std::max(optimal_points(p, g), 0.0)) - log_eta; };
  double hi = upper_end.value_or(64.0);
  double f_lo = residual(lo);
  double f_hi = residual(hi);
  while (!upper_end && f_hi > 0.0 && hi < 1048576.0) {
    hi *= 2.0;
    f_hi = residual(hi);
  }
  if (!(f_lo > 0.0 && f_hi <= 0.0)) {
    throw Error(ErrorCode::NoRoot, "no sign change on gamma in [" + std::to_string(lo) + ", " + std::to_string(hi) +
                                       "]: residuals " + std::to_string(f_lo) + ", " + std::to_string(f_hi));
  }
  while (hi - lo > 1e-10) {
    const double mid = 0.5 * (lo + hi);
    if (residual(mid) > 0.0) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  OptimalParameters out;
  out.gamma = hi;
  out.points_real = optimal_points(p, hi);
  out.points = std::max(1, static_cast<int>(std::ceil(out.points_real - 1e-9)));
  while (ntol(out.gamma, out.points) > p.target) ++out.points;
  out.ntol = ntol(out.gamma, out.points);
  return out;
}

// Reduced two-dimensional relation eta~ ~ 2 (4(gamma-1))^{-N~(gamma)}.
inline double nomogram_points(double gamma) { return (gamma - 1.0) * std::log(4.0 * (gamma - 1.0)); }
inline double nomogram_eta(double gamma) { return 2.0 * std::pow(4.0 * (gamma - 1.0), -nomogram_points(gamma)); }

struct NomogramPoint {
  double gamma = 0;
  double points = 0;  // N~(gamma)
};

inline NomogramPoint nomogram_approx(double eta_tilde) {
  if (!(eta_tilde > 0.0 && eta_tilde < 1.0)) throw Error(ErrorCode::OutOfRange, "eta~ must lie in (0, 1)");
  double lo = 2.0, hi = 5.0;
  if (!(nomogram_eta(lo) >= eta_tilde && nomogram_eta(hi) <= eta_tilde)) {
    throw Error(ErrorCode::OutOfRange, "eta~=" + std::to_string(eta_tilde) + " has no solution for gamma in [2, 5]");
  }
  while (hi - lo > 1e-13) {
    const double mid = 0.5 * (lo + hi);
    if (nomogram_eta(mid) > eta_tilde) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  const double g = 0.5 * (lo + hi);
  return {g, nomogram_points(g)};
}

// Chebyshev zeros on (0, upper), in formula order (descending).
inline std::vector<double> chebyshev_points(double upper, int n) {
  if (!(upper > 0.0) || n < 1) throw Error(ErrorCode::DomainError, "Chebyshev points need upper > 0 and N >= 1");
  std::vector<double> xi(static_cast<std::size_t>(n));
  for (int i = 1; i <= n; ++i) {
    xi[static_cast<std::size_t>(i - 1)] =
        0.5 * upper * (1.0 + std::cos((2.0 * i - 1.0) * std::numbers::pi / (2.0 * n)));
  }
  return xi;
}

// Lagrange basis values l_i(t) for the nodes xi.
inline std::vector<double> lagrange_basis(std::span<const double> xi, double t) {
  std::vector<double> out(xi.size(), 1.0);
  for (std::size_t i = 0; i < xi.size(); ++i) {
    for (std::size_t j = 0; j < xi.size(); ++j) {
      if (j != i) out[i] *= (t - xi[j]) / (xi[i] - xi[j]);
    }
  }
  return out;
}

// max of sum |l_i| over a uniform grid (endpoints included) for Chebyshev nodes.
inline double lebesgue_constant(int n, int grid = 100000) {
  if (n < 1) throw Error(ErrorCode::DomainError, "N must be at least 1");
  if (n == 1) return 1.0;
  const std::vector<double> xi = chebyshev_points(2.0, n);  // nodes on (0, 2), shifted to (-1, 1)
  std::vector<double> x(xi.size()), w(xi.size());
  for (std::size_t i = 0; i < xi.size(); ++i) x[i] = xi[i] - 1.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    double prod = 1.0;
    for (std::size_t j = 0; j < x.size(); ++j)
      if (j != i) prod *= x[i] - x[j];
    w[i] = 1.0 / prod;
  }
  double best = 1.0;
  for (int k = 0; k < grid; ++k) {
    const double t = -1.0 + 2.0 * k / (grid - 1);
    double num = 0.0, den = 0.0;
    bool at_node = false;
    for (std::size_t i = 0; i < x.size(); ++i) {
      const double diff = t - x[i];
      if (diff == 0.0) {
        at_node = true;
        break;
      }
      const double term = w[i] / diff;
      num += std::abs(term);
      den += term;
    }
    if (!at_node) best = std::max(best, std::abs(num / den));
  }
  return best;
}

// C_M = 1 / min positive element of sigma(I - M22^{-1/2} M12^T M11^{-1} M12 M22^{-1/2}).
inline double constant_cm(const Matrix& m, Index n1) {
  const Index n = m.rows();
  if (n1 <= 0 || n1 >= n) throw Error(ErrorCode::DimensionMismatch, "split must lie strictly inside M");
  const Index n2 = n - n1;
  const Matrix m11 = m.topLeftCorner(n1, n1);
  const Matrix m12 = m.topRightCorner(n1, n2);
  const Matrix m22 = m.bottomRightCorner(n2, n2);
  Eigen::SelfAdjointEigenSolver<Matrix> m22_eig(m22);
  const Matrix inv_sqrt = m22_eig.operatorInverseSqrt();
  const Matrix coupled = inv_sqrt * m12.transpose() * Eigen::LLT<Matrix>(m11).solve(m12) * inv_sqrt;
  const Vector spectrum =
      Eigen::SelfAdjointEigenSolver<Matrix>(Matrix::Identity(n2, n2) - symmetrized(coupled)).eigenvalues();
  for (Index i = 0; i < spectrum.size(); ++i) {
    if (spectrum(i) > 0.0) return 1.0 / spectrum(i);
  }
  throw Error(ErrorCode::NoPositiveElement, "spectrum has no positive element; M is not positive definite");
}

inline double theoretical_bound(double upper, double gamma, int n, double c_m = 1.0, double c_lambda = 1.0) {
  if (!(gamma > 1.0)) throw Error(ErrorCode::DomainError, "gamma must exceed 1");
  return c_m * c_lambda * upper * std::pow(4.0 * gamma, 3) * std::pow(4.0 * (gamma - 1.0), -(2.0 * n + 2.0));
}

inline double alpha_bound(int n, double lambda, double inverse_mass_norm) {
  const double ln = lebesgue_constant(n);
  return std::sqrt(1.0 + ln * ln * (1.0 + lambda * lambda) * inverse_mass_norm);
}

// Interpolation error of (mu_k - t)^{-1} at the nodes xi, evaluated at t = lambda.
inline std::vector<double> lagrange_error_coeffs(std::span<const double> mu, std::span<const double> xi,
                                                 double lambda) {
  for (double m : mu) {
    const double scale = std::max(std::abs(m), 1.0);
    if (std::abs(m - lambda) <= 1e-14 * scale) throw Error(ErrorCode::PoleCollision, "lambda coincides with a pole");
    for (double x : xi) {
      if (std::abs(m - x) <= 1e-14 * scale) throw Error(ErrorCode::PoleCollision, "a node coincides with a pole");
    }
  }
  const std::vector<double> ell = lagrange_basis(xi, lambda);
  std::vector<double> c(mu.size());
  for (std::size_t k = 0; k < mu.size(); ++k) {
    double interp = 0.0;
    for (std::size_t j = 0; j < xi.size(); ++j) interp += ell[j] / (mu[k] - xi[j]);
    c[k] = 1.0 / (mu[k] - lambda) - interp;
  }
  return c;
}

// ||M^{-1}||_2 = 1 / lambda_min(M).
inline double estimate_inverse_norm(const SparseMatrix& m, double tol = 1e-10) {
  SparseMatrix identity(m.rows(), m.cols());
  identity.setIdentity();
  LanczosOptions opts;
  opts.tol = tol;
  const EigenPairSet e = lanczos_smallest(m, identity, SpectrumRequest::smallest(1), opts);
  return 1.0 / e.values(0);
}

inline ErrorBudget make_error_budget(double upper, double gamma, int n, double lambda, double inverse_mass_norm,
                                     double c_m = 1.0, double c_lambda = 1.0) {
  ErrorBudget b;
  b.gamma = gamma;
  b.points = n;
  b.ntol = ntol(gamma, n);
  b.c_m = c_m;
  b.bound = theoretical_bound(upper, gamma, n, c_m, c_lambda);
  b.lebesgue = lebesgue_constant(n);
  b.alpha_bound = std::sqrt(1.0 + b.lebesgue * b.lebesgue * (1.0 + lambda * lambda) * inverse_mass_norm);
  return b;
}

}  // namespace cpi::planner
