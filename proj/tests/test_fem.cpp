// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <map>
#include <numbers>

#include "support/oracles.hpp"

using namespace cpi;
using namespace cpi::fem;

namespace {

constexpr double kPi = std::numbers::pi;

ErrorCode code_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no cpi::Error thrown";
  return ErrorCode::IoError;
}

const FemProblem& desk() {
  static const FemProblem prob = desk_rectangle();
  return prob;
}

// Gradients of the barycentric functions from the inverse of the affine map.
std::array<Eigen::Vector2d, 3> barycentric_gradients(const std::array<Point, 3>& p) {
  Eigen::Matrix3d vand;
  for (int i = 0; i < 3; ++i) vand.row(i) << 1.0, p[i].x, p[i].y;
  const Eigen::Matrix3d coeff = vand.inverse();
  return {Eigen::Vector2d(coeff(1, 0), coeff(2, 0)), Eigen::Vector2d(coeff(1, 1), coeff(2, 1)),
          Eigen::Vector2d(coeff(1, 2), coeff(2, 2))};
}

double triangle_area(const std::array<Point, 3>& p) {
  return 0.5 * std::abs((p[1].x - p[0].x) * (p[2].y - p[0].y) - (p[2].x - p[0].x) * (p[1].y - p[0].y));
}

SparseMatrix restrict_interior_stiffness(const FemProblem& prob) {
  std::vector<double> indicator(prob.mesh.triangles.size());
  for (std::size_t t = 0; t < indicator.size(); ++t) indicator[t] = prob.mesh.interior_side[t] ? 1.0 : 0.0;
  return restrict_to_dofs(assemble_full(prob.mesh, indicator).first, prob.dof, prob.pencil.size());
}

}  // namespace

TEST(Elements, MatchQuadratureOracle) {
  const std::vector<std::array<Point, 3>> triangles{
      {{{0, 0}, {1, 0}, {0, 1}}}, {{{0.1, 0.2}, {0.9, 0.35}, {0.4, 1.3}}}, {{{2, 1}, {2.5, 1}, {2.5, 1.25}}}};
  for (const auto& p : triangles) {
    const auto k = element_stiffness(p);
    const auto m = element_mass(p);
    const auto grads = barycentric_gradients(p);
    const double area = triangle_area(p);
    // Edge-midpoint rule is exact for the quadratic products of P1 functions.
    const std::array<std::array<double, 3>, 3> mid{{{0.5, 0.5, 0.0}, {0.0, 0.5, 0.5}, {0.5, 0.0, 0.5}}};
    for (int i = 0; i < 3; ++i) {
      for (int j = 0; j < 3; ++j) {
        EXPECT_NEAR(k[i][j], area * grads[i].dot(grads[j]), 1e-13);
        double quad = 0.0;
        for (const auto& q : mid) quad += q[i] * q[j];
        EXPECT_NEAR(m[i][j], area / 3.0 * quad, 1e-15);
      }
    }
  }
}

TEST(Mesh, TwoByTwoCounts) {
  const TriMesh mesh = rectangle_mesh(1.0, 1.0, 2, 2, InterfaceSpec{{0.5, 0.0}, {0.5, 1.0}});
  EXPECT_EQ(mesh.triangles.size(), 8u);
  EXPECT_EQ(mesh.vertices.size(), 9u);
  Index inner_interface = 0;
  for (std::size_t v = 0; v < mesh.vertices.size(); ++v) inner_interface += mesh.on_interface[v] && !mesh.boundary[v];
  EXPECT_EQ(inner_interface, 1);
  // The only free vertex sits on the interface, leaving no exterior dofs.
  EXPECT_EQ(code_of([&] { assemble_laplace(mesh); }), ErrorCode::DegenerateInterface);
}

TEST(Mesh, UnitSquareCounts) {
  const FemProblem prob = unit_square(64);
  EXPECT_EQ(prob.mesh.triangles.size(), 8192u);
  EXPECT_EQ(prob.mesh.vertices.size(), 4225u);
  EXPECT_EQ(prob.pencil.size(), 63 * 63);
  EXPECT_EQ(prob.interface_dofs, 63);
  EXPECT_DOUBLE_EQ(prob.h, 1.0 / 64.0);
}

TEST(Mesh, OrientationAndEdgeSharing) {
  const TriMesh& mesh = desk().mesh;
  std::map<std::pair<Index, Index>, int> edges;
  for (std::size_t t = 0; t < mesh.triangles.size(); ++t) {
    EXPECT_GT(mesh.area(static_cast<Index>(t)), 0.0);
    const auto& tri = mesh.triangles[t];
    for (int e = 0; e < 3; ++e) {
      const Index a = tri[e], b = tri[(e + 1) % 3];
      ++edges[{std::min(a, b), std::max(a, b)}];
    }
  }
  for (const auto& [edge, count] : edges) {
    const Point& a = mesh.vertices[static_cast<std::size_t>(edge.first)];
    const Point& b = mesh.vertices[static_cast<std::size_t>(edge.second)];
    const bool on_boundary = (a.x == b.x && (a.x == 0.0 || a.x == mesh.width)) ||
                             (a.y == b.y && (a.y == 0.0 || a.y == mesh.height));
    EXPECT_EQ(count, on_boundary ? 1 : 2);
  }
}

TEST(Mesh, DegenerateInterfaces) {
  EXPECT_EQ(code_of([] { rectangle_mesh(1.0, 1.0, 4, 4, InterfaceSpec{{2.0, 0.0}, {2.0, 1.0}}); }),
            ErrorCode::DegenerateInterface);
  EXPECT_EQ(code_of([] { rectangle_mesh(1.0, 1.0, 4, 4, InterfaceSpec{{0.5, 0.5}, {0.5, 0.5}}); }),
            ErrorCode::DegenerateInterface);
  EXPECT_EQ(code_of([] { rectangle_mesh(1.0, 1.0, 4, 4, InterfaceSpec{{0.0, 0.3}, {1.0, 0.3}}); }),
            ErrorCode::DegenerateInterface);
  EXPECT_EQ(code_of([] { rectangle_mesh(1.0, 1.0, 1, 4, InterfaceSpec{{0.5, 0.0}, {0.5, 1.0}}); }),
            ErrorCode::DomainError);
}

TEST(Assembly, PartitionOfUnity) {
  const auto [a, m] = assemble_full(desk().mesh);
  EXPECT_NEAR(Matrix(m).sum(), 1.5, 1e-12);
  const Vector ones = Vector::Ones(a.cols());
  EXPECT_LE((a * ones).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(Assembly, UnitSquareFirstEigenvalue) {
  const double exact = 2.0 * kPi * kPi;
  const double l16 = oracle::dense_eigenvalues(unit_square(16).pencil)(0);
  const double l32 = oracle::dense_eigenvalues(unit_square(32).pencil)(0);
  EXPECT_GT(l32, exact);
  EXPECT_LT(l32, 1.01 * exact);
  const double ratio = (l16 - exact) / (l32 - exact);
  EXPECT_GE(ratio, 3.6);
  EXPECT_LE(ratio, 4.4);
}

TEST(Assembly, GalerkinUpperBoundsOnDesk) {
  const Vector fe = oracle::dense_eigenvalues(desk().pencil);
  const std::vector<double> exact = analytic_eigenvalues(1.5, 1.0, 17);
  for (std::size_t k = 0; k < exact.size(); ++k) {
    EXPECT_GT(fe(static_cast<Index>(k)), exact[k]) << k;
    EXPECT_LT(fe(static_cast<Index>(k)), 1.1 * exact[k]) << k;
  }
}

TEST(Desk, SizesAndWindow) {
  const FemProblem& prob = desk();
  EXPECT_EQ(prob.pencil.size(), 1457);
  EXPECT_EQ(prob.pencil.n1(), 620);
  EXPECT_EQ(prob.interface_dofs, 31);
  EXPECT_DOUBLE_EQ(prob.h, 1.0 / 32.0);
  EXPECT_NEAR(prob.exterior_area(), 0.875, 1e-12);
  EXPECT_NEAR(bench::window_between(prob.pencil, 15), 167.46319808395248, 1e-9);
}

TEST(Corner, Sizes) {
  const FemProblem prob = corner_rectangle();
  EXPECT_EQ(prob.pencil.size(), 1457);
  EXPECT_EQ(prob.pencil.n1(), 120);
  EXPECT_EQ(prob.interface_dofs, 15);
}

TEST(Splitting, InteriorCouplesOnlyThroughInterface) {
  const FemProblem& prob = desk();
  for (Index c : nonzero_columns(prob.pencil.A21())) EXPECT_LT(c, prob.interface_dofs);
  for (Index c : nonzero_columns(prob.pencil.M21())) EXPECT_LT(c, prob.interface_dofs);
  for (std::size_t t = 0; t < prob.mesh.triangles.size(); ++t) {
    if (!prob.mesh.interior_side[t]) continue;
    for (Index v : prob.mesh.triangles[t]) EXPECT_LT(prob.dof[static_cast<std::size_t>(v)], prob.pencil.n1());
  }
  for (std::size_t v = 0; v < prob.dof.size(); ++v) {
    EXPECT_EQ(prob.dof[v] < 0, bool(prob.mesh.boundary[v]));
    if (prob.dof[v] >= 0 && prob.dof[v] < prob.interface_dofs) EXPECT_TRUE(prob.mesh.on_interface[v]);
  }
}

TEST(Versions, UnitFactorReproducesTheProblem) {
  const FemProblem& base = desk();
  const FemProblem same = perturbed(base, std::vector<double>(base.mesh.triangles.size(), 1.0));
  EXPECT_TRUE(identical(same.pencil.A().matrix(), base.pencil.A().matrix()));
  EXPECT_TRUE(identical(same.pencil.M().matrix(), base.pencil.M().matrix()));
}

TEST(Versions, DoublingTheInteriorChangesOnlyInteriorBlocks) {
  const FemProblem& base = desk();
  std::vector<double> f(base.mesh.triangles.size(), 1.0);
  for (std::size_t t = 0; t < f.size(); ++t)
    if (base.mesh.interior_side[t]) f[t] = 2.0;
  const FemProblem v = perturbed(base, f);
  EXPECT_TRUE(identical(v.pencil.A22(), base.pencil.A22()));
  EXPECT_TRUE(identical(v.pencil.M22(), base.pencil.M22()));
  EXPECT_TRUE(identical(v.pencil.M().matrix(), base.pencil.M().matrix()));
  const SparseMatrix diff = v.pencil.A().matrix() - base.pencil.A().matrix();
  const SparseMatrix expected = restrict_interior_stiffness(base);
  EXPECT_LE(Matrix(diff - expected).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(Versions, ExteriorIsNeverTouched) {
  const FemProblem& base = desk();
  std::vector<double> f(base.mesh.triangles.size(), 1.0);
  for (std::size_t t = 0; t < f.size(); ++t) {
    if (!base.mesh.interior_side[t]) {
      f[t] = 1.5;
      break;
    }
  }
  EXPECT_EQ(code_of([&] { perturbed(base, f); }), ErrorCode::PerturbationTouchesExterior);
  EXPECT_EQ(code_of([&] { perturbed(base, std::vector<double>(3, 1.0)); }), ErrorCode::DimensionMismatch);
  EXPECT_EQ(code_of([&] { make_versions(base, VersionSpec{1, 0.0, 1.0}, 1); }), ErrorCode::DomainError);
}

TEST(Versions, RandomVersionsShareTheExterior) {
  const FemProblem& base = desk();
  const std::vector<FemProblem> versions = make_versions(base, VersionSpec{7, 0.5, 2.0}, 10);
  ASSERT_EQ(versions.size(), 10u);
  for (const FemProblem& v : versions) {
    EXPECT_TRUE(identical(v.pencil.A22(), base.pencil.A22()));
    EXPECT_TRUE(identical(v.pencil.M22(), base.pencil.M22()));
    EXPECT_FALSE(identical(v.pencil.A11(), base.pencil.A11()));
  }
  EXPECT_FALSE(identical(versions[0].pencil.A11(), versions[1].pencil.A11()));
}

TEST(Problems, EmptyProblem) {
  TriMesh mesh = rectangle_mesh(1.0, 1.0, 4, 4, InterfaceSpec{{0.5, 0.0}, {0.5, 1.0}});
  std::fill(mesh.boundary.begin(), mesh.boundary.end(), true);
  EXPECT_EQ(code_of([&] { assemble_laplace(mesh); }), ErrorCode::EmptyProblem);
}

TEST(Problems, AnalyticEigenvalues) {
  const std::vector<double> v = analytic_eigenvalues(1.0, 1.0, 4);
  ASSERT_EQ(v.size(), 4u);
  EXPECT_DOUBLE_EQ(v[0], 2.0 * kPi * kPi);
  EXPECT_DOUBLE_EQ(v[1], 5.0 * kPi * kPi);
  EXPECT_DOUBLE_EQ(v[2], 5.0 * kPi * kPi);
  EXPECT_DOUBLE_EQ(v[3], 8.0 * kPi * kPi);
}
