// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <cmath>
#include <optional>
#include <random>
#include <vector>

#include "cpi/pencil.hpp"

namespace cpi::fem {

struct Point {
  double x = 0;
  double y = 0;
};

// Straight interface through two points; the line is extended across the rectangle.
struct InterfaceSpec {
  Point a;
  Point b;
};

struct TriMesh {
  double width = 0;
  double height = 0;
  Index nx = 0;
  Index ny = 0;
  std::vector<Point> vertices;
  std::vector<std::array<Index, 3>> triangles;
  std::vector<bool> boundary;
  std::vector<bool> on_interface;  // vertex lies on the interface line
  std::vector<bool> interior_side; // triangle belongs to the interior subdomain

  Index vertex(Index i, Index j) const { return j * (nx + 1) + i; }
  double area(Index t) const {
    const auto& [a, b, c] = triangles[static_cast<std::size_t>(t)];
    const Point& p = vertices[static_cast<std::size_t>(a)];
    const Point& q = vertices[static_cast<std::size_t>(b)];
    const Point& r = vertices[static_cast<std::size_t>(c)];
    return 0.5 * ((q.x - p.x) * (r.y - p.y) - (r.x - p.x) * (q.y - p.y));
  }
};

namespace detail {

inline double side(const InterfaceSpec& s, Point p) {
  return (s.b.x - s.a.x) * (p.y - s.a.y) - (s.b.y - s.a.y) * (p.x - s.a.x);
}

}  // namespace detail

// Structured mesh, each cell split along its (i,j)-(i+1,j+1) diagonal. The
// interface must run along mesh edges; triangles are assigned to a side by
// their centroid and the smaller side becomes the interior subdomain.
inline TriMesh rectangle_mesh(double width, double height, Index nx, Index ny, const InterfaceSpec& interface) {
  if (nx < 2 || ny < 2 || !(width > 0 && height > 0)) {
    throw Error(ErrorCode::DomainError, "mesh needs nx, ny >= 2 and positive extents");
  }
  const double length = std::hypot(interface.b.x - interface.a.x, interface.b.y - interface.a.y);
  if (!(length > 0)) throw Error(ErrorCode::DegenerateInterface, "interface segment has zero length");

  TriMesh mesh;
  mesh.width = width;
  mesh.height = height;
  mesh.nx = nx;
  mesh.ny = ny;
  const double hx = width / static_cast<double>(nx);
  const double hy = height / static_cast<double>(ny);
  const double snap = 1e-12 * std::max(width, height);
  for (Index j = 0; j <= ny; ++j) {
    for (Index i = 0; i <= nx; ++i) {
      const Point p{static_cast<double>(i) * hx, static_cast<double>(j) * hy};
      mesh.vertices.push_back(p);
      mesh.boundary.push_back(i == 0 || j == 0 || i == nx || j == ny);
      mesh.on_interface.push_back(std::abs(detail::side(interface, p)) / length <= snap);
    }
  }
  for (Index j = 0; j < ny; ++j) {
    for (Index i = 0; i < nx; ++i) {
      const Index v00 = mesh.vertex(i, j), v10 = mesh.vertex(i + 1, j);
      const Index v01 = mesh.vertex(i, j + 1), v11 = mesh.vertex(i + 1, j + 1);
      mesh.triangles.push_back({v00, v10, v11});
      mesh.triangles.push_back({v00, v11, v01});
    }
  }

  Index positive = 0, negative = 0;
  std::vector<double> sides;
  sides.reserve(mesh.triangles.size());
  for (const auto& tri : mesh.triangles) {
    Point c{0, 0};
    bool straddles_pos = false, straddles_neg = false;
    for (Index v : tri) {
      const Point& p = mesh.vertices[static_cast<std::size_t>(v)];
      c.x += p.x / 3.0;
      c.y += p.y / 3.0;
      const double s = detail::side(interface, p) / length;
      straddles_pos |= s > snap;
      straddles_neg |= s < -snap;
    }
    if (straddles_pos && straddles_neg) {
      throw Error(ErrorCode::DegenerateInterface, "interface cuts through triangle interiors; it must follow mesh edges");
    }
    const double s = detail::side(interface, c);
    sides.push_back(s);
    (s > 0 ? positive : negative) += 1;
  }
  if (positive == 0 || negative == 0) {
    throw Error(ErrorCode::DegenerateInterface, "interface does not split the rectangle into two nonempty parts");
  }
  const bool interior_positive = positive < negative;
  for (double s : sides) mesh.interior_side.push_back((s > 0) == interior_positive);
  return mesh;
}

// Exact P1 element matrices for the triangle (p0, p1, p2).
inline std::array<std::array<double, 3>, 3> element_stiffness(const std::array<Point, 3>& p) {
  const std::array<double, 3> b{p[1].y - p[2].y, p[2].y - p[0].y, p[0].y - p[1].y};
  const std::array<double, 3> c{p[2].x - p[1].x, p[0].x - p[2].x, p[1].x - p[0].x};
  const double area = 0.5 * (b[0] * c[1] - b[1] * c[0]);
  std::array<std::array<double, 3>, 3> k{};
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) k[i][j] = (b[i] * b[j] + c[i] * c[j]) / (4.0 * area);
  return k;
}

inline std::array<std::array<double, 3>, 3> element_mass(const std::array<Point, 3>& p) {
  const double area = 0.5 * std::abs((p[1].x - p[0].x) * (p[2].y - p[0].y) - (p[2].x - p[0].x) * (p[1].y - p[0].y));
  std::array<std::array<double, 3>, 3> m{};
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) m[i][j] = area / 12.0 * (i == j ? 2.0 : 1.0);
  return m;
}

// Stiffness and mass on all mesh vertices, before boundary elimination.
// coefficients scales the stiffness integrand per triangle.
inline std::pair<SparseMatrix, SparseMatrix> assemble_full(const TriMesh& mesh,
                                                           const std::vector<double>& coefficients = {}) {
  const Index nv = static_cast<Index>(mesh.vertices.size());
  std::vector<Triplet> ka, km;
  ka.reserve(9 * mesh.triangles.size());
  km.reserve(9 * mesh.triangles.size());
  for (std::size_t t = 0; t < mesh.triangles.size(); ++t) {
    const auto& tri = mesh.triangles[t];
    const std::array<Point, 3> p{mesh.vertices[static_cast<std::size_t>(tri[0])],
                                 mesh.vertices[static_cast<std::size_t>(tri[1])],
                                 mesh.vertices[static_cast<std::size_t>(tri[2])]};
    const double coeff = coefficients.empty() ? 1.0 : coefficients[t];
    const auto k = element_stiffness(p);
    const auto m = element_mass(p);
    for (int i = 0; i < 3; ++i) {
      for (int j = 0; j < 3; ++j) {
        ka.emplace_back(static_cast<int>(tri[i]), static_cast<int>(tri[j]), coeff * k[i][j]);
        km.emplace_back(static_cast<int>(tri[i]), static_cast<int>(tri[j]), m[i][j]);
      }
    }
  }
  SparseMatrix a(nv, nv), m(nv, nv);
  a.setFromTriplets(ka.begin(), ka.end());
  m.setFromTriplets(km.begin(), km.end());
  return {std::move(a), std::move(m)};
}

struct FemProblem {
  BlockPencil pencil;
  TriMesh mesh;
  double h = 0;               // mesh width max(hx, hy)
  double diameter = 0;        // largest element diameter
  std::vector<Index> dof;     // mesh vertex -> pencil index, -1 on the Dirichlet boundary
  Index interface_dofs = 0;   // n_Gamma
  std::vector<double> coefficients;

  double exterior_area() const {
    double area = 0;
    for (std::size_t t = 0; t < mesh.triangles.size(); ++t)
      if (!mesh.interior_side[t]) area += mesh.area(static_cast<Index>(t));
    return area;
  }
};

// Pencil ordering: interface vertices, then the rest of the interior side;
// exterior vertices adjacent to the interface, then the rest of the exterior.
inline std::vector<Index> splitting_order(const TriMesh& mesh, Index& n1, Index& n_interface) {
  const std::size_t nv = mesh.vertices.size();
  std::vector<bool> touches_interior(nv, false), touches_exterior(nv, false);
  for (std::size_t t = 0; t < mesh.triangles.size(); ++t) {
    for (Index v : mesh.triangles[t]) {
      (mesh.interior_side[t] ? touches_interior : touches_exterior)[static_cast<std::size_t>(v)] = true;
    }
  }
  std::vector<bool> near_interface(nv, false);
  for (const auto& tri : mesh.triangles) {
    bool has = false;
    for (Index v : tri) has |= touches_interior[static_cast<std::size_t>(v)] && touches_exterior[static_cast<std::size_t>(v)];
    if (has)
      for (Index v : tri) near_interface[static_cast<std::size_t>(v)] = true;
  }

  std::array<std::vector<Index>, 4> groups;
  for (std::size_t v = 0; v < nv; ++v) {
    if (mesh.boundary[v]) continue;
    const bool shared = touches_interior[v] && touches_exterior[v];
    if (shared) {
      groups[0].push_back(static_cast<Index>(v));
    } else if (touches_interior[v]) {
      groups[1].push_back(static_cast<Index>(v));
    } else if (near_interface[v]) {
      groups[2].push_back(static_cast<Index>(v));
    } else {
      groups[3].push_back(static_cast<Index>(v));
    }
  }
  std::vector<Index> dof(nv, -1);
  Index next = 0;
  for (const auto& g : groups)
    for (Index v : g) dof[static_cast<std::size_t>(v)] = next++;
  n_interface = static_cast<Index>(groups[0].size());
  n1 = static_cast<Index>(groups[0].size() + groups[1].size());
  return dof;
}

// Restricts full matrices to the free vertices in pencil order.
inline SparseMatrix restrict_to_dofs(const SparseMatrix& full, const std::vector<Index>& dof, Index n) {
  std::vector<Triplet> t;
  t.reserve(static_cast<std::size_t>(full.nonZeros()));
  for (Index c = 0; c < full.outerSize(); ++c) {
    const Index dc = dof[static_cast<std::size_t>(c)];
    if (dc < 0) continue;
    for (SparseMatrix::InnerIterator it(full, c); it; ++it) {
      const Index dr = dof[static_cast<std::size_t>(it.row())];
      if (dr >= 0) t.emplace_back(static_cast<int>(dr), static_cast<int>(dc), it.value());
    }
  }
  SparseMatrix out(n, n);
  out.setFromTriplets(t.begin(), t.end());
  return out;
}

inline FemProblem assemble_laplace(const TriMesh& mesh, std::vector<double> coefficients = {}) {
  if (!coefficients.empty() && coefficients.size() != mesh.triangles.size()) {
    throw Error(ErrorCode::DimensionMismatch, "one coefficient per triangle required");
  }
  FemProblem prob;
  prob.mesh = mesh;
  Index n1 = 0;
  prob.dof = splitting_order(mesh, n1, prob.interface_dofs);
  const Index n = static_cast<Index>(std::count_if(prob.dof.begin(), prob.dof.end(), [](Index d) { return d >= 0; }));
  if (n == 0) throw Error(ErrorCode::EmptyProblem, "every degree of freedom lies on the Dirichlet boundary");
  if (n1 == 0 || n1 == n) throw Error(ErrorCode::DegenerateInterface, "one side of the splitting has no free dofs");
  const auto [a, m] = assemble_full(mesh, coefficients);
  prob.coefficients = std::move(coefficients);
  const double hx = mesh.width / static_cast<double>(mesh.nx);
  const double hy = mesh.height / static_cast<double>(mesh.ny);
  prob.h = std::max(hx, hy);
  prob.diameter = std::hypot(hx, hy);
  prob.pencil = build_pencil(SymSparseMatrix::from_sparse(restrict_to_dofs(a, prob.dof, n)),
                             SymSparseMatrix::from_sparse(restrict_to_dofs(m, prob.dof, n)), n1);
  return prob;
}

// Version of a problem with the stiffness integrand scaled per triangle;
// factors other than 1 are only allowed on interior triangles.
inline FemProblem perturbed(const FemProblem& base, const std::vector<double>& factors) {
  if (factors.size() != base.mesh.triangles.size()) {
    throw Error(ErrorCode::DimensionMismatch, "one factor per triangle required");
  }
  for (std::size_t t = 0; t < factors.size(); ++t) {
    if (!base.mesh.interior_side[t] && factors[t] != 1.0) {
      throw Error(ErrorCode::PerturbationTouchesExterior, "triangle " + std::to_string(t) + " is exterior");
    }
  }
  std::vector<double> coeff(factors.size());
  for (std::size_t t = 0; t < factors.size(); ++t) {
    coeff[t] = (base.coefficients.empty() ? 1.0 : base.coefficients[t]) * factors[t];
  }
  return assemble_laplace(base.mesh, std::move(coeff));
}

struct VersionSpec {
  std::uint64_t seed = 1;
  double low = 0.5;
  double high = 2.0;
};

// count versions with independent random factors in [low, high] on interior triangles.
inline std::vector<FemProblem> make_versions(const FemProblem& base, const VersionSpec& spec, int count) {
  if (!(spec.low > 0 && spec.low <= spec.high)) throw Error(ErrorCode::DomainError, "factor range must be positive");
  std::mt19937_64 rng(spec.seed);
  std::uniform_real_distribution<double> factor(spec.low, spec.high);
  std::vector<FemProblem> out;
  out.reserve(static_cast<std::size_t>(std::max(count, 0)));
  for (int v = 0; v < count; ++v) {
    std::vector<double> f(base.mesh.triangles.size(), 1.0);
    for (std::size_t t = 0; t < f.size(); ++t)
      if (base.mesh.interior_side[t]) f[t] = factor(rng);
    out.push_back(perturbed(base, f));
  }
  return out;
}

// Desk-scale test problem: 1.5 x 1 rectangle, mesh width 1/(32 refine), interface
// along cell diagonals from (3/8, 0) to (11/8, 1).
inline TriMesh desk_mesh(Index refine = 1) {
  const Index nx = 48 * refine, ny = 32 * refine;
  return rectangle_mesh(1.5, 1.0, nx, ny, InterfaceSpec{{12.0 / 32.0, 0.0}, {44.0 / 32.0, 1.0}});
}

inline FemProblem desk_rectangle(Index refine = 1) { return assemble_laplace(desk_mesh(refine)); }

// Same rectangle with the interface from (1, 0) to (3/2, 1/2), cutting off a
// small interior corner.
inline TriMesh corner_mesh(Index refine = 1) {
  return rectangle_mesh(1.5, 1.0, 48 * refine, 32 * refine, InterfaceSpec{{1.0, 0.0}, {1.5, 0.5}});
}

inline FemProblem corner_rectangle(Index refine = 1) { return assemble_laplace(corner_mesh(refine)); }

// Unit square with a vertical midline interface, mesh width 1/n.
inline FemProblem unit_square(Index n) {
  return assemble_laplace(rectangle_mesh(1.0, 1.0, n, n, InterfaceSpec{{0.5, 0.0}, {0.5, 1.0}}));
}

// Dirichlet eigenvalues pi^2 (m^2/a^2 + k^2/b^2) of the rectangle, ascending.
inline std::vector<double> analytic_eigenvalues(double width, double height, std::size_t count) {
  std::vector<double> values;
  const int range = static_cast<int>(count) + 2;
  constexpr double pi2 = std::numbers::pi * std::numbers::pi;
  for (int m = 1; m <= range; ++m)
    for (int k = 1; k <= range; ++k) values.push_back(pi2 * (m * m / (width * width) + k * k / (height * height)));
  std::sort(values.begin(), values.end());
  values.resize(std::min(count, values.size()));
  return values;
}

}  // namespace cpi::fem
