#pragma once

#include <Eigen/Sparse>

#include <array>
#include <functional>
#include <vector>

#include "strata/grid.hpp"
#include "strata/operators.hpp"

namespace strata {

using SpMat = Eigen::SparseMatrix<double>;

enum class BoundaryKind { dirichlet_all, periodic_x1 };  // periodic_x1: test harness only

// Node numbering over the grid; under the periodic harness the last x1 column
// is identified with the first. Two dofs per node: 2*id (u1), 2*id+1 (u3).
struct NodeMap {
  const Grid2D* g = nullptr;
  BoundaryKind bc = BoundaryKind::dirichlet_all;

  NodeMap() = default;
  NodeMap(const Grid2D& grid, BoundaryKind kind) : g(&grid), bc(kind) {}

  bool periodic() const { return bc == BoundaryKind::periodic_x1; }
  int row_nodes() const { return periodic() ? g->n1() : g->n1() + 1; }
  int count() const { return row_nodes() * (g->n3() + 1); }
  int ndof() const { return 2 * count(); }
  int id(int i, int j) const {
    const int ii = (periodic() && i == g->n1()) ? 0 : i;
    return j * row_nodes() + ii;
  }
  int dof(int i, int j, int comp) const { return 2 * id(i, j) + comp; }

  // nodal (trapezoid) quadrature weight in solver numbering; x1 weights wrap
  // under the periodic harness
  double weight(int i, int j) const {
    if (!periodic()) return g->node_weight(i, j);
    const double w1 = (i == 0) ? 0.5 * (g->h1(0) + g->h1(g->n1() - 1))
                               : 0.5 * (g->h1(i - 1) + g->h1(i));
    const double w3 = (j > 0 ? 0.5 * g->h3(j - 1) : 0.0) + (j < g->n3() ? 0.5 * g->h3(j) : 0.0);
    return w1 * w3;
  }

  // scatter a nodal functor into a solver-layout vector
  Vec interpolate(const std::function<std::array<double, 2>(double, double)>& f) const {
    Vec v = Vec::Zero(ndof());
    for (int j = 0; j <= g->n3(); ++j)
      for (int i = 0; i < row_nodes(); ++i) {
        const auto val = f(g->x1[i], g->x3[j]);
        v[dof(i, j, 0)] = val[0];
        v[dof(i, j, 1)] = val[1];
      }
    return v;
  }

  PlaneField to_field(const Vec& v) const {
    PlaneField f(*g);
    for (int j = 0; j <= g->n3(); ++j)
      for (int i = 0; i <= g->n1(); ++i) {
        f.u1(i, j) = v[dof(i, j, 0)];
        f.u3(i, j) = v[dof(i, j, 1)];
      }
    return f;
  }
};

// Homogeneous Dirichlet constraints realized by degree-of-freedom elimination.
struct Constraints {
  std::vector<int> full_to_free;  // -1 where fixed
  std::vector<int> free_to_full;

  static Constraints from_fixed(const std::vector<char>& fixed) {
    Constraints c;
    c.full_to_free.assign(fixed.size(), -1);
    for (size_t d = 0; d < fixed.size(); ++d)
      if (!fixed[d]) {
        c.full_to_free[d] = static_cast<int>(c.free_to_full.size());
        c.free_to_full.push_back(static_cast<int>(d));
      }
    return c;
  }

  int n_free() const { return static_cast<int>(free_to_full.size()); }

  SpMat reduce(const SpMat& A) const {
    std::vector<Eigen::Triplet<double>> t;
    t.reserve(A.nonZeros());
    for (int k = 0; k < A.outerSize(); ++k)
      for (SpMat::InnerIterator it(A, k); it; ++it) {
        const int r = full_to_free[it.row()], c = full_to_free[it.col()];
        if (r >= 0 && c >= 0) t.emplace_back(r, c, it.value());
      }
    SpMat R(n_free(), n_free());
    R.setFromTriplets(t.begin(), t.end());
    return R;
  }

  Vec reduce(const Vec& v) const {
    Vec r(n_free());
    for (int k = 0; k < n_free(); ++k) r[k] = v[free_to_full[k]];
    return r;
  }

  Vec expand(const Vec& r, int full_size) const {
    Vec v = Vec::Zero(full_size);
    for (int k = 0; k < n_free(); ++k) v[free_to_full[k]] = r[k];
    return v;
  }
};

// dofs fixed by the clamped outer boundary (all components); under the
// periodic harness only the x3 = {0,L} edges are constrained
inline std::vector<char> boundary_fixed_dofs(const NodeMap& map) {
  std::vector<char> fixed(map.ndof(), 0);
  const Grid2D& g = *map.g;
  for (int i = 0; i < map.row_nodes(); ++i)
    for (int c = 0; c < 2; ++c) {
      fixed[map.dof(i, 0, c)] = 1;
      fixed[map.dof(i, g.n3(), c)] = 1;
    }
  if (!map.periodic())
    for (int j = 0; j <= g.n3(); ++j)
      for (int c = 0; c < 2; ++c) {
        fixed[map.dof(0, j, c)] = 1;
        fixed[map.dof(g.n1(), j, c)] = 1;
      }
  return fixed;
}

namespace detail {
// 2x2 Gauss points/weights on the reference square [0,1]^2
constexpr double kGp[2] = {0.2113248654051871177, 0.7886751345948128823};

template <typename F>
void quad_cell(double h1, double h3, F&& body) {
  for (int q1 = 0; q1 < 2; ++q1)
    for (int q3 = 0; q3 < 2; ++q3) body(kGp[q1], kGp[q3], 0.25 * h1 * h3);
}

struct ShapeEval {
  std::array<double, 4> N, dN1, dN3;
};

inline ShapeEval shapes(double xi, double eta, double h1, double h3) {
  ShapeEval s;
  const std::array<double, 2> f1{1.0 - xi, xi}, f3{1.0 - eta, eta};
  const std::array<double, 2> d1{-1.0 / h1, 1.0 / h1}, d3{-1.0 / h3, 1.0 / h3};
  // local order: (0,0), (1,0), (1,1), (0,1)
  const int a1[4] = {0, 1, 1, 0}, a3[4] = {0, 0, 1, 1};
  for (int a = 0; a < 4; ++a) {
    s.N[a] = f1[a1[a]] * f3[a3[a]];
    s.dN1[a] = d1[a1[a]] * f3[a3[a]];
    s.dN3[a] = f1[a1[a]] * d3[a3[a]];
  }
  return s;
}
}  // namespace detail

// Consistent mass matrix with cellwise density.
inline SpMat mass_matrix(const NodeMap& map, const Vec& density_cell) {
  const Grid2D& g = *map.g;
  std::vector<Eigen::Triplet<double>> t;
  t.reserve(32 * g.num_cells());
  for (int j = 0; j < g.n3(); ++j)
    for (int i = 0; i < g.n1(); ++i) {
      const double rho = density_cell[g.cell(i, j)];
      const int nd[4] = {map.id(i, j), map.id(i + 1, j), map.id(i + 1, j + 1), map.id(i, j + 1)};
      double me[4][4] = {};
      detail::quad_cell(g.h1(i), g.h3(j), [&](double xi, double eta, double w) {
        const auto s = detail::shapes(xi, eta, g.h1(i), g.h3(j));
        for (int a = 0; a < 4; ++a)
          for (int b = 0; b < 4; ++b) me[a][b] += w * rho * s.N[a] * s.N[b];
      });
      for (int a = 0; a < 4; ++a)
        for (int b = 0; b < 4; ++b)
          for (int c = 0; c < 2; ++c) t.emplace_back(2 * nd[a] + c, 2 * nd[b] + c, me[a][b]);
    }
  SpMat M(map.ndof(), map.ndof());
  M.setFromTriplets(t.begin(), t.end());
  return M;
}

// Plane-strain isotropic stiffness with cellwise Lame coefficients:
// integrand sigma(u):e(psi), engineering-shear B-matrix formulation.
inline SpMat stiffness_matrix(const NodeMap& map, const Vec& lambda_cell, const Vec& mu_cell) {
  const Grid2D& g = *map.g;
  std::vector<Eigen::Triplet<double>> t;
  t.reserve(64 * g.num_cells());
  for (int j = 0; j < g.n3(); ++j)
    for (int i = 0; i < g.n1(); ++i) {
      const int c = g.cell(i, j);
      const double la = lambda_cell[c], mu = mu_cell[c];
      const int nd[4] = {map.id(i, j), map.id(i + 1, j), map.id(i + 1, j + 1), map.id(i, j + 1)};
      double ke[8][8] = {};
      detail::quad_cell(g.h1(i), g.h3(j), [&](double xi, double eta, double w) {
        const auto s = detail::shapes(xi, eta, g.h1(i), g.h3(j));
        // B rows: e11, e33, gamma13; columns (a, comp)
        double B[3][8] = {};
        for (int a = 0; a < 4; ++a) {
          B[0][2 * a + 0] = s.dN1[a];
          B[1][2 * a + 1] = s.dN3[a];
          B[2][2 * a + 0] = s.dN3[a];
          B[2][2 * a + 1] = s.dN1[a];
        }
        const double D[3][3] = {{la + 2 * mu, la, 0}, {la, la + 2 * mu, 0}, {0, 0, mu}};
        for (int p = 0; p < 8; ++p)
          for (int q = 0; q < 8; ++q) {
            double v = 0.0;
            for (int r = 0; r < 3; ++r)
              for (int sdx = 0; sdx < 3; ++sdx) v += B[r][p] * D[r][sdx] * B[sdx][q];
            ke[p][q] += w * v;
          }
      });
      for (int a = 0; a < 4; ++a)
        for (int b = 0; b < 4; ++b)
          for (int ca = 0; ca < 2; ++ca)
            for (int cb = 0; cb < 2; ++cb)
              t.emplace_back(2 * nd[a] + ca, 2 * nd[b] + cb, ke[2 * a + ca][2 * b + cb]);
    }
  SpMat K(map.ndof(), map.ndof());
  K.setFromTriplets(t.begin(), t.end());
  return K;
}

// Membrane stiffness: \int coeff(x) * d1(u1) d1(psi1) dx, acting on the u1
// component only (x2-invariant section). coeff_cell already carries
// k * n * 4(l+1)/(l+2) or whatever weight the regime prescribes.
inline SpMat membrane_matrix(const NodeMap& map, const Vec& coeff_cell) {
  const Grid2D& g = *map.g;
  std::vector<Eigen::Triplet<double>> t;
  t.reserve(16 * g.num_cells());
  for (int j = 0; j < g.n3(); ++j)
    for (int i = 0; i < g.n1(); ++i) {
      const double cf = coeff_cell[g.cell(i, j)];
      if (cf == 0.0) continue;
      const int nd[4] = {map.id(i, j), map.id(i + 1, j), map.id(i + 1, j + 1), map.id(i, j + 1)};
      double ke[4][4] = {};
      detail::quad_cell(g.h1(i), g.h3(j), [&](double xi, double eta, double w) {
        const auto s = detail::shapes(xi, eta, g.h1(i), g.h3(j));
        for (int a = 0; a < 4; ++a)
          for (int b = 0; b < 4; ++b) ke[a][b] += w * cf * s.dN1[a] * s.dN1[b];
      });
      for (int a = 0; a < 4; ++a)
        for (int b = 0; b < 4; ++b) t.emplace_back(2 * nd[a], 2 * nd[b], ke[a][b]);
    }
  SpMat K(map.ndof(), map.ndof());
  K.setFromTriplets(t.begin(), t.end());
  return K;
}

// Bending stiffness on the u3 component: sum over x1 grid lines of
// coeff(node) * (D2 u3) (D2 psi3) with clamped second differences and nodal
// weights; coeff already carries n * kappa/3 * (l+1)/(l+2). Requires uniform x1.
inline SpMat bending_matrix(const NodeMap& map, const ScalarField& coeff_node) {
  const Grid2D& g = *map.g;
  if (map.periodic()) throw RegimeMismatch("bending operator is not available in the periodic harness");
  const double h = g.h1(0);
  for (int i = 0; i < g.n1(); ++i)
    if (std::abs(g.h1(i) - h) > 1e-12 * h) throw GridMismatch("bending operator requires uniform x1 spacing");

  const int nn = g.n1() + 1;
  const SpMat D2 = clamped_second_difference(nn, h);
  std::vector<Eigen::Triplet<double>> t;
  for (int j = 0; j <= g.n3(); ++j) {
    const double w3 = (j > 0 ? 0.5 * g.h3(j - 1) : 0.0) + (j < g.n3() ? 0.5 * g.h3(j) : 0.0);
    // rows of D2^T diag(w) D2 restricted to this grid line
    SpMat W(nn, nn);
    std::vector<Eigen::Triplet<double>> wt;
    for (int i = 0; i < nn; ++i) {
      const double w1 = (i > 0 ? 0.5 * h : 0.0) + (i < g.n1() ? 0.5 * h : 0.0);
      wt.emplace_back(i, i, w3 * w1 * coeff_node(i, j));
    }
    W.setFromTriplets(wt.begin(), wt.end());
    const SpMat Bj = D2.transpose() * W * D2;
    for (int k = 0; k < Bj.outerSize(); ++k)
      for (SpMat::InnerIterator it(Bj, k); it; ++it)
        if (it.value() != 0.0)
          t.emplace_back(2 * map.id(static_cast<int>(it.row()), j) + 1,
                         2 * map.id(static_cast<int>(it.col()), j) + 1, it.value());
  }
  SpMat K(map.ndof(), map.ndof());
  K.setFromTriplets(t.begin(), t.end());
  return K;
}

}  // namespace strata
