#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <vector>

#include "strata/errors.hpp"

namespace strata {

using Vec = Eigen::VectorXd;

// Tensor-product grid on (0,W) x (0,L); coordinates (x1, x3).
// x1 spacing is uniform, x3 may be graded. Nodes are ordered x1-fastest.
struct Grid2D {
  std::vector<double> x1;  // n1()+1 node coordinates
  std::vector<double> x3;  // n3()+1 node coordinates

  int n1() const { return static_cast<int>(x1.size()) - 1; }
  int n3() const { return static_cast<int>(x3.size()) - 1; }
  int num_nodes() const { return (n1() + 1) * (n3() + 1); }
  int num_cells() const { return n1() * n3(); }

  int node(int i, int j) const { return j * (n1() + 1) + i; }
  int cell(int i, int j) const { return j * n1() + i; }

  double W() const { return x1.back(); }
  double L() const { return x3.back(); }

  double h1(int i) const { return x1[i + 1] - x1[i]; }
  double h3(int j) const { return x3[j + 1] - x3[j]; }
  double cell_area(int i, int j) const { return h1(i) * h3(j); }
  double cell_x1(int i) const { return 0.5 * (x1[i] + x1[i + 1]); }
  double cell_x3(int j) const { return 0.5 * (x3[j] + x3[j + 1]); }

  double min_h3() const {
    double h = x3[1] - x3[0];
    for (int j = 0; j < n3(); ++j) h = std::min(h, h3(j));
    return h;
  }

  // Weight of the nodal (trapezoid) quadrature rule, sum = W*L.
  double node_weight(int i, int j) const {
    const double w1 = (i > 0 ? 0.5 * h1(i - 1) : 0.0) + (i < n1() ? 0.5 * h1(i) : 0.0);
    const double w3 = (j > 0 ? 0.5 * h3(j - 1) : 0.0) + (j < n3() ? 0.5 * h3(j) : 0.0);
    return w1 * w3;
  }

  static Grid2D uniform(double W, double L, int nx, int nz) {
    Grid2D g;
    g.x1.resize(nx + 1);
    g.x3.resize(nz + 1);
    for (int i = 0; i <= nx; ++i) g.x1[i] = W * i / nx;
    for (int j = 0; j <= nz; ++j) g.x3[j] = L * j / nz;
    return g;
  }

  bool same_as(const Grid2D& o, double tol = 1e-12) const {
    if (x1.size() != o.x1.size() || x3.size() != o.x3.size()) return false;
    for (size_t i = 0; i < x1.size(); ++i)
      if (std::abs(x1[i] - o.x1[i]) > tol) return false;
    for (size_t j = 0; j < x3.size(); ++j)
      if (std::abs(x3[j] - o.x3[j]) > tol) return false;
    return true;
  }
};

// Two-component nodal displacement field; dof(n,c) = 2n+c with c=0 -> u1, c=1 -> u3.
struct PlaneField {
  const Grid2D* grid = nullptr;
  Vec v;

  PlaneField() = default;
  explicit PlaneField(const Grid2D& g) : grid(&g), v(Vec::Zero(2 * g.num_nodes())) {}

  double u1(int i, int j) const { return v[2 * grid->node(i, j)]; }
  double u3(int i, int j) const { return v[2 * grid->node(i, j) + 1]; }
  double& u1(int i, int j) { return v[2 * grid->node(i, j)]; }
  double& u3(int i, int j) { return v[2 * grid->node(i, j) + 1]; }
};

// Scalar field attached to grid nodes.
struct ScalarField {
  const Grid2D* grid = nullptr;
  Vec v;

  ScalarField() = default;
  explicit ScalarField(const Grid2D& g) : grid(&g), v(Vec::Zero(g.num_nodes())) {}

  double operator()(int i, int j) const { return v[grid->node(i, j)]; }
  double& operator()(int i, int j) { return v[grid->node(i, j)]; }
};

// Monotone coordinate vector covering [0,len] that places every entry of
// `interfaces` exactly on a grid line. Segments between interfaces marked
// "fine" get `fine_cells` uniform cells; the rest are graded geometrically
// from the neighboring fine size up to `coarse_target`.
inline std::vector<double> graded_axis(double len, const std::vector<double>& interfaces,
                                       const std::vector<bool>& segment_is_fine, int fine_cells,
                                       double coarse_target, double growth = 1.5) {
  std::vector<double> brk{0.0};
  for (double s : interfaces) brk.push_back(s);
  brk.push_back(len);

  std::vector<double> coords{0.0};
  auto emit_uniform = [&coords](double a, double b, int m) {
    for (int q = 1; q <= m; ++q) coords.push_back(a + (b - a) * q / m);
  };
  // Symmetric geometric grading: cells grow from both ends toward the middle.
  auto emit_graded = [&](double a, double b, double h_end) {
    const double seg = b - a;
    if (seg <= h_end * 2.01) {
      emit_uniform(a, b, 2);
      return;
    }
    std::vector<double> sizes;
    double h = h_end, covered = 0.0;
    while (covered + h < 0.5 * seg) {
      sizes.push_back(h);
      covered += h;
      h = std::min(h * growth, coarse_target);
    }
    std::vector<double> all(sizes);
    all.push_back(seg - 2.0 * covered);  // middle cell absorbs the remainder
    all.insert(all.end(), sizes.rbegin(), sizes.rend());
    double x = a;
    for (double s : all) {
      x += s;
      coords.push_back(x);
    }
    coords.back() = b;
  };

  for (size_t s = 0; s + 1 < brk.size(); ++s) {
    const double a = brk[s], b = brk[s + 1];
    if (b - a <= 0.0) continue;
    if (segment_is_fine[s]) {
      emit_uniform(a, b, fine_cells);
    } else {
      const double h_end = segment_is_fine.size() == 1 ? coarse_target
                                                       : std::min(coarse_target, (b - a) / 4.0);
      double h_fine = coarse_target;
      // start from a size comparable to the adjacent fine cells
      if (s > 0 && segment_is_fine[s - 1]) h_fine = (brk[s] - brk[s - 1]) / fine_cells;
      if (s + 2 < brk.size() && segment_is_fine[s + 1])
        h_fine = std::min(h_fine, (brk[s + 2] - brk[s + 1]) / fine_cells);
      emit_graded(a, b, std::min(h_fine * 2.0, h_end));
    }
  }
  return coords;
}

}  // namespace strata
