#pragma once

#include <Eigen/Sparse>

#include <array>
#include <cmath>
#include <variant>
#include <vector>

#include "strata/grid.hpp"
#include "strata/layers.hpp"
#include "strata/scaling.hpp"

namespace strata {

// Symmetric 2x2 tensors on the (x1,x3) plane-strain section, one per cell.
struct StrainField {
  Vec e11, e13, e33;
  explicit StrainField(int cells) : e11(Vec::Zero(cells)), e13(Vec::Zero(cells)), e33(Vec::Zero(cells)) {}
};

struct StressField {
  Vec s11, s13, s33;
  explicit StressField(int cells) : s11(Vec::Zero(cells)), s13(Vec::Zero(cells)), s33(Vec::Zero(cells)) {}
};

// Cell-centered strain of a Q1 nodal field (exact gradient of the bilinear
// interpolant at the cell midpoint).
inline StrainField cell_strain(const PlaneField& u) {
  const Grid2D& g = *u.grid;
  StrainField e(g.num_cells());
  for (int j = 0; j < g.n3(); ++j) {
    for (int i = 0; i < g.n1(); ++i) {
      const int c = g.cell(i, j);
      const double ih1 = 1.0 / g.h1(i), ih3 = 1.0 / g.h3(j);
      const double d1u1 = 0.5 * ih1 * (u.u1(i + 1, j) + u.u1(i + 1, j + 1) - u.u1(i, j) - u.u1(i, j + 1));
      const double d3u1 = 0.5 * ih3 * (u.u1(i, j + 1) + u.u1(i + 1, j + 1) - u.u1(i, j) - u.u1(i + 1, j));
      const double d1u3 = 0.5 * ih1 * (u.u3(i + 1, j) + u.u3(i + 1, j + 1) - u.u3(i, j) - u.u3(i, j + 1));
      const double d3u3 = 0.5 * ih3 * (u.u3(i, j + 1) + u.u3(i + 1, j + 1) - u.u3(i, j) - u.u3(i + 1, j));
      e.e11[c] = d1u1;
      e.e33[c] = d3u3;
      e.e13[c] = 0.5 * (d3u1 + d1u3);
    }
  }
  return e;
}

// sigma = lambda tr(e) I + 2 mu e on the plane-strain section.
inline StressField isotropic_stress(double lambda, double mu, const StrainField& e) {
  StressField s(static_cast<int>(e.e11.size()));
  for (int c = 0; c < e.e11.size(); ++c) {
    const double tr = e.e11[c] + e.e33[c];
    s.s11[c] = lambda * tr + 2.0 * mu * e.e11[c];
    s.s33[c] = lambda * tr + 2.0 * mu * e.e33[c];
    s.s13[c] = 2.0 * mu * e.e13[c];
  }
  return s;
}

// In-plane membrane stress sigma_x'(psi) = 2 e_x'(psi) + (2l/(l+2)) tr(e_x'(psi)) I'.
// On the x2-invariant section with psi2 = 0 the in-plane strain reduces to its
// 11 entry d(psi1)/dx1, so the only nonzero stress entry is
// s11 = 4(l+1)/(l+2) * d(psi1)/dx1; kept per cell.
inline StressField sigma_xprime(double l, const PlaneField& psi) {
  const Grid2D& g = *psi.grid;
  StressField s(g.num_cells());
  const double two = 2.0, vol = 2.0 * l / (l + 2.0);
  for (int j = 0; j < g.n3(); ++j) {
    for (int i = 0; i < g.n1(); ++i) {
      const int c = g.cell(i, j);
      const double d1p1 = 0.5 / g.h1(i) *
          (psi.u1(i + 1, j) + psi.u1(i + 1, j + 1) - psi.u1(i, j) - psi.u1(i, j + 1));
      const double e11 = d1p1, tr = e11;  // e22 = 0 under x2-invariance
      s.s11[c] = two * e11 + vol * tr;
    }
  }
  return s;
}

inline double membrane_coefficient(double l) { return 4.0 * (l + 1.0) / (l + 2.0); }
inline double bending_weak_coefficient(double l) { return 2.0 * (l + 1.0) / (l + 2.0); }
inline double bending_strong_coefficient(double l) { return (l + 1.0) / (l + 2.0) / 3.0; }

// In-plane Hessian pair (H, H^sigma) of a scalar row field psi(x1); under
// x2-invariance only the d^2/dx1^2 entries survive:
//   H11 = psi'' ,  Hs11 = 2(l+1)/(l+2) psi'' ,  Hs22 = (l/(l+2)) psi''.
// Second differences; shifted 3-point stencils at the row ends.
struct BendingPair {
  Vec H11, Hs11, Hs22;
};

inline BendingPair bending_pair(double l, const Vec& psi_row, double h) {
  const int n = static_cast<int>(psi_row.size());
  BendingPair b{Vec::Zero(n), Vec::Zero(n), Vec::Zero(n)};
  const double c11 = bending_weak_coefficient(l), c22 = l / (l + 2.0);
  auto d2 = [&](int i) {
    const int m = std::min(std::max(i, 1), n - 2);  // shift stencil inward at the ends
    return (psi_row[m - 1] - 2.0 * psi_row[m] + psi_row[m + 1]) / (h * h);
  };
  for (int i = 0; i < n; ++i) {
    const double w = d2(i);
    b.H11[i] = w;
    b.Hs11[i] = c11 * w;
    b.Hs22[i] = c22 * w;
  }
  return b;
}

// Clamped second-difference rows along one x1 grid line: value and normal
// derivative vanish at both ends, imposed through ghost reflection
// (v_{-1} = v_1, v_0 = 0 and mirrored on the right). Row i approximates
// v''(x_i); boundary columns are dropped (those DOFs are constrained).
inline Eigen::SparseMatrix<double> clamped_second_difference(int n_nodes, double h) {
  Eigen::SparseMatrix<double> D(n_nodes, n_nodes);
  std::vector<Eigen::Triplet<double>> t;
  const double ih2 = 1.0 / (h * h);
  for (int i = 0; i < n_nodes; ++i) {
    auto add = [&](int col, double val) {
      if (col > 0 && col < n_nodes - 1) t.emplace_back(i, col, val);
    };
    if (i == 0) {
      add(1, 2.0 * ih2);  // v_{-1} = v_1, v_0 = 0
    } else if (i == n_nodes - 1) {
      add(n_nodes - 2, 2.0 * ih2);
    } else {
      add(i - 1, ih2);
      add(i, -2.0 * ih2);
      add(i + 1, ih2);
    }
  }
  D.setFromTriplets(t.begin(), t.end());
  return D;
}

// Classic clamped fourth-difference (1,-4,6,-4,1)/h^4 with ghost substitution
// v_0 = 0, v_{-1} = v_1 near the ends; used as the strong-form reference.
inline Vec clamped_fourth_difference_apply(const Vec& v, double h) {
  const int n = static_cast<int>(v.size());
  Vec out = Vec::Zero(n);
  const double ih4 = 1.0 / (h * h * h * h);
  auto at = [&](int i) -> double {
    if (i >= 0 && i < n) return v[i];
    if (i == -1) return v[1];              // reflection ghost, v_0 = 0
    if (i == n) return v[n - 2];
    return 0.0;
  };
  for (int i = 1; i < n - 1; ++i)
    out[i] = ih4 * (at(i - 2) - 4.0 * at(i - 1) + 6.0 * at(i) - 4.0 * at(i + 1) + at(i + 2));
  return out;
}

enum class EffectiveForm { membrane, bending };

// Limit bilinear form with the layer density inside the integral:
//   membrane: k \int e_x'(u'):sigma_x'(psi') n dx      (midpoint per cell)
//   bending:  kappa/6 \int H(u3):H^sigma(psi3) n dx    (nodal rows, clamped)
// Density n is sampled per cell (membrane) or per node (bending) from `n`.
inline double effective_bilinear(EffectiveForm form, double coeff, double l,
                                 const std::variant<const PlaneField*, const ScalarField*>& u,
                                 const std::variant<const PlaneField*, const ScalarField*>& psi,
                                 const ScalarField& n) {
  if (form == EffectiveForm::membrane) {
    if (!std::holds_alternative<const PlaneField*>(u) || !std::holds_alternative<const PlaneField*>(psi))
      throw RegimeMismatch("membrane form requires vector fields");
    const PlaneField& U = *std::get<const PlaneField*>(u);
    const PlaneField& P = *std::get<const PlaneField*>(psi);
    if (U.grid != P.grid || n.grid != U.grid) throw GridMismatch("membrane form: fields on different grids");
    const Grid2D& g = *U.grid;
    const StressField su = sigma_xprime(l, U);
    const StressField sp = sigma_xprime(l, P);
    // e_x'(u):sigma_x'(psi) = s11(u) s11(psi) / (4(l+1)/(l+2)) restores the strain factor
    const double inv = 1.0 / membrane_coefficient(l);
    double acc = 0.0;
    for (int j = 0; j < g.n3(); ++j)
      for (int i = 0; i < g.n1(); ++i) {
        const int c = g.cell(i, j);
        const double nc = 0.25 * (n(i, j) + n(i + 1, j) + n(i, j + 1) + n(i + 1, j + 1));
        acc += nc * g.cell_area(i, j) * inv * su.s11[c] * sp.s11[c];
      }
    return coeff * acc;
  }

  if (!std::holds_alternative<const ScalarField*>(u) || !std::holds_alternative<const ScalarField*>(psi))
    throw RegimeMismatch("bending form requires scalar (u3) fields");
  const ScalarField& U = *std::get<const ScalarField*>(u);
  const ScalarField& P = *std::get<const ScalarField*>(psi);
  if (U.grid != P.grid || n.grid != U.grid) throw GridMismatch("bending form: fields on different grids");
  const Grid2D& g = *U.grid;
  const double h = g.h1(0);
  double acc = 0.0;
  Vec urow(g.n1() + 1), prow(g.n1() + 1);
  for (int j = 0; j <= g.n3(); ++j) {
    const double w3 = (j > 0 ? 0.5 * g.h3(j - 1) : 0.0) + (j < g.n3() ? 0.5 * g.h3(j) : 0.0);
    for (int i = 0; i <= g.n1(); ++i) {
      urow[i] = U(i, j);
      prow[i] = P(i, j);
    }
    const BendingPair bu = bending_pair(l, urow, h);
    const BendingPair bp = bending_pair(l, prow, h);
    for (int i = 0; i <= g.n1(); ++i) {
      const double w1 = (i > 0 ? 0.5 * h : 0.0) + (i < g.n1() ? 0.5 * h : 0.0);
      acc += w3 * w1 * n(i, j) * bu.H11[i] * bp.Hs11[i];
    }
  }
  return coeff / 6.0 * acc;
}

// One-dimensional micro profile over the soft part of the unit cell,
// components (1,3); y runs over (theta/2, 1 - theta/2).
struct MicroProfile {
  Vec y;
  Vec u1;
  Vec u3;
};

// Traction jump exerted on a stiff layer by the adjacent soft medium:
//   g1 = mu0 (du01/dy|start - du01/dy|end),  g3 = (lambda0+2mu0)(...),  g2 = 0.
// Slopes are one-sided, second order.
inline std::array<double, 3> traction_jump_1d(const MicroProfile& micro, double mu0, double lambda0,
                                              double /*theta*/) {
  const int n = static_cast<int>(micro.y.size());
  if (n < 3) throw GridMismatch("micro profile needs at least 3 nodes");
  auto slopes = [&](const Vec& u) {
    const double hl = micro.y[1] - micro.y[0];
    const double hr = micro.y[n - 1] - micro.y[n - 2];
    const double s_start = (-3.0 * u[0] + 4.0 * u[1] - u[2]) / (2.0 * hl);
    const double s_end = (3.0 * u[n - 1] - 4.0 * u[n - 2] + u[n - 3]) / (2.0 * hr);
    return std::array<double, 2>{s_start, s_end};
  };
  const auto s1 = slopes(micro.u1);
  const auto s3 = slopes(micro.u3);
  return {mu0 * (s1[0] - s1[1]), 0.0, (lambda0 + 2.0 * mu0) * (s3[0] - s3[1])};
}

}  // namespace strata
