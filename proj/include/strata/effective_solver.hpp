#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <vector>

#include "strata/assembly.hpp"
#include "strata/fine_solver.hpp"
#include "strata/layers.hpp"
#include "strata/newmark.hpp"
#include "strata/operators.hpp"
#include "strata/scaling.hpp"

namespace strata {

// Homogenized problem on the macro grid. The layer density n enters all
// weighted terms inside the integrals; it is sampled per cell and per node.
struct EffectiveProblem {
  Grid2D grid;  // uniform macro grid
  NodeMap map;
  Regime regime;
  MaterialScaling scaling;
  Vec n_cell;
  ScalarField n_node;

  LoadSpec load;
  SpaceFn a0 = zero_space();
  SpaceFn b0 = zero_space();
  double T = 1.0;
  double dt = 0.0;
  int micro_cells = 64;

  double time_step() const { return dt > 0.0 ? dt : T / 1024.0; }
  bool n_is_one() const {
    for (int c = 0; c < n_cell.size(); ++c)
      if (std::abs(n_cell[c] - 1.0) > 1e-9) return false;
    return true;
  }
};

inline EffectiveProblem make_effective_problem(double W, double L, int nx, int nz,
                                               const Regime& rg, const MaterialScaling& sc) {
  EffectiveProblem ep;
  ep.grid = Grid2D::uniform(W, L, nx, nz);
  ep.map = NodeMap(ep.grid, BoundaryKind::dirichlet_all);
  ep.regime = rg;
  ep.scaling = sc;
  ep.n_cell = Vec::Ones(ep.grid.num_cells());
  ep.n_node = ScalarField(ep.grid);
  ep.n_node.v.setOnes();
  return ep;
}

inline void set_density(EffectiveProblem& ep, const StepDensity& d) {
  for (int j = 0; j < ep.grid.n3(); ++j)
    for (int i = 0; i < ep.grid.n1(); ++i) ep.n_cell[ep.grid.cell(i, j)] = d(ep.grid.cell_x3(j));
  for (int j = 0; j <= ep.grid.n3(); ++j)
    for (int i = 0; i <= ep.grid.n1(); ++i) ep.n_node(i, j) = d(ep.grid.x3[j]);
}

// Sampled macro trajectory of a homogenized solve.
struct EffectiveTrajectory {
  std::vector<double> times;
  std::vector<PlaneField> u;
  std::vector<PlaneField> v;  // velocities
  EnergyTrace trace;
};

namespace detail_eff {

// per-component constraint masks shared by the stiff and intermediate regimes
inline std::vector<char> regime_fixed_dofs(const EffectiveProblem& ep, bool clamp_outer) {
  const Grid2D& g = ep.grid;
  const NodeMap& map = ep.map;
  std::vector<char> fixed(map.ndof(), 0);
  if (clamp_outer) fixed = boundary_fixed_dofs(map);
  const Regime& rg = ep.regime;

  for (int j = 0; j <= g.n3(); ++j) {
    for (int i = 0; i <= g.n1(); ++i) {
      const bool covered = ep.n_node(i, j) > 0.0;
      const bool x1_edge = (i == 0 || i == g.n1());
      if (!clamp_outer && covered) {
        // operator domains on {n>0}: membrane needs u1 in H^1_0(Omega'),
        // bending needs u3 in H^2_0(Omega') (value part; slope via ghosts)
        if (x1_edge && rg.k > 0.0) fixed[map.dof(i, j, 0)] = 1;
        if (x1_edge && rg.kappa > 0.0 && rg.kappa_finite()) fixed[map.dof(i, j, 1)] = 1;
      }
      if (covered && !rg.k_finite()) fixed[map.dof(i, j, 0)] = 1;   // n u1 = 0
      if (covered && !rg.kappa_finite()) {                          // n u = 0
        fixed[map.dof(i, j, 0)] = 1;
        fixed[map.dof(i, j, 1)] = 1;
      }
    }
  }
  return fixed;
}

inline SpMat regime_stiffness(const EffectiveProblem& ep, bool with_isotropic) {
  const Regime& rg = ep.regime;
  SpMat K(ep.map.ndof(), ep.map.ndof());
  if (with_isotropic) {
    const int nc = ep.grid.num_cells();
    K = stiffness_matrix(ep.map, Vec::Constant(nc, ep.scaling.soft.lambda),
                         Vec::Constant(nc, ep.scaling.soft.mu));
  }
  if (rg.k_finite() && rg.k > 0.0) {
    const Vec coeff = (rg.k * membrane_coefficient(rg.l)) * ep.n_cell;
    K = K + membrane_matrix(ep.map, coeff);
  }
  if (rg.kappa_finite() && rg.kappa > 0.0) {
    ScalarField coeff(ep.grid);
    coeff.v = (rg.kappa * bending_strong_coefficient(rg.l)) * ep.n_node.v;
    K = K + bending_matrix(ep.map, coeff);
  }
  return K;
}

inline EffectiveTrajectory run_march(const EffectiveProblem& ep, const SpMat& M, const SpMat& K,
                             const Constraints& cons, int samples) {
  const double dt = ep.time_step();
  const int nsteps = std::max(1, static_cast<int>(std::round(ep.T / dt)));
  NewmarkSolver nm(cons.reduce(M), cons.reduce(K), dt);

  auto load_at = [&](double t) -> Vec {
    if (ep.load.zero) return Vec::Zero(cons.n_free());
    const Vec fn = ep.map.interpolate([&](double x1, double x3) { return ep.load.f(x1, x3, t); });
    return cons.reduce(Vec(M * fn));
  };
  Vec f0 = load_at(0.0);
  nm.initialize(cons.reduce(ep.map.interpolate(ep.a0)), cons.reduce(ep.map.interpolate(ep.b0)), f0);

  EffectiveTrajectory out;
  std::vector<int> sample_steps;
  samples = std::max(2, samples);
  for (int s = 0; s < samples; ++s)
    sample_steps.push_back(static_cast<int>(std::round(static_cast<double>(s) * nsteps / (samples - 1))));
  auto maybe_sample = [&](int step) {
    if (std::find(sample_steps.begin(), sample_steps.end(), step) == sample_steps.end()) return;
    out.times.push_back(nm.t());
    out.u.push_back(ep.map.to_field(cons.expand(nm.u(), ep.map.ndof())));
    out.v.push_back(ep.map.to_field(cons.expand(nm.v(), ep.map.ndof())));
  };
  maybe_sample(0);
  Vec f1 = f0;
  for (int s = 1; s <= nsteps; ++s) {
    if (!ep.load.zero && !ep.load.time_constant) f1 = load_at(s * dt);
    nm.step(f1);
    maybe_sample(s);
  }
  out.trace = nm.trace();
  return out;
}

}  // namespace detail_eff

// ---------------------------------------------------------------------------
// Stiff-interlayer regime (unit soft moduli): full isotropic stiffness plus
// the n-weighted membrane/bending layer terms; mass density rho + n rho1_bar.
// k = inf eliminates in-plane dofs on {n>0}; kappa = inf eliminates all.
// ---------------------------------------------------------------------------

inline EffectiveTrajectory solve_effective_stiff(const EffectiveProblem& ep, int samples = 9) {
  if (ep.regime.interlayer_class != SoftClass::Kind::unit)
    throw RegimeMismatch("stiff-regime solver requires the unit interlayer class");
  Vec mass_cell = Vec::Constant(ep.grid.num_cells(), ep.scaling.rho) + ep.scaling.rho1_bar * ep.n_cell;
  const SpMat M = mass_matrix(ep.map, mass_cell);
  const SpMat K = detail_eff::regime_stiffness(ep, /*with_isotropic=*/true);
  const auto cons = Constraints::from_fixed(detail_eff::regime_fixed_dofs(ep, /*clamp_outer=*/true));
  return detail_eff::run_march(ep, M, K, cons, samples);
}

// Equilibrium variant: -div sigma(u) - nk div sigma_x'(u') (+ bending) = f,
// plain (unweighted) load pairing.
inline PlaneField solve_effective_static_stiff(const EffectiveProblem& ep, const SpaceFn& f,
                                               double tol = 1e-10) {
  if (ep.regime.interlayer_class != SoftClass::Kind::unit)
    throw RegimeMismatch("stiff-regime solver requires the unit interlayer class");
  const SpMat K = detail_eff::regime_stiffness(ep, /*with_isotropic=*/true);
  const SpMat M1 = mass_matrix(ep.map, Vec::Ones(ep.grid.num_cells()));
  const Vec F = M1 * ep.map.interpolate(f);
  const auto cons = Constraints::from_fixed(detail_eff::regime_fixed_dofs(ep, true));
  const Vec ur = solve_spd(cons.reduce(K), cons.reduce(F), tol);
  return ep.map.to_field(cons.expand(ur, ep.map.ndof()));
}

// ---------------------------------------------------------------------------
// Intermediate regime (eps^2 << mu_0e << 1): the isotropic term drops out;
// mass density rho(1 - theta n) + n rho1_bar; on {n=0} the motion is the
// pointwise oscillator rho u'' = rho f.
// ---------------------------------------------------------------------------

inline EffectiveTrajectory solve_effective_intermediate(const EffectiveProblem& ep,
                                                            int samples = 9) {
  if (ep.regime.interlayer_class != SoftClass::Kind::intermediate)
    throw RegimeMismatch("intermediate solver requires the intermediate interlayer class");
  const double th = ep.regime.theta;
  Vec mass_cell(ep.grid.num_cells());
  for (int c = 0; c < mass_cell.size(); ++c)
    mass_cell[c] = ep.scaling.rho * (1.0 - th * ep.n_cell[c]) + ep.scaling.rho1_bar * ep.n_cell[c];
  const SpMat M = mass_matrix(ep.map, mass_cell);
  const SpMat K = detail_eff::regime_stiffness(ep, /*with_isotropic=*/false);
  const auto cons = Constraints::from_fixed(detail_eff::regime_fixed_dofs(ep, /*clamp_outer=*/false));
  return detail_eff::run_march(ep, M, K, cons, samples);
}

// ---------------------------------------------------------------------------
// Critical regime (mu_0e = eps^2 mu0): two-scale coupled solver. At every
// macro node a 1D cell wave problem lives on the soft interval
// (theta/2, 1-theta/2) with moduli mu0 (component 1) and lambda0+2mu0
// (component 3); its end values coincide with the layer displacement v at
// that node. One monolithic implicit Newmark step advances macro and micro
// together; micro interiors are condensed out (tridiagonal Schur), so the
// per-step solve keeps the macro size.
// ---------------------------------------------------------------------------

struct TwoScaleState {
  std::vector<double> times;
  std::vector<PlaneField> v;       // stiff-layer displacement
  std::vector<PlaneField> v_dot;
  std::vector<PlaneField> u_mean;  // cell average of u0
  // micro profiles per sampled time: [sample][node] -> values on micro nodes
  std::vector<std::vector<MicroProfile>> micro;
  std::vector<std::vector<std::array<double, 3>>> traction;  // g(u0) per node
  Vec micro_y;  // micro node coordinates (shared)
  EnergyTrace trace;
  double theta = 0.0;
  const Grid2D* macro_grid = nullptr;
};

namespace detail_eff {

struct Tridiag {
  Vec a, b, c;  // sub, diag, super
  Vec cp;       // factored
  void factor() {
    const int n = static_cast<int>(b.size());
    cp = Vec::Zero(n);
    low.clear();
    if (b[0] == 0.0) throw SolveFailure("tridiagonal pivot breakdown");
    cp[0] = b[0];
    for (int i = 1; i < n; ++i) {
      const double m = a[i] / cp[i - 1];
      low.push_back(m);
      cp[i] = b[i] - m * c[i - 1];
      if (cp[i] == 0.0) throw SolveFailure("tridiagonal pivot breakdown");
    }
  }
  Vec solve(Vec rhs) const {
    const int n = static_cast<int>(b.size());
    for (int i = 1; i < n; ++i) rhs[i] -= low[i - 1] * rhs[i - 1];
    rhs[n - 1] /= cp[n - 1];
    for (int i = n - 2; i >= 0; --i) rhs[i] = (rhs[i] - c[i] * rhs[i + 1]) / cp[i];
    return rhs;
  }
  std::vector<double> low;
};

// P1 mass/stiffness on a uniform interval with m cells (m+1 nodes)
inline void micro_matrices(int m, double h, Tridiag& mass, Tridiag& stiff) {
  const int n = m + 1;
  mass.a = Vec::Zero(n);
  mass.b = Vec::Zero(n);
  mass.c = Vec::Zero(n);
  stiff = mass;
  for (int e = 0; e < m; ++e) {
    mass.b[e] += h / 3.0;
    mass.b[e + 1] += h / 3.0;
    mass.c[e] += h / 6.0;
    mass.a[e + 1] += h / 6.0;
    stiff.b[e] += 1.0 / h;
    stiff.b[e + 1] += 1.0 / h;
    stiff.c[e] += -1.0 / h;
    stiff.a[e + 1] += -1.0 / h;
  }
}

inline Vec tri_apply(const Tridiag& T, const Vec& x) {
  const int n = static_cast<int>(x.size());
  Vec y = Vec::Zero(n);
  for (int i = 0; i < n; ++i) {
    y[i] = T.b[i] * x[i];
    if (i > 0) y[i] += T.a[i] * x[i - 1];
    if (i + 1 < n) y[i] += T.c[i] * x[i + 1];
  }
  return y;
}

}  // namespace detail_eff

inline TwoScaleState solve_effective_critical(const EffectiveProblem& ep, int samples = 9) {
  using detail_eff::Tridiag;
  using detail_eff::tri_apply;

  const Regime& rg = ep.regime;
  if (rg.interlayer_class != SoftClass::Kind::critical)
    throw RegimeMismatch("critical solver requires the critical interlayer class");
  if (!ep.n_is_one())
    throw NotPeriodic("the critical two-scale solver requires the periodic construction (n = 1)");

  const Grid2D& g = ep.grid;
  const NodeMap& map = ep.map;
  const double theta = rg.theta;
  const double mu0 = ep.scaling.soft.mu0, la0 = ep.scaling.soft.lambda0;
  const double rho = ep.scaling.rho, rho1 = ep.scaling.rho1_bar;
  const double wave_c[2] = {mu0, la0 + 2.0 * mu0};  // component moduli (1,3)

  const int m = std::max(4, ep.micro_cells);
  const double y_lo = 0.5 * theta, y_hi = 1.0 - 0.5 * theta;
  const double hy = (y_hi - y_lo) / m;
  const int nmic = m + 1;

  const double dt = ep.time_step();
  const int nsteps = std::max(1, static_cast<int>(std::round(ep.T / dt)));
  const double beta = 0.25, gamma = 0.5;

  // macro constraints: v1 in H^1_0(Omega') (or identically zero when
  // k = inf); v3 clamped only in the bending case; everything zero if
  // kappa = inf
  std::vector<char> fixed(map.ndof(), 0);
  for (int j = 0; j <= g.n3(); ++j)
    for (int i = 0; i <= g.n1(); ++i) {
      const bool x1_edge = (i == 0 || i == g.n1());
      if (!rg.k_finite()) fixed[map.dof(i, j, 0)] = 1;
      else if (x1_edge) fixed[map.dof(i, j, 0)] = 1;
      if (rg.kappa_finite() && rg.kappa > 0.0 && x1_edge) fixed[map.dof(i, j, 1)] = 1;
      if (!rg.kappa_finite()) {
        fixed[map.dof(i, j, 0)] = 1;
        fixed[map.dof(i, j, 1)] = 1;
      }
    }
  const auto cons = Constraints::from_fixed(fixed);

  // macro operators: lumped rho1_bar mass (nodal weights) + membrane/bending
  const int nn = map.count();
  Vec wq(nn);
  for (int j = 0; j <= g.n3(); ++j)
    for (int i = 0; i <= g.n1(); ++i) wq[map.id(i, j)] = map.weight(i, j);

  SpMat K_macro(map.ndof(), map.ndof());
  if (rg.k_finite() && rg.k > 0.0)
    K_macro = membrane_matrix(map, Vec::Constant(g.num_cells(), rg.k * membrane_coefficient(rg.l)));
  if (rg.kappa_finite() && rg.kappa > 0.0) {
    ScalarField coeff(ep.grid);
    coeff.v.setConstant(rg.kappa * bending_strong_coefficient(rg.l));
    K_macro = K_macro + bending_matrix(map, coeff);
  }

  // micro element matrices (uniform, identical at every node)
  Tridiag Mmic, Kmic;
  detail_eff::micro_matrices(m, hy, Mmic, Kmic);

  // A_mic = rho*Mmic + beta dt^2 c Kmic per component; interior factor and
  // Schur data. Both micro ends attach to the same macro dof, so the macro
  // diagonal gains (A_mic[0][0] + A_mic[m][m]) and the interior coupling
  // vector has entries at the first and last interior node.
  struct CompData {
    Tridiag A_int;          // interior block of rho*M + theta_fac*c*K
    double diag_add = 0.0;  // end-node diagonal contribution
    Vec s;                  // coupling (interior <- end dof)
    double schur = 0.0;     // s^T A_int^{-1} s
    Tridiag M_int;          // interior block of rho*M (for initial accel)
    double m_diag_add = 0.0;
    Vec sm;
    double schur_m = 0.0;
  };

  auto build_comp = [&](double c, double theta_fac, Tridiag& T_int, double& diag_add, Vec& s,
                        double& schur) {
    const int ni = m - 1;
    T_int.a = Vec::Zero(ni);
    T_int.b = Vec::Zero(ni);
    T_int.c = Vec::Zero(ni);
    auto entry = [&](int i, int j) {
      double v = 0.0;
      if (i == j) v = rho * Mmic.b[i] + theta_fac * c * Kmic.b[i];
      else if (j == i - 1) v = rho * Mmic.a[i] + theta_fac * c * Kmic.a[i];
      else if (j == i + 1) v = rho * Mmic.c[i] + theta_fac * c * Kmic.c[i];
      return v;
    };
    for (int i = 1; i <= m - 1; ++i) {
      T_int.b[i - 1] = entry(i, i);
      if (i > 1) T_int.a[i - 1] = entry(i, i - 1);
      if (i < m - 1) T_int.c[i - 1] = entry(i, i + 1);
    }
    T_int.factor();
    diag_add = entry(0, 0) + entry(m, m);
    s = Vec::Zero(ni);
    s[0] = entry(1, 0);
    s[ni - 1] = entry(m - 1, m);
    schur = s.dot(T_int.solve(s));
  };

  CompData comp[2];
  for (int c = 0; c < 2; ++c) {
    build_comp(wave_c[c], beta * dt * dt, comp[c].A_int, comp[c].diag_add, comp[c].s, comp[c].schur);
    build_comp(wave_c[c], 0.0, comp[c].M_int, comp[c].m_diag_add, comp[c].sm, comp[c].schur_m);
  }

  // reduced macro Schur matrices for the A-solve and the M-solve
  auto build_schur = [&](bool with_stiff) {
    SpMat A(map.ndof(), map.ndof());
    std::vector<Eigen::Triplet<double>> t;
    for (int q = 0; q < nn; ++q)
      for (int c = 0; c < 2; ++c) {
        const double add = with_stiff
                               ? rho1 * wq[q] + wq[q] * (comp[c].diag_add - comp[c].schur)
                               : rho1 * wq[q] + wq[q] * (comp[c].m_diag_add - comp[c].schur_m);
        t.emplace_back(2 * q + c, 2 * q + c, add);
      }
    A.setFromTriplets(t.begin(), t.end());
    if (with_stiff) A = A + SpMat((beta * dt * dt) * K_macro);
    return cons.reduce(A);
  };

  Eigen::SimplicialLDLT<SpMat> A_solver, M_solver;
  A_solver.compute(build_schur(true));
  M_solver.compute(build_schur(false));
  if (A_solver.info() != Eigen::Success || M_solver.info() != Eigen::Success)
    throw SolveFailure("critical solver: macro factorization failed");

  // state: macro (full layout, fixed dofs pinned to zero) and micro per node
  Vec v = Vec::Zero(map.ndof()), vd = Vec::Zero(map.ndof()), va = Vec::Zero(map.ndof());
  // micro storage: [comp][node] -> Vec(nmic) including end values
  std::vector<std::vector<Vec>> u0(2), u0d(2), u0a(2);

  auto macro_xy = [&](int q) {
    const int rw = map.row_nodes();
    const int j = q / rw, i = q % rw;
    return std::array<double, 2>{g.x1[i], g.x3[j]};
  };

  for (int c = 0; c < 2; ++c) {
    u0[c].assign(nn, Vec::Zero(nmic));
    u0d[c].assign(nn, Vec::Zero(nmic));
    u0a[c].assign(nn, Vec::Zero(nmic));
  }
  for (int j = 0; j <= g.n3(); ++j)
    for (int i = 0; i <= g.n1(); ++i) {
      const int q = map.id(i, j);
      const auto A0 = ep.a0(g.x1[i], g.x3[j]);
      const auto B0 = ep.b0(g.x1[i], g.x3[j]);
      for (int c = 0; c < 2; ++c) {
        const int d = 2 * q + c;
        const bool fx = fixed[d];
        v[d] = fx ? 0.0 : A0[c];
        vd[d] = fx ? 0.0 : B0[c];
        u0[c][q].setConstant(A0[c]);
        u0d[c][q].setConstant(B0[c]);
        u0[c][q][0] = v[d];
        u0[c][q][nmic - 1] = v[d];
        u0d[c][q][0] = vd[d];
        u0d[c][q][nmic - 1] = vd[d];
      }
    }

  auto load_at = [&](double t, int q, int c) {
    if (ep.load.zero) return 0.0;
    const auto xy = macro_xy(q);
    return ep.load.f(xy[0], xy[1], t)[c];
  };

  // assembled load: macro row gets rho1*w*f plus the micro end rows; interior
  // rows get w*rho*(Mmic f)|int. With f constant in y, Mmic*f is cheap.
  auto assemble_loads = [&](double t, Vec& F_macro, std::vector<std::vector<Vec>>& F_int) {
    F_macro.setZero();
    for (int c = 0; c < 2; ++c)
      for (int q = 0; q < nn; ++q) {
        const double fq = load_at(t, q, c);
        if (fq == 0.0) {
          F_int[c][q].setZero();
          continue;
        }
        const Vec Mf = tri_apply(Mmic, Vec::Constant(nmic, fq));
        F_macro[2 * q + c] += wq[q] * (rho1 * fq + rho * (Mf[0] + Mf[nmic - 1]));
        for (int i = 1; i <= m - 1; ++i) F_int[c][q][i - 1] = wq[q] * rho * Mf[i];
      }
  };

  std::vector<std::vector<Vec>> F_int(2);
  for (int c = 0; c < 2; ++c) F_int[c].assign(nn, Vec::Zero(m - 1));
  Vec F_macro = Vec::Zero(map.ndof());

  // generic condensed solve of (M* + fac K*) x = b given interior rhs blocks
  auto condensed_solve = [&](bool with_stiff, const Vec& b_macro,
                             const std::vector<std::vector<Vec>>& b_int, Vec& x_macro,
                             std::vector<std::vector<Vec>>& x_int) {
    Vec rhs = b_macro;
    for (int c = 0; c < 2; ++c) {
      const Tridiag& T = with_stiff ? comp[c].A_int : comp[c].M_int;
      const Vec& s = with_stiff ? comp[c].s : comp[c].sm;
      for (int q = 0; q < nn; ++q)
        rhs[2 * q + c] -= s.dot(T.solve(b_int[c][q]));  // w_q cancels in s^T T^{-1} b
    }
    const Vec xr = (with_stiff ? A_solver : M_solver).solve(cons.reduce(rhs));
    if (!xr.allFinite()) throw NonFiniteState("critical solver produced non-finite state");
    x_macro = cons.expand(xr, map.ndof());
    for (int c = 0; c < 2; ++c) {
      const Tridiag& T = with_stiff ? comp[c].A_int : comp[c].M_int;
      const Vec& s = with_stiff ? comp[c].s : comp[c].sm;
      for (int q = 0; q < nn; ++q) {
        Vec r = b_int[c][q] / wq[q] - s * x_macro[2 * q + c];
        x_int[c][q] = T.solve(r);
      }
    }
  };

  // K* applied to the current state (macro part; micro interior rows)
  auto apply_K = [&](const Vec& vv, const std::vector<std::vector<Vec>>& uu, Vec& out_macro,
                     std::vector<std::vector<Vec>>& out_int) {
    out_macro = K_macro * vv;
    for (int c = 0; c < 2; ++c)
      for (int q = 0; q < nn; ++q) {
        const Vec Ku = tri_apply(Kmic, uu[c][q]);
        out_macro[2 * q + c] += wq[q] * wave_c[c] * (Ku[0] + Ku[nmic - 1]);
        for (int i = 1; i <= m - 1; ++i) out_int[c][q][i - 1] = wq[q] * wave_c[c] * Ku[i];
      }
  };

  // initial accelerations from M* a = F(0) - K* z(0)
  {
    assemble_loads(0.0, F_macro, F_int);
    Vec kz_macro(map.ndof());
    std::vector<std::vector<Vec>> kz_int(2);
    for (int c = 0; c < 2; ++c) kz_int[c].assign(nn, Vec::Zero(m - 1));
    apply_K(v, u0, kz_macro, kz_int);
    Vec b_macro = F_macro - kz_macro;
    std::vector<std::vector<Vec>> b_int(2);
    for (int c = 0; c < 2; ++c) {
      b_int[c].assign(nn, Vec::Zero(m - 1));
      for (int q = 0; q < nn; ++q) b_int[c][q] = F_int[c][q] - kz_int[c][q];
    }
    std::vector<std::vector<Vec>> a_int(2);
    for (int c = 0; c < 2; ++c) a_int[c].assign(nn, Vec::Zero(m - 1));
    condensed_solve(false, b_macro, b_int, va, a_int);
    for (int c = 0; c < 2; ++c)
      for (int q = 0; q < nn; ++q) {
        for (int i = 1; i <= m - 1; ++i) u0a[c][q][i] = a_int[c][q][i - 1];
        u0a[c][q][0] = va[2 * q + c];
        u0a[c][q][nmic - 1] = va[2 * q + c];
      }
  }

  TwoScaleState st;
  st.theta = theta;
  st.macro_grid = &ep.grid;
  st.micro_y = Vec::Zero(nmic);
  for (int i = 0; i < nmic; ++i) st.micro_y[i] = y_lo + hy * i;

  auto energy = [&]() {
    double E = 0.0;
    for (int q = 0; q < nn; ++q)
      for (int c = 0; c < 2; ++c) {
        const int d = 2 * q + c;
        E += 0.5 * rho1 * wq[q] * vd[d] * vd[d];
        E += 0.5 * wq[q] * rho * u0d[c][q].dot(tri_apply(Mmic, u0d[c][q]));
        E += 0.5 * wq[q] * wave_c[c] * u0[c][q].dot(tri_apply(Kmic, u0[c][q]));
      }
    E += 0.5 * v.dot(K_macro * v);
    return E;
  };
  double work = 0.0;
  st.trace.t.push_back(0.0);
  st.trace.energy.push_back(energy());
  st.trace.work.push_back(0.0);

  std::vector<int> sample_steps;
  samples = std::max(2, samples);
  for (int s = 0; s < samples; ++s)
    sample_steps.push_back(static_cast<int>(std::round(static_cast<double>(s) * nsteps / (samples - 1))));

  auto take_sample = [&](double t) {
    st.times.push_back(t);
    PlaneField pv(ep.grid), pvd(ep.grid), pum(ep.grid);
    std::vector<MicroProfile> mic(nn);
    std::vector<std::array<double, 3>> trac(nn);
    for (int j = 0; j <= g.n3(); ++j)
      for (int i = 0; i <= g.n1(); ++i) {
        const int q = map.id(i, j);
        pv.u1(i, j) = v[2 * q];
        pv.u3(i, j) = v[2 * q + 1];
        pvd.u1(i, j) = vd[2 * q];
        pvd.u3(i, j) = vd[2 * q + 1];
        // cell average: theta * v + integral of the soft profile
        auto integ = [&](const Vec& up) {
          double s = 0.0;
          for (int e = 0; e < m; ++e) s += 0.5 * hy * (up[e] + up[e + 1]);
          return s;
        };
        pum.u1(i, j) = theta * v[2 * q] + integ(u0[0][q]);
        pum.u3(i, j) = theta * v[2 * q + 1] + integ(u0[1][q]);
      }
    for (int q = 0; q < nn; ++q) {
      MicroProfile mp;
      mp.y = st.micro_y;
      mp.u1 = u0[0][q];
      mp.u3 = u0[1][q];
      trac[q] = traction_jump_1d(mp, mu0, la0, theta);
      mic[q] = std::move(mp);
    }
    st.v.push_back(std::move(pv));
    st.v_dot.push_back(std::move(pvd));
    st.u_mean.push_back(std::move(pum));
    st.micro.push_back(std::move(mic));
    st.traction.push_back(std::move(trac));
  };
  take_sample(0.0);

  Vec F_macro_prev = F_macro;
  std::vector<std::vector<Vec>> F_int_prev = F_int;
  Vec vd_prev = vd;
  std::vector<std::vector<Vec>> u0d_prev = u0d;

  for (int sstep = 1; sstep <= nsteps; ++sstep) {
    const double t1 = sstep * dt;
    // predictors
    Vec v_pred = v + dt * vd + (0.5 - beta) * dt * dt * va;
    Vec vd_pred = vd + (1.0 - gamma) * dt * va;
    std::vector<std::vector<Vec>> u_pred(2), ud_pred(2);
    for (int c = 0; c < 2; ++c) {
      u_pred[c].assign(nn, Vec());
      ud_pred[c].assign(nn, Vec());
      for (int q = 0; q < nn; ++q) {
        u_pred[c][q] = u0[c][q] + dt * u0d[c][q] + (0.5 - beta) * dt * dt * u0a[c][q];
        ud_pred[c][q] = u0d[c][q] + (1.0 - gamma) * dt * u0a[c][q];
      }
    }

    if (!ep.load.zero && !ep.load.time_constant) assemble_loads(t1, F_macro, F_int);

    // b = beta dt^2 F + M* z_pred
    Vec b_macro = beta * dt * dt * F_macro;
    for (int q = 0; q < nn; ++q)
      for (int c = 0; c < 2; ++c) {
        const int d = 2 * q + c;
        const Vec Mu = tri_apply(Mmic, u_pred[c][q]);
        b_macro[d] += rho1 * wq[q] * v_pred[d] + wq[q] * rho * (Mu[0] + Mu[nmic - 1]);
      }
    std::vector<std::vector<Vec>> b_int(2);
    for (int c = 0; c < 2; ++c) {
      b_int[c].assign(nn, Vec::Zero(m - 1));
      for (int q = 0; q < nn; ++q) {
        const Vec Mu = tri_apply(Mmic, u_pred[c][q]);
        for (int i = 1; i <= m - 1; ++i) b_int[c][q][i - 1] = beta * dt * dt * F_int[c][q][i - 1] + wq[q] * rho * Mu[i];
      }
    }

    Vec v_new;
    std::vector<std::vector<Vec>> u_new_int(2);
    for (int c = 0; c < 2; ++c) u_new_int[c].assign(nn, Vec::Zero(m - 1));
    condensed_solve(true, b_macro, b_int, v_new, u_new_int);

    // recover accelerations and velocities
    va = (v_new - v_pred) / (beta * dt * dt);
    vd = vd_pred + gamma * dt * va;
    v = v_new;
    for (int c = 0; c < 2; ++c)
      for (int q = 0; q < nn; ++q) {
        Vec u_new = Vec::Zero(nmic);
        u_new[0] = v[2 * q + c];
        u_new[nmic - 1] = v[2 * q + c];
        for (int i = 1; i <= m - 1; ++i) u_new[i] = u_new_int[c][q][i - 1];
        u0a[c][q] = (u_new - u_pred[c][q]) / (beta * dt * dt);
        u0d[c][q] = ud_pred[c][q] + gamma * dt * u0a[c][q];
        u0[c][q] = u_new;
      }

    // scheme-consistent work increment (dt * mean velocity . mean load)
    {
      double P = 0.0;
      Vec vmean = 0.5 * (vd + vd_prev);
      Vec Fmean = 0.5 * (F_macro + F_macro_prev);
      P += Fmean.dot(vmean);
      for (int c = 0; c < 2; ++c)
        for (int q = 0; q < nn; ++q)
          for (int i = 1; i <= m - 1; ++i)
            P += 0.5 * (F_int[c][q][i - 1] + F_int_prev[c][q][i - 1]) * 0.5 *
                 (u0d[c][q][i] + u0d_prev[c][q][i]);
      work += dt * P;
    }
    F_macro_prev = F_macro;
    F_int_prev = F_int;
    vd_prev = vd;
    u0d_prev = u0d;

    st.trace.t.push_back(t1);
    st.trace.energy.push_back(energy());
    st.trace.work.push_back(work);

    if (std::find(sample_steps.begin(), sample_steps.end(), sstep) != sample_steps.end())
      take_sample(t1);
  }
  return st;
}

// Static 1D cell problem on the soft interval: -c u'' = f, u(ends) = v_end.
inline Vec solve_micro_static(double c, double theta, int m, double v_end, double f_const) {
  using detail_eff::Tridiag;
  const double h = (1.0 - theta) / m;
  Tridiag mass, stiff;
  detail_eff::micro_matrices(m, h, mass, stiff);
  Tridiag T;
  T.a = Vec::Zero(m - 1);
  T.b = Vec::Zero(m - 1);
  T.c = Vec::Zero(m - 1);
  for (int i = 1; i <= m - 1; ++i) {
    T.b[i - 1] = c * stiff.b[i];
    if (i > 1) T.a[i - 1] = c * stiff.a[i];
    if (i < m - 1) T.c[i - 1] = c * stiff.c[i];
  }
  T.factor();
  Vec rhs = Vec::Zero(m - 1);
  const Vec Mf = detail_eff::tri_apply(mass, Vec::Constant(m + 1, f_const));
  for (int i = 1; i <= m - 1; ++i) rhs[i - 1] = Mf[i];
  rhs[0] -= c * stiff.a[1] * v_end;
  rhs[m - 2] -= c * stiff.c[m - 1] * v_end;
  const Vec ui = T.solve(rhs);
  Vec u = Vec::Zero(m + 1);
  u[0] = v_end;
  u[m] = v_end;
  for (int i = 1; i <= m - 1; ++i) u[i] = ui[i - 1];
  return u;
}

// Reconstructed oscillating field u0(x, t, x3/eps mod 1) on a fine grid:
// stiff cells carry the layer displacement v, soft cells interpolate the
// micro profile at the wrapped cell coordinate. Macro dependence is blended
// bilinearly between macro nodes (order 2, recorded in reports).
inline PlaneField corrector_field(const TwoScaleState& ts, size_t sample, const LayerSet& ls,
                                  double eps, const Grid2D& fine_grid) {
  if (sample >= ts.v.size()) throw GridMismatch("corrector: sample index out of range");
  if (std::abs(ls.epsilon - eps) > 1e-12) throw GridMismatch("corrector: layer set does not match eps");
  const Grid2D& mg = *ts.macro_grid;
  const PlaneField& v = ts.v[sample];
  const auto& micro = ts.micro[sample];
  const double theta = ts.theta;

  NodeMap mmap(mg, BoundaryKind::dirichlet_all);
  PlaneField out(fine_grid);
  const double h1m = mg.x1[1] - mg.x1[0];
  const double h3m = mg.x3[1] - mg.x3[0];
  const Vec& ys = ts.micro_y;
  const int nmic = static_cast<int>(ys.size());

  auto clampi = [](int k, int hi) { return std::min(hi, std::max(0, k)); };

  for (int j = 0; j <= fine_grid.n3(); ++j) {
    const double x3 = fine_grid.x3[j];
    const double y = x3 / eps - std::round(x3 / eps);  // wrapped cell coordinate in [-1/2,1/2)
    const int j0 = clampi(static_cast<int>(x3 / h3m), mg.n3() - 1);
    const double t3 = std::min(1.0, std::max(0.0, x3 / h3m - j0));
    for (int i = 0; i <= fine_grid.n1(); ++i) {
      const double x1 = fine_grid.x1[i];
      const int i0 = clampi(static_cast<int>(x1 / h1m), mg.n1() - 1);
      const double t1 = std::min(1.0, std::max(0.0, x1 / h1m - i0));
      const double w[4] = {(1 - t1) * (1 - t3), t1 * (1 - t3), (1 - t1) * t3, t1 * t3};
      const int qi[4] = {mmap.id(i0, j0), mmap.id(i0 + 1, j0), mmap.id(i0, j0 + 1),
                         mmap.id(i0 + 1, j0 + 1)};

      if (std::abs(y) < 0.5 * theta) {  // stiff: u0 = v
        out.u1(i, j) = w[0] * v.u1(i0, j0) + w[1] * v.u1(i0 + 1, j0) + w[2] * v.u1(i0, j0 + 1) +
                       w[3] * v.u1(i0 + 1, j0 + 1);
        out.u3(i, j) = w[0] * v.u3(i0, j0) + w[1] * v.u3(i0 + 1, j0) + w[2] * v.u3(i0, j0 + 1) +
                       w[3] * v.u3(i0 + 1, j0 + 1);
        continue;
      }
      double yw = y < 0.0 ? y + 1.0 : y;  // soft coordinate in (theta/2, 1-theta/2)
      yw = std::min(std::max(yw, ys[0]), ys[nmic - 1]);
      const double pos = (yw - ys[0]) / (ys[1] - ys[0]);
      const int k = std::min(nmic - 2, static_cast<int>(pos));
      const double frac = pos - k;
      double u1 = 0.0, u3 = 0.0;
      for (int c = 0; c < 4; ++c) {
        const auto& mp = micro[qi[c]];
        u1 += w[c] * ((1.0 - frac) * mp.u1[k] + frac * mp.u1[k + 1]);
        u3 += w[c] * ((1.0 - frac) * mp.u3[k] + frac * mp.u3[k + 1]);
      }
      out.u1(i, j) = u1;
      out.u3(i, j) = u3;
    }
  }
  return out;
}

}  // namespace strata
