#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <utility>
#include <vector>

#include "strata/assembly.hpp"
#include "strata/layers.hpp"
#include "strata/newmark.hpp"
#include "strata/operators.hpp"
#include "strata/scaling.hpp"

namespace strata {

using SpaceFn = std::function<std::array<double, 2>(double, double)>;
using SpaceTimeFn = std::function<std::array<double, 2>(double, double, double)>;

inline SpaceFn zero_space() {
  return [](double, double) { return std::array<double, 2>{0.0, 0.0}; };
}
inline SpaceTimeFn zero_load() {
  return [](double, double, double) { return std::array<double, 2>{0.0, 0.0}; };
}

struct LoadSpec {
  SpaceTimeFn f = zero_load();
  bool zero = true;
  bool time_constant = true;
};

struct GridSpec {
  int nx = 32;               // uniform x1 cells
  int cells_per_layer = 4;   // x3 cells across each stiff layer
  double soft_target = 0.0;  // target interlayer cell size; default eps/8
  double growth = 1.5;
  int uniform_nz = 0;        // force a uniform x3 grid (layer resolution is then checked)
};

// Fine-scale heterogeneous problem: cellwise Lame/density fields on a graded
// grid whose x3 lines coincide with every layer interface.
struct FineProblem {
  Grid2D grid;
  NodeMap map;
  LayerSet layers;
  MaterialScaling scaling;
  double eps = 0.0;
  double W = 1.0;

  Vec mu_cell, lambda_cell, rho_cell;
  std::vector<char> stiff_cell;  // per cell indicator

  LoadSpec load;
  SpaceFn a0 = zero_space();
  SpaceFn b0 = zero_space();
  double T = 1.0;
  double dt = 0.0;  // 0 -> T/1024

  double contrast() const { return scaling.mu1(eps) / scaling.mu0(eps); }
  double time_step() const { return dt > 0.0 ? dt : T / 1024.0; }
};

inline FineProblem build_fine_problem(const LayerSet& ls, const MaterialScaling& sc, double eps,
                                      double W, const GridSpec& gs,
                                      BoundaryKind bc = BoundaryKind::dirichlet_all) {
  if (gs.nx < 2 || gs.cells_per_layer < 1) throw UnresolvedLayer("grid spec must be positive");
  const double r = ls.thickness;
  const double L = ls.domain_length;

  FineProblem p;
  p.layers = ls;
  p.scaling = sc;
  p.eps = eps;
  p.W = W;

  if (gs.uniform_nz > 0) {
    p.grid = Grid2D::uniform(W, L, gs.nx, gs.uniform_nz);
  } else {
    std::vector<double> interfaces;
    std::vector<bool> fine;
    fine.push_back(false);
    for (double c : ls.centers) {
      interfaces.push_back(c - 0.5 * r);
      interfaces.push_back(c + 0.5 * r);
      fine.back() = false;
      fine.push_back(true);   // the layer segment
      fine.push_back(false);  // next interlayer
    }
    const double target = gs.soft_target > 0.0 ? gs.soft_target : eps / 8.0;
    p.grid.x3 = graded_axis(L, interfaces, fine, gs.cells_per_layer, target, gs.growth);
    p.grid.x1.resize(gs.nx + 1);
    for (int i = 0; i <= gs.nx; ++i) p.grid.x1[i] = W * i / gs.nx;
  }
  p.map = NodeMap(p.grid, bc);

  const int nc = p.grid.num_cells();
  p.mu_cell.resize(nc);
  p.lambda_cell.resize(nc);
  p.rho_cell.resize(nc);
  p.stiff_cell.assign(nc, 0);

  const double mu1 = sc.mu1(eps), la1 = sc.lambda1(eps);
  const double mu0 = sc.mu0(eps), la0 = sc.lambda0(eps);
  const double rho_l = sc.rho_layer(eps);

  std::vector<int> cells_in_layer(ls.count(), 0);
  for (int j = 0; j < p.grid.n3(); ++j) {
    const auto q = layer_query(ls, p.grid.cell_x3(j));
    for (int i = 0; i < p.grid.n1(); ++i) {
      const int c = p.grid.cell(i, j);
      if (q.in_stiff) {
        p.mu_cell[c] = mu1;
        p.lambda_cell[c] = la1;
        p.rho_cell[c] = rho_l;
        p.stiff_cell[c] = 1;
      } else {
        p.mu_cell[c] = mu0;
        p.lambda_cell[c] = la0;
        p.rho_cell[c] = sc.rho;
      }
    }
    if (q.in_stiff && q.layer_index >= 0) ++cells_in_layer[q.layer_index];
  }
  for (int cnt : cells_in_layer)
    if (cnt < 4) throw UnresolvedLayer("a stiff layer is crossed by fewer than 4 cells");
  return p;
}

// Equilibrium solve  -div(sigma_eps(u)) = f  with clamped boundary.
inline PlaneField solve_static_fine(const FineProblem& p, const SpaceFn& f, double tol = 1e-10) {
  const SpMat K = stiffness_matrix(p.map, p.lambda_cell, p.mu_cell);
  const SpMat M1 = mass_matrix(p.map, Vec::Ones(p.grid.num_cells()));
  const Vec F = M1 * p.map.interpolate(f);
  const auto cons = Constraints::from_fixed(boundary_fixed_dofs(p.map));
  const Vec ur = solve_spd(cons.reduce(K), cons.reduce(F), tol);
  return p.map.to_field(cons.expand(ur, p.map.ndof()));
}

struct FineState {
  std::vector<double> times;
  std::vector<PlaneField> u;
  std::vector<PlaneField> v;
  EnergyTrace trace;
  const FineProblem* problem = nullptr;
};

// Vibration solve of the heterogeneous problem; density-weighted load, sampled
// snapshots at `samples` evenly spaced times (always includes t=0 and t=T).
inline FineState solve_dynamic_fine(const FineProblem& p, int samples = 9) {
  const SpMat K = stiffness_matrix(p.map, p.lambda_cell, p.mu_cell);
  const SpMat M = mass_matrix(p.map, p.rho_cell);
  const auto cons = Constraints::from_fixed(boundary_fixed_dofs(p.map));
  const SpMat Kr = cons.reduce(K), Mr = cons.reduce(M);

  const double dt = p.time_step();
  const int nsteps = static_cast<int>(std::round(p.T / dt));
  NewmarkSolver nm(Mr, Kr, dt);

  auto load_at = [&](double t) -> Vec {
    if (p.load.zero) return Vec::Zero(cons.n_free());
    const Vec fn = p.map.interpolate([&](double x1, double x3) { return p.load.f(x1, x3, t); });
    return cons.reduce(Vec(M * fn));
  };

  Vec f0 = load_at(0.0);
  nm.initialize(cons.reduce(p.map.interpolate(p.a0)), cons.reduce(p.map.interpolate(p.b0)), f0);

  FineState st;
  st.problem = &p;
  std::vector<int> sample_steps;
  for (int s = 0; s < samples; ++s)
    sample_steps.push_back(static_cast<int>(std::round(static_cast<double>(s) * nsteps / (samples - 1))));

  auto maybe_sample = [&](int step) {
    if (std::find(sample_steps.begin(), sample_steps.end(), step) == sample_steps.end()) return;
    st.times.push_back(nm.t());
    st.u.push_back(p.map.to_field(cons.expand(nm.u(), p.map.ndof())));
    st.v.push_back(p.map.to_field(cons.expand(nm.v(), p.map.ndof())));
  };

  maybe_sample(0);
  Vec f1 = f0;
  for (int s = 1; s <= nsteps; ++s) {
    if (!p.load.zero && !p.load.time_constant) f1 = load_at(s * dt);
    nm.step(f1);
    maybe_sample(s);
  }
  st.trace = nm.trace();
  return st;
}

}  // namespace strata
