#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <string>
#include <vector>

#include "strata/effective_solver.hpp"
#include "strata/fine_solver.hpp"
#include "strata/layers.hpp"
#include "strata/operators.hpp"
#include "strata/rng.hpp"

namespace strata {

// Bilinear interpolation of a nodal field onto another grid (order 2; used
// when trajectories live on different grids).
inline PlaneField interpolate_field(const PlaneField& f, const Grid2D& target) {
  const Grid2D& g = *f.grid;
  PlaneField out(target);
  auto locate = [](const std::vector<double>& xs, double x, int& k, double& t) {
    k = static_cast<int>(std::upper_bound(xs.begin(), xs.end(), x) - xs.begin()) - 1;
    k = std::min(std::max(k, 0), static_cast<int>(xs.size()) - 2);
    t = (x - xs[k]) / (xs[k + 1] - xs[k]);
    t = std::min(std::max(t, 0.0), 1.0);
  };
  for (int j = 0; j <= target.n3(); ++j) {
    int kj;
    double tj;
    locate(g.x3, target.x3[j], kj, tj);
    for (int i = 0; i <= target.n1(); ++i) {
      int ki;
      double ti;
      locate(g.x1, target.x1[i], ki, ti);
      auto blend = [&](auto&& get) {
        return (1 - ti) * (1 - tj) * get(ki, kj) + ti * (1 - tj) * get(ki + 1, kj) +
               (1 - ti) * tj * get(ki, kj + 1) + ti * tj * get(ki + 1, kj + 1);
      };
      out.u1(i, j) = blend([&](int a, int b) { return f.u1(a, b); });
      out.u3(i, j) = blend([&](int a, int b) { return f.u3(a, b); });
    }
  }
  return out;
}

// L2 norm of the difference of two nodal fields (trapezoid quadrature);
// optional nodal weight. Grids may differ when allow_interpolation is set.
inline double l2_error(const PlaneField& a, const PlaneField& b, const ScalarField* weight = nullptr,
                       bool allow_interpolation = true) {
  const PlaneField* pb = &b;
  PlaneField tmp;
  if (!a.grid->same_as(*b.grid)) {
    if (!allow_interpolation) throw GridMismatch("l2_error: fields live on different grids");
    tmp = interpolate_field(b, *a.grid);
    pb = &tmp;
  }
  const Grid2D& g = *a.grid;
  double acc = 0.0;
  for (int j = 0; j <= g.n3(); ++j)
    for (int i = 0; i <= g.n1(); ++i) {
      const double w = g.node_weight(i, j) * (weight ? (*weight)(i, j) : 1.0);
      const double d1 = a.u1(i, j) - pb->u1(i, j);
      const double d3 = a.u3(i, j) - pb->u3(i, j);
      acc += w * (d1 * d1 + d3 * d3);
    }
  return std::sqrt(acc);
}

inline double l2_norm(const PlaneField& a) {
  PlaneField zero(*a.grid);
  return l2_error(a, zero);
}

// Space-time L2 distance of two sampled trajectories (trapezoid in time).
inline double l2_error_trajectory(const std::vector<double>& times, const std::vector<PlaneField>& a,
                                  const std::vector<PlaneField>& b) {
  if (a.size() != b.size() || a.size() != times.size())
    throw GridMismatch("trajectory comparison needs matching sample times");
  double acc = 0.0;
  for (size_t s = 0; s < a.size(); ++s) {
    const double e = l2_error(a[s], b[s]);
    double w = 0.0;
    if (s > 0) w += 0.5 * (times[s] - times[s - 1]);
    if (s + 1 < a.size()) w += 0.5 * (times[s + 1] - times[s]);
    acc += w * e * e;
  }
  return std::sqrt(acc);
}

// Test function of (x1, x3, t, y3) paired against the layer measure.
using MomentTestFn = std::function<std::array<double, 2>(double, double, double, double)>;

// \int u . psi(x, t, y_eps(x3)/r) dm_eps  (one time slice; midpoint per cell,
// restricted to stiff cells with weight eps/r).
inline double measure_moment_slice(const PlaneField& u, const LayerSet& ls, double t,
                                   const MomentTestFn& psi) {
  const Grid2D& g = *u.grid;
  double acc = 0.0;
  for (int j = 0; j < g.n3(); ++j) {
    const auto q = layer_query(ls, g.cell_x3(j));
    if (!q.in_stiff) continue;
    for (int i = 0; i < g.n1(); ++i) {
      const double u1c = 0.25 * (u.u1(i, j) + u.u1(i + 1, j) + u.u1(i, j + 1) + u.u1(i + 1, j + 1));
      const double u3c = 0.25 * (u.u3(i, j) + u.u3(i + 1, j) + u.u3(i, j + 1) + u.u3(i + 1, j + 1));
      const auto p = psi(g.cell_x1(i), g.cell_x3(j), t, q.y_local);
      acc += q.weight * g.cell_area(i, j) * (u1c * p[0] + u3c * p[1]);
    }
  }
  return acc;
}

inline double measure_moment(const std::vector<double>& times, const std::vector<PlaneField>& u,
                             const LayerSet& ls, const MomentTestFn& psi) {
  if (times.size() != u.size()) throw GridMismatch("measure_moment: times and samples differ");
  if (times.size() == 1) return measure_moment_slice(u[0], ls, times[0], psi);
  double acc = 0.0;
  for (size_t s = 0; s < u.size(); ++s) {
    double w = 0.0;
    if (s > 0) w += 0.5 * (times[s] - times[s - 1]);
    if (s + 1 < u.size()) w += 0.5 * (times[s + 1] - times[s]);
    acc += w * measure_moment_slice(u[s], ls, times[s], psi);
  }
  return acc;
}

// Limit pairing \int n v . psi dx (dt) on the macro grid.
inline double moment_limit_slice(const PlaneField& v, const ScalarField& n, double t,
                                 const MomentTestFn& psi) {
  const Grid2D& g = *v.grid;
  double acc = 0.0;
  for (int j = 0; j <= g.n3(); ++j)
    for (int i = 0; i <= g.n1(); ++i) {
      const auto p = psi(g.x1[i], g.x3[j], t, 0.0);
      acc += g.node_weight(i, j) * n(i, j) * (v.u1(i, j) * p[0] + v.u3(i, j) * p[1]);
    }
  return acc;
}

inline double moment_limit(const std::vector<double>& times, const std::vector<PlaneField>& v,
                           const ScalarField& n, const MomentTestFn& psi) {
  if (times.size() == 1) return moment_limit_slice(v[0], n, times[0], psi);
  double acc = 0.0;
  for (size_t s = 0; s < v.size(); ++s) {
    double w = 0.0;
    if (s > 0) w += 0.5 * (times[s] - times[s - 1]);
    if (s + 1 < v.size()) w += 0.5 * (times[s + 1] - times[s]);
    acc += w * moment_limit_slice(v[s], n, times[s], psi);
  }
  return acc;
}

// LHS/RHS of the layer-rescaled Korn inequality,
//   LHS = \int (|phi1/r|^2 + |phi3|^2) dm,  RHS = (1/r^2) \int |e(phi)|^2 dm,
// computed cellwise on the stiff set.
inline double key_inequality_ratio(const PlaneField& phi, const LayerSet& ls) {
  const Grid2D& g = *phi.grid;
  const StrainField e = cell_strain(phi);
  const double r = ls.thickness;
  double lhs = 0.0, rhs = 0.0;
  for (int j = 0; j < g.n3(); ++j) {
    const auto q = layer_query(ls, g.cell_x3(j));
    if (!q.in_stiff) continue;
    for (int i = 0; i < g.n1(); ++i) {
      const int c = g.cell(i, j);
      const double w = q.weight * g.cell_area(i, j);
      const double u1c = 0.25 * (phi.u1(i, j) + phi.u1(i + 1, j) + phi.u1(i, j + 1) + phi.u1(i + 1, j + 1));
      const double u3c = 0.25 * (phi.u3(i, j) + phi.u3(i + 1, j) + phi.u3(i, j + 1) + phi.u3(i + 1, j + 1));
      lhs += w * (u1c * u1c / (r * r) + u3c * u3c);
      const double e2 = e.e11[c] * e.e11[c] + 2.0 * e.e13[c] * e.e13[c] + e.e33[c] * e.e33[c];
      rhs += w * e2 / (r * r);
    }
  }
  if (rhs == 0.0) {
    if (lhs == 0.0) return 0.0;
    throw DegenerateField("zero layer strain with nonzero layer displacement");
  }
  return lhs / rhs;
}

// Same ratio for an analytically given field (value and strain functors);
// avoids building nodal fields when scanning many random test fields.
inline double key_inequality_ratio_analytic(
    const std::function<std::array<double, 2>(double, double)>& value,
    const std::function<std::array<double, 3>(double, double)>& strain,  // e11, e13, e33
    const LayerSet& ls, const Grid2D& g) {
  const double r = ls.thickness;
  double lhs = 0.0, rhs = 0.0;
  for (int j = 0; j < g.n3(); ++j) {
    const auto q = layer_query(ls, g.cell_x3(j));
    if (!q.in_stiff) continue;
    for (int i = 0; i < g.n1(); ++i) {
      const double w = q.weight * g.cell_area(i, j);
      const auto u = value(g.cell_x1(i), g.cell_x3(j));
      const auto e = strain(g.cell_x1(i), g.cell_x3(j));
      lhs += w * (u[0] * u[0] / (r * r) + u[1] * u[1]);
      rhs += w * (e[0] * e[0] + 2.0 * e[1] * e[1] + e[2] * e[2]) / (r * r);
    }
  }
  if (rhs == 0.0) {
    if (lhs == 0.0) return 0.0;
    throw DegenerateField("zero layer strain with nonzero layer displacement");
  }
  return lhs / rhs;
}

// Relative defect of the energy identity e(tau) = e(0) + work(tau).
inline std::vector<double> energy_residual(const EnergyTrace& trace) {
  std::vector<double> res;
  res.reserve(trace.t.size());
  double scale = std::abs(trace.energy.empty() ? 0.0 : trace.energy.front());
  for (double e : trace.energy) scale = std::max(scale, std::abs(e));
  scale = std::max(scale, 1e-30);
  for (size_t s = 0; s < trace.t.size(); ++s)
    res.push_back(std::abs(trace.energy[s] - trace.energy.front() - trace.work[s]) / scale);
  return res;
}

// ---------------------------------------------------------------------------
// Diagnostics report
// ---------------------------------------------------------------------------

struct DiagRow {
  double epsilon = 0.0;
  std::string quantity;
  double value = 0.0;
  double baseline = 0.0;  // value at the previous (coarser) eps, or threshold
  double ratio = 0.0;     // baseline/value for decreasing quantities
  bool pass = true;
};

struct DiagnosticsReport {
  std::vector<DiagRow> rows;
  bool overall = true;

  void add(double eps, const std::string& q, double value, double baseline, double ratio, bool pass) {
    rows.push_back({eps, q, value, baseline, ratio, pass});
    overall = overall && pass;
  }

  // least-squares slope of log(value) vs log(eps) for one quantity
  double fitted_rate(const std::string& quantity) const {
    std::vector<double> lx, ly;
    for (const auto& r : rows)
      if (r.quantity == quantity && r.value > 0.0 && r.epsilon > 0.0) {
        lx.push_back(std::log(r.epsilon));
        ly.push_back(std::log(r.value));
      }
    if (lx.size() < 3) throw InsufficientEpsilons("rate fit needs at least 3 eps values");
    const double n = static_cast<double>(lx.size());
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (size_t i = 0; i < lx.size(); ++i) {
      sx += lx[i];
      sy += ly[i];
      sxx += lx[i] * lx[i];
      sxy += lx[i] * ly[i];
    }
    return (n * sxy - sx * sy) / (n * sxx - sx * sx);
  }
};

// Fixed battery of moment test functions: five bumps and three trig modes,
// each paired with both displacement components.
struct MomentTest {
  std::string name;
  MomentTestFn fn;
};

inline std::vector<MomentTest> moment_battery(double W, double L) {
  std::vector<MomentTest> out;
  auto add_scalar = [&](const std::string& nm, std::function<double(double, double)> s) {
    out.push_back({nm + "_c1", [s](double x1, double x3, double, double) {
                     return std::array<double, 2>{s(x1, x3), 0.0};
                   }});
    out.push_back({nm + "_c3", [s](double x1, double x3, double, double) {
                     return std::array<double, 2>{0.0, s(x1, x3)};
                   }});
  };
  const double bump_c[5][2] = {{0.5, 0.5}, {0.3, 0.35}, {0.7, 0.6}, {0.4, 0.75}, {0.6, 0.25}};
  for (int b = 0; b < 5; ++b) {
    const double cx = bump_c[b][0] * W, cz = bump_c[b][1] * L, wdt = 0.15 * std::min(W, L);
    add_scalar("bump" + std::to_string(b + 1), [cx, cz, wdt](double x1, double x3) {
      const double d2 = ((x1 - cx) * (x1 - cx) + (x3 - cz) * (x3 - cz)) / (wdt * wdt);
      return std::exp(-d2);
    });
  }
  const int trig_m[3][2] = {{1, 1}, {2, 1}, {1, 2}};
  for (int k = 0; k < 3; ++k) {
    const int mi = trig_m[k][0], mj = trig_m[k][1];
    add_scalar("trig" + std::to_string(k + 1), [mi, mj, W, L](double x1, double x3) {
      return std::sin(mi * M_PI * x1 / W) * std::sin(mj * M_PI * x3 / L);
    });
  }
  return out;
}

// Random admissible field: a combination of clamped Fourier modes, zero on
// the boundary; value and exact strain available analytically.
struct ModeField {
  double W = 1.0, L = 1.0;
  int modes = 4;
  std::vector<double> c1, c3;  // coefficients, modes x modes

  static ModeField draw(Rng& rng, double W, double L, int modes = 4) {
    ModeField f;
    f.W = W;
    f.L = L;
    f.modes = modes;
    f.c1.resize(modes * modes);
    f.c3.resize(modes * modes);
    for (auto* v : {&f.c1, &f.c3})
      for (auto& x : *v) x = rng.uniform(-1.0, 1.0);
    return f;
  }

  std::array<double, 2> value(double x1, double x3) const {
    double u1 = 0.0, u3 = 0.0;
    for (int a = 1; a <= modes; ++a)
      for (int b = 1; b <= modes; ++b) {
        const double s = std::sin(a * M_PI * x1 / W) * std::sin(b * M_PI * x3 / L);
        u1 += c1[(a - 1) * modes + (b - 1)] * s;
        u3 += c3[(a - 1) * modes + (b - 1)] * s;
      }
    return {u1, u3};
  }

  std::array<double, 3> strain(double x1, double x3) const {
    double d1u1 = 0.0, d3u1 = 0.0, d1u3 = 0.0, d3u3 = 0.0;
    for (int a = 1; a <= modes; ++a)
      for (int b = 1; b <= modes; ++b) {
        const double ka = a * M_PI / W, kb = b * M_PI / L;
        const double cs = std::cos(ka * x1) * std::sin(kb * x3);
        const double sc = std::sin(ka * x1) * std::cos(kb * x3);
        const double q1 = c1[(a - 1) * modes + (b - 1)], q3 = c3[(a - 1) * modes + (b - 1)];
        d1u1 += q1 * ka * cs;
        d3u1 += q1 * kb * sc;
        d1u3 += q3 * ka * cs;
        d3u3 += q3 * kb * sc;
      }
    return {d1u1, 0.5 * (d3u1 + d1u3), d3u3};
  }

  PlaneField to_field(const Grid2D& g) const {
    PlaneField f(g);
    for (int j = 0; j <= g.n3(); ++j)
      for (int i = 0; i <= g.n1(); ++i) {
        const auto v = value(g.x1[i], g.x3[j]);
        f.u1(i, j) = v[0];
        f.u3(i, j) = v[1];
      }
    return f;
  }
};

// A-priori layer quantities of a fine solution:
//   scaled strain  (r mu1 / eps) \int |e(u)|^2 dm_eps
//   displacement   \int |u|^2 dm_eps
struct AprioriQuantities {
  double scaled_strain = 0.0;
  double l2_mass = 0.0;
};

inline AprioriQuantities apriori_quantities(const PlaneField& u, const FineProblem& p) {
  const Grid2D& g = *u.grid;
  const StrainField e = cell_strain(u);
  AprioriQuantities out;
  for (int j = 0; j < g.n3(); ++j) {
    const auto q = layer_query(p.layers, g.cell_x3(j));
    if (!q.in_stiff) continue;
    for (int i = 0; i < g.n1(); ++i) {
      const int c = g.cell(i, j);
      const double w = q.weight * g.cell_area(i, j);
      const double e2 = e.e11[c] * e.e11[c] + 2.0 * e.e13[c] * e.e13[c] + e.e33[c] * e.e33[c];
      const double u1c = 0.25 * (u.u1(i, j) + u.u1(i + 1, j) + u.u1(i, j + 1) + u.u1(i + 1, j + 1));
      const double u3c = 0.25 * (u.u3(i, j) + u.u3(i + 1, j) + u.u3(i, j + 1) + u.u3(i + 1, j + 1));
      out.scaled_strain += w * e2;
      out.l2_mass += w * (u1c * u1c + u3c * u3c);
    }
  }
  out.scaled_strain *= (p.layers.thickness / p.eps) * p.scaling.mu1(p.eps);
  return out;
}

// ---------------------------------------------------------------------------
// Convergence studies across an eps sweep
// ---------------------------------------------------------------------------

struct StudyConfig {
  enum class Kind { stiff_static, critical_dynamic };
  Kind kind = Kind::stiff_static;

  double W = 1.0, L = 1.0;
  MaterialScaling scaling;
  std::vector<double> eps_list;
  GridSpec fine_grid;
  int macro_nx = 32, macro_nz = 32;
  int micro_cells = 64;

  SpaceFn f_static;  // stiff_static load
  LoadSpec load;     // critical_dynamic load
  SpaceFn a0 = zero_space();
  SpaceFn b0 = zero_space();
  double T = 0.5;
  double dt = 0.0;
  int samples = 9;

  // acceptance thresholds (engineering choices; rates are reported, the
  // monotone-decrease ratios gate the sweep)
  double min_error_ratio = 1.3;
  double min_corrector_ratio = 1.2;
  double apriori_factor = 2.0;
  double zero_floor = 1e-10;  // quantities below this count as converged
};

inline void check_eps_list(const std::vector<double>& eps) {
  if (eps.size() < 3) throw InsufficientEpsilons("need at least 3 eps values");
  for (size_t i = 0; i + 1 < eps.size(); ++i)
    if (!(eps[i + 1] < eps[i])) throw InsufficientEpsilons("eps list must be strictly decreasing");
}

inline DiagnosticsReport convergence_study(const StudyConfig& cfg) {
  check_eps_list(cfg.eps_list);
  DiagnosticsReport rep;
  const auto battery = moment_battery(cfg.W, cfg.L);

  std::vector<double> errors, correctors;
  std::vector<AprioriQuantities> apriori;
  std::vector<std::vector<double>> moment_gaps(battery.size());

  for (double eps : cfg.eps_list) {
    const LayerSet ls = build_layers(LayerMode::periodic, eps, cfg.scaling.r(eps), cfg.L,
                                     cfg.scaling.delta);
    FineProblem fp = build_fine_problem(ls, cfg.scaling, eps, cfg.W, cfg.fine_grid);
    const Regime rg = classify_regime(cfg.scaling);
    EffectiveProblem ep = make_effective_problem(cfg.W, cfg.L, cfg.macro_nx, cfg.macro_nz, rg,
                                                 cfg.scaling);

    if (cfg.kind == StudyConfig::Kind::stiff_static) {
      const PlaneField u_fine = solve_static_fine(fp, cfg.f_static);
      const PlaneField u_eff = solve_effective_static_stiff(ep, cfg.f_static);
      const PlaneField u_eff_on_fine = interpolate_field(u_eff, *u_fine.grid);
      const double den = std::max(l2_norm(u_eff_on_fine), 1e-30);
      errors.push_back(l2_error(u_fine, u_eff_on_fine) / den);
      apriori.push_back(apriori_quantities(u_fine, fp));
      for (size_t bq = 0; bq < battery.size(); ++bq) {
        const double mom = measure_moment_slice(u_fine, ls, 0.0, battery[bq].fn);
        const double lim = moment_limit_slice(u_eff, ep.n_node, 0.0, battery[bq].fn);
        moment_gaps[bq].push_back(std::abs(mom - lim));
      }
    } else {
      fp.load = cfg.load;
      fp.a0 = cfg.a0;
      fp.b0 = cfg.b0;
      fp.T = cfg.T;
      fp.dt = cfg.dt;
      ep.load = cfg.load;
      ep.a0 = cfg.a0;
      ep.b0 = cfg.b0;
      ep.T = cfg.T;
      ep.dt = cfg.dt;
      ep.micro_cells = cfg.micro_cells;
      const FineState fs = solve_dynamic_fine(fp, cfg.samples);
      const TwoScaleState ts = solve_effective_critical(ep, cfg.samples);
      // corrector error over sampled times
      std::vector<PlaneField> corr, zeros;
      corr.reserve(fs.times.size());
      for (size_t s = 0; s < fs.times.size(); ++s) {
        corr.push_back(corrector_field(ts, s, ls, eps, *fs.u[s].grid));
        zeros.emplace_back(*fs.u[s].grid);
      }
      const double den = std::max(l2_error_trajectory(fs.times, corr, zeros), 1e-30);
      correctors.push_back(l2_error_trajectory(fs.times, fs.u, corr) / den);
      apriori.push_back(apriori_quantities(fs.u.back(), fp));
      for (size_t bq = 0; bq < battery.size(); ++bq) {
        const double mom = measure_moment(fs.times, fs.u, ls, battery[bq].fn);
        const double lim = moment_limit(ts.times, ts.v, ep.n_node, battery[bq].fn);
        moment_gaps[bq].push_back(std::abs(mom - lim));
      }
    }
  }

  // assemble rows with pairwise decrease checks
  auto add_series = [&](const std::string& q, const std::vector<double>& vals, double min_ratio) {
    for (size_t s = 0; s < vals.size(); ++s) {
      const double base = s == 0 ? vals[0] : vals[s - 1];
      const double ratio = s == 0 ? 1.0 : base / std::max(vals[s], 1e-300);
      const bool pass = s == 0 || ratio >= min_ratio || vals[s] <= cfg.zero_floor;
      rep.add(cfg.eps_list[s], q, vals[s], base, ratio, pass);
    }
  };

  if (!errors.empty()) add_series("l2_rel_error", errors, cfg.min_error_ratio);
  if (!correctors.empty()) add_series("corrector_rel_error", correctors, cfg.min_corrector_ratio);
  for (size_t bq = 0; bq < battery.size(); ++bq)
    add_series("moment_gap_" + battery[bq].name, moment_gaps[bq], 1.0);

  for (size_t s = 0; s < apriori.size(); ++s) {
    const bool p1 = apriori[s].scaled_strain <= cfg.apriori_factor * apriori[0].scaled_strain + 1e-300;
    const bool p2 = apriori[s].l2_mass <= cfg.apriori_factor * apriori[0].l2_mass + 1e-300;
    rep.add(cfg.eps_list[s], "apriori_scaled_strain", apriori[s].scaled_strain,
            apriori[0].scaled_strain, apriori[0].scaled_strain / std::max(apriori[s].scaled_strain, 1e-300), p1);
    rep.add(cfg.eps_list[s], "apriori_l2_mass", apriori[s].l2_mass, apriori[0].l2_mass,
            apriori[0].l2_mass / std::max(apriori[s].l2_mass, 1e-300), p2);
  }

  // fitted rate and the interpolation order used for field comparisons
  // (both informational, not gating)
  const std::string rate_q = errors.empty() ? "corrector_rel_error" : "l2_rel_error";
  rep.add(cfg.eps_list.back(), "rate_" + rate_q, rep.fitted_rate(rate_q), 0.0, 0.0, true);
  rep.add(cfg.eps_list.back(), "interpolation_order", 2.0, 0.0, 0.0, true);
  return rep;
}

}  // namespace strata
