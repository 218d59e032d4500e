#pragma once

#include <nlohmann/json.hpp>

#include <filesystem>
#include <fstream>
#include <future>
#include <string>
#include <vector>

#include "strata/analysis.hpp"
#include "strata/config.hpp"
#include "strata/io.hpp"

namespace strata {

namespace exit_code {
constexpr int ok = 0;
constexpr int config = 2;
constexpr int validation = 3;
constexpr int solver = 4;
constexpr int acceptance = 5;
}  // namespace exit_code

inline int exit_code_for(const Error& e) {
  switch (e.category()) {
    case ErrorCategory::config: return exit_code::config;
    case ErrorCategory::validation: return exit_code::validation;
    case ErrorCategory::solver: return exit_code::solver;
    case ErrorCategory::analysis: return exit_code::validation;
  }
  return exit_code::validation;
}

struct RunContext {
  std::string command;
  std::filesystem::path config_path;
  std::filesystem::path out_dir;
  int threads = 1;
  bool seed_override = false;
  uint64_t seed = 0;
  std::string format_override;

  nlohmann::json manifest;
  std::vector<std::string> artifacts;

  void note_artifact(const std::filesystem::path& p) { artifacts.push_back(p.string()); }

  void write_manifest() {
    manifest["artifacts"] = artifacts;
    std::filesystem::create_directories(out_dir);
    std::ofstream os(out_dir / "manifest.json");
    os << manifest.dump(2) << '\n';
  }
};

inline nlohmann::json regime_json(const Regime& rg) {
  nlohmann::json j;
  j["class"] = rg.interlayer_class == SoftClass::Kind::unit ? "unit"
               : rg.interlayer_class == SoftClass::Kind::intermediate ? "intermediate"
                                                                      : "critical";
  j["k"] = rg.k_finite() ? nlohmann::json(rg.k) : nlohmann::json("inf");
  j["kappa"] = rg.kappa_finite() ? nlohmann::json(rg.kappa) : nlohmann::json("inf");
  j["theta"] = rg.theta;
  j["l"] = rg.l;
  return j;
}

namespace detail_run {

inline void write_fields(RunContext& ctx, const RunConfig& rc, const std::string& base,
                         const std::vector<double>& times, const std::vector<PlaneField>& u,
                         const std::vector<PlaneField>& v) {
  const std::string format = ctx.format_override.empty() ? rc.format : ctx.format_override;
  if (format == "csv" || format == "both") {
    write_trajectory_csv(ctx.out_dir / (base + ".csv"), times, u, v);
    ctx.note_artifact(ctx.out_dir / (base + ".csv"));
  }
  if (format == "vtk" || format == "both") {
    write_vtk_series(ctx.out_dir / "vtk", base, times, u, v);
    ctx.note_artifact(ctx.out_dir / "vtk");
  }
}

inline int run_fine(RunContext& ctx, const RunConfig& rc) {
  ctx.manifest["regime"] = regime_json(classify_regime(rc.scaling));
  const LayerSet ls = layers_from_config(rc, rc.epsilon);
  write_layers_csv(ctx.out_dir / "layers.csv", ls);
  ctx.note_artifact(ctx.out_dir / "layers.csv");
  write_density_csv(ctx.out_dir / "density.csv", n_eps_field(ls));
  ctx.note_artifact(ctx.out_dir / "density.csv");

  FineProblem p = build_fine_problem(ls, rc.scaling, rc.epsilon, rc.W, rc.grid);
  p.load = rc.load;
  p.a0 = rc.a0;
  p.b0 = rc.b0;
  p.T = rc.T;
  p.dt = rc.dt;
  ctx.manifest["grid"] = {{"nx", p.grid.n1()}, {"nz", p.grid.n3()}, {"contrast", p.contrast()}};

  if (rc.variant == "static") {
    auto f = [&rc](double x1, double x3) { return rc.load.f(x1, x3, 0.0); };
    const PlaneField u = solve_static_fine(p, f, rc.tol);
    const std::vector<double> times{0.0};
    std::vector<PlaneField> us{u}, vs{PlaneField(*u.grid)};
    write_fields(ctx, rc, "fine_static", times, us, vs);
  } else {
    const FineState st = solve_dynamic_fine(p, rc.samples);
    write_fields(ctx, rc, "fine", st.times, st.u, st.v);
    write_energy_csv(ctx.out_dir / "fine_energy.csv", st.trace);
    ctx.note_artifact(ctx.out_dir / "fine_energy.csv");
  }
  return exit_code::ok;
}

inline EffectiveProblem effective_from_config(const RunConfig& rc, const Regime& rg) {
  EffectiveProblem ep = make_effective_problem(rc.W, rc.L, rc.macro_nx, rc.macro_nz, rg, rc.scaling);
  if (rc.mode == "explicit") set_density(ep, n_eps_field(layers_from_config(rc, rc.epsilon)));
  ep.load = rc.load;
  ep.a0 = rc.a0;
  ep.b0 = rc.b0;
  ep.T = rc.T;
  ep.dt = rc.dt;
  ep.micro_cells = rc.micro_cells;
  return ep;
}

inline int run_effective(RunContext& ctx, const RunConfig& rc) {
  const Regime rg = classify_regime(rc.scaling);
  ctx.manifest["regime"] = regime_json(rg);
  EffectiveProblem ep = effective_from_config(rc, rg);

  switch (rg.interlayer_class) {
    case SoftClass::Kind::unit: {
      if (rc.variant == "static") {
        auto f = [&rc](double x1, double x3) { return rc.load.f(x1, x3, 0.0); };
        const PlaneField u = solve_effective_static_stiff(ep, f, rc.tol);
        std::vector<PlaneField> us{u}, vs{PlaneField(*u.grid)};
        write_fields(ctx, rc, "effective_static", {0.0}, us, vs);
      } else {
        const auto out = solve_effective_stiff(ep, rc.samples);
        write_fields(ctx, rc, "effective", out.times, out.u, out.v);
        write_energy_csv(ctx.out_dir / "effective_energy.csv", out.trace);
        ctx.note_artifact(ctx.out_dir / "effective_energy.csv");
      }
      break;
    }
    case SoftClass::Kind::intermediate: {
      const auto out = solve_effective_intermediate(ep, rc.samples);
      write_fields(ctx, rc, "effective", out.times, out.u, out.v);
      write_energy_csv(ctx.out_dir / "effective_energy.csv", out.trace);
      ctx.note_artifact(ctx.out_dir / "effective_energy.csv");
      break;
    }
    case SoftClass::Kind::critical: {
      const TwoScaleState ts = solve_effective_critical(ep, rc.samples);
      write_fields(ctx, rc, "effective", ts.times, ts.v, ts.v_dot);
      write_micro_profiles_csv(ctx.out_dir / "micro_profiles.csv", ts,
                               std::max(1, ep.grid.n1() / 4));
      ctx.note_artifact(ctx.out_dir / "micro_profiles.csv");
      write_energy_csv(ctx.out_dir / "effective_energy.csv", ts.trace);
      ctx.note_artifact(ctx.out_dir / "effective_energy.csv");
      break;
    }
  }
  return exit_code::ok;
}

inline int run_compare(RunContext& ctx, const RunConfig& rc) {
  const Regime rg = classify_regime(rc.scaling);
  ctx.manifest["regime"] = regime_json(rg);
  const LayerSet ls = layers_from_config(rc, rc.epsilon);
  FineProblem fp = build_fine_problem(ls, rc.scaling, rc.epsilon, rc.W, rc.grid);
  fp.load = rc.load;
  fp.a0 = rc.a0;
  fp.b0 = rc.b0;
  fp.T = rc.T;
  fp.dt = rc.dt;
  EffectiveProblem ep = effective_from_config(rc, rg);

  DiagnosticsReport rep;
  const auto battery = moment_battery(rc.W, rc.L);

  if (rg.interlayer_class == SoftClass::Kind::critical) {
    const FineState fs = solve_dynamic_fine(fp, rc.samples);
    const TwoScaleState ts = solve_effective_critical(ep, rc.samples);
    std::vector<PlaneField> corr, zeros;
    for (size_t s = 0; s < fs.times.size(); ++s) {
      corr.push_back(corrector_field(ts, s, ls, rc.epsilon, *fs.u[s].grid));
      zeros.emplace_back(*fs.u[s].grid);
    }
    const double den = std::max(l2_error_trajectory(fs.times, corr, zeros), 1e-30);
    rep.add(rc.epsilon, "corrector_rel_error", l2_error_trajectory(fs.times, fs.u, corr) / den, 0, 0, true);
    for (const auto& b : battery) {
      const double mom = measure_moment(fs.times, fs.u, ls, b.fn);
      const double lim = moment_limit(ts.times, ts.v, ep.n_node, b.fn);
      rep.add(rc.epsilon, "moment_gap_" + b.name, std::abs(mom - lim), 0, 0, true);
    }
  } else if (rc.variant == "static" && rg.interlayer_class == SoftClass::Kind::unit) {
    auto f = [&rc](double x1, double x3) { return rc.load.f(x1, x3, 0.0); };
    const PlaneField uf = solve_static_fine(fp, f, rc.tol);
    const PlaneField ue = solve_effective_static_stiff(ep, f, rc.tol);
    const PlaneField ue_f = interpolate_field(ue, *uf.grid);
    rep.add(rc.epsilon, "l2_rel_error", l2_error(uf, ue_f) / std::max(l2_norm(ue_f), 1e-30), 0, 0, true);
    for (const auto& b : battery) {
      const double mom = measure_moment_slice(uf, ls, 0.0, b.fn);
      const double lim = moment_limit_slice(ue, ep.n_node, 0.0, b.fn);
      rep.add(rc.epsilon, "moment_gap_" + b.name, std::abs(mom - lim), 0, 0, true);
    }
  } else {
    const FineState fs = solve_dynamic_fine(fp, rc.samples);
    const auto out = rg.interlayer_class == SoftClass::Kind::unit
                         ? solve_effective_stiff(ep, rc.samples)
                         : solve_effective_intermediate(ep, rc.samples);
    std::vector<PlaneField> eff_on_fine;
    for (size_t s = 0; s < fs.times.size(); ++s)
      eff_on_fine.push_back(interpolate_field(out.u[s], *fs.u[s].grid));
    std::vector<PlaneField> zeros;
    for (size_t s = 0; s < fs.times.size(); ++s) zeros.emplace_back(*fs.u[s].grid);
    const double den = std::max(l2_error_trajectory(fs.times, eff_on_fine, zeros), 1e-30);
    rep.add(rc.epsilon, "l2_rel_error", l2_error_trajectory(fs.times, fs.u, eff_on_fine) / den, 0, 0, true);
  }

  write_diagnostics_csv(ctx.out_dir / "compare.csv", rep);
  ctx.note_artifact(ctx.out_dir / "compare.csv");
  return exit_code::ok;
}

inline int run_sweep(RunContext& ctx, const RunConfig& rc) {
  if (rc.epsilon_list.size() < 3)
    throw InsufficientEpsilons("sweep needs microstructure.epsilon_list with >= 3 entries");
  const Regime rg = classify_regime(rc.scaling);
  ctx.manifest["regime"] = regime_json(rg);

  StudyConfig sc;
  sc.W = rc.W;
  sc.L = rc.L;
  sc.scaling = rc.scaling;
  sc.eps_list = rc.epsilon_list;
  sc.fine_grid = rc.grid;
  sc.macro_nx = rc.macro_nx;
  sc.macro_nz = rc.macro_nz;
  sc.micro_cells = rc.micro_cells;
  sc.T = rc.T;
  sc.dt = rc.dt;
  sc.samples = rc.samples;

  if (rg.interlayer_class == SoftClass::Kind::critical) {
    sc.kind = StudyConfig::Kind::critical_dynamic;
    sc.load = rc.load;
    sc.a0 = rc.a0;
    sc.b0 = rc.b0;
  } else if (rg.interlayer_class == SoftClass::Kind::unit) {
    sc.kind = StudyConfig::Kind::stiff_static;
    sc.f_static = [&rc](double x1, double x3) { return rc.load.f(x1, x3, 0.0); };
  } else {
    throw RegimeMismatch("sweep supports the unit (static) and critical regimes");
  }

  const DiagnosticsReport rep = convergence_study(sc);
  write_diagnostics_csv(ctx.out_dir / "diagnostics.csv", rep);
  ctx.note_artifact(ctx.out_dir / "diagnostics.csv");
  ctx.manifest["acceptance_pass"] = rep.overall;
  return rep.overall ? exit_code::ok : exit_code::acceptance;
}

inline int run_stochastic(RunContext& ctx, const RunConfig& rc) {
  std::vector<double> eps_list = rc.epsilon_list;
  if (eps_list.empty()) eps_list = {rc.epsilon};
  ProcessModel model = rc.process;
  if (ctx.seed_override) model.seed = ctx.seed;

  // replicas are independent; each owns stream (replica index)
  std::vector<DensityLimitRow> rows;
  for (double eps : eps_list) {
    std::vector<DensityLimitRow> per(static_cast<size_t>(rc.replicas));
    auto work = [&](int rep) {
      OmegaSample om;
      const StepDensity d = stochastic_density(model, eps, rc.L, static_cast<uint64_t>(rep), &om);
      DensityLimitRow row;
      row.model = model.name();
      row.epsilon = eps;
      row.replica = rep;
      row.interior_mean = interior_mean(d, 2.0 * eps);
      row.target = om.analytic_mean_density(model);
      row.abs_err = std::abs(row.interior_mean - row.target);
      per[static_cast<size_t>(rep)] = row;
    };
    if (ctx.threads > 1) {
      std::vector<std::future<void>> fut;
      for (int rep = 0; rep < rc.replicas; ++rep)
        fut.push_back(std::async(std::launch::async, work, rep));
      for (auto& f : fut) f.get();
    } else {
      for (int rep = 0; rep < rc.replicas; ++rep) work(rep);
    }
    rows.insert(rows.end(), per.begin(), per.end());
  }
  write_stochastic_csv(ctx.out_dir / "stochastic.csv", rows);
  ctx.note_artifact(ctx.out_dir / "stochastic.csv");
  return exit_code::ok;
}

}  // namespace detail_run

// Entry point shared by the CLI subcommands; always writes a manifest, even
// on failure (with a machine-readable error record).
inline int run(RunContext& ctx) {
  ctx.manifest["version"] = version();
  ctx.manifest["command"] = ctx.command;
  ctx.manifest["config"] = ctx.config_path.string();

  int code = exit_code::ok;
  try {
    const Ini ini = Ini::parse_file(ctx.config_path);
    RunConfig rc = load_run_config(ini);
    if (ctx.seed_override) {
      rc.seed = ctx.seed;
      rc.process.seed = ctx.seed;
    }
    if (!ctx.out_dir.empty()) rc.out_dir = ctx.out_dir.string();
    ctx.out_dir = rc.out_dir;
    char hash[32];
    std::snprintf(hash, sizeof hash, "%016llx",
                  static_cast<unsigned long long>(fnv1a(rc.config_text)));
    ctx.manifest["config_hash"] = hash;
    ctx.manifest["seed"] = rc.seed;

    if (ctx.command == "fine") code = detail_run::run_fine(ctx, rc);
    else if (ctx.command == "effective") code = detail_run::run_effective(ctx, rc);
    else if (ctx.command == "compare") code = detail_run::run_compare(ctx, rc);
    else if (ctx.command == "sweep") code = detail_run::run_sweep(ctx, rc);
    else if (ctx.command == "stochastic") code = detail_run::run_stochastic(ctx, rc);
    else throw ConfigParse("unknown command '" + ctx.command + "'");
    ctx.manifest["status"] = code == exit_code::ok ? "ok" : "acceptance_failure";
  } catch (const Error& e) {
    ctx.manifest["status"] = "error";
    ctx.manifest["error"] = {{"name", e.name()}, {"message", e.what()}};
    code = exit_code_for(e);
  } catch (const std::exception& e) {
    ctx.manifest["status"] = "error";
    ctx.manifest["error"] = {{"name", "Unexpected"}, {"message", e.what()}};
    code = exit_code::solver;
  }
  if (ctx.out_dir.empty()) ctx.out_dir = "out";
  ctx.write_manifest();
  return code;
}

}  // namespace strata
