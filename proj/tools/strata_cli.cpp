#include <CLI11.hpp>

#include <cmath>
#include <cstdio>
#include <string>

#include "strata/strata.hpp"

namespace {

int selftest() {
  using namespace strata;
  int failures = 0;
  auto check = [&failures](bool ok, const char* what) {
    std::printf("[%s] %s\n", ok ? "PASS" : "FAIL", what);
    if (!ok) ++failures;
  };

  // layer geometry
  {
    const auto ls = build_layers(LayerMode::periodic, 0.25, 1.0 / 32, 1.0, 0.5);
    check(ls.count() == 3 && std::abs(ls.centers[1] - 0.5) < 1e-15, "periodic layer placement");
    const auto d = n_eps_field(ls);
    check(d.sup_value() == 1, "unit counts on the periodic lattice");
    bool gap_throws = false;
    try {
      build_layers(LayerMode::explicit_centers, 0.2, 0.01, 1.0, 0.5, {0.3, 0.35});
    } catch (const GapViolation&) {
      gap_throws = true;
    }
    check(gap_throws, "gap violation detected");
  }

  // operator identities at l = 0
  {
    Grid2D g = Grid2D::uniform(1.0, 1.0, 8, 8);
    PlaneField psi(g);
    for (int j = 0; j <= g.n3(); ++j)
      for (int i = 0; i <= g.n1(); ++i) psi.u1(i, j) = g.x1[i];
    const auto s = sigma_xprime(0.0, psi);
    check(std::abs(s.s11[0] - 2.0) < 1e-14, "sigma_x' = 2 e_x' at l = 0");
    Vec row(9);
    for (int i = 0; i <= 8; ++i) row[i] = g.x1[i] * g.x1[i];
    const auto bp = bending_pair(0.0, row, g.h1(0));
    check(std::abs(bp.H11[4] - 2.0) < 1e-10 && std::abs(bp.Hs11[4] - bp.H11[4]) < 1e-14,
          "H^sigma = H at l = 0");
  }

  // rng determinism
  {
    Rng a(42, 7), b(42, 7);
    bool same = true;
    for (int i = 0; i < 100; ++i) same = same && (a.next_u64() == b.next_u64());
    check(same, "seeded generator reproducibility");
  }

  // hard-core constraint
  {
    ProcessModel m;
    m.kind = ProcessModel::Kind::shifted_lattice;
    m.min_gap = 0.5;
    m.jitter = 0.25;
    m.seed = 3;
    bool ok = true;
    for (int rep = 0; rep < 100 && ok; ++rep) {
      const auto s = sample_process(m, -20.0, 20.0, rep);
      for (size_t i = 0; i + 1 < s.points.size(); ++i)
        ok = ok && (s.points[i + 1] - s.points[i] >= m.min_gap - 1e-12);
    }
    check(ok, "hard-core gap maintained");
  }

  // micro cell problem: constant end data, no load -> constant profile
  {
    const Vec u = solve_micro_static(1.0, 0.0, 16, 2.5, 0.0);
    bool flat = true;
    for (int i = 0; i < u.size(); ++i) flat = flat && std::abs(u[i] - 2.5) < 1e-12;
    check(flat, "micro cell problem with rigid data");
  }

  std::printf("%s\n", failures == 0 ? "selftest: all checks passed" : "selftest: FAILURES");
  return failures == 0 ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"stratified elastic composite laboratory"};
  app.require_subcommand(1);

  std::string config_path, out_dir, format;
  int threads = 1;
  long long seed = -1;

  auto add_common = [&](CLI::App* cmd, bool needs_config) {
    if (needs_config)
      cmd->add_option("--config", config_path, "configuration file (INI)")->required();
    cmd->add_option("--out", out_dir, "output directory (overrides config)");
    cmd->add_option("--threads", threads, "worker threads for independent runs");
    cmd->add_option("--seed", seed, "seed override");
    cmd->add_option("--format", format, "csv|vtk|both (overrides config)");
  };

  for (const char* name : {"fine", "effective", "compare", "sweep", "stochastic"})
    add_common(app.add_subcommand(name), true);
  app.add_subcommand("selftest", "run the built-in property checks");

  CLI11_PARSE(app, argc, argv);

  const std::string cmd = app.get_subcommands().front()->get_name();
  if (cmd == "selftest") return selftest();

  strata::RunContext ctx;
  ctx.command = cmd;
  ctx.config_path = config_path;
  ctx.out_dir = out_dir;
  ctx.threads = threads;
  if (seed >= 0) {
    ctx.seed_override = true;
    ctx.seed = static_cast<uint64_t>(seed);
  }
  ctx.format_override = format;

  const int code = strata::run(ctx);
  if (code != 0) std::fprintf(stderr, "%s: exited with code %d (see manifest.json)\n", cmd.c_str(), code);
  return code;
}
