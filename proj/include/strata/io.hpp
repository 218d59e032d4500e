#pragma once

#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "strata/analysis.hpp"
#include "strata/effective_solver.hpp"
#include "strata/fine_solver.hpp"
#include "strata/layers.hpp"
#include "strata/stochastic_density.hpp"

namespace strata {

inline const char* version() { return "0.1.0"; }

// shortest round-trip decimal representation; keeps CSV output byte-stable
inline std::string fmt(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  double back = 0.0;
  std::sscanf(buf, "%lf", &back);
  if (back == x) {
    for (int prec = 1; prec < 17; ++prec) {
      char shorter[40];
      std::snprintf(shorter, sizeof shorter, "%.*g", prec, x);
      std::sscanf(shorter, "%lf", &back);
      if (back == x) return shorter;
    }
  }
  return buf;
}

inline std::ofstream open_out(const std::filesystem::path& path) {
  std::filesystem::create_directories(path.parent_path());
  std::ofstream os(path);
  if (!os) throw ConfigParse("cannot open output file " + path.string());
  return os;
}

inline void write_layers_csv(const std::filesystem::path& path, const LayerSet& ls) {
  auto os = open_out(path);
  os << "center,thickness\n";
  for (double c : ls.centers) os << fmt(c) << ',' << fmt(ls.thickness) << '\n';
}

inline void write_density_csv(const std::filesystem::path& path, const StepDensity& d) {
  auto os = open_out(path);
  os << "cell_index,cell_left,cell_right,count\n";
  for (int i = d.i_min; i <= d.i_max(); ++i)
    os << i << ',' << fmt(d.cell_left(i)) << ',' << fmt(d.cell_right(i)) << ','
       << d.values[i - d.i_min] << '\n';
}

inline void write_trajectory_csv(const std::filesystem::path& path, const std::vector<double>& times,
                                 const std::vector<PlaneField>& u, const std::vector<PlaneField>& v) {
  auto os = open_out(path);
  os << "t,x1,x3,u1,u3,v1,v3\n";
  for (size_t s = 0; s < times.size(); ++s) {
    const Grid2D& g = *u[s].grid;
    for (int j = 0; j <= g.n3(); ++j)
      for (int i = 0; i <= g.n1(); ++i)
        os << fmt(times[s]) << ',' << fmt(g.x1[i]) << ',' << fmt(g.x3[j]) << ','
           << fmt(u[s].u1(i, j)) << ',' << fmt(u[s].u3(i, j)) << ',' << fmt(v[s].u1(i, j)) << ','
           << fmt(v[s].u3(i, j)) << '\n';
  }
}

inline void write_micro_profiles_csv(const std::filesystem::path& path, const TwoScaleState& ts,
                                     int node_stride = 1) {
  auto os = open_out(path);
  os << "t,x1,x3,y3,u01,u03\n";
  const Grid2D& g = *ts.macro_grid;
  NodeMap map(g, BoundaryKind::dirichlet_all);
  for (size_t s = 0; s < ts.times.size(); ++s)
    for (int j = 0; j <= g.n3(); j += node_stride)
      for (int i = 0; i <= g.n1(); i += node_stride) {
        const auto& mp = ts.micro[s][map.id(i, j)];
        for (int k = 0; k < mp.y.size(); ++k)
          os << fmt(ts.times[s]) << ',' << fmt(g.x1[i]) << ',' << fmt(g.x3[j]) << ','
             << fmt(mp.y[k]) << ',' << fmt(mp.u1[k]) << ',' << fmt(mp.u3[k]) << '\n';
      }
}

inline void write_diagnostics_csv(const std::filesystem::path& path, const DiagnosticsReport& rep) {
  auto os = open_out(path);
  os << "epsilon,quantity,value,baseline,ratio,pass\n";
  for (const auto& r : rep.rows)
    os << fmt(r.epsilon) << ',' << r.quantity << ',' << fmt(r.value) << ',' << fmt(r.baseline)
       << ',' << fmt(r.ratio) << ',' << (r.pass ? 1 : 0) << '\n';
}

inline void write_stochastic_csv(const std::filesystem::path& path,
                                 const std::vector<DensityLimitRow>& rows) {
  auto os = open_out(path);
  os << "model,epsilon,replica,interior_mean,target,abs_err\n";
  for (const auto& r : rows)
    os << r.model << ',' << fmt(r.epsilon) << ',' << r.replica << ',' << fmt(r.interior_mean)
       << ',' << fmt(r.target) << ',' << fmt(r.abs_err) << '\n';
}

inline void write_energy_csv(const std::filesystem::path& path, const EnergyTrace& trace) {
  auto os = open_out(path);
  os << "t,energy,work\n";
  for (size_t s = 0; s < trace.t.size(); ++s)
    os << fmt(trace.t[s]) << ',' << fmt(trace.energy[s]) << ',' << fmt(trace.work[s]) << '\n';
}

// Legacy-VTK structured grid, one file per sampled time; displacements and
// velocities as point vectors (x2 direction zero-padded).
inline void write_vtk_series(const std::filesystem::path& dir, const std::string& base,
                             const std::vector<double>& times, const std::vector<PlaneField>& u,
                             const std::vector<PlaneField>& v) {
  std::filesystem::create_directories(dir);
  for (size_t s = 0; s < times.size(); ++s) {
    const Grid2D& g = *u[s].grid;
    char name[64];
    std::snprintf(name, sizeof name, "%s_%04zu.vtk", base.c_str(), s);
    auto os = open_out(dir / name);
    const int n1 = g.n1() + 1, n3 = g.n3() + 1;
    os << "# vtk DataFile Version 3.0\n";
    os << base << " t=" << fmt(times[s]) << "\n";
    os << "ASCII\nDATASET STRUCTURED_GRID\n";
    os << "DIMENSIONS " << n1 << ' ' << n3 << " 1\n";
    os << "POINTS " << n1 * n3 << " double\n";
    for (int j = 0; j < n3; ++j)
      for (int i = 0; i < n1; ++i) os << fmt(g.x1[i]) << " 0 " << fmt(g.x3[j]) << '\n';
    os << "POINT_DATA " << n1 * n3 << '\n';
    os << "VECTORS displacement double\n";
    for (int j = 0; j < n3; ++j)
      for (int i = 0; i < n1; ++i)
        os << fmt(u[s].u1(i, j)) << " 0 " << fmt(u[s].u3(i, j)) << '\n';
    os << "VECTORS velocity double\n";
    for (int j = 0; j < n3; ++j)
      for (int i = 0; i < n1; ++i)
        os << fmt(v[s].u1(i, j)) << " 0 " << fmt(v[s].u3(i, j)) << '\n';
  }
}

inline uint64_t fnv1a(const std::string& data) {
  uint64_t h = 1469598103934665603ull;
  for (unsigned char c : data) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

}  // namespace strata
