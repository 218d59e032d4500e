#pragma once

#include <algorithm>
#include <cctype>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "strata/errors.hpp"
#include "strata/fine_solver.hpp"
#include "strata/point_process.hpp"
#include "strata/scaling.hpp"

namespace strata {

// Minimal INI reader: [section] blocks of key = value lines, '#'/';' comments.
class Ini {
public:
  static Ini parse_file(const std::filesystem::path& path) {
    std::ifstream is(path);
    if (!is) throw ConfigParse("cannot read config file " + path.string());
    std::stringstream ss;
    ss << is.rdbuf();
    return parse(ss.str());
  }

  static Ini parse(const std::string& text) {
    Ini ini;
    ini.raw_ = text;
    std::string section;
    std::istringstream is(text);
    std::string line;
    int lineno = 0;
    while (std::getline(is, line)) {
      ++lineno;
      const auto cut = line.find_first_of("#;");
      if (cut != std::string::npos) line.erase(cut);
      line = trim(line);
      if (line.empty()) continue;
      if (line.front() == '[') {
        if (line.back() != ']') throw ConfigParse("unterminated section at line " + std::to_string(lineno));
        section = trim(line.substr(1, line.size() - 2));
        continue;
      }
      const auto eq = line.find('=');
      if (eq == std::string::npos) throw ConfigParse("expected key = value at line " + std::to_string(lineno));
      const std::string key = trim(line.substr(0, eq));
      const std::string val = trim(line.substr(eq + 1));
      if (key.empty()) throw ConfigParse("empty key at line " + std::to_string(lineno));
      ini.values_[section + "." + key] = val;
    }
    return ini;
  }

  bool has(const std::string& dotted) const { return values_.count(dotted) > 0; }

  std::string str(const std::string& dotted, const std::string& def = "") const {
    auto it = values_.find(dotted);
    return it == values_.end() ? def : it->second;
  }

  std::string require(const std::string& dotted) const {
    auto it = values_.find(dotted);
    if (it == values_.end()) throw ConfigParse("missing required key " + dotted);
    return it->second;
  }

  double num(const std::string& dotted, double def) const {
    auto it = values_.find(dotted);
    return it == values_.end() ? def : to_num(it->second, dotted);
  }

  double require_num(const std::string& dotted) const { return to_num(require(dotted), dotted); }

  long integer(const std::string& dotted, long def) const {
    return static_cast<long>(num(dotted, static_cast<double>(def)));
  }

  std::vector<double> num_list(const std::string& dotted) const {
    std::vector<double> out;
    std::string v = str(dotted);
    if (v.empty()) return out;
    std::stringstream ss(v);
    std::string item;
    while (std::getline(ss, item, ',')) out.push_back(to_num(trim(item), dotted));
    return out;
  }

  const std::string& raw() const { return raw_; }

private:
  static std::string trim(const std::string& s) {
    size_t a = 0, b = s.size();
    while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
    while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
    return s.substr(a, b - a);
  }
  static double to_num(const std::string& s, const std::string& key) {
    // accepts plain decimals and simple fractions like 1/32
    const auto slash = s.find('/');
    try {
      if (slash != std::string::npos) {
        const double num = std::stod(s.substr(0, slash));
        const double den = std::stod(s.substr(slash + 1));
        if (den == 0.0) throw std::invalid_argument("zero denominator");
        return num / den;
      }
      size_t used = 0;
      const double v = std::stod(s, &used);
      if (used != s.size()) throw std::invalid_argument("trailing characters");
      return v;
    } catch (const std::exception& e) {
      throw ConfigParse("bad numeric value '" + s + "' for " + key + " (" + e.what() + ")");
    }
  }

  std::map<std::string, std::string> values_;
  std::string raw_;
};

// Analytic field families usable from config files.
//   zero | constant(c1,c3) | sine(a1,a3,m1,m3) | bump(a1,a3,x0,z0,w)
// sine modes are relative to the domain extents (W, L).
inline LoadSpec parse_load(const std::string& spec, double W, double L) {
  auto args_of = [&](const std::string& s) {
    std::vector<double> args;
    const auto open = s.find('(');
    if (open == std::string::npos) return args;
    const auto close = s.rfind(')');
    if (close == std::string::npos || close < open) throw ConfigParse("unbalanced parentheses in '" + s + "'");
    std::stringstream ss(s.substr(open + 1, close - open - 1));
    std::string item;
    while (std::getline(ss, item, ',')) args.push_back(std::stod(item));
    return args;
  };
  const std::string name = spec.substr(0, spec.find('('));

  LoadSpec ls;
  if (name == "zero" || spec.empty()) return ls;
  const auto args = args_of(spec);
  ls.zero = false;
  if (name == "constant") {
    if (args.size() != 2) throw ConfigParse("constant(c1,c3) needs 2 arguments");
    const double c1 = args[0], c3 = args[1];
    ls.f = [c1, c3](double, double, double) { return std::array<double, 2>{c1, c3}; };
  } else if (name == "sine") {
    if (args.size() != 4) throw ConfigParse("sine(a1,a3,m1,m3) needs 4 arguments");
    const double a1 = args[0], a3 = args[1], m1 = args[2], m3 = args[3];
    ls.f = [a1, a3, m1, m3, W, L](double x1, double x3, double) {
      const double s = std::sin(m1 * M_PI * x1 / W) * std::sin(m3 * M_PI * x3 / L);
      return std::array<double, 2>{a1 * s, a3 * s};
    };
  } else if (name == "bump") {
    if (args.size() != 5) throw ConfigParse("bump(a1,a3,x0,z0,w) needs 5 arguments");
    const double a1 = args[0], a3 = args[1], x0 = args[2], z0 = args[3], w = args[4];
    ls.f = [a1, a3, x0, z0, w](double x1, double x3, double) {
      const double d2 = ((x1 - x0) * (x1 - x0) + (x3 - z0) * (x3 - z0)) / (w * w);
      const double b = std::exp(-d2);
      return std::array<double, 2>{a1 * b, a3 * b};
    };
  } else {
    throw ConfigParse("unknown field family '" + name + "'");
  }
  return ls;
}

inline SpaceFn parse_space_field(const std::string& spec, double W, double L) {
  LoadSpec ls = parse_load(spec, W, L);
  auto f = ls.f;
  return [f](double x1, double x3) { return f(x1, x3, 0.0); };
}

struct RunConfig {
  double W = 1.0, L = 1.0;

  // microstructure
  std::string mode = "periodic";  // periodic | explicit | stochastic
  double epsilon = 0.125;
  std::vector<double> epsilon_list;
  std::vector<double> centers;
  uint64_t seed = 1;
  int replicas = 8;
  ProcessModel process;

  MaterialScaling scaling;

  LoadSpec load;
  SpaceFn a0 = zero_space();
  SpaceFn b0 = zero_space();

  double T = 0.5, dt = 0.0;
  int samples = 9;

  std::string variant = "dynamic";  // dynamic | static
  GridSpec grid;
  int macro_nx = 32, macro_nz = 32, micro_cells = 64;
  double tol = 1e-10;

  std::string out_dir = "out";
  std::string format = "csv";  // csv | vtk | both

  std::string config_text;  // raw bytes, hashed into the manifest
};

inline RunConfig load_run_config(const Ini& ini) {
  RunConfig rc;
  rc.config_text = ini.raw();
  rc.W = ini.num("geometry.W", 1.0);
  rc.L = ini.num("geometry.L", 1.0);

  rc.mode = ini.str("microstructure.mode", "periodic");
  rc.epsilon = ini.num("microstructure.epsilon", 0.125);
  rc.epsilon_list = ini.num_list("microstructure.epsilon_list");
  rc.centers = ini.num_list("microstructure.centers");
  rc.seed = static_cast<uint64_t>(ini.integer("microstructure.seed", 1));
  rc.replicas = static_cast<int>(ini.integer("microstructure.replicas", 8));

  const std::string proc = ini.str("microstructure.process", "bernoulli");
  if (proc == "bernoulli") rc.process.kind = ProcessModel::Kind::bernoulli_lattice;
  else if (proc == "mixture") rc.process.kind = ProcessModel::Kind::mixture;
  else if (proc == "shifted") rc.process.kind = ProcessModel::Kind::shifted_lattice;
  else throw ConfigParse("unknown process '" + proc + "'");
  rc.process.p = ini.num("microstructure.p", 0.5);
  rc.process.p1 = ini.num("microstructure.p1", 0.2);
  rc.process.p2 = ini.num("microstructure.p2", 0.8);
  rc.process.mix_weight = ini.num("microstructure.mix_weight", 0.5);
  rc.process.jitter = ini.num("microstructure.jitter", 0.0);
  rc.process.min_gap = ini.num("microstructure.d", 1.0);
  rc.process.seed = rc.seed;

  rc.scaling.a = ini.num("material.a", 0.0);
  rc.scaling.b = ini.num("microstructure.b", 1.0);
  rc.scaling.c1 = ini.num("material.c1", 1.0);
  rc.scaling.c2 = ini.num("microstructure.c2", 0.25);
  rc.scaling.l = ini.num("material.l", 0.0);
  rc.scaling.rho = ini.num("material.rho", 1.0);
  rc.scaling.rho1_bar = ini.num("material.rho1_bar", 1.0);
  rc.scaling.delta = ini.num("microstructure.delta", 0.5);

  const std::string soft = ini.str("material.soft_class", "unit");
  if (soft == "unit") {
    rc.scaling.soft.kind = SoftClass::Kind::unit;
    rc.scaling.soft.mu = ini.num("material.mu", 1.0);
    rc.scaling.soft.lambda = ini.num("material.lambda", 0.0);
  } else if (soft == "intermediate") {
    rc.scaling.soft.kind = SoftClass::Kind::intermediate;
    rc.scaling.soft.mu = ini.num("material.mu", 1.0);
    rc.scaling.soft.lambda = ini.num("material.lambda", 0.0);
    rc.scaling.soft.s = ini.num("material.s", 1.0);
    if (!(rc.scaling.soft.s > 0.0 && rc.scaling.soft.s < 2.0))
      throw ConfigParse("intermediate exponent s must lie in (0,2)");
  } else if (soft == "critical") {
    rc.scaling.soft.kind = SoftClass::Kind::critical;
    rc.scaling.soft.mu0 = ini.num("material.mu0", 1.0);
    rc.scaling.soft.lambda0 = ini.num("material.lambda0", 0.0);
  } else {
    throw ConfigParse("unknown soft_class '" + soft + "'");
  }

  rc.load = parse_load(ini.str("loads.f", "zero"), rc.W, rc.L);
  rc.a0 = parse_space_field(ini.str("loads.a0", "zero"), rc.W, rc.L);
  rc.b0 = parse_space_field(ini.str("loads.b0", "zero"), rc.W, rc.L);

  rc.T = ini.num("time.T", 0.5);
  rc.dt = ini.num("time.dt", 0.0);
  rc.samples = static_cast<int>(ini.integer("time.samples", 9));

  rc.variant = ini.str("solver.variant", "dynamic");
  rc.grid.nx = static_cast<int>(ini.integer("solver.nx", 32));
  rc.grid.cells_per_layer = static_cast<int>(ini.integer("solver.cells_per_layer", 4));
  rc.grid.soft_target = ini.num("solver.soft_target", 0.0);
  rc.grid.uniform_nz = static_cast<int>(ini.integer("solver.uniform_nz", 0));
  rc.macro_nx = static_cast<int>(ini.integer("solver.macro_nx", 32));
  rc.macro_nz = static_cast<int>(ini.integer("solver.macro_nz", 32));
  rc.micro_cells = static_cast<int>(ini.integer("solver.micro_cells", 64));
  rc.tol = ini.num("solver.tol", 1e-10);

  rc.out_dir = ini.str("output.directory", "out");
  rc.format = ini.str("output.format", "csv");
  return rc;
}

inline LayerSet layers_from_config(const RunConfig& rc, double eps) {
  const double r = rc.scaling.r(eps);
  if (rc.mode == "periodic")
    return build_layers(LayerMode::periodic, eps, r, rc.L, rc.scaling.delta);
  if (rc.mode == "explicit")
    return build_layers(LayerMode::explicit_centers, eps, r, rc.L, rc.scaling.delta, rc.centers);
  throw ConfigParse("layer construction not available for mode '" + rc.mode + "'");
}

}  // namespace strata
