#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "strata/errors.hpp"

namespace strata {

// Stack of stiff layers of thickness `thickness` centered at `centers` inside
// (0, domain_length). Layers occupy Omega' x (c - t/2, c + t/2). Immutable
// after construction; share freely across threads.
struct LayerSet {
  std::vector<double> centers;  // sorted
  double thickness = 0.0;       // r
  double epsilon = 0.0;
  double domain_length = 0.0;  // L
  double delta = 0.0;          // clearance factor in eps > r(1+delta)

  // validity metadata
  double min_gap = std::numeric_limits<double>::infinity();
  double boundary_clearance = std::numeric_limits<double>::infinity();
  bool gap_exactly_epsilon = true;  // false for explicit sets with gap > eps
  bool periodic = false;

  int count() const { return static_cast<int>(centers.size()); }
  double weight() const { return epsilon / thickness; }  // density of m_eps on layers
  double volume_fraction() const { return count() * thickness / domain_length; }
};

// Per-cell layer counts on the eps-lattice cells (eps*i - eps/2, eps*i + eps/2]
// fully contained in (0,L). Cells outside the index range carry count 0.
struct StepDensity {
  double epsilon = 0.0;
  double domain_length = 0.0;
  int i_min = 0;  // first lattice index of Z_eps
  std::vector<int> values;

  int i_max() const { return i_min + static_cast<int>(values.size()) - 1; }
  double cell_left(int i) const { return epsilon * i - 0.5 * epsilon; }
  double cell_right(int i) const { return epsilon * i + 0.5 * epsilon; }

  // Piecewise-constant evaluation; 0 outside Z_eps; cells are half-open (left, right].
  double operator()(double x3) const {
    // x3 in (eps*i - eps/2, eps*i + eps/2]  <=>  i = ceil(x3/eps - 1/2)
    const int i = static_cast<int>(std::ceil(x3 / epsilon - 0.5));
    if (i < i_min || i > i_max()) return 0.0;
    return static_cast<double>(values[i - i_min]);
  }

  int sup_value() const {
    int m = 0;
    for (int c : values) m = std::max(m, c);
    return m;
  }
};

namespace detail {
// Lattice cell range Z_eps = { i : (eps i - eps/2, eps i + eps/2] inside (0,L) }.
// Containment of a half-open (a,b] in (0,L) requires a >= 0 and b < L.
inline void lattice_range(double eps, double L, int& i_min, int& i_max) {
  i_min = 1;  // eps*i - eps/2 >= 0  =>  i >= 1/2
  const double tol = 1e-9 * eps;
  i_max = static_cast<int>(std::floor(L / eps - 0.5 + 1e-9));
  while (eps * i_max + 0.5 * eps >= L - tol) --i_max;  // strict b < L
  while (eps * (i_max + 1) + 0.5 * eps < L - tol) ++i_max;
}
}  // namespace detail

enum class LayerMode { periodic, explicit_centers };

// Construct a layer set; periodic mode places one center at every lattice
// point eps*i whose cell fits inside (0,L). Explicit centers must be sorted,
// pairwise at least eps apart and clear of the boundary by more than eps/2.
inline LayerSet build_layers(LayerMode mode, double eps, double r, double L, double delta,
                             const std::vector<double>& explicit_centers = {}) {
  if (!(eps > 0.0) || !(r > 0.0) || !(L > 0.0))
    throw ThicknessViolation("epsilon, thickness and domain length must be positive");
  if (!(eps > r * (1.0 + delta)))
    throw ThicknessViolation("epsilon <= thickness*(1+delta): layers would not be separated");

  LayerSet ls;
  ls.thickness = r;
  ls.epsilon = eps;
  ls.domain_length = L;
  ls.delta = delta;
  ls.periodic = (mode == LayerMode::periodic);

  if (mode == LayerMode::periodic) {
    int i_min, i_max;
    detail::lattice_range(eps, L, i_min, i_max);
    for (int i = i_min; i <= i_max; ++i) ls.centers.push_back(eps * i);
  } else {
    ls.centers = explicit_centers;
    if (!std::is_sorted(ls.centers.begin(), ls.centers.end()))
      throw GapViolation("explicit centers must be sorted");
  }

  const double tol = 1e-12 * std::max(1.0, L);
  ls.gap_exactly_epsilon = true;
  for (size_t j = 0; j + 1 < ls.centers.size(); ++j) {
    const double gap = ls.centers[j + 1] - ls.centers[j];
    ls.min_gap = std::min(ls.min_gap, gap);
    if (gap < eps - tol) throw GapViolation("centers closer than epsilon");
    if (gap > eps + tol) ls.gap_exactly_epsilon = false;
  }
  for (double c : ls.centers) {
    const double d = std::min(c, L - c);
    ls.boundary_clearance = std::min(ls.boundary_clearance, d);
    if (!(d > 0.5 * eps - tol))
      throw BoundaryViolation("center within epsilon/2 of the domain boundary");
  }
  return ls;
}

// Count field n_eps: number of centers per lattice cell.
inline StepDensity n_eps_field(const std::vector<double>& centers, double eps, double L) {
  StepDensity d;
  d.epsilon = eps;
  d.domain_length = L;
  int i_min, i_max;
  detail::lattice_range(eps, L, i_min, i_max);
  d.i_min = i_min;
  d.values.assign(std::max(0, i_max - i_min + 1), 0);
  for (double c : centers) {
    const int i = static_cast<int>(std::ceil(c / eps - 0.5 - 1e-12));
    if (i >= i_min && i <= i_max && c > d.cell_left(i) && c <= d.cell_right(i) + 1e-12 * eps)
      ++d.values[i - i_min];
  }
  return d;
}

inline StepDensity n_eps_field(const LayerSet& ls) {
  return n_eps_field(ls.centers, ls.epsilon, ls.domain_length);
}

struct LayerQuery {
  bool in_stiff = false;
  double weight = 0.0;   // eps/r on layers, 0 elsewhere
  double y_local = 0.0;  // (x3 - center)/r inside the widened window, 0 elsewhere
  int layer_index = -1;
};

// Point query of the layer indicator, the singular-measure weight and the
// rescaled layer coordinate (widened by the clearance factor).
inline LayerQuery layer_query(const LayerSet& ls, double x3) {
  LayerQuery q;
  auto it = std::lower_bound(ls.centers.begin(), ls.centers.end(), x3);
  const double half = 0.5 * ls.thickness;
  const double half_wide = 0.5 * ls.thickness * (1.0 + ls.delta);
  for (int step = 0; step < 2; ++step) {
    auto jt = (step == 0) ? it : (it == ls.centers.begin() ? ls.centers.end() : std::prev(it));
    if (jt == ls.centers.end()) continue;
    const double dz = x3 - *jt;
    if (std::abs(dz) < half_wide) {
      q.y_local = dz / ls.thickness;
      q.layer_index = static_cast<int>(jt - ls.centers.begin());
      if (std::abs(dz) < half) {
        q.in_stiff = true;
        q.weight = ls.weight();
      }
      break;
    }
  }
  return q;
}

// Moving-window average of a step density, evaluated at the points `where`.
// Windows are clipped to (0,L) and normalized by the clipped length, so
// constants are preserved up to the boundary.
inline std::vector<double> coarse_average(const StepDensity& d, double window,
                                          const std::vector<double>& where) {
  if (window < d.epsilon - 1e-12 * d.epsilon)
    throw WindowTooSmall("averaging window smaller than epsilon");
  // integral of the step function over (a,b)
  auto integral = [&d](double a, double b) {
    double s = 0.0;
    const int lo = static_cast<int>(std::floor(a / d.epsilon - 0.5));
    const int hi = static_cast<int>(std::ceil(b / d.epsilon + 0.5));
    for (int i = std::max(lo, d.i_min); i <= std::min(hi, d.i_max()); ++i) {
      const double l = std::max(a, d.cell_left(i));
      const double r = std::min(b, d.cell_right(i));
      if (r > l) s += (r - l) * d.values[i - d.i_min];
    }
    return s;
  };
  std::vector<double> out;
  out.reserve(where.size());
  for (double x : where) {
    const double a = std::max(0.0, x - 0.5 * window);
    const double b = std::min(d.domain_length, x + 0.5 * window);
    out.push_back(b > a ? integral(a, b) / (b - a) : 0.0);
  }
  return out;
}

}  // namespace strata
