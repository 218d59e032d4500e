#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include "strata/errors.hpp"
#include "strata/rng.hpp"

namespace strata {

// Z-stationary random point processes on the line with a hard-core gap d.
// All built-ins are lattice-based so the limiting mean layer density is
// available in closed form (needed as an analytic target by the diagnostics):
//   bernoulli_lattice: keep each integer site independently with prob p;
//       stationary ergodic, conditional mean density = p.
//   mixture: flip once per sample between bernoulli(p1) and bernoulli(p2);
//       non-ergodic, the conditional mean density is the realized component's p.
//   shifted_lattice: integer lattice jittered i.i.d. uniformly in
//       [-jitter, jitter], jitter <= (1-d)/2; mean density = 1.
struct ProcessModel {
  enum class Kind { bernoulli_lattice, mixture, shifted_lattice };

  Kind kind = Kind::bernoulli_lattice;
  double p = 1.0;           // bernoulli_lattice
  double p1 = 0.0, p2 = 1.0, mix_weight = 0.5;  // mixture
  double jitter = 0.0;      // shifted_lattice
  double min_gap = 1.0;     // hard-core distance d in (0,1]
  uint64_t seed = 0;

  void validate() const {
    if (!(min_gap > 0.0) || min_gap > 1.0)
      throw BadModelParams("min_gap d must lie in (0,1]");
    auto in01 = [](double q) { return q >= 0.0 && q <= 1.0; };
    switch (kind) {
      case Kind::bernoulli_lattice:
        if (!in01(p)) throw BadModelParams("bernoulli p outside [0,1]");
        break;
      case Kind::mixture:
        if (!in01(p1) || !in01(p2) || !in01(mix_weight))
          throw BadModelParams("mixture probabilities outside [0,1]");
        break;
      case Kind::shifted_lattice:
        if (jitter < 0.0 || jitter > 0.5 * (1.0 - min_gap) + 1e-15)
          throw BadModelParams("jitter must lie in [0, (1-d)/2]");
        break;
    }
  }

  std::string name() const {
    switch (kind) {
      case Kind::bernoulli_lattice: return "bernoulli_lattice";
      case Kind::mixture: return "mixture";
      case Kind::shifted_lattice: return "shifted_lattice";
    }
    return "?";
  }
};

// Restriction of one realization to a bounded window.
struct OmegaSample {
  std::vector<double> points;  // sorted
  double window_a = 0.0, window_b = 0.0;
  int mixture_component = 0;  // 1 or 2 when drawn from a mixture, else 0

  double analytic_mean_density(const ProcessModel& m) const {
    switch (m.kind) {
      case ProcessModel::Kind::bernoulli_lattice: return m.p;
      case ProcessModel::Kind::mixture: return mixture_component == 1 ? m.p1 : m.p2;
      case ProcessModel::Kind::shifted_lattice: return 1.0;
    }
    return 0.0;
  }
};

// Draw the restriction of a realization to `window`. Deterministic given
// (model.seed, stream); distinct streams are independent replicas.
inline OmegaSample sample_process(const ProcessModel& model, double window_a, double window_b,
                                  uint64_t stream = 0) {
  model.validate();
  if (!(window_b > window_a)) throw BadModelParams("empty sampling window");

  Rng rng(model.seed, stream);
  OmegaSample s;
  s.window_a = window_a;
  s.window_b = window_b;

  double keep_p = 0.0;
  switch (model.kind) {
    case ProcessModel::Kind::bernoulli_lattice:
      keep_p = model.p;
      break;
    case ProcessModel::Kind::mixture:
      s.mixture_component = rng.bernoulli(model.mix_weight) ? 1 : 2;
      keep_p = (s.mixture_component == 1) ? model.p1 : model.p2;
      break;
    case ProcessModel::Kind::shifted_lattice:
      keep_p = 1.0;
      break;
  }

  const long long z_lo = static_cast<long long>(std::ceil(window_a - 1.0));
  const long long z_hi = static_cast<long long>(std::floor(window_b + 1.0));
  for (long long z = z_lo; z <= z_hi; ++z) {
    // one uniform consumed per site keeps the stream layout independent of p
    const double u = rng.uniform();
    double x = static_cast<double>(z);
    if (model.kind == ProcessModel::Kind::shifted_lattice) {
      x += (2.0 * u - 1.0) * model.jitter;
      if (x > window_a && x < window_b) s.points.push_back(x);
      continue;
    }
    if (u < keep_p && x > window_a && x < window_b) s.points.push_back(x);
  }
  return s;
}

// Centers of the scaled restriction eps*omega intersected with (eps, L-eps).
inline std::vector<double> restrict_and_scale(const OmegaSample& omega, double eps, double L) {
  std::vector<double> centers;
  for (double x : omega.points) {
    const double c = eps * x;
    if (c > eps && c < L - eps) centers.push_back(c);
  }
  return centers;
}

// Number of points in the unit cell [-1/2, 1/2).
inline int n0_count(const OmegaSample& omega) {
  if (omega.window_a >= -0.5 || omega.window_b < 0.5)
    throw WindowTooSmall("sample window does not contain [-1/2, 1/2)");
  int c = 0;
  for (double x : omega.points)
    if (x >= -0.5 && x < 0.5) ++c;
  return c;
}

// Truncated Hausdorff distance min{1, d_H} between two finite point sets.
inline double omega_distance(const OmegaSample& a, const OmegaSample& b) {
  if (a.points.empty() && b.points.empty()) return 0.0;
  if (a.points.empty() || b.points.empty()) return 1.0;
  auto one_sided = [](const std::vector<double>& p, const std::vector<double>& q) {
    double worst = 0.0;
    for (double x : p) {
      auto it = std::lower_bound(q.begin(), q.end(), x);
      double best = std::numeric_limits<double>::infinity();
      if (it != q.end()) best = std::min(best, *it - x);
      if (it != q.begin()) best = std::min(best, x - *std::prev(it));
      worst = std::max(worst, best);
    }
    return worst;
  };
  return std::min(1.0, std::max(one_sided(a.points, b.points), one_sided(b.points, a.points)));
}

}  // namespace strata
