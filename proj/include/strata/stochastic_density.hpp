#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "strata/layers.hpp"
#include "strata/point_process.hpp"

namespace strata {

struct DensityLimitRow {
  std::string model;
  double epsilon = 0.0;
  int replica = 0;
  double interior_mean = 0.0;
  double target = 0.0;
  double abs_err = 0.0;
};

// Scaled layer-count field of one realization: n_eps of eps*omega on (0,L).
inline StepDensity stochastic_density(const ProcessModel& model, double eps, double L,
                                      uint64_t replica, OmegaSample* sample_out = nullptr) {
  OmegaSample om = sample_process(model, -1.0, L / eps + 1.0, replica);
  const auto centers = restrict_and_scale(om, eps, L);
  if (sample_out) *sample_out = om;
  return n_eps_field(centers, eps, L);
}

// Mean of the cell counts over cells whose center lies in [margin, L-margin].
inline double interior_mean(const StepDensity& d, double margin) {
  double acc = 0.0;
  int cnt = 0;
  for (int i = d.i_min; i <= d.i_max(); ++i) {
    const double x = d.epsilon * i;
    if (x < margin || x > d.domain_length - margin) continue;
    acc += d.values[i - d.i_min];
    ++cnt;
  }
  return cnt > 0 ? acc / cnt : 0.0;
}

// Non-overlapping window averages inside [margin, L-margin].
inline std::vector<double> window_averages(const StepDensity& d, double window, double margin) {
  std::vector<double> out;
  const double L = d.domain_length;
  for (double a = margin; a + window <= L - margin + 1e-12; a += window) {
    double acc = 0.0;
    int cnt = 0;
    for (int i = d.i_min; i <= d.i_max(); ++i) {
      const double x = d.epsilon * i;
      if (x >= a && x < a + window) {
        acc += d.values[i - d.i_min];
        ++cnt;
      }
    }
    if (cnt > 0) out.push_back(acc / cnt);
  }
  return out;
}

// Empirical verification data for the stochastic mean-density limit: the
// interior average of n_eps per (eps, replica) against the model's analytic
// conditional mean (component-resolved for the mixture).
inline std::vector<DensityLimitRow> empirical_density_limit(const ProcessModel& model,
                                                            const std::vector<double>& eps_list,
                                                            double L, int replicas) {
  if (replicas < 1) throw BadModelParams("replicas must be >= 1");
  for (size_t i = 0; i + 1 < eps_list.size(); ++i)
    if (!(eps_list[i + 1] < eps_list[i]))
      throw BadModelParams("eps list must be strictly decreasing");

  std::vector<DensityLimitRow> rows;
  for (double eps : eps_list) {
    for (int rep = 0; rep < replicas; ++rep) {
      OmegaSample om;
      const StepDensity d = stochastic_density(model, eps, L, static_cast<uint64_t>(rep), &om);
      DensityLimitRow row;
      row.model = model.name();
      row.epsilon = eps;
      row.replica = rep;
      row.interior_mean = interior_mean(d, 2.0 * eps);
      row.target = om.analytic_mean_density(model);
      row.abs_err = std::abs(row.interior_mean - row.target);
      rows.push_back(row);
    }
  }
  return rows;
}

}  // namespace strata
