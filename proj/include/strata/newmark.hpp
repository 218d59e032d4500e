#pragma once

#include <Eigen/Sparse>
#include <Eigen/SparseCholesky>

#include <cmath>
#include <functional>
#include <vector>

#include "strata/assembly.hpp"
#include "strata/errors.hpp"

namespace strata {

// Per-step scheme energy and accumulated external work; the discrete identity
// E(t_n) = E(0) + W(t_n) holds to roundoff for the average-acceleration scheme
// when W is accumulated with the trapezoidal midpoint rule below.
struct EnergyTrace {
  std::vector<double> t;
  std::vector<double> energy;
  std::vector<double> work;
};

// Implicit Newmark (average acceleration, beta = 1/4, gamma = 1/2) for
// M u'' + K u = F(t) on the constrained subspace. Unconditionally stable;
// one sparse factorization reused across the march.
class NewmarkSolver {
public:
  NewmarkSolver(SpMat M, SpMat K, double dt, double beta = 0.25, double gamma = 0.5)
      : M_(std::move(M)), K_(std::move(K)), dt_(dt), beta_(beta), gamma_(gamma) {
    SpMat A = M_ + (beta_ * dt_ * dt_) * K_;
    lhs_.compute(A);
    if (lhs_.info() != Eigen::Success)
      throw SolveFailure("Newmark system factorization failed");
    mass_.compute(M_);
    if (mass_.info() != Eigen::Success)
      throw SolveFailure("mass matrix factorization failed");
  }

  void initialize(const Vec& u0, const Vec& v0, const Vec& f0) {
    u_ = u0;
    v_ = v0;
    a_ = mass_.solve(f0 - K_ * u0);
    t_ = 0.0;
    trace_ = EnergyTrace{};
    work_ = 0.0;
    f_prev_ = f0;
    record();
  }

  // advance one step with the end-of-step load f1
  void step(const Vec& f1) {
    const Vec u_pred = u_ + dt_ * v_ + (0.5 - beta_) * dt_ * dt_ * a_;
    const Vec v_pred = v_ + (1.0 - gamma_) * dt_ * a_;
    const Vec rhs = f1 - K_ * u_pred;
    Vec a1 = lhs_.solve(rhs);
    if (!a1.allFinite()) throw NonFiniteState("Newmark step produced a non-finite state");
    const Vec u1 = u_pred + beta_ * dt_ * dt_ * a1;
    const Vec v1 = v_pred + gamma_ * dt_ * a1;
    // scheme-consistent work increment: dt * mean(v) . mean(F)
    work_ += dt_ * (0.5 * (v_ + v1)).dot(0.5 * (f_prev_ + f1));
    u_ = u1;
    v_ = v1;
    a_ = a1;
    f_prev_ = f1;
    t_ += dt_;
    record();
  }

  double energy() const { return 0.5 * (v_.dot(M_ * v_) + u_.dot(K_ * u_)); }

  const Vec& u() const { return u_; }
  const Vec& v() const { return v_; }
  double t() const { return t_; }
  double dt() const { return dt_; }
  const EnergyTrace& trace() const { return trace_; }
  const SpMat& M() const { return M_; }
  const SpMat& K() const { return K_; }

private:
  void record() {
    trace_.t.push_back(t_);
    trace_.energy.push_back(energy());
    trace_.work.push_back(work_);
  }

  SpMat M_, K_;
  double dt_, beta_, gamma_;
  Eigen::SimplicialLDLT<SpMat> lhs_, mass_;
  Vec u_, v_, a_, f_prev_;
  double t_ = 0.0, work_ = 0.0;
  EnergyTrace trace_;
};

// Direct solve of K u = F; iterative refinement drives the residual below
// rel_tol (high contrast degrades the bare factorization).
inline Vec solve_spd(const SpMat& K, const Vec& F, double rel_tol = 1e-10) {
  Eigen::SimplicialLDLT<SpMat> chol;
  chol.compute(K);
  if (chol.info() != Eigen::Success) throw SolveFailure("sparse factorization failed");
  Vec u = chol.solve(F);
  const double fn = F.norm();
  if (fn > 0.0) {
    double res = (K * u - F).norm() / fn;
    for (int pass = 0; pass < 5 && res > rel_tol; ++pass) {
      u += chol.solve(Vec(F - K * u));
      res = (K * u - F).norm() / fn;
    }
    if (!(res <= std::max(100.0 * rel_tol, 1e-7)))
      throw SolveFailure("linear solve stagnated above the residual tolerance");
  }
  if (!u.allFinite()) throw NonFiniteState("linear solve produced non-finite values");
  return u;
}

}  // namespace strata
