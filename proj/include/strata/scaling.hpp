#pragma once

#include <cmath>
#include <limits>
#include <string>

#include "strata/errors.hpp"

namespace strata {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Lame moduli of the interlayer (soft) phase as a function of eps.
struct SoftClass {
  enum class Kind { unit, intermediate, critical };
  Kind kind = Kind::unit;
  double mu = 1.0, lambda = 0.0;  // unit: mu_0e = mu, lambda_0e = lambda
  double s = 1.0;                 // intermediate: mu_0e = mu * eps^s, s in (0,2)
  double mu0 = 1.0, lambda0 = 0.0;  // critical: mu_0e = eps^2 mu0

  std::string name() const {
    switch (kind) {
      case Kind::unit: return "unit";
      case Kind::intermediate: return "intermediate";
      case Kind::critical: return "critical";
    }
    return "?";
  }
};

// Contrast scaling of the layered composite:
//   mu_1e = c1 * eps^-a   (stiff shear modulus),
//   lambda_1e = l * mu_1e,
//   r_e  = c2 * eps^b     (layer thickness, b >= 1),
// plus the soft phase class and the densities rho (soft) and rho1_bar
// (rescaled layer density: rho_e = (eps/r_e) rho1_bar on layers).
struct MaterialScaling {
  double a = 0.0;
  double b = 1.0;
  double c1 = 1.0;
  double c2 = 0.5;
  double l = 0.0;  // limit of lambda_1e / mu_1e
  SoftClass soft;
  double rho = 1.0;
  double rho1_bar = 1.0;
  double delta = 0.5;  // clearance: requires eps > r(1+delta)

  double r(double eps) const { return c2 * std::pow(eps, b); }
  double mu1(double eps) const { return c1 * std::pow(eps, -a); }
  double lambda1(double eps) const { return l * mu1(eps); }
  double mu0(double eps) const {
    switch (soft.kind) {
      case SoftClass::Kind::unit: return soft.mu;
      case SoftClass::Kind::intermediate: return soft.mu * std::pow(eps, soft.s);
      case SoftClass::Kind::critical: return eps * eps * soft.mu0;
    }
    return 0.0;
  }
  double lambda0(double eps) const {
    switch (soft.kind) {
      case SoftClass::Kind::unit: return soft.lambda;
      case SoftClass::Kind::intermediate: return soft.lambda * std::pow(eps, soft.s);
      case SoftClass::Kind::critical: return eps * eps * soft.lambda0;
    }
    return 0.0;
  }
  double rho_layer(double eps) const { return (eps / r(eps)) * rho1_bar; }
};

// Scaling limits k = lim (r/eps) mu_1e, kappa = lim (r^3/eps) mu_1e,
// theta = lim r/eps, and the interlayer class, all fixed by the exponents.
struct Regime {
  SoftClass::Kind interlayer_class = SoftClass::Kind::unit;
  double k = kInf;      // membrane coefficient, in (0, inf]
  double kappa = 0.0;   // bending coefficient, in [0, inf]
  double theta = 0.0;   // limit volume fraction r/eps, in [0,1)
  double l = 0.0;

  bool k_finite() const { return std::isfinite(k); }
  bool kappa_finite() const { return std::isfinite(kappa); }
  bool kappa_zero() const { return kappa == 0.0; }
};

inline Regime classify_regime(const MaterialScaling& sc) {
  if (sc.b < 1.0) throw UnsupportedScaling("thickness exponent b must be >= 1");
  if (!(sc.c1 > 0.0) || !(sc.c2 > 0.0))
    throw UnsupportedScaling("scaling coefficients c1, c2 must be positive");
  if (sc.l < 0.0) throw UnsupportedScaling("Lame ratio l must be >= 0");

  Regime rg;
  rg.interlayer_class = sc.soft.kind;
  rg.l = sc.l;

  const double k_exp = sc.b - 1.0 - sc.a;       // (r/eps) mu1 ~ eps^k_exp
  const double kappa_exp = 3.0 * sc.b - 1.0 - sc.a;
  if (k_exp > 0.0)
    throw UnsupportedScaling("k = lim (r/eps) mu1 vanishes (a < b-1); must be in (0,inf]");
  rg.k = (k_exp == 0.0) ? sc.c1 * sc.c2 : kInf;
  rg.kappa = (kappa_exp == 0.0) ? sc.c1 * sc.c2 * sc.c2 * sc.c2
                                : (kappa_exp > 0.0 ? 0.0 : kInf);
  rg.theta = (sc.b == 1.0) ? sc.c2 : 0.0;
  if (rg.theta >= 1.0) throw UnsupportedScaling("volume fraction r/eps must stay below 1");
  return rg;
}

}  // namespace strata
