#pragma once

// Painleve-level reductions of the gap-probability dynamics: the sigma form
// of Painleve V for the single-matrix ensemble, the coupled chi-system for
// products of two matrices, and the small-s expansions of chi0, chi1 and the
// gap probability itself.

#include <limits>
#include <utility>
#include <vector>

#include "ginprod/dynamics.hpp"
#include "ginprod/types.hpp"

namespace ginprod {

struct SeriesTerm {
  double exponent = 0;
  double coefficient = 0;
};

// Truncated expansion sum_k c_k s^{e_k} around s = 0 with strictly
// increasing exponents. valid_radius_hint estimates where the first dropped
// correction becomes comparable to its parent term.
struct SeriesExpansion {
  std::vector<SeriesTerm> terms;
  double valid_radius_hint = 0;

  double evaluate(double s) const;
};

// Residual of the sigma-Painleve-V equation
//   (s sigma'')^2 = 4 s (sigma')^3 - 4 sigma (sigma')^2 + sigma^2
//                   + 2 (nu - s + 2n) sigma sigma'
//                   + ((nu - s)^2 - 4 s n) (sigma')^2,
// zero exactly on solutions. sigma = -(n eta0 + eta1) along the M = 1 flow.
double sigma_pv_residual(double sigma, double dsigma, double d2sigma, double s,
                         int n, double nu);

struct ChiValues {
  double chi0 = 0;
  double chi1 = 0;
  double dchi0 = 0;
  double dchi1 = 0;
};

// chi0 = n eta0 + eta1 and chi1 = n eta1 + eta2 with analytic first
// derivatives along the flow. Requires M = 2; chi0 equals the Hamiltonian.
ChiValues chi_from_state(const PrimaryState& st, const EnsembleSpec& spec);

// Residuals (r1, r2) of the two coupled equations satisfied by chi0 and chi1
// for M = 2; both vanish on true solutions. Optional outputs receive the sum
// of absolute values of the additive terms, for residual normalization.
std::pair<double, double> chi_system_residuals(double chi0, double dchi0,
                                               double d2chi0, double d3chi0,
                                               double chi1, double dchi1,
                                               double d2chi1, double s, int n,
                                               double nu1, double nu2,
                                               double* scale1 = nullptr,
                                               double* scale2 = nullptr);

// chi0/chi1 and derivatives, third order for chi0 and second for chi1, at a
// target point s: analytic values where the flow provides them, a 4th-order
// central stencil with h = 1e-3 * s for the top derivative of each. The seed
// state must sit at or below s * (1 - 2e-3).
struct ChiJet {
  double chi0 = 0, dchi0 = 0, d2chi0 = 0, d3chi0 = 0;
  double chi1 = 0, dchi1 = 0, d2chi1 = 0;
};
ChiJet chi_jet(const EnsembleSpec& spec, PrimaryState seed, double s,
               double tol = 1e-11);

// Printed truncations of the small-s expansions for M = 2 with generic nu:
// chi0 carries branch terms s^{nu_i+1}(1 + c_i s) and the cross term at
// s^{nu1+nu2+2}; chi1 the (n-1)-weighted branches. order_cap drops terms
// with larger exponents.
std::pair<SeriesExpansion, SeriesExpansion> chi_series(
    const EnsembleSpec& spec,
    double order_cap = std::numeric_limits<double>::infinity());

// Expansion of the gap probability E(s) = exp(int_0^s chi0 dt / t) to the
// same truncation order; the s^{nu1+nu2+2} cross term cancels and the first
// surviving cross term sits at s^{nu1+nu2+3}.
SeriesExpansion gap_series(const EnsembleSpec& spec);

}  // namespace ginprod
