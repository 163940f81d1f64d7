#pragma once

#include <Eigen/Dense>
#include <span>
#include <vector>

#include "ginprod/types.hpp"

namespace ginprod {

// State of the coupled flow for J = (0, s) in the real parametrization
// x_j = i u_j, y_j = i v_j. All vectors have size M+1. accumulated_log_tau
// carries log E(lambda; (0, s)) alongside the flow.
struct PrimaryState {
  double s = 0;
  std::vector<double> u, v, xi, eta;
  double accumulated_log_tau = 0;
};

// Matrices of the rank-one isomonodromic form for J = (0, s):
//   s A2' = [C + sE, A2],  C' = [E, A2],  A2 = -u (x) v.
struct SchlesingerTriple {
  Eigen::MatrixXd E, C, A2;
};

// H(s) = s d/ds log det(1 - lambda K_(0,s)); equals n eta_0 + eta_1 on
// trajectories.
double hamiltonian(const PrimaryState& st, const EnsembleSpec& spec);

// Derivatives of every state field with respect to s. The returned struct
// holds du/ds etc.; its s field is set to 1 and accumulated_log_tau to H/s.
PrimaryState rhs(const PrimaryState& st, const EnsembleSpec& spec);

// chi_0 = n eta_0 + eta_1, chi_1 = n eta_1 + eta_2 (chi_1 defined for M >= 2),
// with first and second s-derivatives taken analytically along the flow.
struct ChiDerivatives {
  double chi0 = 0, dchi0 = 0, d2chi0 = 0;
  double chi1 = 0, dchi1 = 0, d2chi1 = 0;
};
ChiDerivatives chi_derivatives(const PrimaryState& st, const EnsembleSpec& spec);

// Seeds the state at small s0 from the closed-form small-s expansions
// (M = 1 or M = 2 with generic nu, nu_min > 0). u keeps its exact lambda^0
// polynomial part; v is exact through first order in lambda; eta, xi and the
// remaining lambda corrections use the leading expansion terms.
PrimaryState initial_state_series(const EnsembleSpec& spec, double s0);

// Seeds the state at s0 by solving the Nystrom-discretized resolvent
// equations on (0, s0); valid for every nu >= 0 and exact in lambda.
PrimaryState initial_state_numeric(const EnsembleSpec& spec, double s0,
                                   int order = 64);

// Adaptive Dormand-Prince integration to s_target with per-step relative
// error tol. Conserved quantities are monitored every accepted step; drift
// beyond 100 * tol of their seeded values raises NumericalError.
PrimaryState integrate(const EnsembleSpec& spec, PrimaryState st,
                       double s_target, double tol = 1e-10,
                       double* max_drift = nullptr);

// Integrates through an increasing list of sample points and returns the
// state at each.
std::vector<PrimaryState> sample_trajectory(const EnsembleSpec& spec,
                                            PrimaryState st,
                                            std::span<const double> s_samples,
                                            double tol = 1e-10);

// E(lambda; (0, s)) through the flow: numeric seeding at min(0.1, s/2)
// followed by integration of H/s.
double gap_via_dynamics(const EnsembleSpec& spec, double s, double tol = 1e-10,
                        double* max_drift = nullptr);

// Residuals of the motion's first integrals, all zero on exact trajectories:
//   [0] orthogonality sum_j u_j v_j
//   [1] H - (n eta_0 + eta_1)
//   then, when nu_min > 0, the characteristic-polynomial coefficients of
//   B = A2 - C minus those of the fixed spectrum (0, nu_1, ..., nu_M);
//   M = 1 appends xi_1 - n eta_0 - eta_1 + nu;
//   M = 2 appends the three xi-eta closure relations.
std::vector<double> conserved_quantities(const PrimaryState& st,
                                         const EnsembleSpec& spec);

SchlesingerTriple schlesinger_matrices(const PrimaryState& st,
                                       const EnsembleSpec& spec);

// Max residual of s A2' = [C + sE, A2] and C' = [E, A2] over the interior of
// a uniformly spaced trajectory, derivatives by 4th-order central differences.
double schlesinger_residual(std::span<const PrimaryState> trajectory,
                            const EnsembleSpec& spec);

// M = 1 closure relations: v from u through the weight function, the xi_0
// expression in eta, and the second-order eta equations (all analytic).
std::vector<double> m1_reduction_checks(const PrimaryState& st,
                                        const EnsembleSpec& spec);

}  // namespace ginprod
