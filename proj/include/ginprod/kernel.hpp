#pragma once

#include <span>
#include <vector>

#include "ginprod/specialfns.hpp"
#include "ginprod/types.hpp"

namespace ginprod {

enum class KernelForm { SumForm, IntegrableForm };

// e_k(values), e_0 = 1.
double elementary_symmetric(int k, std::span<const double> values);

// alpha_i = (-1)^i e_{M-i}(nu_1..nu_M), i = 0..M. Input is the tail
// nu_1..nu_M (without nu_0).
std::vector<double> alpha_coeffs(std::span<const double> nu_tail);

// Coefficient a_{k,m} of the x-multiplication recurrence
//   x P_m = P_{m+1} + sum_{k=0}^M a_{k,m} P_{m-k},
//   x Q_m = Q_{m-1} + sum_{k=0}^M a_{k,m+k} Q_{m+k}.
// Zero for k > m.
double recurrence_coeff_a(const EnsembleSpec& spec, int k, int m);

// Everything needed about one abscissa to form kernel values against any
// other abscissa; lets operator assembly do O(N) special-function work.
struct KernelNodeData {
  double x = 0;
  std::vector<Scaled> p_deltas;  // delta^j P_n, j = 0..M+1
  std::vector<Scaled> psi;       // psi_j, j = 0..M
  double diag = 0;               // K(x, x) at lambda = 1
};

// Correlation kernel of the squared singular values, size-n sector.
// Both forms include the spec's lambda exactly once; the Fredholm layer
// builds operators at lambda = 1 and applies lambda in the determinant.
class KernelEvaluator {
 public:
  explicit KernelEvaluator(const EnsembleSpec& spec, QRoute route = QRoute::Auto,
                           const ContourSpec& contour = {});

  const EnsembleSpec& spec() const { return spec_; }

  // phi_j(x) = (-1)^{j+1} delta^j P_n(x), j = 0..M, at lambda = 1.
  std::vector<Scaled> phi_all(double x) const;
  // psi_j(y) = -delta_{j,0} y Q_n(y) + sum_{i=0}^{M-j} alpha_{i+j} delta^i Q_n(y).
  std::vector<Scaled> psi_all(double y) const;

  KernelNodeData node_data(double x) const;
  // K(x, y) at lambda = 1 from precomputed node data; switches to the
  // averaged diagonal inside the |x-y| guard band.
  double pair_eval(const KernelNodeData& a, const KernelNodeData& b) const;

  double eval(KernelForm form, double x, double y) const;
  double diagonal(double x) const;

 private:
  double integrable(double x, double y) const;
  double sum_form(double x, double y) const;
  std::vector<Scaled> psi_from_deltas(const std::vector<Scaled>& qd, double y) const;

  EnsembleSpec spec_;
  EnsembleSpec unit_;  // spec with lambda = 1
  QRoute route_;
  ContourSpec contour_;
  std::vector<double> alpha_;
};

double phi(const EnsembleSpec& spec, int j, double x);
double psi(const EnsembleSpec& spec, int j, double y);
double kernel_eval(const EnsembleSpec& spec, KernelForm form, double x, double y);
double kernel_diagonal(const EnsembleSpec& spec, double x);

// (1/n) K_n(x/n, y/n); converges as n grows with (x, y) fixed.
double hard_edge_scaled(const EnsembleSpec& spec, double x, double y);

}  // namespace ginprod
