#pragma once

#include <Eigen/Dense>
#include <optional>
#include <span>
#include <vector>

#include "ginprod/kernel.hpp"
#include "ginprod/quadrature.hpp"
#include "ginprod/types.hpp"

namespace ginprod {

// Disjoint union of open intervals 0 <= a1 < a2 < ... < a_{2m}.
struct IntervalUnion {
  std::vector<double> endpoints;

  static IntervalUnion single(double a, double b) { return {{a, b}}; }
  int interval_count() const { return static_cast<int>(endpoints.size()) / 2; }
  void validate() const;
};

// Nystrom discretization of the integral operator with kernel
// K(x, y) restricted to J. The matrix holds sqrt(w_i w_j) K(x_i, x_j)
// at lambda = 1; the coupling enters in determinant/resolvent calls.
struct NystromOperator {
  EnsembleSpec spec;
  IntervalUnion domain;
  QRoute route = QRoute::Auto;
  std::vector<double> nodes;
  std::vector<double> weights;
  Eigen::MatrixXd matrix;
};

NystromOperator build_operator(const EnsembleSpec& spec, const IntervalUnion& J,
                               int order, QRoute route = QRoute::Auto);

// log det(I - lambda * matrix) and its sign via LU.
struct LogDet {
  double log_abs;
  int sign;
  double value() const { return sign * std::exp(log_abs); }
};
LogDet log_fredholm_det(const NystromOperator& op, double lambda);

// det(I - lambda K_J); lambda defaults to the operator's spec value.
double fredholm_det(const NystromOperator& op,
                    std::optional<double> lambda_override = std::nullopt);

// E(lambda; J) with automatic order doubling until successive determinants
// agree to 1e-9. est_error, when given, receives the last doubling delta.
double gap_probability(const EnsembleSpec& spec, const IntervalUnion& J,
                       double* est_error = nullptr, QRoute route = QRoute::Auto);
double gap_probability(const EnsembleSpec& spec, double s,
                       double* est_error = nullptr, QRoute route = QRoute::Auto);

// Solves (I - lambda K)g = f on the nodes; transpose=true uses the
// transposed kernel. Input/output are plain node values (not sqrt(w)-scaled).
std::vector<double> resolvent_apply(const NystromOperator& op, double lambda,
                                    std::span<const double> f,
                                    bool transpose = false);

// Nystrom extension of a resolvent solution to an arbitrary point:
// g(t) = f(t) + lambda * sum_j w_j K(t, x_j) g(x_j)   (or K(x_j, t) transposed).
double resolvent_extend(const NystromOperator& op, double lambda,
                        std::span<const double> g_nodes, double f_at_t, double t,
                        bool transpose = false);

// Central difference of log E(lambda; (0, s)) with step h.
double log_det_derivative(const EnsembleSpec& spec, double s, double h);

}  // namespace ginprod
