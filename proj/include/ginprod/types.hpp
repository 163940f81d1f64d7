#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace ginprod {

// Configuration problems (bad parameters, unsupported combinations).
struct ConfigError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

// Numerical breakdown (non-convergence, precision loss, conservation drift).
struct NumericalError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Truncation policy for infinite series.
struct SeriesTruncation {
  int max_terms = 500;
  double rel_tol = 1e-16;
  void validate() const;
};

// Vertical-line contour discretization for Mellin-Barnes integrals.
// Zero-valued fields select automatic policies.
struct ContourSpec {
  double abscissa = 0.5;   // Re t of the line; must stay > 0
  double half_height = 0;  // Im t range [-H, H]; 0 => extend until integrand decays
  int node_count = 0;      // trapezoid nodes on [0, H]; 0 => double until converged
  void validate() const;
};

// Product of M independent rectangular complex Ginibre factors. nu holds the
// M+1 offsets (nu_0, ..., nu_M) with nu_0 = 0; n is the matrix size parameter;
// lambda in [0, 1] thins the point process.
struct EnsembleSpec {
  int M = 1;
  int n = 1;
  std::vector<double> nu = {0.0, 0.0};
  double lambda = 1.0;

  static EnsembleSpec make(int M, int n, const std::vector<double>& nu_tail,
                           double lambda = 1.0);
  void validate() const;

  double nu_max() const;
  double nu_min_tail() const;  // min over nu_1..nu_M
  // True when no nu_i (i >= 1) and no difference nu_i - nu_j sits within
  // `tol` of an integer; the M = 2 series evaluation requires this.
  bool nu_generic(double tol = 1e-6) const;
  bool nu_all_integer(double tol = 1e-12) const;
};

// value * exp(log_scale). Keeps products of Gamma-sized prefactors
// representable for n in the hundreds.
struct Scaled {
  double log_scale = 0;
  double value = 0;

  double to_double() const { return value == 0 ? 0.0 : value * std::exp(log_scale); }
  // Pulls the magnitude of `value` into log_scale.
  Scaled normalized() const;
};

inline Scaled operator*(const Scaled& a, const Scaled& b) {
  return {a.log_scale + b.log_scale, a.value * b.value};
}

// Sum of scaled summands c[i] * terms[i], combined under a common scale.
Scaled scaled_linear_combination(const std::vector<Scaled>& terms,
                                 const std::vector<double>& coeffs);

}  // namespace ginprod
