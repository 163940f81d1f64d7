#pragma once

#include <complex>
#include <span>
#include <vector>

#include "ginprod/types.hpp"

namespace ginprod {

// log Gamma(x) for real x > 0. Arguments within 1e-12 of a pole (nonpositive
// integer) raise a NumericalError naming the pole; other nonpositive reals are
// rejected (use the complex overload or log_abs_gamma).
double ln_gamma(double x);

// Principal branch of log Gamma(z); accurate to ~1e-13 relative for |z| <= 1e3.
std::complex<double> ln_gamma(std::complex<double> z);

// log |Gamma(x)| with the sign of Gamma(x); valid for any non-pole real x.
struct SignedLog {
  double log_abs;
  int sign;  // -1, 0, +1
};
SignedLog log_abs_gamma(double x);

// Rising factorial (a)_k as a plain product; exact termination at zero factors.
double pochhammer(double a, int k);
SignedLog log_pochhammer(double a, int k);

// Generalized hypergeometric series pFq(a; b; z) with compensated summation.
// Terminates exactly when some a_i is a nonpositive integer; otherwise stops
// once two consecutive terms fall below rel_tol * |sum|. A nonpositive-integer
// b_j reached before termination raises a NumericalError.
double hyp_pFq(std::span<const double> a, std::span<const double> b, double z,
               const SeriesTruncation& trunc = {});

enum class QRoute { Auto, Series, Contour };
enum class BiorthFamily { P, Q };

// P_k(x): the degree-k polynomial member of the biorthogonal pair.
double eval_P(const EnsembleSpec& spec, int k, double x);

// delta^j P_k(x) for j = 0..j_max, delta = x d/dx, as scaled values.
std::vector<Scaled> eval_P_deltas(const EnsembleSpec& spec, int k, int j_max,
                                  double x);

// Q_k(x) by hypergeometric series: M = 1 uses the Laguerre closed form (any
// nu), M = 2 uses the two-branch series (requires nu_generic). k = -1 yields 0.
// Carries the spec's lambda factor.
double eval_Q_series(const EnsembleSpec& spec, int k, double x,
                     const SeriesTruncation& trunc = {});

// Q_k(x) by trapezoid quadrature of the Mellin-Barnes integral along
// Re t = abscissa; valid for any M and nu, x > 0. Carries lambda.
double eval_Q_contour(const EnsembleSpec& spec, int k, double x,
                      const ContourSpec& contour = {});

// delta^j Q_k(x) for j = 0..j_max. Route Auto picks: M = 1 closed form;
// M = 2 series when nu is generic and the series is well conditioned;
// contour otherwise.
std::vector<Scaled> eval_Q_deltas(const EnsembleSpec& spec, int k, int j_max,
                                  double x, QRoute route = QRoute::Auto,
                                  const ContourSpec& contour = {});

// delta^j applied to P_k or Q_k, as a plain double.
double delta_pow(BiorthFamily family, const EnsembleSpec& spec, int k, int j,
                 double x, QRoute route = QRoute::Auto);

}  // namespace ginprod
