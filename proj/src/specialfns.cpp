#include "ginprod/specialfns.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace ginprod {

namespace {

constexpr double kPi = 3.14159265358979323846;
constexpr double kLog2Pi = 1.8378770664093454836;  // log(2*pi)

double dist_to_integer(double x) { return std::abs(x - std::round(x)); }

void check_gamma_pole(double re, double im) {
  if (im == 0 && re <= 0.5 && dist_to_integer(re) < 1e-12)
    throw NumericalError("ln_gamma: argument " + std::to_string(re) +
                         " lies on a pole (nonpositive integer)");
}

// Lanczos approximation, g = 7, 9 coefficients; relative accuracy ~1e-14 on
// Gamma in the half-plane Re z >= 0.5.
const double kLanczos[9] = {
    0.99999999999980993,  676.5203681218851,     -1259.1392167224028,
    771.32342877765313,   -176.61502916214059,   12.507343278686905,
    -0.13857109526572012, 9.9843695780195716e-6, 1.5056327351493116e-7};

std::complex<double> log_gamma_lanczos(std::complex<double> z) {
  std::complex<double> a(kLanczos[0], 0);
  for (int i = 1; i < 9; ++i) a += kLanczos[i] / (z - 1.0 + double(i));
  std::complex<double> t = z + 6.5;
  return 0.5 * kLog2Pi + (z - 0.5) * std::log(t) - t + std::log(a);
}

// Branch-tracked log(sin(pi z)); cut approached from above on the real axis.
std::complex<double> log_sin_pi(std::complex<double> z) {
  if (z.imag() < 0) return std::conj(log_sin_pi(std::conj(z)));
  std::complex<double> iw(-kPi * z.imag(), kPi * z.real());  // i*pi*z
  // sin(pi z) = (i/2) e^{-i pi z} (1 - e^{2 i pi z}), |e^{2 i pi z}| <= 1
  std::complex<double> log_i_half(-std::log(2.0), kPi / 2);
  return log_i_half - iw + std::log(1.0 - std::exp(2.0 * iw));
}

}  // namespace

double ln_gamma(double x) {
  check_gamma_pole(x, 0.0);
  if (x <= 0)
    throw ConfigError(
        "ln_gamma(real): nonpositive argument; use the complex overload or "
        "log_abs_gamma");
  return std::lgamma(x);
}

std::complex<double> ln_gamma(std::complex<double> z) {
  check_gamma_pole(z.real(), z.imag());
  if (z.imag() == 0 && z.real() > 0) return {std::lgamma(z.real()), 0.0};
  if (z.real() >= 0.5) return log_gamma_lanczos(z);
  // reflection: log Gamma(z) = log pi - log sin(pi z) - log Gamma(1 - z)
  return std::log(kPi) - log_sin_pi(z) - log_gamma_lanczos(1.0 - z);
}

SignedLog log_abs_gamma(double x) {
  check_gamma_pole(x, 0.0);
  if (x > 0) return {std::lgamma(x), 1};
  long long m = static_cast<long long>(std::floor(-x));
  int sign = (m % 2 == 0) ? -1 : 1;
  return {std::lgamma(x), sign};
}

double pochhammer(double a, int k) {
  if (k < 0) throw ConfigError("pochhammer: k must be >= 0");
  double p = 1.0;
  for (int i = 0; i < k; ++i) p *= a + i;
  return p;
}

SignedLog log_pochhammer(double a, int k) {
  if (k < 0) throw ConfigError("log_pochhammer: k must be >= 0");
  double lg = 0;
  int sign = 1;
  for (int i = 0; i < k; ++i) {
    double f = a + i;
    if (f == 0) return {-std::numeric_limits<double>::infinity(), 0};
    if (f < 0) sign = -sign;
    lg += std::log(std::abs(f));
  }
  return {lg, sign};
}

namespace {

struct SeriesSums {
  std::vector<double> sums;       // per delta order j
  std::vector<double> max_terms;  // per j, max |weighted term|
  int terms_used = 0;
  bool hit_cap = false;
};

// Sums S_j = sum_i c_i x^i (offset + i)^j for j = 0..j_max where c_0 = 1 and
// c_{i+1} = c_i * ratio(i). Kahan-compensated. Stops on an exactly zero term
// (terminating series) or once the weighted term stays below
// rel_tol * scale for two consecutive i.
template <class Ratio>
SeriesSums sum_series_deltas(Ratio&& ratio, double x, double offset, int j_max,
                             const SeriesTruncation& tr) {
  tr.validate();
  SeriesSums out;
  out.sums.assign(j_max + 1, 0.0);
  out.max_terms.assign(j_max + 1, 0.0);
  std::vector<double> comp(j_max + 1, 0.0);
  double term = 1.0;
  int small_streak = 0;
  for (int i = 0;; ++i) {
    double w = 1.0;
    double top_weight = 1.0;
    for (int j = 0; j <= j_max; ++j) {
      double t = term * w;
      out.max_terms[j] = std::max(out.max_terms[j], std::abs(t));
      double y = t - comp[j];
      double s = out.sums[j] + y;
      comp[j] = (s - out.sums[j]) - y;
      out.sums[j] = s;
      if (j < j_max) w *= offset + i;
      top_weight = std::max(top_weight, std::abs(w));
    }
    out.terms_used = i + 1;
    double scale = 0;
    for (int j = 0; j <= j_max; ++j) scale = std::max(scale, std::abs(out.sums[j]));
    if (std::abs(term) * top_weight <= tr.rel_tol * scale) {
      if (++small_streak >= 2) break;
    } else {
      small_streak = 0;
    }
    if (i + 1 >= tr.max_terms) {
      out.hit_cap = true;
      break;
    }
    term *= ratio(i) * x;
    if (term == 0) break;
    if (!std::isfinite(term))
      throw NumericalError("series evaluation overflowed before convergence");
  }
  return out;
}

void flag_or_throw(bool loss, bool* loss_flag, const char* what) {
  if (loss_flag) {
    *loss_flag = *loss_flag || loss;
  } else if (loss) {
    throw NumericalError(std::string(what) +
                         ": catastrophic cancellation, argument outside the "
                         "well-conditioned domain");
  }
}

bool series_loss(const SeriesSums& s, int j_max) {
  // Reference is the largest of the delta-order sums: at a simple root of
  // S_0 the higher orders still carry the series' natural scale, and that
  // is the scale downstream combinations are conditioned on.
  double scale = 0, worst = 0;
  for (int j = 0; j <= j_max; ++j) {
    scale = std::max(scale, std::abs(s.sums[j]));
    worst = std::max(worst, s.max_terms[j]);
  }
  return worst * 1e-16 > 1e-11 * scale;
}

}  // namespace

double hyp_pFq(std::span<const double> a, std::span<const double> b, double z,
               const SeriesTruncation& trunc) {
  auto ratio = [&](int i) -> double {
    double num = 1.0;
    for (double av : a) num *= av + i;
    if (num == 0) return 0.0;
    double den = i + 1.0;
    for (double bv : b) {
      double f = bv + i;
      if (std::abs(f) < 1e-300)
        throw NumericalError(
            "hyp_pFq: lower parameter hits a nonpositive integer before the "
            "series terminates (pole)");
      den *= f;
    }
    return num / den;
  };
  SeriesSums s = sum_series_deltas(ratio, z, 0.0, 0, trunc);
  if (s.hit_cap)
    throw NumericalError("hyp_pFq: series failed to converge within max_terms");
  return s.sums[0];
}

// ---------------------------------------------------------------------------
// P_k and its delta powers

namespace {

std::vector<Scaled> eval_P_deltas_impl(const EnsembleSpec& spec, int k, int j_max,
                                       double x, bool* loss_flag) {
  spec.validate();
  if (k < 0) throw ConfigError("eval_P: k must be >= 0");
  double log_pref = 0;
  for (int m = 1; m <= spec.M; ++m) log_pref += log_pochhammer(spec.nu[m] + 1, k).log_abs;
  int sign = (k % 2 == 0) ? 1 : -1;
  auto ratio = [&](int i) -> double {
    double den = i + 1.0;
    for (int m = 1; m <= spec.M; ++m) den *= 1.0 + spec.nu[m] + i;
    return (i - double(k)) / den;
  };
  SeriesTruncation tr;
  tr.max_terms = k + 2;
  SeriesSums s = sum_series_deltas(ratio, x, 0.0, j_max, tr);
  flag_or_throw(series_loss(s, j_max), loss_flag, "eval_P");
  std::vector<Scaled> out(j_max + 1);
  for (int j = 0; j <= j_max; ++j)
    out[j] = Scaled{log_pref, sign * s.sums[j]}.normalized();
  return out;
}

}  // namespace

std::vector<Scaled> eval_P_deltas(const EnsembleSpec& spec, int k, int j_max,
                                  double x) {
  return eval_P_deltas_impl(spec, k, j_max, x, nullptr);
}

double eval_P(const EnsembleSpec& spec, int k, double x) {
  return eval_P_deltas(spec, k, 0, x)[0].to_double();
}

// ---------------------------------------------------------------------------
// Q_k: Laguerre closed form (M = 1)

namespace {

// Coefficient vectors of the polynomials A_j, B_j with
// delta^j [x^nu e^{-x} L_k] = x^nu e^{-x} (A_j L_k + B_j L_{k-1}).
// One delta application maps
//   A -> x A' + (nu - x + k) A + k B,   B -> x B' - (k + nu) A - k B.
struct LagOperator {
  std::vector<double> A, B;
};

LagOperator lag_delta_step(const LagOperator& p, double nu, int k) {
  size_t d = p.A.size();
  LagOperator q;
  q.A.assign(d + 1, 0.0);
  q.B.assign(d + 1, 0.0);
  for (size_t i = 0; i < d; ++i) {
    q.A[i] += i * p.A[i] + (nu + k) * p.A[i] + double(k) * p.B[i];
    q.A[i + 1] -= p.A[i];
    q.B[i] += i * p.B[i] - (k + nu) * p.A[i] - double(k) * p.B[i];
  }
  return q;
}

double horner(const std::vector<double>& c, double x) {
  double v = 0;
  for (size_t i = c.size(); i-- > 0;) v = v * x + c[i];
  return v;
}

std::vector<Scaled> q_laguerre_deltas(const EnsembleSpec& spec, int k, int j_max,
                                      double x) {
  const double nu = spec.nu[1];
  if (x < 0) throw ConfigError("eval_Q_series: requires x >= 0");
  // generalized Laguerre values by upward recurrence
  double Lm1 = 0.0, L = 1.0;  // L_{-1}, L_0
  for (int m = 0; m < k; ++m) {
    double Lp = ((2 * m + nu + 1 - x) * L - (m + nu) * Lm1) / (m + 1);
    Lm1 = L;
    L = Lp;
  }
  double log_scale = std::log(spec.lambda) - x - std::lgamma(k + nu + 1);
  if (nu > 0) {
    if (x == 0) return std::vector<Scaled>(j_max + 1, Scaled{0.0, 0.0});
    log_scale += nu * std::log(x);
  }
  int sign = (k % 2 == 0) ? 1 : -1;
  std::vector<Scaled> out(j_max + 1);
  LagOperator op{{1.0}, {0.0}};
  for (int j = 0;; ++j) {
    double val = horner(op.A, x) * L + horner(op.B, x) * Lm1;
    if (!std::isfinite(val))
      throw NumericalError("eval_Q_series: Laguerre recurrence overflowed");
    out[j] = Scaled{log_scale, sign * val}.normalized();
    if (j == j_max) break;
    op = lag_delta_step(op, nu, k);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Q_k: two-branch hypergeometric series (M = 2, generic nu)

std::vector<Scaled> q_two_branch_deltas(const EnsembleSpec& spec, int k, int j_max,
                                        double x, bool* loss_flag,
                                        const SeriesTruncation& tr) {
  if (x < 0) throw ConfigError("eval_Q_series: requires x >= 0");
  if (!spec.nu_generic())
    throw ConfigError(
        "eval_Q_series: M = 2 requires generic nu (each nu_i and nu_1 - nu_2 "
        "at least 1e-6 away from integers); use the contour route");
  std::vector<std::vector<Scaled>> branch(2);
  for (int b = 0; b < 2; ++b) {
    double va = spec.nu[1 + b], vo = spec.nu[2 - b];
    if (x == 0) {
      branch[b].assign(j_max + 1, Scaled{0.0, 0.0});
      continue;
    }
    SignedLog g = log_abs_gamma(vo - va);
    double log_pref = std::log(spec.lambda) + va * std::log(x) + g.log_abs -
                      std::lgamma(k + 1.0) - std::lgamma(va + 1) -
                      std::lgamma(vo + k + 1);
    int sign = ((k % 2 == 0) ? 1 : -1) * g.sign;
    auto ratio = [&](int i) -> double {
      return (va + k + 1 + i) / ((i + 1.0) * (1 + va + i) * (1 + va - vo + i));
    };
    SeriesSums s = sum_series_deltas(ratio, x, va, j_max, tr);
    if (s.hit_cap)
      throw NumericalError("eval_Q_series: branch series failed to converge");
    flag_or_throw(series_loss(s, j_max), loss_flag, "eval_Q_series");
    branch[b].resize(j_max + 1);
    for (int j = 0; j <= j_max; ++j)
      branch[b][j] = Scaled{log_pref, sign * s.sums[j]}.normalized();
  }
  std::vector<Scaled> out(j_max + 1);
  for (int j = 0; j <= j_max; ++j)
    out[j] = scaled_linear_combination({branch[0][j], branch[1][j]}, {1.0, 1.0});
  // The branches grow like e^{2 sqrt(x)} while their sum decays like
  // e^{-2 sqrt(x)}; flag when that cancellation eats past the 1e-11 budget.
  auto log_mag = [](const Scaled& s) {
    return s.value == 0 ? -std::numeric_limits<double>::infinity()
                        : s.log_scale + std::log(std::abs(s.value));
  };
  double lb = -std::numeric_limits<double>::infinity();
  double lc = lb;
  for (int j = 0; j <= j_max; ++j) {
    lb = std::max({lb, log_mag(branch[0][j]), log_mag(branch[1][j])});
    lc = std::max(lc, log_mag(out[j]));
  }
  bool cancel_loss = lb + std::log(1e-16) > std::log(1e-11) + lc;
  flag_or_throw(cancel_loss, loss_flag, "eval_Q_series");
  return out;
}

// ---------------------------------------------------------------------------
// Q_k: Mellin-Barnes contour route (any M)

struct ContourAccum {
  double wref = -std::numeric_limits<double>::infinity();
  std::vector<double> acc;   // per j, sum of Re[g (-t)^j] * exp(w - wref)
  std::vector<double> peak;  // per j, max |g (-t)^j| / exp(wref) seen

  explicit ContourAccum(int j_max)
      : acc(j_max + 1, 0.0), peak(j_max + 1, 0.0) {}
  void add(std::complex<double> logg, std::complex<double> t, double weight) {
    double w = logg.real();
    if (w > wref) {
      double r = std::isfinite(wref) ? std::exp(wref - w) : 0.0;
      for (double& a : acc) a *= r;
      for (double& p : peak) p *= r;
      wref = w;
    }
    std::complex<double> b = std::exp(logg - wref);
    std::complex<double> p(1.0, 0.0);
    for (size_t j = 0; j < acc.size(); ++j) {
      double term = (b * p).real();
      acc[j] += weight * term;
      peak[j] = std::max(peak[j], std::abs(b * p));
      p *= -t;
    }
  }
};

std::vector<Scaled> q_contour_deltas(const EnsembleSpec& spec, int k, int j_max,
                                     double x, ContourSpec cs) {
  cs.validate();
  if (!(x > 0)) throw ConfigError("eval_Q_contour: requires x > 0");
  const double c = cs.abscissa;
  if (c <= k && dist_to_integer(c) < 1e-9)
    throw ConfigError("eval_Q_contour: abscissa collides with a Gamma pole; "
                      "choose a non-integer abscissa");
  const double lx = std::log(x);
  auto log_integrand = [&](double tau) -> std::complex<double> {
    std::complex<double> t(c, tau);
    std::complex<double> w = -t * lx;
    for (double nuj : spec.nu) w += ln_gamma(t + nuj);
    w -= ln_gamma(t - double(k));
    return w;
  };

  // establish the half height: integrand decayed to ~1e-17 of its maximum,
  // with margin for the |t|^j delta factors
  double wmax = log_integrand(0.0).real();
  double H = cs.half_height;
  if (H == 0) {
    H = 8.0;
    for (;;) {
      double wh = log_integrand(H).real() + j_max * std::log(1.0 + std::hypot(c, H));
      double wlow = log_integrand(H / 2).real();
      wmax = std::max(wmax, wlow);
      if (wh < wmax - 40.0) break;
      H *= 1.5;
      if (H > 1e4)
        throw NumericalError("eval_Q_contour: integrand failed to decay");
    }
  }

  auto integrate = [&](int nodes, ContourAccum& a) {
    double h = H / nodes;
    a = ContourAccum(j_max);
    a.add(log_integrand(0.0), {c, 0.0}, 0.5 * h);
    for (int i = 1; i < nodes; ++i)
      a.add(log_integrand(i * h), {c, i * h}, h);
    a.add(log_integrand(H), {c, H}, 0.5 * h);
  };

  int nodes = cs.node_count ? cs.node_count : 128;
  ContourAccum cur(j_max);
  integrate(nodes, cur);
  if (cs.node_count == 0) {
    for (;;) {
      ContourAccum next(j_max);
      integrate(nodes * 2, next);
      double scale = 0;
      for (int j = 0; j <= j_max; ++j)
        scale = std::max(scale, std::abs(next.acc[j]));
      bool done = true;
      for (int j = 0; j <= j_max; ++j) {
        double a = cur.acc[j] * std::exp(cur.wref - next.wref);
        // Stop at the trapezoid rounding floor: N adds of size <= h * peak
        // bound the accumulated noise by eps * H * peak.
        double floor_j = 1e-15 * H * next.peak[j];
        if (std::abs(a - next.acc[j]) >
            std::max(1e-11 * std::max(scale, 1e-30), floor_j))
          done = false;
      }
      nodes *= 2;
      cur = next;
      if (done) break;
      if (nodes >= (1 << 16))
        throw NumericalError("eval_Q_contour: trapezoid sum did not converge");
    }
  }
  // endpoint magnitude check relative to the max along the line
  double wend = log_integrand(H).real();
  if (wend > cur.wref + std::log(1e-14))
    throw NumericalError("eval_Q_contour: half_height too small, integrand not "
                         "negligible at the endpoints");

  double log_pref = std::log(spec.lambda) - std::log(kPi);
  for (double nuj : spec.nu) log_pref -= std::lgamma(k + nuj + 1);
  std::vector<Scaled> out(j_max + 1);
  for (int j = 0; j <= j_max; ++j)
    out[j] = Scaled{cur.wref + log_pref, cur.acc[j]}.normalized();
  return out;
}

}  // namespace

std::vector<Scaled> eval_Q_deltas(const EnsembleSpec& spec, int k, int j_max,
                                  double x, QRoute route,
                                  const ContourSpec& contour) {
  spec.validate();
  if (k < -1) throw ConfigError("eval_Q: k must be >= -1");
  if (k == -1 || spec.lambda == 0)
    return std::vector<Scaled>(j_max + 1, Scaled{0.0, 0.0});

  auto auto_contour = [&]() {
    ContourSpec cs = contour;
    // The integrand carries M net Gamma factors, so its saddle sits near
    // t = x^{1/M}; anchoring the line there keeps the peak magnitude on the
    // scale of the result and avoids a large oscillatory noise floor.
    if (cs.half_height == 0 && cs.node_count == 0 && x > 1 && spec.M >= 2) {
      double c = std::floor(std::pow(x, 1.0 / spec.M)) + 0.5;
      cs.abscissa = std::max(cs.abscissa, c);
    }
    return cs;
  };

  switch (route) {
    case QRoute::Series:
      if (spec.M == 1) return q_laguerre_deltas(spec, k, j_max, x);
      if (spec.M == 2) return q_two_branch_deltas(spec, k, j_max, x, nullptr, {});
      throw ConfigError("eval_Q_series: series route defined for M in {1, 2}");
    case QRoute::Contour:
      return q_contour_deltas(spec, k, j_max, x, contour);
    case QRoute::Auto:
    default:
      if (spec.M == 1) return q_laguerre_deltas(spec, k, j_max, x);
      if (spec.M == 2 && spec.nu_generic()) {
        if (x == 0) return q_two_branch_deltas(spec, k, j_max, x, nullptr, {});
        bool loss = false;
        auto vals = q_two_branch_deltas(spec, k, j_max, x, &loss, {});
        if (!loss) return vals;
      }
      if (x == 0)
        throw ConfigError("eval_Q: x = 0 requires the series route");
      return q_contour_deltas(spec, k, j_max, x, auto_contour());
  }
}

double eval_Q_series(const EnsembleSpec& spec, int k, double x,
                     const SeriesTruncation& trunc) {
  spec.validate();
  if (k < -1) throw ConfigError("eval_Q: k must be >= -1");
  if (k == -1 || spec.lambda == 0) return 0.0;
  if (spec.M == 1) return q_laguerre_deltas(spec, k, 0, x)[0].to_double();
  if (spec.M == 2)
    return q_two_branch_deltas(spec, k, 0, x, nullptr, trunc)[0].to_double();
  throw ConfigError("eval_Q_series: series route defined for M in {1, 2}");
}

double eval_Q_contour(const EnsembleSpec& spec, int k, double x,
                      const ContourSpec& contour) {
  spec.validate();
  if (k < -1) throw ConfigError("eval_Q: k must be >= -1");
  if (k == -1 || spec.lambda == 0) return 0.0;
  return q_contour_deltas(spec, k, 0, x, contour)[0].to_double();
}

double delta_pow(BiorthFamily family, const EnsembleSpec& spec, int k, int j,
                 double x, QRoute route) {
  if (j < 0) throw ConfigError("delta_pow: j must be >= 0");
  if (family == BiorthFamily::P) return eval_P_deltas(spec, k, j, x)[j].to_double();
  return eval_Q_deltas(spec, k, j, x, route)[j].to_double();
}

}  // namespace ginprod
