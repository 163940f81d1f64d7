#include "ginprod/sigma.hpp"

#include <algorithm>
#include <cmath>

#include "ginprod/specialfns.hpp"

namespace ginprod {

namespace {

void require_m2_generic(const EnsembleSpec& spec) {
  spec.validate();
  if (spec.M != 2) throw ConfigError("series available for M = 2 only");
  if (!spec.nu_generic())
    throw ConfigError("series requires generic nu (no integer values or gaps)");
}

void push_sorted(SeriesExpansion& se) {
  std::sort(se.terms.begin(), se.terms.end(),
            [](const SeriesTerm& a, const SeriesTerm& b) {
              return a.exponent < b.exponent;
            });
  for (size_t i = 0; i + 1 < se.terms.size(); ++i)
    if (se.terms[i + 1].exponent - se.terms[i].exponent < 1e-12)
      throw ConfigError("series exponents collide; nu not generic enough");
}

void cap_terms(SeriesExpansion& se, double order_cap) {
  std::erase_if(se.terms,
                [&](const SeriesTerm& t) { return t.exponent > order_cap; });
}

struct M2Coeffs {
  double nu1, nu2, e1, e2;
  double a0, b0;      // leading branch amplitudes of chi0
  double ca, cb;      // relative first corrections of the chi0 branches
  double radius;
};

M2Coeffs m2_coeffs(const EnsembleSpec& spec) {
  M2Coeffs c;
  c.nu1 = spec.nu[1];
  c.nu2 = spec.nu[2];
  c.e1 = c.nu1 + c.nu2;
  c.e2 = c.nu1 * c.nu2;
  int n = spec.n;
  double gn = std::tgamma(static_cast<double>(n));
  c.a0 = -spec.lambda * pochhammer(c.nu1 + 2, n - 1) *
         std::tgamma(c.nu2 - c.nu1) /
         (gn * std::tgamma(c.nu1 + 1) * std::tgamma(c.nu2 + 1));
  c.b0 = -spec.lambda * pochhammer(c.nu2 + 2, n - 1) *
         std::tgamma(c.nu1 - c.nu2) /
         (gn * std::tgamma(c.nu1 + 1) * std::tgamma(c.nu2 + 1));
  c.ca = (2 + 2 * c.nu1 + c.nu1 * c.nu2 + n * (2 * c.nu2 - c.nu1)) /
         ((c.nu1 + 2) * (c.nu2 + 1) * (1 + c.nu1 - c.nu2));
  c.cb = (2 + 2 * c.nu2 + c.nu1 * c.nu2 + n * (2 * c.nu1 - c.nu2)) /
         ((c.nu1 + 1) * (c.nu2 + 2) * (1 + c.nu2 - c.nu1));
  c.radius = std::min(
      1.0, 1.0 / std::max({std::abs(c.ca), std::abs(c.cb), 1e-3}));
  return c;
}

}  // namespace

double SeriesExpansion::evaluate(double s) const {
  double acc = 0;
  for (const SeriesTerm& t : terms)
    acc += t.coefficient * (t.exponent == 0 ? 1.0 : std::pow(s, t.exponent));
  return acc;
}

double sigma_pv_residual(double sigma, double dsigma, double d2sigma, double s,
                         int n, double nu) {
  if (!(s > 0)) throw ConfigError("sigma_pv_residual requires s > 0");
  double lhs = s * d2sigma;
  double rhs = 4 * s * dsigma * dsigma * dsigma -
               4 * sigma * dsigma * dsigma + sigma * sigma +
               2 * (nu - s + 2 * n) * sigma * dsigma +
               ((nu - s) * (nu - s) - 4 * s * n) * dsigma * dsigma;
  return lhs * lhs - rhs;
}

ChiValues chi_from_state(const PrimaryState& st, const EnsembleSpec& spec) {
  spec.validate();
  if (spec.M != 2) throw ConfigError("chi_from_state requires M = 2");
  ChiDerivatives d = chi_derivatives(st, spec);
  return ChiValues{d.chi0, d.chi1, d.dchi0, d.dchi1};
}

std::pair<double, double> chi_system_residuals(double chi0, double dchi0,
                                               double d2chi0, double d3chi0,
                                               double chi1, double dchi1,
                                               double d2chi1, double s, int n,
                                               double nu1, double nu2,
                                               double* scale1, double* scale2) {
  if (!(s > 0)) throw ConfigError("chi_system_residuals requires s > 0");
  double e1 = nu1 + nu2, e2 = nu1 * nu2;

  double t1[] = {
      dchi1 * (3 * dchi1 + 3 * s * d2chi0 + 2 * dchi0 * (3 * chi0 - e1)),
      dchi0 * (s * s * d3chi0 + (1 - e1) * s * d2chi0),
      chi0 * dchi0 * (3 * s * d2chi0 + dchi0 * (3 * chi0 - 2 * e1 - 1) - 1),
      (e2 - s) * dchi0 * dchi0,
      3 * s * dchi0 * dchi0 * dchi0};
  double r1 = 0, s1 = 0;
  for (double t : t1) {
    r1 += t;
    s1 += std::abs(t);
  }

  double d0sq = dchi0 * dchi0;
  double t2[] = {
      (n - 1) * d0sq * (chi0 - s * dchi0),
      d0sq * dchi0 *
          ((1 + e1 + e2 - s - (2 + e1) * chi0 + chi0 * chi0) * chi0 +
           s * s * d2chi0),
      d0sq * d0sq * (3 * s * chi0 - s * (1 + e1)),
      2 * chi1 * (1 - dchi0) * d0sq,
      dchi1 * dchi1 * (dchi1 + 3 * chi0 * dchi0 - e1 * dchi0),
      s * s * dchi0 * d2chi0 * d2chi1,
      dchi1 * (d0sq * (e2 - s + 3 * chi0 * chi0 + 3 * s * dchi0) -
               chi0 * dchi0 * (1 + (1 + 2 * e1) * dchi0) -
               s * s * d2chi0 * d2chi0)};
  double r2 = 0, s2 = 0;
  for (double t : t2) {
    r2 += t;
    s2 += std::abs(t);
  }

  if (scale1) *scale1 = s1;
  if (scale2) *scale2 = s2;
  return {r1, r2};
}

ChiJet chi_jet(const EnsembleSpec& spec, PrimaryState seed, double s,
               double tol) {
  spec.validate();
  if (spec.M != 2) throw ConfigError("chi_jet requires M = 2");
  double h = 1e-3 * s;
  if (!(seed.s <= s - 2 * h))
    throw ConfigError("chi_jet seed must sit below the stencil");
  std::vector<double> grid = {s - 2 * h, s - h, s, s + h, s + 2 * h};
  auto traj = sample_trajectory(spec, std::move(seed), grid, tol);
  std::vector<ChiDerivatives> d;
  d.reserve(5);
  for (const auto& p : traj) d.push_back(chi_derivatives(p, spec));

  ChiJet jet;
  jet.chi0 = d[2].chi0;
  jet.dchi0 = d[2].dchi0;
  jet.d2chi0 = d[2].d2chi0;
  jet.chi1 = d[2].chi1;
  jet.dchi1 = d[2].dchi1;
  jet.d2chi1 = d[2].d2chi1;
  jet.d3chi0 =
      (d[0].d2chi0 - 8 * d[1].d2chi0 + 8 * d[3].d2chi0 - d[4].d2chi0) / (12 * h);
  return jet;
}

std::pair<SeriesExpansion, SeriesExpansion> chi_series(const EnsembleSpec& spec,
                                                       double order_cap) {
  require_m2_generic(spec);
  M2Coeffs c = m2_coeffs(spec);
  int n = spec.n;

  SeriesExpansion chi0, chi1;
  chi0.valid_radius_hint = c.radius;
  chi1.valid_radius_hint = c.radius;
  chi0.terms = {
      {c.nu1 + 1, c.a0},
      {c.nu1 + 2, c.a0 * c.ca},
      {c.nu2 + 1, c.b0},
      {c.nu2 + 2, c.b0 * c.cb},
      {c.nu1 + c.nu2 + 2,
       -c.a0 * c.b0 * (c.nu1 + c.nu2 + 2) / ((c.nu1 + 1) * (c.nu2 + 1))}};
  chi1.terms = {
      {c.nu1 + 2, (n - 1) * c.a0 / ((c.nu1 + 2) * (c.nu2 + 1))},
      {c.nu2 + 2, (n - 1) * c.b0 / ((c.nu1 + 1) * (c.nu2 + 2))},
      {c.nu1 + c.nu2 + 3,
       -c.a0 * c.b0 * (n - 1) * (c.nu1 + c.nu2 + 4) /
           ((c.nu1 + 1) * (c.nu1 + 2) * (c.nu2 + 1) * (c.nu2 + 2))}};
  push_sorted(chi0);
  push_sorted(chi1);
  cap_terms(chi0, order_cap);
  cap_terms(chi1, order_cap);
  return {chi0, chi1};
}

SeriesExpansion gap_series(const EnsembleSpec& spec) {
  require_m2_generic(spec);
  M2Coeffs c = m2_coeffs(spec);
  int n = spec.n;

  SeriesExpansion E;
  E.valid_radius_hint = c.radius;
  E.terms = {
      {0.0, 1.0},
      {c.nu1 + 1, c.a0 / (c.nu1 + 1)},
      {c.nu1 + 2, c.a0 * c.ca / (c.nu1 + 2)},
      {c.nu2 + 1, c.b0 / (c.nu2 + 1)},
      {c.nu2 + 2, c.b0 * c.cb / (c.nu2 + 2)},
      {c.nu1 + c.nu2 + 3,
       -c.a0 * c.b0 * (n - 1) * (c.nu1 - c.nu2) * (c.nu1 - c.nu2) /
           ((c.nu1 + 1) * (c.nu1 + 1) * (c.nu2 + 1) * (c.nu2 + 1) *
            (c.nu1 + 2) * (c.nu1 + 2) * (c.nu2 + 2) * (c.nu2 + 2))}};
  push_sorted(E);
  return E;
}

}  // namespace ginprod
