#include "ginprod/sigma.hpp"

#include <cmath>
#include <vector>

#include "doctest.h"
#include "ginprod/dynamics.hpp"
#include "ginprod/fredholm.hpp"
#include "ginprod/specialfns.hpp"
#include "ginprod/types.hpp"

using namespace ginprod;

namespace {

// Derivative of order k of a truncated expansion, termwise.
double series_deriv(const SeriesExpansion& se, int k, double s) {
  double acc = 0;
  for (const SeriesTerm& t : se.terms) {
    double f = t.coefficient;
    for (int i = 0; i < k; ++i) f *= t.exponent - i;
    if (f != 0) acc += f * std::pow(s, t.exponent - k);
  }
  return acc;
}

}  // namespace

TEST_CASE("expansion evaluation sums the stored terms") {
  SeriesExpansion se;
  se.terms = {{0.0, 2.0}, {1.5, -3.0}, {2.0, 4.0}};
  CHECK(se.evaluate(0.25) ==
        doctest::Approx(2.0 - 3.0 * std::pow(0.25, 1.5) + 4.0 * 0.0625));
}

TEST_CASE("sigma PV residual vanishes identically at sigma = 0") {
  for (double s : {0.1, 1.0, 4.0})
    for (int n : {1, 3})
      CHECK(sigma_pv_residual(0, 0, 0, s, n, 0.7) == 0.0);
  CHECK_THROWS_AS(sigma_pv_residual(0, 0, 0, -1.0, 2, 0.5), ConfigError);
}

TEST_CASE("sigma PV residual of the boundary expansion vanishes to order") {
  int n = 2;
  double nu = 0.5, lam = 1.0;
  double c = lam * pochhammer(nu + 1, n) /
             (std::tgamma(static_cast<double>(n)) * std::tgamma(nu + 2));
  double k1 = (2 * n + nu) / (nu + 2);
  double c2 = (nu * (nu + 1) * (nu + 1) + 2.0 * n * (n + nu) * (2 * nu + 3)) /
              (2 * (nu + 1) * (nu + 2) * (nu + 3));
  auto sig = [&](double s, int k) {
    SeriesExpansion se;
    se.terms = {{nu + 1, c}, {nu + 2, -c * k1}, {nu + 3, c * c2}};
    return series_deriv(se, k, s);
  };
  // The equation terms are O(s^{2 nu}); the truncation defect enters through
  // the linearized operator at O(s^{3 nu + 1}), so the residual must decay
  // with an exponent well above 2 nu.
  double r_hi = std::abs(sigma_pv_residual(sig(1e-2, 0), sig(1e-2, 1),
                                           sig(1e-2, 2), 1e-2, n, nu));
  double r_lo = std::abs(sigma_pv_residual(sig(1e-3, 0), sig(1e-3, 1),
                                           sig(1e-3, 2), 1e-3, n, nu));
  double p = std::log(r_hi / r_lo) / std::log(10.0);
  CHECK(p >= 2 * nu + 1.2);
  CHECK(r_hi <= std::pow(1e-2, 2 * nu));
}

TEST_CASE("sigma PV holds along single-matrix trajectories") {
  for (int n : {1, 2, 5}) {
    for (double nu : {0.5, 1.0, 2.0}) {
      auto spec = EnsembleSpec::make(1, n, {nu}, 1.0);
      PrimaryState st = initial_state_numeric(spec, 0.05);
      for (double s : {0.1, 0.5, 1.0, 2.5, 5.0}) {
        st = integrate(spec, std::move(st), s, 1e-10);
        ChiDerivatives d = chi_derivatives(st, spec);
        double H = hamiltonian(st, spec);
        // sigma = -H = -chi0 on shell.
        CHECK(std::abs(-d.chi0 - (-H)) <= 1e-9 * std::max(1.0, std::abs(H)));
        double res =
            sigma_pv_residual(-d.chi0, -d.dchi0, -d.d2chi0, s, n, nu);
        double scale = std::max(1.0, std::pow(s * d.d2chi0, 2));
        CAPTURE(n);
        CAPTURE(nu);
        CAPTURE(s);
        CHECK(std::abs(res) <= 1e-5 * scale);
      }
    }
  }
}

TEST_CASE("chi values reproduce the Hamiltonian and vanish at the origin") {
  auto spec = EnsembleSpec::make(2, 2, {0.3, 1.7}, 1.0);
  PrimaryState st = initial_state_numeric(spec, 0.05);
  for (double s : {0.3, 1.0, 3.0}) {
    st = integrate(spec, std::move(st), s, 1e-10);
    ChiValues ch = chi_from_state(st, spec);
    double H = hamiltonian(st, spec);
    CHECK(ch.chi0 == doctest::Approx(H).epsilon(1e-9));
  }
  PrimaryState tiny = initial_state_series(spec, 1e-3);
  ChiValues ch0 = chi_from_state(tiny, spec);
  CHECK(std::abs(ch0.chi0) <= 1e-2);
  CHECK(std::abs(ch0.chi1) <= 1e-2);

  auto m1 = EnsembleSpec::make(1, 2, {0.5}, 1.0);
  PrimaryState stm1 = initial_state_numeric(m1, 0.05);
  CHECK_THROWS_AS(chi_from_state(stm1, m1), ConfigError);
}

TEST_CASE("chi system residuals vanish identically at chi = 0") {
  auto [r1, r2] = chi_system_residuals(0, 0, 0, 0, 0, 0, 0, 1.0, 3, 0.3, 1.7);
  CHECK(r1 == 0.0);
  CHECK(r2 == 0.0);
}

TEST_CASE("chi system residuals of the printed expansions vanish to order") {
  auto spec = EnsembleSpec::make(2, 2, {0.3, 1.7}, 1.0);
  auto [c0, c1] = chi_series(spec);
  double prev1 = 0, prev2 = 0;
  for (double s : {1e-2, 1e-3}) {
    double s1 = 0, s2 = 0;
    auto [r1, r2] = chi_system_residuals(
        series_deriv(c0, 0, s), series_deriv(c0, 1, s), series_deriv(c0, 2, s),
        series_deriv(c0, 3, s), series_deriv(c1, 0, s), series_deriv(c1, 1, s),
        series_deriv(c1, 2, s), s, spec.n, 0.3, 1.7, &s1, &s2);
    double n1 = std::abs(r1) / s1, n2 = std::abs(r2) / s2;
    CHECK(n1 <= 0.3);
    CHECK(n2 <= 0.3);
    if (prev1 > 0) {
      CHECK(n1 <= prev1 / 5);
      CHECK(n2 <= prev2 / 5);
    }
    prev1 = n1;
    prev2 = n2;
  }
}

TEST_CASE("chi system holds along two-matrix trajectories") {
  for (double lam : {0.5, 1.0}) {
    auto spec = EnsembleSpec::make(2, 2, {0.3, 1.7}, lam);
    PrimaryState seed = initial_state_numeric(spec, 0.05);
    for (double s : {0.5, 1.0, 2.0, 5.0}) {
      ChiJet j = chi_jet(spec, seed, s);
      double s1 = 0, s2 = 0;
      auto [r1, r2] = chi_system_residuals(j.chi0, j.dchi0, j.d2chi0, j.d3chi0,
                                           j.chi1, j.dchi1, j.d2chi1, s, spec.n,
                                           spec.nu[1], spec.nu[2], &s1, &s2);
      CAPTURE(lam);
      CAPTURE(s);
      CHECK(std::abs(r1) <= 1e-4 * s1);
      CHECK(std::abs(r2) <= 1e-4 * s2);
    }
  }
}

TEST_CASE("chi jet validates the stencil position") {
  auto spec = EnsembleSpec::make(2, 2, {0.3, 1.7}, 1.0);
  PrimaryState seed = initial_state_numeric(spec, 0.05);
  CHECK_THROWS_AS(chi_jet(spec, seed, 0.0501), ConfigError);
}

TEST_CASE("chi expansions carry the printed coefficients") {
  auto spec = EnsembleSpec::make(2, 3, {0.3, 1.7}, 0.8);
  double nu1 = 0.3, nu2 = 1.7;
  auto [c0, c1] = chi_series(spec);
  double a0 = -0.8 * pochhammer(nu1 + 2, 2) * std::tgamma(nu2 - nu1) /
              (std::tgamma(3.0) * std::tgamma(nu1 + 1) * std::tgamma(nu2 + 1));
  REQUIRE(c0.terms.size() == 5);
  CHECK(c0.terms[0].exponent == doctest::Approx(nu1 + 1));
  CHECK(c0.terms[0].coefficient == doctest::Approx(a0).epsilon(1e-12));
  // chi1 branch amplitude relative to chi0: (n-1)/((nu1+2)(nu2+1)).
  CHECK(c1.terms[0].exponent == doctest::Approx(nu1 + 2));
  CHECK(c1.terms[0].coefficient / a0 ==
        doctest::Approx(2.0 / ((nu1 + 2) * (nu2 + 1))).epsilon(1e-12));

  auto n1 = EnsembleSpec::make(2, 1, {0.3, 1.7}, 1.0);
  auto [d0, d1] = chi_series(n1);
  for (const auto& t : d1.terms) CHECK(t.coefficient == 0.0);

  auto capped = chi_series(spec, nu2 + 1.5);
  CHECK(capped.first.terms.size() == 3);

  CHECK_THROWS_AS(chi_series(EnsembleSpec::make(2, 2, {1.0, 2.0}, 1.0)),
                  ConfigError);
  CHECK_THROWS_AS(chi_series(EnsembleSpec::make(1, 2, {0.5}, 1.0)), ConfigError);
}

TEST_CASE("chi expansions track the resolvent values at small s") {
  auto spec = EnsembleSpec::make(2, 2, {0.3, 1.7}, 1.0);
  double nu1 = spec.nu[1];
  auto [c0, c1] = chi_series(spec);
  for (double s : {4e-3, 1e-2}) {
    ChiValues ch = chi_from_state(initial_state_numeric(spec, s), spec);
    // First omitted orders: second order in lambda at s^{2 nu1 + 2} for
    // chi0, and the O(s) relative branch correction for chi1.
    CHECK(std::abs(ch.chi0 - c0.evaluate(s)) <=
          3 * std::pow(s, 2 * nu1 + 2) + 10 * s * s * std::abs(ch.chi0));
    CHECK(std::abs(ch.chi1 - c1.evaluate(s)) <=
          10 * s * std::abs(ch.chi1) + 3 * std::pow(s, 2 * nu1 + 3));
  }
}

TEST_CASE("gap expansion matches the determinant route at the omitted order") {
  auto spec = EnsembleSpec::make(2, 2, {0.3, 1.7}, 1.0);
  SeriesExpansion E = gap_series(spec);
  REQUIRE(E.terms.size() == 6);
  CHECK(E.terms[0].exponent == 0.0);
  CHECK(E.terms[0].coefficient == 1.0);
  // Coefficient of s^{nu1+1} is the chi0 amplitude divided by nu1+1.
  auto [c0, c1] = chi_series(spec);
  CHECK(E.terms[1].coefficient ==
        doctest::Approx(c0.terms[0].coefficient / (0.3 + 1)).epsilon(1e-12));

  // First omitted order is s^{2 nu1 + 2}: the ratio of differences over a
  // factor-10/3 step in s should track that exponent within a factor 3.
  double d1 = std::abs(E.evaluate(1e-2) - gap_probability(spec, 1e-2));
  double d2 = std::abs(E.evaluate(3e-3) - gap_probability(spec, 3e-3));
  double predicted = std::pow(1e-2 / 3e-3, 2 * 0.3 + 2);
  CHECK(d1 / d2 >= predicted / 3);
  CHECK(d1 / d2 <= predicted * 3);

  // Normalized by s^{nu_min + 2} the defect stays bounded (and in fact
  // shrinks) as s decreases through a decade.
  double bound = 0;
  for (double s : {1e-2, 7e-3, 4e-3, 2e-3, 1e-3}) {
    double norm = std::abs(E.evaluate(s) - gap_probability(spec, s)) /
                  std::pow(s, 0.3 + 2);
    if (bound == 0) bound = norm;
    CHECK(norm <= 1.5 * bound + 1e-12);
    CHECK(norm <= 1.0);
  }

  CHECK_THROWS_AS(gap_series(EnsembleSpec::make(2, 2, {1.0, 2.0}, 1.0)),
                  ConfigError);
}
