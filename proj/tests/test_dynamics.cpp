#include "ginprod/dynamics.hpp"

#include <cmath>
#include <random>
#include <vector>

#include "doctest.h"
#include "ginprod/fredholm.hpp"
#include "ginprod/types.hpp"

using namespace ginprod;

namespace {

PrimaryState random_state(int M, double s, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> d(-1.0, 1.0);
  PrimaryState st;
  st.s = s;
  st.u.resize(M + 1);
  st.v.resize(M + 1);
  st.xi.resize(M + 1);
  st.eta.resize(M + 1);
  for (int j = 0; j <= M; ++j) {
    st.u[j] = d(rng);
    st.v[j] = d(rng);
    st.xi[j] = d(rng);
    st.eta[j] = d(rng);
  }
  return st;
}

EnsembleSpec spec_for(int M, int n, std::vector<double> tail, double lambda = 1.0) {
  return EnsembleSpec::make(M, n, tail, lambda);
}

}  // namespace

TEST_CASE("time derivative matches the explicit single-matrix system") {
  auto spec = spec_for(1, 3, {0.7});
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 20; ++trial) {
    PrimaryState st = random_state(1, 0.3 + trial * 0.2, rng);
    PrimaryState d = rhs(st, spec);
    double s = st.s, n = spec.n;
    double D = n * st.u[0] + st.u[1];
    double ev = st.eta[0] * st.v[0] + st.eta[1] * st.v[1];
    CHECK(d.u[0] == doctest::Approx((-st.eta[0] * D - st.u[1]) / s).epsilon(1e-14));
    CHECK(d.u[1] ==
          doctest::Approx((-(st.eta[1] - s) * D + st.xi[0] * st.u[0] +
                           st.xi[1] * st.u[1]) /
                          s)
              .epsilon(1e-14));
    CHECK(d.v[0] ==
          doctest::Approx(((-n * s - st.xi[0]) * st.v[1] + n * ev) / s)
              .epsilon(1e-14));
    CHECK(d.v[1] ==
          doctest::Approx(((-s - st.xi[1]) * st.v[1] + st.v[0] + ev) / s)
              .epsilon(1e-14));
    CHECK(d.xi[0] == doctest::Approx(-D * st.v[0]).epsilon(1e-14));
    CHECK(d.xi[1] == doctest::Approx(-D * st.v[1]).epsilon(1e-14));
    CHECK(d.eta[0] == doctest::Approx(-st.u[0] * st.v[1]).epsilon(1e-14));
    CHECK(d.eta[1] == doctest::Approx(-st.u[1] * st.v[1]).epsilon(1e-14));
    CHECK(d.accumulated_log_tau ==
          doctest::Approx((n * st.eta[0] + st.eta[1]) / s).epsilon(1e-14));
  }
}

TEST_CASE("time derivative matches the explicit two-matrix system") {
  auto spec = spec_for(2, 2, {0.4, 1.9});
  std::mt19937_64 rng(13);
  for (int trial = 0; trial < 20; ++trial) {
    PrimaryState st = random_state(2, 0.5 + trial * 0.1, rng);
    PrimaryState d = rhs(st, spec);
    double s = st.s, n = spec.n;
    double D = n * st.u[0] + st.u[1];
    double ev = st.eta[0] * st.v[0] + st.eta[1] * st.v[1] + st.eta[2] * st.v[2];
    CHECK(d.u[0] == doctest::Approx((-st.eta[0] * D - st.u[1]) / s).epsilon(1e-14));
    CHECK(d.u[1] == doctest::Approx((-st.eta[1] * D - st.u[2]) / s).epsilon(1e-14));
    CHECK(d.u[2] ==
          doctest::Approx((-(st.eta[2] + s) * D + st.xi[0] * st.u[0] +
                           st.xi[1] * st.u[1] + st.xi[2] * st.u[2]) /
                          s)
              .epsilon(1e-14));
    CHECK(d.v[0] ==
          doctest::Approx(((n * s - st.xi[0]) * st.v[2] + n * ev) / s)
              .epsilon(1e-14));
    CHECK(d.v[1] ==
          doctest::Approx(((s - st.xi[1]) * st.v[2] + st.v[0] + ev) / s)
              .epsilon(1e-14));
    CHECK(d.v[2] ==
          doctest::Approx((-st.xi[2] * st.v[2] + st.v[1]) / s).epsilon(1e-14));
    for (int j = 0; j <= 2; ++j) {
      CHECK(d.xi[j] == doctest::Approx(D * st.v[j]).epsilon(1e-14));
      CHECK(d.eta[j] == doctest::Approx(st.u[j] * st.v[2]).epsilon(1e-14));
    }
  }
}

TEST_CASE("the system is the Hamiltonian flow of the canonical bracket") {
  // s u' = -dH/dv, s v' = +dH/du, xi' = (-1)^M dH/deta, eta' = -(-1)^M dH/dxi.
  std::mt19937_64 rng(17);
  for (int M = 1; M <= 3; ++M) {
    std::vector<double> tail;
    for (int i = 0; i < M; ++i) tail.push_back(0.4 + 0.6 * i);
    auto spec = spec_for(M, 2, tail);
    double sgn = (M % 2 == 0) ? 1.0 : -1.0;
    for (int trial = 0; trial < 5; ++trial) {
      PrimaryState st = random_state(M, 0.8 + 0.3 * trial, rng);
      PrimaryState d = rhs(st, spec);
      auto partial = [&](std::vector<double> PrimaryState::* comp, int j) {
        PrimaryState p = st, m = st;
        double h = 1e-6;
        (p.*comp)[j] += h;
        (m.*comp)[j] -= h;
        return (hamiltonian(p, spec) - hamiltonian(m, spec)) / (2 * h);
      };
      for (int j = 0; j <= M; ++j) {
        CHECK(st.s * d.u[j] ==
              doctest::Approx(-partial(&PrimaryState::v, j)).epsilon(1e-7));
        CHECK(st.s * d.v[j] ==
              doctest::Approx(partial(&PrimaryState::u, j)).epsilon(1e-7));
        CHECK(d.xi[j] ==
              doctest::Approx(sgn * partial(&PrimaryState::eta, j)).epsilon(1e-7));
        CHECK(d.eta[j] ==
              doctest::Approx(-sgn * partial(&PrimaryState::xi, j)).epsilon(1e-7));
      }
    }
  }
}

TEST_CASE("Hamiltonian equals its matrix trace form") {
  // H = tr(C A2) + s tr(E A2) with the isomonodromy matrices.
  std::mt19937_64 rng(19);
  for (int M = 1; M <= 3; ++M) {
    std::vector<double> tail;
    for (int i = 0; i < M; ++i) tail.push_back(0.3 + 0.5 * i);
    auto spec = spec_for(M, 3, tail);
    for (int trial = 0; trial < 10; ++trial) {
      PrimaryState st = random_state(M, 0.4 + 0.2 * trial, rng);
      SchlesingerTriple t = schlesinger_matrices(st, spec);
      double trace_form =
          (t.C * t.A2).trace() + st.s * (t.E * t.A2).trace();
      CHECK(hamiltonian(st, spec) == doctest::Approx(trace_form).epsilon(1e-12));
    }
  }
}

TEST_CASE("chi derivatives match the finite-difference flow") {
  auto spec = spec_for(2, 2, {0.3, 1.7});
  PrimaryState st = initial_state_numeric(spec, 0.08);
  double h = 1e-4;
  std::vector<double> grid = {0.5 - 2 * h, 0.5 - h, 0.5, 0.5 + h, 0.5 + 2 * h};
  auto traj = sample_trajectory(spec, st, grid, 1e-12);
  std::vector<ChiDerivatives> ch;
  for (const auto& p : traj) ch.push_back(chi_derivatives(p, spec));
  auto d4 = [&](auto f) {
    return (f(ch[0]) - 8 * f(ch[1]) + 8 * f(ch[3]) - f(ch[4])) / (12 * h);
  };
  CHECK(ch[2].dchi0 ==
        doctest::Approx(d4([](const ChiDerivatives& c) { return c.chi0; }))
            .epsilon(1e-7));
  CHECK(ch[2].d2chi0 ==
        doctest::Approx(d4([](const ChiDerivatives& c) { return c.dchi0; }))
            .epsilon(1e-7));
  CHECK(ch[2].dchi1 ==
        doctest::Approx(d4([](const ChiDerivatives& c) { return c.chi1; }))
            .epsilon(1e-7));
  CHECK(ch[2].d2chi1 ==
        doctest::Approx(d4([](const ChiDerivatives& c) { return c.dchi1; }))
            .epsilon(1e-7));
}

namespace {

void check_seedings_agree(const EnsembleSpec& spec, double s0, double tol) {
  PrimaryState a = initial_state_series(spec, s0);
  PrimaryState b = initial_state_numeric(spec, s0);
  auto close = [&](double x, double y) {
    CHECK(std::abs(x - y) <= tol * std::max({1.0, std::abs(x), std::abs(y)}));
  };
  for (int j = 0; j <= spec.M; ++j) {
    close(a.u[j], b.u[j]);
    close(a.v[j], b.v[j]);
    close(a.xi[j], b.xi[j]);
    close(a.eta[j], b.eta[j]);
  }
  close(a.accumulated_log_tau, b.accumulated_log_tau);
}

}  // namespace

TEST_CASE("series and numeric seedings agree at small s0") {
  check_seedings_agree(spec_for(1, 3, {0.7}, 1e-4), 1e-2, 1e-8);
  check_seedings_agree(spec_for(1, 3, {0.7}, 0.5), 1e-3, 1e-7);
  check_seedings_agree(spec_for(2, 2, {0.3, 1.7}, 1e-3), 3e-3, 1e-7);
  check_seedings_agree(spec_for(2, 2, {0.3, 1.7}, 0.5), 1e-3, 1e-6);
}

TEST_CASE("series seeding rejects unsupported regimes") {
  CHECK_THROWS_AS(initial_state_series(spec_for(1, 2, {0.0}), 1e-3), ConfigError);
  CHECK_THROWS_AS(initial_state_series(spec_for(2, 2, {1.0, 2.0}), 1e-3),
                  ConfigError);
  CHECK_THROWS_AS(initial_state_series(spec_for(3, 2, {0.3, 0.7, 1.9}), 1e-3),
                  ConfigError);
  CHECK_THROWS_AS(initial_state_series(spec_for(1, 2, {0.5}), 0.5), ConfigError);
}

TEST_CASE("numeric seeding satisfies the conserved relations") {
  for (auto spec : {spec_for(1, 3, {0.7}), spec_for(2, 2, {0.3, 1.7}),
                    spec_for(2, 3, {1.0, 2.0}), spec_for(1, 2, {0.0})}) {
    PrimaryState st = initial_state_numeric(spec, 0.05);
    std::vector<double> r = conserved_quantities(st, spec);
    double uv = 0;
    for (int j = 0; j <= spec.M; ++j) uv += std::abs(st.u[j] * st.v[j]);
    CHECK(std::abs(r[0]) <= 1e-10 * (1.0 + uv));
    for (size_t i = 1; i < r.size(); ++i) {
      CAPTURE(spec.M);
      CAPTURE(i);
      CHECK(std::abs(r[i]) <= 1e-7);
    }
  }
}

TEST_CASE("dynamics route reproduces the exponential special case") {
  auto spec = spec_for(1, 1, {0.0});
  PrimaryState st = initial_state_numeric(spec, 0.1);
  std::vector<double> grid = {0.5, 1.0, 2.0};
  auto traj = sample_trajectory(spec, st, grid, 1e-10);
  for (size_t i = 0; i < grid.size(); ++i)
    CHECK(traj[i].accumulated_log_tau == doctest::Approx(-grid[i]).epsilon(1e-9));
}

TEST_CASE("dynamics and Fredholm routes agree") {
  struct Case {
    EnsembleSpec spec;
    double s;
  };
  std::vector<Case> cases;
  for (double lam : {0.5, 1.0}) {
    for (double s : {0.5, 2.0, 5.0})
      cases.push_back({spec_for(1, 5, {1.0}, lam), s});
    for (double s : {0.5, 2.0, 5.0})
      cases.push_back({spec_for(2, 2, {0.3, 1.7}, lam), s});
  }
  for (const auto& c : cases) {
    double drift = 0;
    double via_ode = gap_via_dynamics(c.spec, c.s, 1e-10, &drift);
    double err = 0;
    double via_det = gap_probability(c.spec, c.s, &err);
    CAPTURE(c.spec.M);
    CAPTURE(c.s);
    CAPTURE(c.spec.lambda);
    CHECK(std::abs(via_ode - via_det) <= 1e-6);
    CHECK(drift <= 1e-8);
  }
}

TEST_CASE("Hamiltonian matches the log-determinant derivative") {
  for (auto spec : {spec_for(1, 2, {0.5}), spec_for(2, 2, {0.3, 1.7})}) {
    PrimaryState st = initial_state_numeric(spec, 0.1);
    for (double s : {0.6, 1.0, 1.8}) {
      st = integrate(spec, std::move(st), s, 1e-11);
      double lhs = s * log_det_derivative(spec, s, 1e-3 * s);
      CHECK(hamiltonian(st, spec) == doctest::Approx(lhs).epsilon(1e-5));
    }
  }
}

TEST_CASE("conserved quantities drift within budget over long runs") {
  for (auto spec : {spec_for(1, 5, {1.0}), spec_for(2, 2, {0.3, 1.7})}) {
    PrimaryState st = initial_state_numeric(spec, 0.1);
    double drift = 0;
    st = integrate(spec, std::move(st), 5.0, 1e-10, &drift);
    CHECK(drift <= 1e-8);
  }
}

TEST_CASE("isomonodromy deformation equations hold along the flow") {
  for (auto spec : {spec_for(1, 2, {0.5}), spec_for(2, 2, {0.3, 1.7})}) {
    PrimaryState st = initial_state_numeric(spec, 0.1);
    std::vector<double> grid;
    for (int i = 0; i <= 20; ++i) grid.push_back(1.0 + 0.02 * i);
    auto traj = sample_trajectory(spec, st, grid, 1e-11);
    CHECK(schlesinger_residual(traj, spec) <= 1e-5);
  }
}

TEST_CASE("deformation residual input validation") {
  auto spec = spec_for(1, 2, {0.5});
  PrimaryState st = initial_state_numeric(spec, 0.1);
  std::vector<PrimaryState> traj(4, st);
  for (int i = 0; i < 4; ++i) traj[i].s = 0.1 + 0.01 * i;
  CHECK_THROWS_AS(schlesinger_residual(traj, spec), ConfigError);
  traj.push_back(st);
  traj[4].s = 0.2;
  CHECK_THROWS_AS(schlesinger_residual(traj, spec), ConfigError);
}

TEST_CASE("single-matrix reduction identities hold along the flow") {
  auto spec = spec_for(1, 2, {0.5});
  PrimaryState st = initial_state_numeric(spec, 0.1);
  for (double s : {0.4, 1.0, 2.5}) {
    st = integrate(spec, std::move(st), s, 1e-11);
    for (double r : m1_reduction_checks(st, spec)) CHECK(std::abs(r) <= 1e-7);
  }
  CHECK_THROWS_AS(m1_reduction_checks(st, spec_for(2, 2, {0.5, 1.5})),
                  ConfigError);
}

TEST_CASE("integration input validation") {
  auto spec = spec_for(1, 2, {0.5});
  PrimaryState st = initial_state_numeric(spec, 0.1);
  CHECK_THROWS_AS(integrate(spec, st, 0.05, 1e-10), ConfigError);
  CHECK_THROWS_AS(integrate(spec, st, 1.0, 0.5), ConfigError);
  PrimaryState bad = st;
  bad.u.resize(1);
  CHECK_THROWS_AS(rhs(bad, spec), ConfigError);
}
