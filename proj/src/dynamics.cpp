#include "ginprod/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <string>

#include "ginprod/fredholm.hpp"
#include "ginprod/kernel.hpp"
#include "ginprod/specialfns.hpp"

namespace ginprod {

namespace {

double sign_M(const EnsembleSpec& spec) { return spec.M % 2 == 0 ? 1.0 : -1.0; }

double dot(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0;
  for (size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

// e_k extended by zero beyond the number of variables.
double elem_sym_ext(int k, std::span<const double> vals) {
  if (k > static_cast<int>(vals.size())) return 0.0;
  return elementary_symmetric(k, vals);
}

void require_state(const PrimaryState& st, const EnsembleSpec& spec) {
  size_t P = static_cast<size_t>(spec.M) + 1;
  if (st.u.size() != P || st.v.size() != P || st.xi.size() != P ||
      st.eta.size() != P)
    throw ConfigError("PrimaryState vectors must have size M+1");
  if (!(st.s > 0)) throw ConfigError("PrimaryState requires s > 0");
}

double hamiltonian_terms(const PrimaryState& st, const EnsembleSpec& spec,
                         double* scale) {
  int M = spec.M;
  double sgn = sign_M(spec);
  double D = spec.n * st.u[0] + st.u[1];
  double t1 = sgn * st.s * D * st.v[M];
  double t2 = 0, a2 = 0;
  for (int i = 0; i < M; ++i) {
    t2 += st.u[i + 1] * st.v[i];
    a2 += std::abs(st.u[i + 1] * st.v[i]);
  }
  double xu = dot(st.xi, st.u), ev = dot(st.eta, st.v);
  double axu = 0, aev = 0;
  for (int i = 0; i <= M; ++i) {
    axu += std::abs(st.xi[i] * st.u[i]);
    aev += std::abs(st.eta[i] * st.v[i]);
  }
  double t3 = -st.v[M] * xu, t4 = D * ev;
  if (scale)
    *scale = 1.0 + std::abs(t1) + a2 + std::abs(st.v[M]) * axu + std::abs(D) * aev;
  return t1 + t2 + t3 + t4;
}

// Characteristic polynomial z^N + c[N-1] z^{N-1} + ... + c[0] by the
// Faddeev-LeVerrier recursion.
std::vector<double> charpoly_coeffs(const Eigen::MatrixXd& B) {
  int N = static_cast<int>(B.rows());
  std::vector<double> c(N);
  Eigen::MatrixXd Mk = B;
  double ck = -Mk.trace();
  c[N - 1] = ck;
  for (int k = 2; k <= N; ++k) {
    Mk = B * (Mk + ck * Eigen::MatrixXd::Identity(N, N));
    ck = -Mk.trace() / k;
    c[N - k] = ck;
  }
  return c;
}

void conserved_with_scales(const PrimaryState& st, const EnsembleSpec& spec,
                           std::vector<double>& r, std::vector<double>& scale) {
  r.clear();
  scale.clear();
  int M = spec.M, n = spec.n;

  double orth = 0, orth_scale = 0;
  for (int i = 0; i <= M; ++i) {
    orth += st.u[i] * st.v[i];
    orth_scale += std::abs(st.u[i] * st.v[i]);
  }
  r.push_back(orth);
  scale.push_back(orth_scale + 1e-300);

  double hs = 0;
  double H = hamiltonian_terms(st, spec, &hs);
  r.push_back(H - (n * st.eta[0] + st.eta[1]));
  scale.push_back(hs);

  if (spec.nu_min_tail() > 0) {
    SchlesingerTriple tr = schlesinger_matrices(st, spec);
    Eigen::MatrixXd B = tr.A2 - tr.C;
    std::vector<double> c = charpoly_coeffs(B);
    double bn = B.cwiseAbs().rowwise().sum().maxCoeff();
    std::span<const double> tail(spec.nu.data() + 1, static_cast<size_t>(M));
    int N = M + 1;
    for (int i = 0; i < N; ++i) {
      double tgt = ((N - i) % 2 == 0 ? 1.0 : -1.0) * elem_sym_ext(N - i, tail);
      r.push_back(c[i] - tgt);
      scale.push_back(std::pow(1.0 + bn, N - i));
    }
  }

  if (M == 1) {
    double nu = spec.nu[1];
    r.push_back(st.xi[1] - n * st.eta[0] - st.eta[1] + nu);
    scale.push_back(1.0 + std::abs(st.xi[1]) + std::abs(n * st.eta[0]) +
                    std::abs(st.eta[1]) + nu);
  }
  if (M == 2) {
    double e1 = spec.nu[1] + spec.nu[2], e2 = spec.nu[1] * spec.nu[2];
    ChiDerivatives ch = chi_derivatives(st, spec);
    double s = st.s;

    r.push_back(st.xi[2] - (ch.chi0 - e1));
    scale.push_back(1.0 + std::abs(st.xi[2]) + std::abs(ch.chi0) + std::abs(e1));

    double t33[] = {e2, -(1.0 + e1) * ch.chi0, ch.chi0 * ch.chi0, s * ch.dchi0,
                    ch.chi1};
    double rhs33 = 0, s33 = 1.0 + std::abs(st.xi[1]);
    for (double t : t33) {
      rhs33 += t;
      s33 += std::abs(t);
    }
    r.push_back(st.xi[1] - rhs33);
    scale.push_back(s33);

    double lhs = n * (1.0 + st.eta[0]) * st.xi[0];
    double t1 = n * ch.chi0 * (ch.chi0 - 1 - spec.nu[1]) * (ch.chi0 - 1 - spec.nu[2]);
    double t2 = (st.eta[2] - ch.chi1) * (st.xi[1] + n * (n + e1 - ch.chi0));
    double t3 = n * ch.chi1 * (ch.chi0 + n - 2);
    double t4 = -n * s * ch.dchi0 * (1.0 + e1 - 3.0 * ch.chi0);
    double t5 = n * s * (s * ch.d2chi0 + 2.0 * ch.dchi1);
    r.push_back(lhs - (t1 + t2 + t3 + t4 + t5));
    scale.push_back(1.0 + std::abs(lhs) + std::abs(t1) + std::abs(t2) +
                    std::abs(t3) + std::abs(t4) + std::abs(t5));
  }
}

struct DriftMonitor {
  std::vector<double> r0, s0;
  double worst = 0;

  void seed(const PrimaryState& st, const EnsembleSpec& spec) {
    conserved_with_scales(st, spec, r0, s0);
  }
  void check(const PrimaryState& st, const EnsembleSpec& spec, double budget) {
    std::vector<double> r, sc;
    conserved_with_scales(st, spec, r, sc);
    for (size_t i = 0; i < r.size(); ++i) {
      double d = std::abs(r[i] - r0[i]) / std::max(sc[i], s0[i]);
      worst = std::max(worst, d);
      if (d > budget)
        throw NumericalError("conserved quantity " + std::to_string(i) +
                             " drifted by " + std::to_string(d) + " at s = " +
                             std::to_string(st.s));
    }
  }
};

}  // namespace

double hamiltonian(const PrimaryState& st, const EnsembleSpec& spec) {
  spec.validate();
  require_state(st, spec);
  return hamiltonian_terms(st, spec, nullptr);
}

PrimaryState rhs(const PrimaryState& st, const EnsembleSpec& spec) {
  spec.validate();
  require_state(st, spec);
  int M = spec.M, n = spec.n;
  double s = st.s, sgn = sign_M(spec);
  double D = n * st.u[0] + st.u[1];
  double ev = dot(st.eta, st.v);

  PrimaryState d;
  d.s = 1.0;
  d.u.assign(M + 1, 0.0);
  d.v.assign(M + 1, 0.0);
  d.xi.assign(M + 1, 0.0);
  d.eta.assign(M + 1, 0.0);

  for (int j = 0; j < M; ++j) d.u[j] = (-st.eta[j] * D - st.u[j + 1]) / s;
  d.u[M] = (-(st.eta[M] + sgn * s) * D + dot(st.xi, st.u)) / s;

  d.v[0] = ((sgn * n * s - st.xi[0]) * st.v[M] + n * ev) / s;
  if (M >= 1) d.v[1] = ((sgn * s - st.xi[1]) * st.v[M] + st.v[0] + ev) / s;
  for (int j = 2; j <= M; ++j) d.v[j] = (-st.xi[j] * st.v[M] + st.v[j - 1]) / s;

  for (int j = 0; j <= M; ++j) {
    d.xi[j] = sgn * D * st.v[j];
    d.eta[j] = sgn * st.u[j] * st.v[M];
  }
  d.accumulated_log_tau = (n * st.eta[0] + st.eta[1]) / s;
  return d;
}

ChiDerivatives chi_derivatives(const PrimaryState& st, const EnsembleSpec& spec) {
  PrimaryState d = rhs(st, spec);
  int M = spec.M, n = spec.n;
  double sgn = sign_M(spec);
  ChiDerivatives ch;
  ch.chi0 = n * st.eta[0] + st.eta[1];
  ch.dchi0 = n * d.eta[0] + d.eta[1];
  ch.d2chi0 = sgn * ((n * d.u[0] + d.u[1]) * st.v[M] +
                     (n * st.u[0] + st.u[1]) * d.v[M]);
  if (M >= 2) {
    ch.chi1 = n * st.eta[1] + st.eta[2];
    ch.dchi1 = n * d.eta[1] + d.eta[2];
    ch.d2chi1 = sgn * ((n * d.u[1] + d.u[2]) * st.v[M] +
                       (n * st.u[1] + st.u[2]) * d.v[M]);
  }
  return ch;
}

PrimaryState initial_state_series(const EnsembleSpec& spec, double s0) {
  spec.validate();
  if (spec.M != 1 && spec.M != 2)
    throw ConfigError("series seeding implemented for M = 1 and M = 2 only");
  if (spec.nu_min_tail() <= 0)
    throw ConfigError("series seeding requires nu_min > 0");
  if (spec.M == 2 && !spec.nu_generic())
    throw ConfigError("series seeding for M = 2 requires generic nu");
  if (!(s0 > 0) || s0 > 0.1)
    throw ConfigError("series seeding requires 0 < s0 <= 0.1");

  int n = spec.n, M = spec.M;
  double lam = spec.lambda;
  KernelEvaluator evk(spec);
  auto ph = evk.phi_all(s0);

  PrimaryState st;
  st.s = s0;
  st.u.assign(M + 1, 0.0);
  st.v.assign(M + 1, 0.0);
  st.xi.assign(M + 1, 0.0);
  st.eta.assign(M + 1, 0.0);
  for (int j = 0; j <= M; ++j) st.u[j] = ph[j].to_double();

  if (M == 1) {
    double nu = spec.nu[1];
    double pn = pochhammer(nu + 1, n);
    double sn1 = (n % 2 == 0) ? -1.0 : 1.0;  // (-1)^{n+1}
    double gn = std::tgamma(static_cast<double>(n));
    st.u[0] += lam * sn1 * pn * pn * std::pow(s0, nu + 1) /
               ((nu + 1) * gn * std::tgamma(nu + 2));
    st.u[1] += lam * sn1 * n * pn * pn * std::pow(s0, nu + 2) /
               ((nu + 1) * gn * std::tgamma(nu + 3));
    // Exact closure of v through the weight function; see m1_reduction_checks.
    double w = lam * std::pow(s0, nu) * std::exp(-s0) /
               (std::tgamma(n + 1.0) * std::tgamma(n + nu + 1));
    st.v[1] = w * st.u[0];
    st.v[0] = -w * st.u[1];
    st.eta[0] = -lam * pn * std::pow(s0, nu + 1) /
                (std::tgamma(n + 1.0) * std::tgamma(nu + 2));
    st.eta[1] = -lam * pn * std::pow(s0, nu + 2) / (gn * std::tgamma(nu + 3));
    st.xi[0] = -n * st.eta[1];
    st.xi[1] = -nu - lam * pn * std::pow(s0, nu + 1) / (gn * std::tgamma(nu + 2));
    double c = lam * pn / (gn * std::tgamma(nu + 2));
    double c2 = (nu * (nu + 1) * (nu + 1) + 2.0 * n * (n + nu) * (2 * nu + 3)) /
                (2 * (nu + 1) * (nu + 2) * (nu + 3));
    st.accumulated_log_tau =
        -c * (std::pow(s0, nu + 1) / (nu + 1) -
              (2.0 * n + nu) * std::pow(s0, nu + 2) / ((nu + 2) * (nu + 2)) +
              c2 * std::pow(s0, nu + 3) / (nu + 3));
    return st;
  }

  // M = 2: leading lambda terms of each s^{nu_a} branch, plus the exact
  // first-order v = lambda psi closure.
  double nu1 = spec.nu[1], nu2 = spec.nu[2];
  double sn1 = (n % 2 == 0) ? -1.0 : 1.0;
  double gn = std::tgamma(static_cast<double>(n));
  auto ps = evk.psi_all(s0);
  for (int j = 0; j <= M; ++j) st.v[j] = lam * ps[j].to_double();

  st.xi[1] = nu1 * nu2;
  st.xi[2] = -(nu1 + nu2);
  for (int br = 0; br < 2; ++br) {
    double a = br == 0 ? nu1 : nu2;
    double b = br == 0 ? nu2 : nu1;
    double G = std::tgamma(b - a);
    double pa1 = pochhammer(a + 1, n);  // (a+1)_n
    double sa1 = std::pow(s0, a + 1), sa2 = std::pow(s0, a + 2);
    st.u[0] += lam * sn1 * sa1 * pochhammer(a + 2, n - 1) *
               pochhammer(a + 2, n - 1) * pochhammer(b + 1, n) * G /
               (gn * std::tgamma(a + 1) * std::tgamma(b + 1));
    double u1term = lam * sn1 * sa2 * n * pa1 * pa1 * pochhammer(b + 1, n) * G /
                    ((a + 1) * gn * std::tgamma(a + 3) * std::tgamma(b + 2));
    st.u[1] += u1term;
    st.u[2] -= u1term;
    st.eta[0] -= lam * sa1 * pochhammer(a + 2, n - 1) * G /
                 (std::tgamma(n + 1.0) * std::tgamma(a + 1) * std::tgamma(b + 1));
    double etaterm = lam * sa2 * pa1 * G /
                     (gn * std::tgamma(a + 3) * std::tgamma(b + 2));
    st.eta[1] -= etaterm;
    st.eta[2] += etaterm;
    st.xi[0] -= lam * sa2 * n * pa1 * G /
                (gn * std::tgamma(a + 3) * std::tgamma(b + 1));
    st.xi[1] += lam * sa1 * pa1 * G / (gn * std::tgamma(a + 2) * std::tgamma(b));
    st.xi[2] -= lam * sa1 * pa1 * G /
                (gn * std::tgamma(a + 2) * std::tgamma(b + 1));
  }

  double a0 = -lam * pochhammer(nu1 + 2, n - 1) * std::tgamma(nu2 - nu1) /
              (gn * std::tgamma(nu1 + 1) * std::tgamma(nu2 + 1));
  double b0 = -lam * pochhammer(nu2 + 2, n - 1) * std::tgamma(nu1 - nu2) /
              (gn * std::tgamma(nu1 + 1) * std::tgamma(nu2 + 1));
  double ca = (2 + 2 * nu1 + nu1 * nu2 + n * (2 * nu2 - nu1)) /
              ((nu1 + 2) * (nu2 + 1) * (1 + nu1 - nu2));
  double cb = (2 + 2 * nu2 + nu1 * nu2 + n * (2 * nu1 - nu2)) /
              ((nu1 + 1) * (nu2 + 2) * (1 + nu2 - nu1));
  st.accumulated_log_tau =
      a0 * std::pow(s0, nu1 + 1) * (1 / (nu1 + 1) + ca * s0 / (nu1 + 2)) +
      b0 * std::pow(s0, nu2 + 1) * (1 / (nu2 + 1) + cb * s0 / (nu2 + 2)) -
      a0 * b0 * std::pow(s0, nu1 + nu2 + 2) / ((nu1 + 1) * (nu2 + 1));
  return st;
}

PrimaryState initial_state_numeric(const EnsembleSpec& spec, double s0,
                                   int order) {
  spec.validate();
  if (!(s0 > 0)) throw ConfigError("numeric seeding requires s0 > 0");
  IntervalUnion J = IntervalUnion::single(0.0, s0);
  NystromOperator op = build_operator(spec, J, order);
  KernelEvaluator evk(spec);
  int M = spec.M, P = M + 1, n = spec.n;
  double lam = spec.lambda;
  size_t N = op.nodes.size();

  std::vector<std::vector<double>> fphi(P, std::vector<double>(N));
  std::vector<std::vector<double>> fpsi(P, std::vector<double>(N));
  for (size_t i = 0; i < N; ++i) {
    auto ph = evk.phi_all(op.nodes[i]);
    auto ps = evk.psi_all(op.nodes[i]);
    for (int j = 0; j < P; ++j) {
      fphi[j][i] = ph[j].to_double();
      fpsi[j][i] = lam * ps[j].to_double();
    }
  }

  PrimaryState st;
  st.s = s0;
  st.u.assign(P, 0.0);
  st.v.assign(P, 0.0);
  st.xi.assign(P, 0.0);
  st.eta.assign(P, 0.0);

  auto ph0 = evk.phi_all(s0);
  auto ps0 = evk.psi_all(s0);
  std::vector<std::vector<double>> gv(P);
  for (int j = 0; j < P; ++j) {
    std::vector<double> gu = resolvent_apply(op, lam, fphi[j]);
    st.u[j] = resolvent_extend(op, lam, gu, ph0[j].to_double(), s0);
    gv[j] = resolvent_apply(op, lam, fpsi[j], true);
    st.v[j] = resolvent_extend(op, lam, gv[j], lam * ps0[j].to_double(), s0, true);
  }

  Eigen::MatrixXd V(P, P);
  for (int i = 0; i < P; ++i)
    for (int j = 0; j < P; ++j) {
      double acc = 0;
      for (size_t k = 0; k < N; ++k) acc += op.weights[k] * fphi[i][k] * gv[j][k];
      V(i, j) = acc;
    }

  double sgn = sign_M(spec);
  std::span<const double> tail(spec.nu.data() + 1, static_cast<size_t>(M));
  for (int j = 0; j < P; ++j) {
    double e = elem_sym_ext(M + 1 - j, tail);
    double par = (j % 2 == 0) ? 1.0 : -1.0;
    st.xi[j] = sgn * (n * V(0, j) + V(1, j) - par * e);
    st.eta[j] = sgn * V(j, M);
  }
  st.accumulated_log_tau = std::log(gap_probability(spec, s0));
  return st;
}

PrimaryState integrate(const EnsembleSpec& spec, PrimaryState st,
                       double s_target, double tol, double* max_drift) {
  spec.validate();
  require_state(st, spec);
  if (!(tol > 0) || tol > 1e-2) throw ConfigError("integrate: tol out of range");
  if (s_target < st.s) throw ConfigError("integrate: s_target below state.s");
  if (s_target == st.s) return st;

  const int P = spec.M + 1, L = 4 * P + 1;
  auto pack = [&](const PrimaryState& x, std::vector<double>& y) {
    for (int j = 0; j < P; ++j) {
      y[j] = x.u[j];
      y[P + j] = x.v[j];
      y[2 * P + j] = x.xi[j];
      y[3 * P + j] = x.eta[j];
    }
    y[4 * P] = x.accumulated_log_tau;
  };
  auto unpack = [&](double s, const std::vector<double>& y, PrimaryState& x) {
    x.s = s;
    for (int j = 0; j < P; ++j) {
      x.u[j] = y[j];
      x.v[j] = y[P + j];
      x.xi[j] = y[2 * P + j];
      x.eta[j] = y[3 * P + j];
    }
    x.accumulated_log_tau = y[4 * P];
  };

  PrimaryState work = st;
  std::vector<double> y(L), k[7], ytmp(L), ynew(L);
  for (auto& ki : k) ki.resize(L);
  pack(st, y);
  auto f = [&](double s, const std::vector<double>& yy, std::vector<double>& out) {
    unpack(s, yy, work);
    PrimaryState d = rhs(work, spec);
    pack(d, out);
    out[4 * P] = d.accumulated_log_tau;
  };

  // Dormand-Prince 5(4) tableau.
  static const double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
  static const double a21 = 1.0 / 5;
  static const double a31 = 3.0 / 40, a32 = 9.0 / 40;
  static const double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
  static const double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187,
                      a53 = 64448.0 / 6561, a54 = -212.0 / 729;
  static const double a61 = 9017.0 / 3168, a62 = -355.0 / 33,
                      a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                      a65 = -5103.0 / 18656;
  static const double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192,
                      b5 = -2187.0 / 6784, b6 = 11.0 / 84;
  static const double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920,
                      e5 = -17253.0 / 339200, e6 = 22.0 / 525, e7 = -1.0 / 40;

  DriftMonitor mon;
  mon.seed(st, spec);
  double budget = 100.0 * tol;

  double s = st.s;
  double h = std::min(0.02 * s, s_target - s);
  f(s, y, k[0]);
  double err_prev = 1.0;
  long steps = 0;
  while (s < s_target) {
    if (++steps > 2000000)
      throw NumericalError("integrate: step budget exhausted");
    h = std::min(h, s_target - s);
    if (h < 1e-14 * std::max(1.0, s))
      throw NumericalError("integrate: step size collapse at s = " +
                           std::to_string(s));

    for (int i = 0; i < L; ++i) ytmp[i] = y[i] + h * a21 * k[0][i];
    f(s + c2 * h, ytmp, k[1]);
    for (int i = 0; i < L; ++i)
      ytmp[i] = y[i] + h * (a31 * k[0][i] + a32 * k[1][i]);
    f(s + c3 * h, ytmp, k[2]);
    for (int i = 0; i < L; ++i)
      ytmp[i] = y[i] + h * (a41 * k[0][i] + a42 * k[1][i] + a43 * k[2][i]);
    f(s + c4 * h, ytmp, k[3]);
    for (int i = 0; i < L; ++i)
      ytmp[i] = y[i] + h * (a51 * k[0][i] + a52 * k[1][i] + a53 * k[2][i] +
                            a54 * k[3][i]);
    f(s + c5 * h, ytmp, k[4]);
    for (int i = 0; i < L; ++i)
      ytmp[i] = y[i] + h * (a61 * k[0][i] + a62 * k[1][i] + a63 * k[2][i] +
                            a64 * k[3][i] + a65 * k[4][i]);
    f(s + h, ytmp, k[5]);
    for (int i = 0; i < L; ++i)
      ynew[i] = y[i] + h * (b1 * k[0][i] + b3 * k[2][i] + b4 * k[3][i] +
                            b5 * k[4][i] + b6 * k[5][i]);
    f(s + h, ynew, k[6]);

    double smag = 0;
    for (int i = 0; i < L; ++i) smag = std::max(smag, std::abs(y[i]));
    double err = 0;
    for (int i = 0; i < L; ++i) {
      double e = h * (e1 * k[0][i] + e3 * k[2][i] + e4 * k[3][i] +
                      e5 * k[4][i] + e6 * k[5][i] + e7 * k[6][i]);
      double sc = tol * (std::max(std::abs(y[i]), std::abs(ynew[i])) +
                         0.01 * smag + 1e-280);
      err += (e / sc) * (e / sc);
    }
    err = std::sqrt(err / L);

    if (err <= 1.0) {
      s += h;
      y.swap(ynew);
      k[0].swap(k[6]);
      unpack(s, y, work);
      mon.check(work, spec, budget);
      double fac = 0.9 * std::pow(std::max(err, 1e-10), -0.14) *
                   std::pow(err_prev, 0.08);
      h *= std::clamp(fac, 0.2, 5.0);
      err_prev = std::max(err, 1e-4);
    } else {
      h *= std::clamp(0.9 * std::pow(err, -0.2), 0.2, 0.9);
    }
  }
  if (max_drift) *max_drift = mon.worst;
  PrimaryState out = st;
  unpack(s, y, out);
  return out;
}

std::vector<PrimaryState> sample_trajectory(const EnsembleSpec& spec,
                                            PrimaryState st,
                                            std::span<const double> s_samples,
                                            double tol) {
  std::vector<PrimaryState> out;
  out.reserve(s_samples.size());
  double prev = st.s;
  for (double s : s_samples) {
    if (s < prev) throw ConfigError("sample points must be nondecreasing");
    st = integrate(spec, std::move(st), s, tol);
    out.push_back(st);
    prev = s;
  }
  return out;
}

double gap_via_dynamics(const EnsembleSpec& spec, double s, double tol,
                        double* max_drift) {
  spec.validate();
  if (!(s > 0)) throw ConfigError("gap_via_dynamics requires s > 0");
  double s0 = std::min(0.1, 0.5 * s);
  PrimaryState st = initial_state_numeric(spec, s0);
  st = integrate(spec, std::move(st), s, tol, max_drift);
  return std::exp(st.accumulated_log_tau);
}

std::vector<double> conserved_quantities(const PrimaryState& st,
                                         const EnsembleSpec& spec) {
  spec.validate();
  require_state(st, spec);
  std::vector<double> r, sc;
  conserved_with_scales(st, spec, r, sc);
  return r;
}

SchlesingerTriple schlesinger_matrices(const PrimaryState& st,
                                       const EnsembleSpec& spec) {
  spec.validate();
  require_state(st, spec);
  int M = spec.M, P = M + 1;
  SchlesingerTriple t;
  t.E = Eigen::MatrixXd::Zero(P, P);
  double se = (M % 2 == 0) ? -1.0 : 1.0;  // (-1)^{M+1}
  t.E(M, 0) = se * spec.n;
  t.E(M, 1) = se;

  t.C = Eigen::MatrixXd::Zero(P, P);
  for (int j = 0; j < M; ++j) {
    t.C(j, 0) = -spec.n * st.eta[j];
    t.C(j, 1) += -st.eta[j];
    t.C(j, j + 1) += -1.0;
  }
  t.C(M, 0) = -spec.n * st.eta[M] + st.xi[0];
  t.C(M, 1) = -st.eta[M] + st.xi[1];
  for (int j = 2; j <= M; ++j) t.C(M, j) = st.xi[j];

  Eigen::VectorXd u = Eigen::Map<const Eigen::VectorXd>(st.u.data(), P);
  Eigen::VectorXd v = Eigen::Map<const Eigen::VectorXd>(st.v.data(), P);
  t.A2 = -u * v.transpose();
  return t;
}

double schlesinger_residual(std::span<const PrimaryState> trajectory,
                            const EnsembleSpec& spec) {
  spec.validate();
  size_t N = trajectory.size();
  if (N < 5)
    throw ConfigError("schlesinger_residual needs at least 5 uniform samples");
  double h = trajectory[1].s - trajectory[0].s;
  for (size_t i = 0; i + 1 < N; ++i)
    if (std::abs(trajectory[i + 1].s - trajectory[i].s - h) > 1e-9 * h)
      throw ConfigError("schlesinger_residual needs uniform s spacing");

  std::vector<SchlesingerTriple> tr;
  tr.reserve(N);
  for (const auto& st : trajectory) tr.push_back(schlesinger_matrices(st, spec));

  double worst = 0;
  for (size_t i = 2; i + 2 < N; ++i) {
    double s = trajectory[i].s;
    Eigen::MatrixXd dA = (tr[i - 2].A2 - 8 * tr[i - 1].A2 + 8 * tr[i + 1].A2 -
                          tr[i + 2].A2) /
                         (12 * h);
    Eigen::MatrixXd dC = (tr[i - 2].C - 8 * tr[i - 1].C + 8 * tr[i + 1].C -
                          tr[i + 2].C) /
                         (12 * h);
    Eigen::MatrixXd lhs = tr[i].C + s * tr[i].E;
    Eigen::MatrixXd r1 = s * dA - (lhs * tr[i].A2 - tr[i].A2 * lhs);
    Eigen::MatrixXd r2 = dC - (tr[i].E * tr[i].A2 - tr[i].A2 * tr[i].E);
    worst = std::max(worst, r1.cwiseAbs().maxCoeff());
    worst = std::max(worst, r2.cwiseAbs().maxCoeff());
  }
  return worst;
}

std::vector<double> m1_reduction_checks(const PrimaryState& st,
                                        const EnsembleSpec& spec) {
  spec.validate();
  if (spec.M != 1) throw ConfigError("m1_reduction_checks requires M = 1");
  require_state(st, spec);
  int n = spec.n;
  double nu = spec.nu[1], s = st.s;
  PrimaryState d = rhs(st, spec);

  double w = spec.lambda * std::pow(s, nu) * std::exp(-s) /
             (std::tgamma(n + 1.0) * std::tgamma(n + nu + 1));
  std::vector<double> r;
  r.push_back(st.v[1] - w * st.u[0]);
  r.push_back(st.v[0] + w * st.u[1]);

  double deta0 = d.eta[0], deta1 = d.eta[1];
  double num = s * (n * deta0 + deta1) +
               (n * st.eta[0] - 1) * (n * st.eta[0] + st.eta[1]) +
               n * (st.eta[1] - nu * st.eta[0]);
  r.push_back(st.xi[0] * (1 + st.eta[0]) - num);

  // Second derivatives of eta by the product rule along the flow.
  double d2eta0 = -(d.u[0] * st.v[1] + st.u[0] * d.v[1]);
  double d2eta1 = -(d.u[1] * st.v[1] + st.u[1] * d.v[1]);
  double dxi0 = d.xi[0];
  r.push_back(s * d2eta0 + 2 * (1 + st.eta[0]) * deta1 +
              (2 * n * st.eta[0] + s - nu) * deta0);
  r.push_back(s * d2eta1 - (1 + st.eta[0]) * (n * deta1 + dxi0) +
              (n * st.eta[1] - n * s - st.xi[0]) * deta0);
  return r;
}

}  // namespace ginprod
