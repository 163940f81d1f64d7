#include "ginprod/kernel.hpp"

#include <algorithm>
#include <cmath>

namespace ginprod {

double elementary_symmetric(int k, std::span<const double> values) {
  int m = static_cast<int>(values.size());
  if (k < 0 || k > m) throw ConfigError("elementary_symmetric: need 0 <= k <= M");
  // e[j] over a growing prefix of the values
  std::vector<double> e(k + 1, 0.0);
  e[0] = 1.0;
  for (int i = 0; i < m; ++i)
    for (int j = std::min(i + 1, k); j >= 1; --j) e[j] += values[i] * e[j - 1];
  return e[k];
}

std::vector<double> alpha_coeffs(std::span<const double> nu_tail) {
  int M = static_cast<int>(nu_tail.size());
  std::vector<double> alpha(M + 1);
  for (int i = 0; i <= M; ++i) {
    double sign = (i % 2 == 0) ? 1.0 : -1.0;
    alpha[i] = sign * elementary_symmetric(M - i, nu_tail);
  }
  return alpha;
}

double recurrence_coeff_a(const EnsembleSpec& spec, int k, int m) {
  spec.validate();
  if (k < 0 || k > spec.M) throw ConfigError("recurrence_coeff_a: need 0 <= k <= M");
  if (m < 0) throw ConfigError("recurrence_coeff_a: need m >= 0");
  if (k > m) return 0.0;
  double pref = 1.0;
  for (int j = 0; j <= spec.M; ++j) pref *= pochhammer(m - k + spec.nu[j] + 1, k);
  double sum = 0.0;
  double jfact = 1.0;  // j!
  for (int j = 0; j <= k + 1; ++j) {
    if (j > 0) jfact *= j;
    double prod = 1.0;
    for (int i = 0; i <= spec.M; ++i) prod *= m + 1 - j + spec.nu[i];
    double kfact = 1.0;  // (k+1-j)!
    for (int t = 2; t <= k + 1 - j; ++t) kfact *= t;
    sum += ((j % 2 == 0) ? 1.0 : -1.0) * prod / (jfact * kfact);
  }
  return pref * sum;
}

KernelEvaluator::KernelEvaluator(const EnsembleSpec& spec, QRoute route,
                                 const ContourSpec& contour)
    : spec_(spec), unit_(spec), route_(route), contour_(contour) {
  spec_.validate();
  unit_.lambda = 1.0;
  alpha_ = alpha_coeffs(std::span<const double>(spec_.nu).subspan(1));
}

std::vector<Scaled> KernelEvaluator::phi_all(double x) const {
  auto pd = eval_P_deltas(unit_, spec_.n, spec_.M, x);
  for (int j = 0; j <= spec_.M; ++j)
    if (j % 2 == 0) pd[j].value = -pd[j].value;
  return pd;
}

std::vector<Scaled> KernelEvaluator::psi_from_deltas(const std::vector<Scaled>& qd,
                                                     double y) const {
  const int M = spec_.M;
  std::vector<Scaled> psi(M + 1);
  for (int j = 0; j <= M; ++j) {
    std::vector<Scaled> terms;
    std::vector<double> coeffs;
    for (int i = 0; i + j <= M; ++i) {
      terms.push_back(qd[i]);
      coeffs.push_back(alpha_[i + j]);
    }
    if (j == 0) {
      terms.push_back(qd[0]);
      coeffs.push_back(-y);
    }
    psi[j] = scaled_linear_combination(terms, coeffs);
  }
  return psi;
}

std::vector<Scaled> KernelEvaluator::psi_all(double y) const {
  return psi_from_deltas(eval_Q_deltas(unit_, spec_.n, spec_.M, y, route_, contour_),
                         y);
}

KernelNodeData KernelEvaluator::node_data(double x) const {
  const int M = spec_.M;
  KernelNodeData nd;
  nd.x = x;
  nd.p_deltas = eval_P_deltas(unit_, spec_.n, M + 1, x);
  nd.psi = psi_all(x);
  // lim_{y->x} of the integrable form: sum_j phi_j'(x) psi_j(x), using
  // d/dx = (1/x) delta and sum_j phi_j psi_j = 0.
  std::vector<Scaled> prods(M + 1);
  std::vector<double> signs(M + 1);
  for (int j = 0; j <= M; ++j) {
    prods[j] = nd.p_deltas[j + 1] * nd.psi[j];
    signs[j] = (j % 2 == 0) ? -1.0 : 1.0;  // (-1)^{j+1}
  }
  nd.diag = scaled_linear_combination(prods, signs).to_double() / x;
  return nd;
}

double KernelEvaluator::pair_eval(const KernelNodeData& a,
                                  const KernelNodeData& b) const {
  double x = a.x, y = b.x;
  if (std::abs(x - y) < 1e-6 * std::max(1.0, std::abs(x)))
    return 0.5 * (a.diag + b.diag);
  const int M = spec_.M;
  std::vector<Scaled> prods(M + 1);
  std::vector<double> signs(M + 1);
  for (int j = 0; j <= M; ++j) {
    prods[j] = a.p_deltas[j] * b.psi[j];
    signs[j] = (j % 2 == 0) ? -1.0 : 1.0;
  }
  return scaled_linear_combination(prods, signs).to_double() / (x - y);
}

double KernelEvaluator::sum_form(double x, double y) const {
  double acc = 0.0;
  for (int k = 0; k < spec_.n; ++k) {
    // j_max = 1 so the cancellation guard sees the series scale even when x
    // sits on a root of P_k.
    Scaled p = eval_P_deltas(unit_, k, 1, x)[0];
    Scaled q = eval_Q_deltas(unit_, k, 0, y, route_, contour_)[0];
    acc += (p * q).to_double();
  }
  return spec_.lambda * acc;
}

double KernelEvaluator::integrable(double x, double y) const {
  if (std::abs(x - y) < 1e-6 * std::max(1.0, std::abs(x)))
    return diagonal(0.5 * (x + y));
  return spec_.lambda * pair_eval(node_data(x), node_data(y));
}

double KernelEvaluator::diagonal(double x) const {
  return spec_.lambda * node_data(x).diag;
}

double KernelEvaluator::eval(KernelForm form, double x, double y) const {
  if (!(x > 0) || !(y > 0)) throw ConfigError("kernel_eval: requires x, y > 0");
  if (spec_.lambda == 0) return 0.0;
  return form == KernelForm::SumForm ? sum_form(x, y) : integrable(x, y);
}

double phi(const EnsembleSpec& spec, int j, double x) {
  if (j < 0 || j > spec.M) throw ConfigError("phi: need 0 <= j <= M");
  return KernelEvaluator(spec).phi_all(x)[j].to_double();
}

double psi(const EnsembleSpec& spec, int j, double y) {
  if (j < 0 || j > spec.M) throw ConfigError("psi: need 0 <= j <= M");
  EnsembleSpec unit = spec;
  unit.lambda = 1.0;
  KernelEvaluator ev(unit);
  return spec.lambda * ev.psi_all(y)[j].to_double();
}

double kernel_eval(const EnsembleSpec& spec, KernelForm form, double x, double y) {
  return KernelEvaluator(spec).eval(form, x, y);
}

double kernel_diagonal(const EnsembleSpec& spec, double x) {
  if (!(x > 0)) throw ConfigError("kernel_diagonal: requires x > 0");
  if (spec.lambda == 0) return 0.0;
  return KernelEvaluator(spec).diagonal(x);
}

double hard_edge_scaled(const EnsembleSpec& spec, double x, double y) {
  double n = spec.n;
  KernelEvaluator ev(spec);
  if (std::abs(x - y) < 1e-6 * std::max(1.0, std::abs(x)))
    return ev.diagonal(0.5 * (x + y) / n) / n;
  return ev.eval(KernelForm::IntegrableForm, x / n, y / n) / n;
}

}  // namespace ginprod
