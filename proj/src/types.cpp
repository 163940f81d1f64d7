#include "ginprod/types.hpp"

#include <algorithm>
#include <limits>

namespace ginprod {

void SeriesTruncation::validate() const {
  if (max_terms < 1) throw ConfigError("SeriesTruncation: max_terms must be >= 1");
  if (!(rel_tol > 0) || !(rel_tol < 1))
    throw ConfigError("SeriesTruncation: rel_tol must lie in (0, 1)");
}

void ContourSpec::validate() const {
  if (!(abscissa > 0)) throw ConfigError("ContourSpec: abscissa must be > 0");
  if (half_height < 0) throw ConfigError("ContourSpec: half_height must be >= 0");
  if (node_count != 0 && node_count < 8)
    throw ConfigError("ContourSpec: node_count must be 0 (auto) or >= 8");
}

EnsembleSpec EnsembleSpec::make(int M, int n, const std::vector<double>& nu_tail,
                                double lambda) {
  EnsembleSpec spec;
  spec.M = M;
  spec.n = n;
  spec.nu.assign(1, 0.0);
  spec.nu.insert(spec.nu.end(), nu_tail.begin(), nu_tail.end());
  spec.lambda = lambda;
  spec.validate();
  return spec;
}

void EnsembleSpec::validate() const {
  if (M < 1) throw ConfigError("EnsembleSpec: M must be >= 1");
  if (n < 1) throw ConfigError("EnsembleSpec: n must be >= 1");
  if (static_cast<int>(nu.size()) != M + 1)
    throw ConfigError("EnsembleSpec: nu must hold M+1 entries (nu_0 = 0 first)");
  if (nu[0] != 0.0) throw ConfigError("EnsembleSpec: nu_0 must equal 0");
  for (double v : nu)
    if (!(v >= 0)) throw ConfigError("EnsembleSpec: all nu_j must be >= 0");
  if (!(lambda >= 0) || !(lambda <= 1))
    throw ConfigError("EnsembleSpec: lambda must lie in [0, 1]");
}

double EnsembleSpec::nu_max() const {
  return *std::max_element(nu.begin(), nu.end());
}

double EnsembleSpec::nu_min_tail() const {
  return *std::min_element(nu.begin() + 1, nu.end());
}

static double dist_to_integer(double x) {
  return std::abs(x - std::round(x));
}

bool EnsembleSpec::nu_generic(double tol) const {
  for (int i = 1; i <= M; ++i) {
    if (dist_to_integer(nu[i]) < tol) return false;
    for (int j = i + 1; j <= M; ++j)
      if (dist_to_integer(nu[i] - nu[j]) < tol) return false;
  }
  return true;
}

bool EnsembleSpec::nu_all_integer(double tol) const {
  for (int i = 1; i <= M; ++i)
    if (dist_to_integer(nu[i]) > tol) return false;
  return true;
}

Scaled Scaled::normalized() const {
  if (value == 0 || !std::isfinite(value)) return {0.0, value};
  int e = 0;
  double m = std::frexp(value, &e);
  return {log_scale + e * std::log(2.0), m};
}

Scaled scaled_linear_combination(const std::vector<Scaled>& terms,
                                 const std::vector<double>& coeffs) {
  double top = -std::numeric_limits<double>::infinity();
  for (size_t i = 0; i < terms.size(); ++i)
    if (terms[i].value != 0 && coeffs[i] != 0)
      top = std::max(top, terms[i].log_scale);
  if (!std::isfinite(top)) return {0.0, 0.0};
  double acc = 0, comp = 0;  // Kahan
  for (size_t i = 0; i < terms.size(); ++i) {
    if (terms[i].value == 0 || coeffs[i] == 0) continue;
    double t = coeffs[i] * terms[i].value * std::exp(terms[i].log_scale - top);
    double y = t - comp;
    double s = acc + y;
    comp = (s - acc) - y;
    acc = s;
  }
  return {top, acc};
}

}  // namespace ginprod
