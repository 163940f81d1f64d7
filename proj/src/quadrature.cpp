#include "ginprod/quadrature.hpp"

#include <cmath>
#include <map>
#include <mutex>

namespace ginprod {

namespace {

QuadratureRule compute_gauss_legendre(int order) {
  QuadratureRule rule;
  rule.nodes.resize(order);
  rule.weights.resize(order);
  for (int i = 0; i < (order + 1) / 2; ++i) {
    double x = std::cos(M_PI * (i + 0.75) / (order + 0.5));
    double dp = 0;
    for (int iter = 0; iter < 100; ++iter) {
      // Legendre P_order and derivative by upward recurrence
      double p0 = 1.0, p1 = x;
      for (int k = 2; k <= order; ++k) {
        double p2 = ((2 * k - 1) * x * p1 - (k - 1) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      dp = order * (x * p1 - p0) / (x * x - 1.0);
      double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-15) break;
    }
    double w = 2.0 / ((1.0 - x * x) * dp * dp);
    rule.nodes[i] = -x;
    rule.weights[i] = w;
    rule.nodes[order - 1 - i] = x;
    rule.weights[order - 1 - i] = w;
  }
  return rule;
}

}  // namespace

const QuadratureRule& gauss_legendre(int order) {
  if (order < 1) throw ConfigError("gauss_legendre: order must be >= 1");
  static std::map<int, QuadratureRule> cache;
  static std::mutex mtx;
  std::lock_guard<std::mutex> lock(mtx);
  auto it = cache.find(order);
  if (it == cache.end()) it = cache.emplace(order, compute_gauss_legendre(order)).first;
  return it->second;
}

QuadratureRule map_affine(const QuadratureRule& rule, double a, double b) {
  QuadratureRule out;
  size_t n = rule.nodes.size();
  out.nodes.resize(n);
  out.weights.resize(n);
  double mid = 0.5 * (a + b), half = 0.5 * (b - a);
  for (size_t i = 0; i < n; ++i) {
    out.nodes[i] = mid + half * rule.nodes[i];
    out.weights[i] = half * rule.weights[i];
  }
  return out;
}

QuadratureRule map_sqrt_left(const QuadratureRule& rule, double b) {
  QuadratureRule out;
  size_t n = rule.nodes.size();
  out.nodes.resize(n);
  out.weights.resize(n);
  for (size_t i = 0; i < n; ++i) {
    double u = 0.5 * (1.0 + rule.nodes[i]);  // (0, 1)
    double wu = 0.5 * rule.weights[i];
    out.nodes[i] = b * u * u;
    out.weights[i] = 2.0 * b * u * wu;
  }
  return out;
}

}  // namespace ginprod
