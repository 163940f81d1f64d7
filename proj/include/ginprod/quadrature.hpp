#pragma once

#include <vector>

#include "ginprod/types.hpp"

namespace ginprod {

struct QuadratureRule {
  std::vector<double> nodes;
  std::vector<double> weights;
};

// Gauss-Legendre rule on [-1, 1]; results are cached per order.
const QuadratureRule& gauss_legendre(int order);

// Affine image of a [-1, 1] rule on (a, b).
QuadratureRule map_affine(const QuadratureRule& rule, double a, double b);

// Image of a [-1, 1] rule on (0, b) under x = b u^2, which absorbs algebraic
// endpoint behavior x^p (non-integer p) at the left end.
QuadratureRule map_sqrt_left(const QuadratureRule& rule, double b);

}  // namespace ginprod
