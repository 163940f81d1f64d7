#include "ginprod/exact_identities.hpp"

#include <boost/multiprecision/cpp_int.hpp>
#include <random>

namespace ginprod {

namespace {

using Rat = boost::multiprecision::cpp_rational;
using Int = boost::multiprecision::cpp_int;

Int factorial(int n) {
  Int f = 1;
  for (int i = 2; i <= n; ++i) f *= i;
  return f;
}

Rat rpow(const Rat& x, int p) {
  Rat r = 1;
  for (int i = 0; i < p; ++i) r *= x;
  return r;
}

Rat rpoch(const Rat& a, int k) {
  Rat r = 1;
  for (int i = 0; i < k; ++i) r *= a + i;
  return r;
}

struct RatGen {
  std::mt19937_64 rng;
  explicit RatGen(std::uint64_t seed) : rng(seed) {}

  // non-integer rational, numerator in [-50, 50], denominator in [2, 97]
  Rat non_integer() {
    for (;;) {
      std::uniform_int_distribution<int> num(-50, 50);
      std::uniform_int_distribution<int> den(2, 97);
      int p = num(rng), q = den(rng);
      if (p % q != 0) return Rat(p, q);
    }
  }
};

// sum_{i=0}^n (-1)^i (x-i)^e / (i! (n-i)! (y+i)) with e = n or n+1
Rat partial_fraction_sum(const Rat& x, const Rat& y, int n, int e) {
  Rat s = 0;
  for (int i = 0; i <= n; ++i) {
    Rat term = rpow(x - i, e) / (factorial(i) * factorial(n - i) * (y + i));
    s += (i % 2 == 0) ? term : -term;
  }
  return s;
}

bool check_l32a(const Rat& x, const Rat& y, int n) {
  return partial_fraction_sum(x, y, n, n) == rpow(x + y, n) / rpoch(y, n + 1);
}

bool check_l32b(const Rat& x, const Rat& y, int n) {
  return partial_fraction_sum(x, y, n, n + 1) ==
         rpow(x + y, n + 1) / rpoch(y, n + 1) - 1;
}

bool check_l33(const Rat& x, const Rat& y, const Rat& z, int l) {
  Rat lhs = 0;
  for (int k = 1; k <= l; ++k)
    for (int m = 0; m < k; ++m)
      for (int j = 0; j <= k + 1; ++j) {
        Rat term = rpoch(x, k - m) * rpoch(y, m) * rpow(z + m - j + 1, l + 1) /
                   (factorial(j) * factorial(k + 1 - j));
        lhs += ((j + m) % 2 == 0) ? term : -term;
      }
  Rat rhs = rpow(z, l + 1) / (1 - y) - rpow(x + z, l + 1) / (1 - x - y) +
            x * rpow(1 - y + z, l + 1) / ((1 - y) * (1 - x - y));
  return lhs == rhs;
}

// The bilinear-operator identity with n, dx, dy as commuting rational
// indeterminates; the k-sum is extended past l to also certify that those
// contributions vanish identically.
bool check_operator_identity(const Rat& n, const Rat& dx, const Rat& dy, int l,
                             int k_max) {
  Rat lhs = 0;
  for (int k = 1; k <= k_max; ++k)
    for (int m = 0; m < k; ++m)
      for (int j = 0; j <= k + 1; ++j) {
        Rat term = rpoch(dx - n, k - m) * rpoch(dy + n + 1, m) *
                   rpow(n + m - j + 1, l + 1) /
                   (factorial(j) * factorial(k + 1 - j));
        lhs += ((j + m) % 2 == 0) ? term : -term;
      }
  Rat rhs = 0;
  for (int i = 0; i <= l; ++i)
    rhs += (rpow(dx, l - i) - rpow(n, l - i)) * rpow(-dy, i);
  return lhs == rhs;
}

}  // namespace

std::vector<IdentityCheck> check_exact_identities(std::uint64_t seed, int max_order,
                                                  int points_per_case) {
  RatGen gen(seed);
  IdentityCheck a{"partial_fraction_sum_power_n", 0, 0};
  IdentityCheck b{"partial_fraction_sum_power_n_plus_1", 0, 0};
  IdentityCheck c{"triple_sum_reduction", 0, 0};
  IdentityCheck d{"bilinear_operator_identity", 0, 0};

  for (int n = 0; n <= max_order; ++n)
    for (int t = 0; t < points_per_case; ++t) {
      Rat x = gen.non_integer(), y = gen.non_integer();
      ++a.trials;
      if (!check_l32a(x, y, n)) ++a.failures;
      ++b.trials;
      if (!check_l32b(x, y, n)) ++b.failures;
    }

  for (int l = 0; l <= max_order; ++l)
    for (int t = 0; t < points_per_case; ++t) {
      Rat x = gen.non_integer(), y = gen.non_integer(), z = gen.non_integer();
      if (x + y == 1) x += Rat(1, 101);
      ++c.trials;
      if (!check_l33(x, y, z, l)) ++c.failures;
      Rat n = gen.non_integer(), dx = gen.non_integer(), dy = gen.non_integer();
      ++d.trials;
      if (!check_operator_identity(n, dx, dy, l, l + 2)) ++d.failures;
    }

  return {a, b, c, d};
}

}  // namespace ginprod
