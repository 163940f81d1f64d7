#include <string>
#include <vector>

#include "doctest.h"
#include "ginprod/exact_identities.hpp"

using namespace ginprod;

TEST_CASE("rational identity checks all pass") {
  auto checks = check_exact_identities(20250814);
  REQUIRE(checks.size() == 4);
  std::vector<std::string> names = {
      "partial_fraction_sum_power_n", "partial_fraction_sum_power_n_plus_1",
      "triple_sum_reduction", "bilinear_operator_identity"};
  for (size_t i = 0; i < checks.size(); ++i) {
    CAPTURE(checks[i].name);
    CHECK(checks[i].name == names[i]);
    CHECK(checks[i].trials > 0);
    CHECK(checks[i].failures == 0);
    CHECK(checks[i].pass());
  }
}

TEST_CASE("trial counts cover the requested orders and points") {
  auto checks = check_exact_identities(7, 4, 5);
  // Partial-fraction sums: one trial per (order, point).
  CHECK(checks[0].trials == 5 * 5);  // n = 0..4
  CHECK(checks[1].trials == 5 * 5);
  CHECK(checks[2].trials == 5 * 5);  // l = 0..4
  // Operator identity: one random rational n per (l, point) trial.
  CHECK(checks[3].trials == 5 * 5);
}

TEST_CASE("deterministic for a fixed seed, robust across seeds") {
  auto a = check_exact_identities(42, 3, 4);
  auto b = check_exact_identities(42, 3, 4);
  for (size_t i = 0; i < a.size(); ++i) {
    CHECK(a[i].trials == b[i].trials);
    CHECK(a[i].failures == b[i].failures);
  }
  for (std::uint64_t seed : {1ull, 99ull, 123456789ull}) {
    for (const auto& c : check_exact_identities(seed, 3, 4)) CHECK(c.pass());
  }
}
