#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace ginprod {

struct IdentityCheck {
  std::string name;
  int trials = 0;
  int failures = 0;
  bool pass() const { return failures == 0 && trials > 0; }
};

// Evaluates both sides of the partial-fraction lemmas and the bilinear
// operator identity in exact rational arithmetic at pseudo-random rational
// points (n, l <= 6 by default) and reports exact-equality results.
std::vector<IdentityCheck> check_exact_identities(std::uint64_t seed,
                                                  int max_order = 6,
                                                  int points_per_case = 20);

}  // namespace ginprod
