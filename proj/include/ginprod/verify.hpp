#pragma once

// Self-contained verification suites cross-checking the library's routes
// against each other and against closed forms: exact rational identities,
// kernel form equivalence, recurrence residuals, determinant-vs-flow route
// agreement, conserved-quantity drift, Painleve-level residuals, and Monte
// Carlo three-sigma comparisons.

#include <cstdint>
#include <string>
#include <vector>

namespace ginprod {

struct SuiteResult {
  std::string name;
  bool pass = false;
  // Worst residual measured by the suite, normalized by the natural scale of
  // each check (term magnitude, drift budget base, or standard error).
  double max_residual = 0;
  std::string details;
};

// Knobs shared by the suites; the defaults give the full desk profile.
struct VerifyOptions {
  std::int64_t mc_samples = 100000;
  std::uint64_t seed = 1;
  double ode_tol = 1e-10;
  void validate() const;
};

// Canonical run order: identities, forms, recurrences, routes, conserved,
// painleve, mc.
std::vector<std::string> verification_suite_names();

// Runs one suite by name; unknown names raise ConfigError.
SuiteResult run_verification_suite(const std::string& name,
                                   const VerifyOptions& opts = {});

std::vector<SuiteResult> run_all_verification_suites(
    const VerifyOptions& opts = {});

}  // namespace ginprod
