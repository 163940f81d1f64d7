#include "ginprod/montecarlo.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "doctest.h"
#include "ginprod/fredholm.hpp"
#include "ginprod/types.hpp"

using namespace ginprod;

namespace {

SamplerConfig cfg(int M, int n, std::vector<double> tail, std::int64_t N,
                  std::uint64_t seed) {
  return SamplerConfig{EnsembleSpec::make(M, n, tail), N, seed};
}

}  // namespace

TEST_CASE("normalization lock: single entry is a unit exponential") {
  auto values = sample_min_sq_singular_value(cfg(1, 1, {0.0}, 100000, 42));
  double mean = std::accumulate(values.begin(), values.end(), 0.0) /
                static_cast<double>(values.size());
  // Var of Exponential(1) is 1.
  CHECK(std::abs(mean - 1.0) <= 3.0 / std::sqrt(100000.0));

  double above = static_cast<double>(
                     std::count_if(values.begin(), values.end(),
                                   [](double v) { return v > 1.0; })) /
                 static_cast<double>(values.size());
  double se = std::sqrt(std::exp(-1.0) * (1 - std::exp(-1.0)) / 100000.0);
  CHECK(std::abs(above - std::exp(-1.0)) <= 3.0 * se);
}

TEST_CASE("rectangular single factor gives a Gamma law") {
  // n=1, M=1, nu=2: the value is a sum of three unit exponentials;
  // P(value > 1) = e^{-1} (1 + 1 + 1/2).
  auto values = sample_min_sq_singular_value(cfg(1, 1, {2.0}, 100000, 7));
  double target = std::exp(-1.0) * 2.5;
  double above = static_cast<double>(
                     std::count_if(values.begin(), values.end(),
                                   [](double v) { return v > 1.0; })) /
                 static_cast<double>(values.size());
  double se = std::sqrt(target * (1 - target) / 100000.0);
  CHECK(std::abs(above - target) <= 3.0 * se);
}

TEST_CASE("product of two unit entries matches the Bessel tail") {
  // n=1, M=2, nu=(0,0): product of two independent Exponential(1);
  // P(value > 1) = 2 K_1(2).
  auto values = sample_min_sq_singular_value(cfg(2, 1, {0.0, 0.0}, 100000, 11));
  double target = 0.279731763633044855;
  double above = static_cast<double>(
                     std::count_if(values.begin(), values.end(),
                                   [](double v) { return v > 1.0; })) /
                 static_cast<double>(values.size());
  double se = std::sqrt(target * (1 - target) / 100000.0);
  CHECK(std::abs(above - target) <= 3.0 * se);
}

TEST_CASE("fixed seed reproduces the stream exactly") {
  auto a = sample_min_sq_singular_value(cfg(2, 3, {1.0, 2.0}, 500, 123));
  auto b = sample_min_sq_singular_value(cfg(2, 3, {1.0, 2.0}, 500, 123));
  CHECK(a == b);
  auto c = sample_min_sq_singular_value(cfg(2, 3, {1.0, 2.0}, 500, 124));
  CHECK(a != c);
}

TEST_CASE("sampler configuration guards") {
  CHECK_THROWS_AS(sample_min_sq_singular_value(cfg(1, 2, {0.5}, 10, 1)),
                  ConfigError);
  CHECK_THROWS_AS(sample_min_sq_singular_value(cfg(1, 2, {1.0}, 0, 1)),
                  ConfigError);
  CHECK_THROWS_AS(sample_min_sq_singular_value(cfg(1, 500, {50.0}, 10, 1)),
                  ConfigError);
}

TEST_CASE("empirical gap estimates are monotone probabilities") {
  auto config = cfg(2, 2, {1.0, 1.0}, 20000, 5);
  std::vector<double> grid = {0.0, 0.01, 0.05, 0.2, 1.0, 5.0};
  EmpiricalGap g = empirical_gap(config, grid);
  REQUIRE(g.estimates.size() == grid.size());
  CHECK(g.estimates[0] == 1.0);
  CHECK(g.standard_errors[0] == 0.0);
  for (size_t i = 0; i < grid.size(); ++i) {
    CHECK(g.estimates[i] >= 0.0);
    CHECK(g.estimates[i] <= 1.0);
    if (i) CHECK(g.estimates[i] <= g.estimates[i - 1]);
  }
  CHECK_THROWS_AS(empirical_gap(config, std::vector<double>{-1.0}), ConfigError);
}

TEST_CASE("empirical gap matches the determinant route within three sigma") {
  auto config = cfg(2, 5, {1.0, 2.0}, 100000, 2026);
  auto values = sample_min_sq_singular_value(config);
  std::sort(values.begin(), values.end());
  // Probe at empirical quantiles so each comparison has useful power.
  std::vector<double> grid;
  for (double q : {0.1, 0.3, 0.5, 0.7, 0.9})
    grid.push_back(values[static_cast<size_t>(q * 100000)]);
  EmpiricalGap g = empirical_gap(config, grid);
  for (size_t i = 0; i < grid.size(); ++i) {
    double E = gap_probability(config.spec, grid[i]);
    CAPTURE(grid[i]);
    CHECK(std::abs(g.estimates[i] - E) <= 3.0 * g.standard_errors[i]);
  }
}
