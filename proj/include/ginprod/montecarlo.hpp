#pragma once

// Physical oracle: samples products of independent complex Ginibre matrices
// and estimates gap probabilities of the smallest squared singular value
// empirically.

#include <cstdint>
#include <span>
#include <vector>

#include "ginprod/types.hpp"

namespace ginprod {

// Sampling plan for the matrix product. Requires every nu_m to be a
// nonnegative integer: the factor X_m has dimensions (n + nu_m) x (n + nu_{m-1}).
struct SamplerConfig {
  EnsembleSpec spec;
  std::int64_t samples = 0;
  std::uint64_t seed = 0;

  void validate() const;  // integer nu, samples >= 1, n + max nu <= 512
};

// Generator identity string for output metadata.
const char* sampler_prng_name();

// One smallest squared singular value of Y = X_M ... X_1 per sample. Entries
// are standard complex Gaussians with E|z|^2 = 1 (real and imaginary parts
// independent, variance 1/2 each); the stream is deterministic in
// (seed, sample index) and independent of thread scheduling.
std::vector<double> sample_min_sq_singular_value(const SamplerConfig& config);

struct EmpiricalGap {
  std::vector<double> estimates;        // fraction of samples above each s
  std::vector<double> standard_errors;  // sqrt(p(1-p)/N)
};

EmpiricalGap empirical_gap(const SamplerConfig& config,
                           std::span<const double> s_grid);

}  // namespace ginprod
