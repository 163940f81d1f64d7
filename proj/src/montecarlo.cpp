#include "ginprod/montecarlo.hpp"

#include <Eigen/Dense>
#include <Eigen/SVD>
#include <cmath>
#include <complex>
#include <numbers>
#include <random>
#include <thread>

namespace ginprod {

namespace {

constexpr int kStreams = 8;

std::uint64_t splitmix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

// Uniform in (0,1), platform-independent given the engine's output.
double uniform01(std::mt19937_64& eng) {
  return (static_cast<double>(eng() >> 11) + 0.5) * 0x1p-53;
}

// Standard complex Gaussian with E|z|^2 = 1 in polar form; |z|^2 is exactly
// Exponential(1) in the underlying uniform.
std::complex<double> complex_gaussian(std::mt19937_64& eng) {
  double r = std::sqrt(-std::log(uniform01(eng)));
  double t = 2.0 * std::numbers::pi * uniform01(eng);
  return {r * std::cos(t), r * std::sin(t)};
}

double min_sq_singular_value(const EnsembleSpec& spec, std::mt19937_64& eng) {
  int n = spec.n;
  Eigen::MatrixXcd Y;
  for (int m = 1; m <= spec.M; ++m) {
    int rows = n + static_cast<int>(std::lround(spec.nu[m]));
    int cols = m == 1 ? n : static_cast<int>(Y.rows());
    Eigen::MatrixXcd X(rows, cols);
    for (int c = 0; c < cols; ++c)
      for (int r = 0; r < rows; ++r) X(r, c) = complex_gaussian(eng);
    Y = m == 1 ? std::move(X) : Eigen::MatrixXcd(X * Y);
  }
  if (Y.rows() <= 32) {
    Eigen::JacobiSVD<Eigen::MatrixXcd> svd(Y);
    double s = svd.singularValues().tail(1)(0);
    return s * s;
  }
  Eigen::BDCSVD<Eigen::MatrixXcd> svd(Y);
  double s = svd.singularValues().tail(1)(0);
  return s * s;
}

}  // namespace

void SamplerConfig::validate() const {
  spec.validate();
  for (double v : spec.nu)
    if (std::abs(v - std::lround(v)) > 1e-12 || v < 0)
      throw ConfigError("sampler requires nonnegative integer nu");
  if (samples < 1) throw ConfigError("sampler requires samples >= 1");
  if (spec.n + std::lround(spec.nu_max()) > 512)
    throw ConfigError("sampler dimension guard: n + max nu <= 512");
}

const char* sampler_prng_name() {
  return "splitmix64(seed,stream)-seeded std::mt19937_64, 8 fixed streams, "
         "polar Box-Muller complex Gaussians";
}

std::vector<double> sample_min_sq_singular_value(const SamplerConfig& config) {
  config.validate();
  std::vector<double> out(static_cast<size_t>(config.samples));
  auto worker = [&](int stream) {
    std::mt19937_64 eng(splitmix64(
        config.seed + 0x9e3779b97f4a7c15ULL * static_cast<std::uint64_t>(stream + 1)));
    for (std::int64_t i = stream; i < config.samples; i += kStreams)
      out[static_cast<size_t>(i)] = min_sq_singular_value(config.spec, eng);
  };
  std::vector<std::thread> pool;
  pool.reserve(kStreams);
  for (int k = 0; k < kStreams; ++k) pool.emplace_back(worker, k);
  for (auto& t : pool) t.join();
  return out;
}

EmpiricalGap empirical_gap(const SamplerConfig& config,
                           std::span<const double> s_grid) {
  std::vector<double> values = sample_min_sq_singular_value(config);
  EmpiricalGap out;
  out.estimates.reserve(s_grid.size());
  out.standard_errors.reserve(s_grid.size());
  double N = static_cast<double>(values.size());
  for (double s : s_grid) {
    if (s < 0) throw ConfigError("empirical_gap requires s >= 0");
    std::int64_t above = 0;
    for (double v : values) above += v > s;
    double p = static_cast<double>(above) / N;
    out.estimates.push_back(p);
    out.standard_errors.push_back(std::sqrt(p * (1 - p) / N));
  }
  return out;
}

}  // namespace ginprod
