#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

#include "sis/error.hpp"

namespace sis {

// Deterministic random source. Only the raw mt19937_64 stream is consumed;
// all distributions are derived here so that generated bytes do not depend
// on standard-library distribution internals.
class Rng {
public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }

  // Uniform in [0, 1) with 53-bit resolution.
  double uniform01() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

  // Uniform in [0, n) without modulo bias.
  std::uint64_t below(std::uint64_t n) {
    if (n == 0) throw Error(errc::range, "Rng::below requires n > 0");
    const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
    std::uint64_t x = next_u64();
    while (x >= limit) x = next_u64();
    return x % n;
  }

  // Uniform integer in [lo, hi], inclusive.
  std::int64_t uniform_int(std::int64_t lo, std::int64_t hi) {
    if (lo > hi) throw Error(errc::range, "uniform_int: lo > hi");
    const std::uint64_t span = static_cast<std::uint64_t>(hi - lo) + 1;
    return lo + static_cast<std::int64_t>(below(span));
  }

  // Standard normal via Box-Muller. Two uniforms per draw, no cached state.
  double normal() {
    double u1 = uniform01();
    while (u1 <= 0.0) u1 = uniform01();
    const double u2 = uniform01();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586477 * u2);
  }

  double exponential() {
    double u = uniform01();
    while (u <= 0.0) u = uniform01();
    return -std::log(u);
  }

private:
  std::mt19937_64 engine_;
};

// Samples indices from a fixed discrete distribution by CDF inversion.
class DiscreteSampler {
public:
  explicit DiscreteSampler(const std::vector<double>& weights) {
    double total = 0.0;
    for (double w : weights) {
      if (w < 0.0) throw Error(errc::range, "negative sampling weight");
      total += w;
    }
    if (total <= 0.0) throw Error(errc::range, "all sampling weights are zero");
    cdf_.reserve(weights.size());
    double run = 0.0;
    for (double w : weights) {
      run += w / total;
      cdf_.push_back(run);
    }
    cdf_.back() = 1.0;
  }

  std::size_t sample(Rng& rng) const {
    const double u = rng.uniform01();
    std::size_t lo = 0, hi = cdf_.size() - 1;
    while (lo < hi) {
      const std::size_t mid = (lo + hi) / 2;
      if (u < cdf_[mid]) hi = mid; else lo = mid + 1;
    }
    return lo;
  }

private:
  std::vector<double> cdf_;
};

// Zipf weights over n ranks: weight(i) = (i + 1)^-skew. skew = 0 is uniform.
inline std::vector<double> zipf_weights(std::size_t n, double skew) {
  if (n == 0) throw Error(errc::range, "zipf_weights requires n > 0");
  if (skew < 0.0) throw Error(errc::range, "zipf skew must be >= 0");
  std::vector<double> w(n);
  for (std::size_t i = 0; i < n; ++i) {
    w[i] = std::pow(static_cast<double>(i + 1), -skew);
  }
  return w;
}

}  // namespace sis
