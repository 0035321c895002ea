#pragma once

#include <cstdint>
#include <random>

namespace lowrank {

/// Seed for every random draw in the library. Equal seeds and parameters
/// produce bit-identical output within one build.
struct RngSeed {
  std::uint64_t value = 0;

  friend bool operator==(RngSeed, RngSeed) = default;
};

/// SplitMix64 finalizer (Steele, Lea, Flood 2014).
std::uint64_t splitmix64(std::uint64_t x) noexcept;

/// Counter-based sub-seed: splitmix64(splitmix64(base ^ splitmix64(stream)) + index).
///
/// Distinct (stream, index) pairs give independent-looking seeds, and the seed
/// for index k never depends on how many other indices are drawn. Experiments
/// use this so that adding trials does not perturb earlier ones.
RngSeed derive_seed(RngSeed base, std::uint64_t stream, std::uint64_t index) noexcept;

/// Deterministic variate source.
///
/// Engine: std::mt19937_64 seeded with splitmix64(seed). Uniforms take the top
/// 53 bits of one engine output, offset by half an ulp so they lie in (0, 1).
/// Normals use the Box-Muller transform, returning the cosine branch first and
/// caching the sine branch. Laplace variates use the inverse CDF.
/// std::normal_distribution is avoided because its algorithm is unspecified.
class Rng {
 public:
  explicit Rng(RngSeed seed);

  double uniform();
  double normal();
  /// Laplace(0, scale); variance 2 * scale^2.
  double laplace(double scale);
  /// +1 or -1 with equal probability.
  double rademacher();

 private:
  std::mt19937_64 engine_;
  double cached_normal_ = 0.0;
  bool has_cached_ = false;
};

}  // namespace lowrank
