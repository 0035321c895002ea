#include "lowrank/rng.hpp"

#include <cmath>
#include <numbers>

namespace lowrank {

std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

RngSeed derive_seed(RngSeed base, std::uint64_t stream, std::uint64_t index) noexcept {
  return RngSeed{splitmix64(splitmix64(base.value ^ splitmix64(stream)) + index)};
}

Rng::Rng(RngSeed seed) : engine_(splitmix64(seed.value)) {}

double Rng::uniform() {
  constexpr double kScale = 1.0 / 9007199254740992.0;  // 2^-53
  return (static_cast<double>(engine_() >> 11) + 0.5) * kScale;
}

double Rng::normal() {
  if (has_cached_) {
    has_cached_ = false;
    return cached_normal_;
  }
  const double radius = std::sqrt(-2.0 * std::log(uniform()));
  const double angle = 2.0 * std::numbers::pi * uniform();
  cached_normal_ = radius * std::sin(angle);
  has_cached_ = true;
  return radius * std::cos(angle);
}

double Rng::laplace(double scale) {
  const double u = uniform() - 0.5;
  const double magnitude = -scale * std::log1p(-2.0 * std::abs(u));
  return u < 0.0 ? -magnitude : magnitude;
}

double Rng::rademacher() { return (engine_() >> 63) != 0 ? 1.0 : -1.0; }

}  // namespace lowrank
