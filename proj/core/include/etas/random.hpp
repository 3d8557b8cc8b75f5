#pragma once

#include <cstdint>
#include <random>

namespace etas {

using Rng = std::mt19937_64;

/// SplitMix64 finalizer; used to derive independent substream seeds.
[[nodiscard]] constexpr std::uint64_t mix64(std::uint64_t x) noexcept {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Generator for substream `stream` of master seed `seed`. Streams with
/// different keys are statistically independent for practical purposes.
[[nodiscard]] inline Rng substream(std::uint64_t seed, std::uint64_t stream) {
  std::seed_seq seq{static_cast<std::uint32_t>(mix64(seed)), static_cast<std::uint32_t>(mix64(seed) >> 32),
                    static_cast<std::uint32_t>(mix64(stream ^ 0x5851f42d4c957f2dULL)),
                    static_cast<std::uint32_t>(mix64(stream ^ 0x5851f42d4c957f2dULL) >> 32)};
  return Rng(seq);
}

/// Uniform draw on the open interval (0, 1).
[[nodiscard]] inline double open_unit(Rng& rng) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  double u = unit(rng);
  while (u <= 0.0 || u >= 1.0) u = unit(rng);
  return u;
}

}  // namespace etas
