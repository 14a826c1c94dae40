#pragma once

#include <cstdint>
#include <random>

namespace driftlasso {

/// SplitMix64 finalizer; decorrelates nearby seeds.
constexpr std::uint64_t mix_seed(std::uint64_t z) noexcept {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// Seed of replication r: the base seed xor r, then mixed. Streams depend
/// only on (base, r), never on scheduling order.
constexpr std::uint64_t replication_seed(std::uint64_t base, std::uint64_t r) noexcept {
  return mix_seed(base ^ r);
}

/// Derived stream for a named sub-purpose of one replication (e.g. the CV
/// fold assignment or the theta generator) so purposes never share draws.
constexpr std::uint64_t substream_seed(std::uint64_t seed, std::uint64_t purpose) noexcept {
  return mix_seed(seed ^ mix_seed(purpose + 0x632be59bd9b4e019ULL));
}

using Rng = std::mt19937_64;

inline Rng make_rng(std::uint64_t seed) { return Rng(mix_seed(seed)); }

}  // namespace driftlasso
