#pragma once

#include <cstdint>
#include <random>

namespace levreg {

using Rng = std::mt19937_64;

/// Independent stream for (seed, stream) via a splitmix64 mix.
inline Rng derive_rng(std::uint64_t seed, std::uint64_t stream) {
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  z ^= z >> 31;
  return Rng(z);
}

/// Child stream drawn from a parent generator.
inline Rng split_rng(Rng& parent) { return derive_rng(parent(), parent()); }

}  // namespace levreg
