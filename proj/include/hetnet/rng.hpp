#pragma once

#include <cstdint>
#include <random>

namespace hetnet {

using Rng = std::mt19937_64;

// Derives a decorrelated 64-bit seed for a named sub-stream (splitmix64 finalizer).
std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream);

inline Rng make_rng(std::uint64_t seed, std::uint64_t stream = 0) {
  return Rng(mix_seed(seed, stream));
}

}  // namespace hetnet
