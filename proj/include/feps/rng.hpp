#pragma once

#include <cstdint>
#include <random>
#include <span>

namespace feps {

// All stochastic code draws from one of these, seeded explicitly.
// Sampling goes through uniform01() below instead of the standard
// distributions so that runs are reproducible across standard libraries.
using Rng = std::mt19937_64;

inline double uniform01(Rng& rng) {
  // 53 random bits -> [0, 1)
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

// Sample an index from an (approximately normalized) probability vector.
inline int sample_index(std::span<const double> probs, Rng& rng) {
  const double u = uniform01(rng);
  double cum = 0.0;
  int last_positive = 0;
  for (std::size_t i = 0; i < probs.size(); ++i) {
    if (probs[i] > 0.0) last_positive = static_cast<int>(i);
    cum += probs[i];
    if (u < cum) return static_cast<int>(i);
  }
  // cum can fall a few ulp short of 1; attribute the remainder to the
  // last entry with positive mass.
  return last_positive;
}

inline int sample_int(int n, Rng& rng) {
  return static_cast<int>(uniform01(rng) * n) % n;
}

// splitmix64 step, used to derive independent per-agent streams.
inline std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream) {
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ull * (stream + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

}  // namespace feps
