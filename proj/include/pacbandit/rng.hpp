#pragma once

#include <cstdint>
#include <span>

#include "pacbandit/errors.hpp"

namespace pacbandit {

// Finalizer of the SplitMix64 generator (Steele, Lea & Flood; Vigna's
// fixed-increment variant). Bijective on 64-bit words.
constexpr std::uint64_t mix64(std::uint64_t z) {
  z += 0x9E3779B97F4A7C15ULL;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

// Seed of the i-th substream of a master seed. Replicate i of a simulation
// uses stream i; the reward-model draw uses the reserved index 2^64 - 1.
// Stream seeds land at avalanche-random points of the underlying Weyl orbit,
// so streams of any realistic length do not overlap.
constexpr std::uint64_t substream_seed(std::uint64_t seed, std::uint64_t index) {
  return mix64(mix64(seed) + index);
}

inline constexpr std::uint64_t kModelStreamIndex = 0xFFFFFFFFFFFFFFFFULL;

class SplitMix64 {
 public:
  explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next() {
    state_ += 0x9E3779B97F4A7C15ULL;
    std::uint64_t z = state_;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

  // Uniform double in [0, 1) with 53 random bits.
  double next_double() {
    return static_cast<double>(next() >> 11) * 0x1.0p-53;
  }

  bool bernoulli(double p) { return next_double() < p; }

  // Draws an index with the given probabilities by inverting the CDF with a
  // single uniform. Probabilities must be nonnegative; they are assumed to
  // sum to (about) 1, and any rounding slack goes to the last index.
  std::size_t categorical(std::span<const double> probs) {
    if (probs.empty()) throw precondition_error("categorical: empty support");
    const double u = next_double();
    double cum = 0.0;
    for (std::size_t i = 0; i + 1 < probs.size(); ++i) {
      cum += probs[i];
      if (u < cum) return i;
    }
    return probs.size() - 1;
  }

 private:
  std::uint64_t state_;
};

}  // namespace pacbandit
