#pragma once

#include <cstdint>
#include <random>
#include <string_view>

#include "lexkit/hashing.hpp"

namespace lexkit {

// Seeded generator with platform-independent derived draws. The standard
// distributions are implementation-defined, so every draw used for sampling,
// splitting or masking goes through these helpers instead.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }

  double uniform01() { return unit_interval(engine_()); }

  // Uniform integer in [0, bound). bound must be positive.
  std::uint64_t below(std::uint64_t bound) {
    const std::uint64_t limit = UINT64_MAX - UINT64_MAX % bound;
    std::uint64_t x;
    do {
      x = engine_();
    } while (x >= limit);
    return x % bound;
  }

 private:
  std::mt19937_64 engine_;
};

inline std::uint64_t derive_seed(std::uint64_t seed, std::string_view tag) {
  return keyed_hash(tag, seed);
}

}  // namespace lexkit
