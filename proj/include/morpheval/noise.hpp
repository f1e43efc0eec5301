#pragma once

#include <cstdint>

namespace morpheval {

// Counter-based deterministic noise: every draw is a pure function of
// (seed, stream, index), so fields can be generated in any order or in
// parallel with bit-identical results.
std::uint64_t hash_mix(std::uint64_t seed, std::uint64_t stream,
                       std::uint64_t index);

double noise_uniform(std::uint64_t seed, std::uint64_t stream,
                     std::uint64_t index);  // [0, 1)

double noise_gaussian(std::uint64_t seed, std::uint64_t stream,
                      std::uint64_t index);  // N(0, 1)

// Small sequential generator for shuffles; splitmix64 stream. Used instead of
// std::shuffle/<random> distributions because their output is not pinned by
// the standard and fold splits must be reproducible across toolchains.
class SplitMix64 {
 public:
  explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next();
  double uniform01();                       // [0, 1)
  std::uint64_t below(std::uint64_t bound); // [0, bound), unbiased

 private:
  std::uint64_t state_;
};

}  // namespace morpheval
