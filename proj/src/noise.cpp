#include "morpheval/noise.hpp"

#include <cmath>
#include <numbers>

namespace morpheval {

namespace {

inline std::uint64_t splitmix_step(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

inline double to_unit(std::uint64_t bits) {
  return static_cast<double>(bits >> 11) * 0x1.0p-53;
}

}  // namespace

std::uint64_t hash_mix(std::uint64_t seed, std::uint64_t stream,
                       std::uint64_t index) {
  std::uint64_t h = splitmix_step(seed ^ 0x6a09e667f3bcc908ULL);
  h = splitmix_step(h ^ stream);
  h = splitmix_step(h ^ index);
  return h;
}

double noise_uniform(std::uint64_t seed, std::uint64_t stream,
                     std::uint64_t index) {
  return to_unit(hash_mix(seed, stream, index));
}

double noise_gaussian(std::uint64_t seed, std::uint64_t stream,
                      std::uint64_t index) {
  // Box-Muller on two lanes derived from the same counter.
  const std::uint64_t h1 = hash_mix(seed, stream, index * 2);
  const std::uint64_t h2 = hash_mix(seed, stream, index * 2 + 1);
  const double u1 = static_cast<double>((h1 >> 11) + 1) * 0x1.0p-53;  // (0,1]
  const double u2 = to_unit(h2);
  return std::sqrt(-2.0 * std::log(u1)) *
         std::cos(2.0 * std::numbers::pi * u2);
}

std::uint64_t SplitMix64::next() {
  state_ += 0x9e3779b97f4a7c15ULL;
  std::uint64_t x = state_;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

double SplitMix64::uniform01() { return to_unit(next()); }

std::uint64_t SplitMix64::below(std::uint64_t bound) {
  if (bound <= 1) return 0;
  // Rejection sampling to stay unbiased.
  const std::uint64_t limit = ~std::uint64_t{0} - (~std::uint64_t{0} % bound);
  std::uint64_t x = next();
  while (x >= limit) x = next();
  return x % bound;
}

}  // namespace morpheval
