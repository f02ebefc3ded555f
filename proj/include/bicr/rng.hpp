#pragma once

#include <cstdint>
#include <random>

namespace bicr {

using Rng = std::mt19937_64;

// Named substreams so that independent consumers of one master seed never
// share random numbers.
enum class Stream : std::uint64_t {
  design = 0x64657369676eULL,
  outcome = 0x6f7574636f6dULL,
  bootstrap = 0x626f6f74ULL,
  propensity = 0x70726f70ULL,
  tau = 0x746175ULL,
  partition = 0x70617274ULL,
  graph = 0x6772617068ULL,
  coefficients = 0x636f6566ULL,
};

constexpr std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Hash of (master, index, stream). Draw-level streams derived this way are
// order independent, so replicate loops can run in any order or in parallel.
constexpr std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index,
                                    Stream stream = Stream::design) {
  return splitmix64(splitmix64(master ^ static_cast<std::uint64_t>(stream)) + splitmix64(index));
}

inline Rng make_rng(std::uint64_t master, std::uint64_t index, Stream stream) {
  return Rng(derive_seed(master, index, stream));
}

// Uniform on [0, 1) with 53 random bits; bit-identical on every platform,
// unlike std::uniform_real_distribution.
inline double uniform01(Rng& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

// Unbiased integer in [0, n) by rejection; n must be positive.
inline std::uint64_t uniform_below(Rng& rng, std::uint64_t n) {
  const std::uint64_t limit = ~std::uint64_t{0} - (~std::uint64_t{0} % n);
  std::uint64_t x = rng();
  while (x >= limit) x = rng();
  return x % n;
}

}  // namespace bicr
