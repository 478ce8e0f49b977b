#pragma once

#include <cstdint>
#include <random>

namespace rsb {

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Independent engine for (seed, stream, index); stream k of a seed does not
// depend on how many other streams were drawn.
inline std::mt19937_64 substream(std::uint64_t seed, std::uint64_t stream, std::uint64_t index) {
  const std::uint64_t a = splitmix64(seed ^ splitmix64(stream + 0x51ed270b27ULL));
  const std::uint64_t b = splitmix64(a ^ splitmix64(index + 0x2545f4914f6cdd1dULL));
  std::seed_seq seq{static_cast<std::uint32_t>(a), static_cast<std::uint32_t>(a >> 32),
                    static_cast<std::uint32_t>(b), static_cast<std::uint32_t>(b >> 32)};
  return std::mt19937_64(seq);
}

// Stream identifiers.
enum : std::uint64_t {
  kStreamSkDisorder = 1,
  kStreamHopfieldDisorder = 2,
  kStreamMetropolis = 3,
  kStreamLemma = 4,
};

}  // namespace rsb
