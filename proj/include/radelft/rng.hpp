#ifndef RADELFT_RNG_HPP
#define RADELFT_RNG_HPP

#include <cstdint>
#include <random>

namespace radelft {

// splitmix64 step; used to derive independent deterministic seed streams.
inline std::uint64_t mixSeed(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

inline std::uint64_t mixSeed(std::uint64_t a, std::uint64_t b) {
  return mixSeed(mixSeed(a) ^ (b + 0x9e3779b97f4a7c15ULL));
}

inline std::uint64_t mixSeed(std::uint64_t a, std::uint64_t b, std::uint64_t c) {
  return mixSeed(mixSeed(a, b), c);
}

inline std::mt19937_64 makeRng(std::uint64_t seed) { return std::mt19937_64(mixSeed(seed)); }

// Stream tags keeping the simulator's independent random draws decoupled.
enum : std::uint64_t {
  kStreamNoise = 0x11,
  kStreamLidarSurface = 0x22,
  kStreamRadarSurface = 0x33,
  kStreamGround = 0x44,
};

}  // namespace radelft

#endif
