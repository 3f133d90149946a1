#pragma once

#include <cstdint>

namespace picap {

// 64-bit mixing step of splitmix64; used both as a hash and for seeding.
constexpr std::uint64_t mix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// xoshiro256** seeded through splitmix64. Every consumer gets its own
// instance; the class itself is not synchronized.
class Rng {
 public:
  explicit Rng(std::uint64_t seed);

  std::uint64_t next_u64();

  // Uniform on [0, 1).
  double uniform01();
  // Uniform on [lo, hi).
  double uniform(double lo, double hi);
  // Standard normal via Box-Muller; consumes exactly two 64-bit draws.
  double normal();
  // Integer in [0, n).
  std::uint64_t below(std::uint64_t n);

 private:
  std::uint64_t s_[4];
};

// Derives an independent stream from a master seed and up to three stream
// coordinates (purpose tag, particle index, episode index, ...). The result
// depends only on the arguments, never on scheduling, so parallel rollouts
// are bit-reproducible at any worker count.
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t a,
                          std::uint64_t b = 0, std::uint64_t c = 0);

inline Rng derive_stream(std::uint64_t master, std::uint64_t a,
                         std::uint64_t b = 0, std::uint64_t c = 0) {
  return Rng(derive_seed(master, a, b, c));
}

// Stream purpose tags shared across the sampling pipeline.
enum StreamTag : std::uint64_t {
  kStreamParams = 1,
  kStreamEnv = 2,
  kStreamPolicy = 3,
  kStreamEsPerturb = 4,
  kStreamEsEpoch = 5,
  kStreamBag = 6,
  kStreamEval = 7,
  kStreamProp1 = 8,
  kStreamSweep = 9,
};

}  // namespace picap
