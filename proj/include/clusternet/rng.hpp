#pragma once

#include <cstdint>
#include <random>

namespace clusternet {

// All randomness in the library flows through 64-bit seeds derived with
// splitmix64. Distinct stream tags keep the training, validation and
// evaluation generator streams disjoint even when they share a user seed.

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

enum class SeedStream : std::uint64_t {
  Train = 0x7261696e00000001ULL,
  Validation = 0x76616c6964000002ULL,
  Evaluation = 0x6576616c00000003ULL,
  Dataset = 0x6461746100000004ULL,
  Params = 0x706172616d000005ULL,
  Tuning = 0x74756e6500000006ULL,
};

inline std::uint64_t mix_seed(std::uint64_t base, std::uint64_t a,
                              std::uint64_t b = 0) {
  return splitmix64(splitmix64(splitmix64(base) ^ a) ^ b);
}

inline std::uint64_t stream_seed(std::uint64_t base, SeedStream stream,
                                 std::uint64_t index = 0) {
  return mix_seed(base, static_cast<std::uint64_t>(stream), index);
}

inline std::mt19937_64 make_engine(std::uint64_t seed) {
  return std::mt19937_64(splitmix64(seed ^ 0x5deece66dULL));
}

}  // namespace clusternet
