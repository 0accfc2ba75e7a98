#ifndef PENREF_RNG_HPP_
#define PENREF_RNG_HPP_
//! \file rng.hpp
//! Counter-based random numbers (Philox4x32-10) and seed derivation.
//!
//! Every draw is a pure function of (key, counter), so a path's noise is
//! fixed by its seed and step index no matter which worker computes it.

#include <array>
#include <cstdint>

namespace penref {

using Philox4x32 = std::array<std::uint32_t, 4>;

//! Ten rounds of Philox4x32 on the given counter and 64-bit key.
Philox4x32 philox4x32(Philox4x32 counter, std::uint64_t key);

//! SplitMix64 finalizer.
std::uint64_t mix64(std::uint64_t x);

//! Seed of path `index` in a batch driven by `master`.
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index);

//! Map 64 random bits to a double in the open interval (0, 1).
double to_unit_open(std::uint64_t bits);

//! Two independent standard normals from the Philox block at (key, c0, c1, c2).
std::array<double, 2> gaussian_pair(std::uint64_t key, std::uint32_t c0, std::uint32_t c1,
                                    std::uint32_t c2);

//! Sequential stream over a Philox key, for samplers that do not need random
//! access. Deterministic given the key.
class RandomStream {
 public:
  explicit RandomStream(std::uint64_t key) : key_(key) {}

  double uniform();
  double normal();

 private:
  std::uint64_t next_bits();

  std::uint64_t key_;
  std::uint64_t counter_ = 0;
  Philox4x32 block_{};
  int used_ = 4;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace penref

#endif  // PENREF_RNG_HPP_
