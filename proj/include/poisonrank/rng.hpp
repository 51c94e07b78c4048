#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace poisonrank {

// Mixes a base seed with a salt into a well-spread 64-bit state.
std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t salt);

// Hash of a stream label. A fixed FNV-1a implementation is used instead of
// std::hash so stream assignment is identical on every platform.
std::uint64_t label_hash(std::string_view label);

// Deterministic named stream of pseudo-random numbers. Consumers that must
// not perturb each other (environment draws, attacker coins, instance
// sampling) each get their own (seed, label) stream, so one of them drawing
// more or fewer values never shifts the others.
class RngStream {
 public:
  RngStream(std::uint64_t seed, std::string_view label)
      : gen_(mix_seed(seed, label_hash(label))) {}

  std::uint64_t next_u64() { return gen_(); }

  // Uniform double in [0, 1), built from the top 53 bits of one draw.
  double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  bool bernoulli(double p) { return uniform() < p; }

  // Unbiased integer in [0, n), by rejection.
  int uniform_int(int n);

 private:
  std::mt19937_64 gen_;
};

}  // namespace poisonrank
