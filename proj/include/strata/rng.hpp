#pragma once

#include <cstdint>
#include <random>

namespace strata {

// SplitMix64; used to derive independent stream seeds from (seed, stream id).
// The seed -> stream mapping below is part of the artifact's stable contract:
// identical seeds must reproduce identical samples across versions, so draws
// go through Rng's own uniform mapping rather than std distributions (whose
// output is implementation-defined).
inline uint64_t splitmix64(uint64_t& state) {
  uint64_t z = (state += 0x9e3779b97f4a7c15ull);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

inline uint64_t derive_stream(uint64_t seed, uint64_t stream) {
  uint64_t s = seed ^ (0x9e3779b97f4a7c15ull * (stream + 1));
  uint64_t a = splitmix64(s);
  uint64_t b = splitmix64(s);
  return a ^ (b << 1);
}

class Rng {
public:
  explicit Rng(uint64_t seed, uint64_t stream = 0) : gen_(derive_stream(seed, stream)) {}

  uint64_t next_u64() { return gen_(); }

  // uniform in [0,1) with 53-bit resolution
  double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  double uniform(double a, double b) { return a + (b - a) * uniform(); }

  bool bernoulli(double p) { return uniform() < p; }

private:
  std::mt19937_64 gen_;
};

}  // namespace strata
