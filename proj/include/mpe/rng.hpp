#pragma once

#include <cstdint>
#include <random>
#include <string_view>
#include <vector>

namespace mpe {

// splitmix64 finalizer; used for seed derivation and stateless hashing.
uint64_t mix64(uint64_t x);

// Derives an independent stream seed from a base seed and a purpose label,
// so a single user-facing seed can drive split/init/shuffle/negatives
// without the streams aliasing each other.
uint64_t derive_seed(uint64_t base, std::string_view purpose);
uint64_t derive_seed(uint64_t base, std::string_view purpose, uint64_t index);

// Uniform value in [0,1) from a stateless hash of up to four keys.
double hash_unit(uint64_t seed, uint64_t a, uint64_t b, uint64_t c);

// Deterministic RNG. mt19937_64 gives a sequence pinned by the standard;
// the distribution transforms are written out by hand so that identical
// seeds give identical streams on any platform (std::*_distribution makes
// no such promise).
class Rng {
 public:
  explicit Rng(uint64_t seed) : gen_(seed) {}

  uint64_t next_u64() { return gen_(); }

  // [0,1)
  double next_unit() {
    return static_cast<double>(gen_() >> 11) * 0x1.0p-53;
  }

  // (0,1]
  double next_unit_open() {
    return static_cast<double>((gen_() >> 11) + 1) * 0x1.0p-53;
  }

  // [0,n)
  size_t next_below(size_t n) { return static_cast<size_t>(gen_() % n); }

  double next_gaussian(double mean, double stddev);

  // Fisher-Yates
  template <class T>
  void shuffle(std::vector<T>& v) {
    if (v.size() < 2) return;
    for (size_t i = v.size() - 1; i > 0; --i) {
      size_t j = next_below(i + 1);
      std::swap(v[i], v[j]);
    }
  }

 private:
  std::mt19937_64 gen_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace mpe
