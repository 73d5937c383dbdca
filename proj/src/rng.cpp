#include "mpe/rng.hpp"

#include <cmath>
#include <numbers>

namespace mpe {

uint64_t mix64(uint64_t x) {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

namespace {
uint64_t fnv1a(std::string_view s) {
  uint64_t h = 0xCBF29CE484222325ull;
  for (char c : s) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001B3ull;
  }
  return h;
}
}  // namespace

uint64_t derive_seed(uint64_t base, std::string_view purpose) {
  return mix64(base ^ fnv1a(purpose));
}

uint64_t derive_seed(uint64_t base, std::string_view purpose, uint64_t index) {
  return mix64(derive_seed(base, purpose) ^ mix64(index));
}

double hash_unit(uint64_t seed, uint64_t a, uint64_t b, uint64_t c) {
  uint64_t h = mix64(seed);
  h = mix64(h ^ a);
  h = mix64(h ^ b);
  h = mix64(h ^ c);
  return static_cast<double>(h >> 11) * 0x1.0p-53;
}

double Rng::next_gaussian(double mean, double stddev) {
  if (has_spare_) {
    has_spare_ = false;
    return mean + stddev * spare_;
  }
  // Box-Muller on open-interval uniforms (u1 > 0 keeps the log finite).
  double u1 = next_unit_open();
  double u2 = next_unit();
  double r = std::sqrt(-2.0 * std::log(u1));
  double theta = 2.0 * std::numbers::pi * u2;
  spare_ = r * std::sin(theta);
  has_spare_ = true;
  return mean + stddev * r * std::cos(theta);
}

}  // namespace mpe
