#pragma once

#include <cstdint>
#include <random>
#include <vector>

namespace taaco {

uint64_t splitmix64(uint64_t x);

// Deterministic RNG. All draws are derived from raw mt19937_64 output with
// hand-rolled conversions, so sequences are identical on every platform
// (std::*_distribution is implementation-defined and would not be).
class Rng {
 public:
  explicit Rng(uint64_t seed) : gen_(splitmix64(seed)) {}

  uint64_t next_u64() { return gen_(); }

  // Uniform in [0, 1).
  double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // Uniform integer in [0, n). n must be > 0.
  uint64_t uniform_int(uint64_t n) { return next_u64() % n; }

  bool coin(double p_true = 0.5) { return uniform() < p_true; }

  // Standard normal via Box-Muller.
  double normal();

  template <typename T>
  void shuffle(std::vector<T>& v) {
    for (size_t i = v.size(); i > 1; --i) {
      size_t j = static_cast<size_t>(uniform_int(i));
      std::swap(v[i - 1], v[j]);
    }
  }

  // Child seed for an independent stream.
  uint64_t fork(uint64_t salt) { return splitmix64(next_u64() ^ splitmix64(salt)); }

 private:
  std::mt19937_64 gen_;
  bool have_spare_ = false;
  double spare_ = 0.0;
};

// Mix several values into one seed (order-sensitive).
uint64_t mix_seed(std::initializer_list<uint64_t> parts);

}  // namespace taaco
