#pragma once

#include <cstdint>
#include <random>
#include <string_view>
#include <vector>

namespace corrnet {

std::uint64_t splitmix64(std::uint64_t x);

// Stream seed for (master seed, component name, index). Streams for different
// components or pixels never depend on each other's consumption.
std::uint64_t derive_seed(std::uint64_t master, std::string_view component, std::uint64_t index = 0);

// Thin wrapper over mt19937_64. The distributions are written out here rather
// than taken from <random> so draws are identical across standard libraries.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }
  // Uniform in [0, 1) with 53 random bits.
  double uniform();
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  // Standard normal via Box-Muller; the second variate is cached.
  double normal();
  bool bernoulli(double p) { return uniform() < p; }
  // Uniform integer in [0, n).
  std::uint64_t below(std::uint64_t n);

  template <typename T>
  void shuffle(std::vector<T>& v) {
    for (std::size_t i = v.size(); i > 1; --i) {
      std::swap(v[i - 1], v[below(i)]);
    }
  }

 private:
  std::mt19937_64 engine_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace corrnet
