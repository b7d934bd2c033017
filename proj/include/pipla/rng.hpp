#pragma once

#include <array>
#include <cstdint>

namespace pipla {

using u32x4 = std::array<std::uint32_t, 4>;
using u32x2 = std::array<std::uint32_t, 2>;

// Philox4x32-10 block function.
u32x4 philox4x32(u32x4 ctr, u32x2 key);

// (0,1], 53 bits from two words
double u01(std::uint32_t hi, std::uint32_t lo);

// Gaussian draws as a pure function of (seed, iteration, particle, component).
// Particle 0 is the theta block, particle i+1 the i-th latent particle.
// Iteration 0 is used for initialisation.
class NoiseStream {
 public:
  explicit NoiseStream(std::uint64_t seed = 0, bool enabled = true) : seed_(seed), enabled_(enabled) {}
  void fill(std::uint64_t iteration, std::uint64_t particle, double* out, int n) const;
  double component(std::uint64_t iteration, std::uint64_t particle, int j) const;
  std::uint64_t seed() const { return seed_; }
  bool enabled() const { return enabled_; }

 private:
  std::uint64_t seed_;
  bool enabled_;
};

// Sequential counter-based generator for data generation and init.
class CounterRng {
 public:
  CounterRng(std::uint64_t seed, std::uint64_t stream) : seed_(seed), stream_(stream) {}
  double uniform();  // (0,1]
  double uniform(double a, double b) { return a + (b - a) * uniform(); }
  double normal();
  bool bernoulli(double p) { return uniform() <= p; }
  std::uint64_t below(std::uint64_t n);  // [0, n)

 private:
  void refill();
  std::uint64_t seed_, stream_;
  std::uint64_t counter_ = 0;
  u32x4 buf_{};
  int pos_ = 4;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace pipla
