#include "pipla/rng.hpp"

#include <cmath>
#include <numbers>

namespace pipla {

namespace {
constexpr std::uint32_t kM0 = 0xD2511F53u, kM1 = 0xCD9E8D57u;
constexpr std::uint32_t kW0 = 0x9E3779B9u, kW1 = 0xBB67AE85u;

inline void round(u32x4& c, const u32x2& k) {
  const std::uint64_t p0 = std::uint64_t(kM0) * c[0];
  const std::uint64_t p1 = std::uint64_t(kM1) * c[2];
  const std::uint32_t hi0 = std::uint32_t(p0 >> 32), lo0 = std::uint32_t(p0);
  const std::uint32_t hi1 = std::uint32_t(p1 >> 32), lo1 = std::uint32_t(p1);
  c = {hi1 ^ c[1] ^ k[0], lo1, hi0 ^ c[3] ^ k[1], lo0};
}

inline void box_muller(double u1, double u2, double& a, double& b) {
  const double r = std::sqrt(-2.0 * std::log(u1));
  const double t = 2.0 * std::numbers::pi * u2;
  a = r * std::cos(t);
  b = r * std::sin(t);
}
}  // namespace

u32x4 philox4x32(u32x4 ctr, u32x2 key) {
  for (int r = 0; r < 10; ++r) {
    if (r) {
      key[0] += kW0;
      key[1] += kW1;
    }
    round(ctr, key);
  }
  return ctr;
}

double u01(std::uint32_t hi, std::uint32_t lo) {
  const std::uint64_t bits = ((std::uint64_t(hi) << 32) | lo) >> 11;
  return (double(bits) + 1.0) * 0x1.0p-53;
}

void NoiseStream::fill(std::uint64_t iteration, std::uint64_t particle, double* out, int n) const {
  if (!enabled_) {
    for (int j = 0; j < n; ++j) out[j] = 0.0;
    return;
  }
  const u32x2 key{std::uint32_t(seed_), std::uint32_t(seed_ >> 32)};
  for (int j = 0; j < n; j += 2) {
    const std::uint32_t block = std::uint32_t(j / 2);
    const u32x4 r = philox4x32({std::uint32_t(iteration), std::uint32_t(iteration >> 32),
                                std::uint32_t(particle), block},
                               key);
    double a, b;
    box_muller(u01(r[0], r[1]), u01(r[2], r[3]), a, b);
    out[j] = a;
    if (j + 1 < n) out[j + 1] = b;
  }
}

double NoiseStream::component(std::uint64_t iteration, std::uint64_t particle, int j) const {
  if (!enabled_) return 0.0;
  double v[2];
  const u32x2 key{std::uint32_t(seed_), std::uint32_t(seed_ >> 32)};
  const u32x4 r = philox4x32({std::uint32_t(iteration), std::uint32_t(iteration >> 32),
                              std::uint32_t(particle), std::uint32_t(j / 2)},
                             key);
  box_muller(u01(r[0], r[1]), u01(r[2], r[3]), v[0], v[1]);
  return v[j % 2];
}

void CounterRng::refill() {
  buf_ = philox4x32({std::uint32_t(counter_), std::uint32_t(counter_ >> 32), std::uint32_t(stream_),
                     std::uint32_t(stream_ >> 32)},
                    {std::uint32_t(seed_), std::uint32_t(seed_ >> 32)});
  ++counter_;
  pos_ = 0;
}

double CounterRng::uniform() {
  if (pos_ > 2) refill();
  const double u = u01(buf_[pos_], buf_[pos_ + 1]);
  pos_ += 2;
  return u;
}

double CounterRng::normal() {
  if (has_spare_) {
    has_spare_ = false;
    return spare_;
  }
  double a, b;
  const double u1 = uniform();
  box_muller(u1, uniform(), a, b);
  spare_ = b;
  has_spare_ = true;
  return a;
}

std::uint64_t CounterRng::below(std::uint64_t n) {
  // 53-bit resolution is plenty for the index ranges used here
  const double u = uniform();
  std::uint64_t k = std::uint64_t((1.0 - u) * double(n));
  return k >= n ? n - 1 : k;
}

}  // namespace pipla
