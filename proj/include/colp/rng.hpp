#pragma once

#include <cmath>
#include <cstdint>

namespace colp {

inline std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

// Splittable stream keyed by (master_seed, replicate_index, tag).
// xoshiro256++ with splitmix64 seeding; self-contained so that output is
// byte-stable across standard libraries and worker counts.
class RngStream {
 public:
  RngStream(std::uint64_t master_seed, std::uint64_t replicate_index, std::uint64_t tag) {
    std::uint64_t s = master_seed;
    s = splitmix64(s) ^ (replicate_index * 0x9e3779b97f4a7c15ULL);
    s = splitmix64(s) ^ (tag * 0xd1b54a32d192ed03ULL);
    for (auto& w : state_) w = splitmix64(s);
  }

  std::uint64_t next_u64() {
    const std::uint64_t result = rotl(state_[0] + state_[3], 23) + state_[0];
    const std::uint64_t t = state_[1] << 17;
    state_[2] ^= state_[0];
    state_[3] ^= state_[1];
    state_[1] ^= state_[2];
    state_[0] ^= state_[3];
    state_[2] ^= t;
    state_[3] = rotl(state_[3], 45);
    return result;
  }

  // Uniform on (0, 1); never returns 0 or 1.
  double uniform() { return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53; }

  double normal() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    const double u1 = uniform();
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double theta = 2.0 * M_PI * u2;
    spare_ = r * std::sin(theta);
    have_spare_ = true;
    return r * std::cos(theta);
  }

  // exp(rate)
  double exponential(double rate) { return -std::log(uniform()) / rate; }

  bool bernoulli(double prob) { return uniform() < prob; }

 private:
  static std::uint64_t rotl(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }

  std::uint64_t state_[4];
  double spare_ = 0.0;
  bool have_spare_ = false;
};

}  // namespace colp
