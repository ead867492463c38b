#ifndef ASL_RANDOM_HPP
#define ASL_RANDOM_HPP

#include <array>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <optional>

namespace asl {

// SplitMix64 step; used to expand seeds into generator state.
inline std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// xoshiro256** with SplitMix64 seeding.
///
/// Uniform doubles take the top 53 bits of one output. Normal deviates use
/// Box-Muller on two consecutive uniforms u1, u2: the cosine branch is
/// returned first and the sine branch is cached for the next call.
class Xoshiro256 {
 public:
  explicit Xoshiro256(std::uint64_t seed) {
    std::uint64_t sm = seed;
    for (auto& word : state_) word = splitmix64(sm);
  }

  static Xoshiro256 from_state(const std::array<std::uint64_t, 4>& state) {
    Xoshiro256 rng(0);
    rng.state_ = state;
    return rng;
  }

  // Independent stream for a (seed, stream) pair.
  static Xoshiro256 stream(std::uint64_t seed, std::uint64_t stream_id) {
    std::uint64_t sm = seed ^ (0xd1b54a32d192ed03ULL * (stream_id + 1));
    return Xoshiro256(splitmix64(sm));
  }

  std::uint64_t next() {
    const std::uint64_t result = rotl(state_[1] * 5, 7) * 9;
    const std::uint64_t t = state_[1] << 17;
    state_[2] ^= state_[0];
    state_[3] ^= state_[1];
    state_[1] ^= state_[2];
    state_[0] ^= state_[3];
    state_[2] ^= t;
    state_[3] = rotl(state_[3], 45);
    return result;
  }

  // [0, 1)
  double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  // Uniform integer in [0, bound) by rejection.
  std::uint64_t below(std::uint64_t bound) {
    const std::uint64_t limit = UINT64_MAX - UINT64_MAX % bound;
    std::uint64_t x;
    do {
      x = next();
    } while (x >= limit);
    return x % bound;
  }

  double normal() {
    if (cached_normal_) {
      const double z = *cached_normal_;
      cached_normal_.reset();
      return z;
    }
    const double u1 = 1.0 - uniform();  // (0, 1]
    const double u2 = uniform();
    const double radius = std::sqrt(-2.0 * std::log(u1));
    const double angle = 2.0 * std::numbers::pi * u2;
    cached_normal_ = radius * std::sin(angle);
    return radius * std::cos(angle);
  }

 private:
  static std::uint64_t rotl(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }

  std::array<std::uint64_t, 4> state_;
  std::optional<double> cached_normal_;
};

}  // namespace asl

#endif  // ASL_RANDOM_HPP
