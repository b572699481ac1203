#pragma once

#include <array>
#include <cstdint>

namespace lulc {

// xoshiro256** (Blackman & Vigna). State s[0..3] evolves per draw as
//
//   result = rotl(s[1] * 5, 7) * 9
//   t = s[1] << 17
//   s[2] ^= s[0]; s[3] ^= s[1]; s[1] ^= s[2]; s[0] ^= s[3]
//   s[2] ^= t;    s[3] = rotl(s[3], 45)
//
// Seeding expands a 64-bit seed with splitmix64: x += 0x9e3779b97f4a7c15,
// z = x; z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9;
// z = (z ^ (z >> 27)) * 0x94d049bb133111eb; out = z ^ (z >> 31),
// taking four consecutive outputs as s[0..3].
class Xoshiro256 {
 public:
  using State = std::array<std::uint64_t, 4>;
  using result_type = std::uint64_t;

  explicit Xoshiro256(std::uint64_t seed = 0) { reseed(seed); }
  explicit Xoshiro256(const State& state) : s_(state) {}

  // Independent stream for (seed, stream index).
  static Xoshiro256 stream(std::uint64_t seed, std::uint64_t index) {
    std::uint64_t x = seed;
    std::uint64_t mixed = splitmix64(x) ^ (index * 0xd1b54a32d192ed03ULL);
    return Xoshiro256(mixed);
  }

  void reseed(std::uint64_t seed) {
    std::uint64_t x = seed;
    for (auto& w : s_) w = splitmix64(x);
  }

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return ~result_type{0}; }

  result_type operator()() {
    const std::uint64_t result = rotl(s_[1] * 5, 7) * 9;
    const std::uint64_t t = s_[1] << 17;
    s_[2] ^= s_[0];
    s_[3] ^= s_[1];
    s_[1] ^= s_[2];
    s_[0] ^= s_[3];
    s_[2] ^= t;
    s_[3] = rotl(s_[3], 45);
    return result;
  }

  // Uniform in [0, 1) from the top 53 bits.
  double uniform() { return static_cast<double>((*this)() >> 11) * 0x1.0p-53; }

  // Uniform integer in [0, bound) by rejection, bound > 0.
  std::uint64_t below(std::uint64_t bound) {
    const std::uint64_t limit = max() - max() % bound;
    std::uint64_t x;
    do {
      x = (*this)();
    } while (x >= limit);
    return x % bound;
  }

  const State& state() const { return s_; }

  friend bool operator==(const Xoshiro256&, const Xoshiro256&) = default;

 private:
  static constexpr std::uint64_t rotl(std::uint64_t x, int k) {
    return (x << k) | (x >> (64 - k));
  }
  static std::uint64_t splitmix64(std::uint64_t& x) {
    std::uint64_t z = (x += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  State s_{};
};

// Fisher-Yates with Xoshiro256::below, identical on every platform.
template <typename It>
void deterministic_shuffle(It first, It last, Xoshiro256& rng) {
  const auto n = static_cast<std::uint64_t>(last - first);
  for (std::uint64_t i = n; i > 1; --i) {
    const auto j = rng.below(i);
    std::swap(first[i - 1], first[j]);
  }
}

}  // namespace lulc
