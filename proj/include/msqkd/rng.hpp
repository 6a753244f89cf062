#pragma once

#include <cstdint>
#include <limits>

namespace msqkd {

inline constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Independent random sub-streams of one master seed.
enum class StreamTag : std::uint64_t {
  kRound = 1,
  kTestSubset = 2,
  kAttack = 3,
};

/// Counter-based generator keyed on (seed, stream, index). Every round owns
/// its stream, so results do not depend on execution order or thread count.
/// Satisfies UniformRandomBitGenerator.
class CounterRng {
 public:
  using result_type = std::uint64_t;

  CounterRng(std::uint64_t seed, StreamTag tag, std::uint64_t index) noexcept
      : key_(splitmix64(seed ^ splitmix64(static_cast<std::uint64_t>(tag) * 0xd1b54a32d192ed03ULL +
                                          splitmix64(index)))) {}

  static constexpr result_type min() noexcept { return 0; }
  static constexpr result_type max() noexcept { return std::numeric_limits<result_type>::max(); }

  result_type operator()() noexcept { return splitmix64(key_ + 0x9e3779b97f4a7c15ULL * ++counter_); }

  /// Uniform in [0, 1) with 53 random bits.
  double uniform() noexcept { return static_cast<double>((*this)() >> 11) * 0x1.0p-53; }

  bool bernoulli(double p) noexcept { return uniform() < p; }

  int bit() noexcept { return static_cast<int>((*this)() >> 63); }

 private:
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

}  // namespace msqkd
