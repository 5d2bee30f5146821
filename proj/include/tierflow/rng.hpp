#pragma once

#include <array>
#include <cstdint>
#include <string_view>

namespace tierflow {

/// Deterministic random stream: xoshiro256** seeded through SplitMix64.
///
/// The algorithm is fixed so that draw sequences are identical across
/// platforms and compilers. Nothing here goes through <random> distributions,
/// whose output is implementation-defined.
///
///  * seeding: state[i] = splitmix64(seed) applied four times in sequence
///  * next_u64: xoshiro256** (Blackman & Vigna, 2018)
///  * uniform(): (next_u64() >> 11) * 2^-53, in [0, 1)
///  * below(n): unbiased rejection on the low 64-bit product range
///  * normal(): Box-Muller on two uniforms, the cosine branch only
///  * derive(tag, index): a fresh stream seeded from
///    splitmix64(seed ^ fnv1a64(tag) ^ splitmix64(index))
class RngStream {
 public:
  explicit RngStream(std::uint64_t seed);

  std::uint64_t seed() const noexcept { return seed_; }

  std::uint64_t next_u64() noexcept;
  double uniform() noexcept;
  /// Uniform integer in [0, n). n must be positive.
  std::uint64_t below(std::uint64_t n);
  double normal() noexcept;

  /// Independent child stream keyed by a name and an index. Does not advance
  /// this stream.
  RngStream derive(std::string_view tag, std::uint64_t index = 0) const;

  template <typename It>
  void shuffle(It first, It last) {
    const auto n = static_cast<std::uint64_t>(last - first);
    for (std::uint64_t i = n; i > 1; --i) {
      const auto j = below(i);
      using std::swap;
      swap(first[i - 1], first[j]);
    }
  }

 private:
  std::uint64_t seed_;
  std::array<std::uint64_t, 4> state_{};
};

std::uint64_t splitmix64(std::uint64_t x) noexcept;
std::uint64_t fnv1a64(std::string_view text) noexcept;

}  // namespace tierflow
