#pragma once

#include <cstdint>
#include <limits>
#include <random>

namespace dshfl {

/// What a stream is used for. Part of the stream key so that, e.g., the
/// delay samples of a group never share state with its minibatch draws.
enum class StreamPurpose : std::uint64_t {
  kLocalDelay = 1,
  kGlobalDelay = 2,
  kMinibatch = 3,
  kInit = 4,
  kData = 5,
  kPartition = 6,
  kProbe = 7,
  kHoldout = 8,
};

/// Hierarchical address of a random stream. Unused levels stay zero.
struct StreamKey {
  StreamPurpose purpose = StreamPurpose::kData;
  std::uint64_t group = 0;
  std::uint64_t client = 0;
  std::uint64_t round = 0;
  std::uint64_t index = 0;
};

/// splitmix64 finalizer.
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// Seed of the stream addressed by `key` under `master_seed`. Depends only on
/// the pair, never on how many other streams were created or consumed.
std::uint64_t derive_seed(std::uint64_t master_seed, const StreamKey& key) noexcept;

/// A 64-bit Mersenne Twister addressed by (master seed, key). Satisfies
/// UniformRandomBitGenerator so it plugs into <random> distributions.
class RngStream {
 public:
  using result_type = std::mt19937_64::result_type;

  explicit RngStream(std::uint64_t seed) : engine_(seed) {}
  RngStream(std::uint64_t master_seed, const StreamKey& key)
      : engine_(derive_seed(master_seed, key)) {}

  static constexpr result_type min() { return std::mt19937_64::min(); }
  static constexpr result_type max() { return std::mt19937_64::max(); }
  result_type operator()() { return engine_(); }

  /// Uniform double in [0, 1) from the top 53 bits.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  /// Uniform integer in [0, n). Lemire-style rejection, n > 0.
  std::uint64_t below(std::uint64_t n);

  double normal() { return normal_(engine_); }

 private:
  std::mt19937_64 engine_;
  std::normal_distribution<double> normal_{0.0, 1.0};
};

}  // namespace dshfl
