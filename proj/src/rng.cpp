#include "dshfl/rng.hpp"

namespace dshfl {

namespace {
__extension__ using u128 = unsigned __int128;
}  // namespace

std::uint64_t derive_seed(std::uint64_t master_seed, const StreamKey& key) noexcept {
  std::uint64_t h = mix64(master_seed);
  h = mix64(h ^ static_cast<std::uint64_t>(key.purpose));
  h = mix64(h ^ key.group);
  h = mix64(h ^ key.client);
  h = mix64(h ^ key.round);
  h = mix64(h ^ key.index);
  return h;
}

std::uint64_t RngStream::below(std::uint64_t n) {
  // Rejection on the high word of a 128-bit product.
  const std::uint64_t threshold = (0 - n) % n;
  for (;;) {
    const u128 m = static_cast<u128>(engine_()) * n;
    if (static_cast<std::uint64_t>(m) >= threshold) {
      return static_cast<std::uint64_t>(m >> 64);
    }
  }
}

}  // namespace dshfl
