#pragma once

#include <cstdint>
#include <limits>

namespace hfevd {

/// SplitMix64 finalizer, used to derive independent substream keys.
constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Stream domains so that e.g. Gaussian draws and bootstrap indices for the
/// same (seed, path) never share a substream.
enum class StreamTag : std::uint64_t {
  gaussian = 0x4741555353ULL,
  bootstrap = 0x424f4f54ULL,
  nested_outer = 0x4f55544552ULL,
  nested_inner = 0x494e4e4552ULL,
  series = 0x534552ULL,
};

/// xoshiro256** keyed by (seed, tag, stream). Path s of a batch always uses
/// stream s, so its draws are a pure function of (seed, s) regardless of how
/// paths are distributed across worker threads. Satisfies
/// UniformRandomBitGenerator and plugs into <random> distributions.
class PathRng {
 public:
  using result_type = std::uint64_t;

  PathRng(std::uint64_t seed, StreamTag tag, std::uint64_t stream) noexcept {
    std::uint64_t key = splitmix64(seed ^ splitmix64(static_cast<std::uint64_t>(tag)));
    key = splitmix64(key ^ splitmix64(stream + 0x632be59bd9b4e019ULL));
    for (auto& w : state_) {
      key += 0x9e3779b97f4a7c15ULL;
      w = splitmix64(key);
    }
  }

  static constexpr result_type min() noexcept { return 0; }
  static constexpr result_type max() noexcept { return std::numeric_limits<result_type>::max(); }

  result_type operator()() noexcept {
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

 private:
  static constexpr std::uint64_t rotl(std::uint64_t x, int k) noexcept {
    return (x << k) | (x >> (64 - k));
  }

  std::uint64_t state_[4]{};
};

}  // namespace hfevd
