#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <vector>

namespace porter::rng {

/// What a stream is used for. Streams are keyed by (master seed, purpose,
/// agent, iteration) so results never depend on evaluation order.
enum class Purpose : std::uint64_t {
  GraphGen = 1,
  Partition = 2,
  DataGen = 3,
  Init = 4,
  Batch = 5,
  Noise = 6,
  CompressX = 7,
  CompressV = 8,
  Output = 9,
  Generic = 10,
};

namespace detail {

inline std::uint64_t splitmix64(std::uint64_t& state) {
  state += 0x9e3779b97f4a7c15ULL;
  std::uint64_t z = state;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

inline std::uint64_t rotl(std::uint64_t x, int k) {
  return (x << k) | (x >> (64 - k));
}

}  // namespace detail

/// xoshiro256++ stream with a Box-Muller cache for normals.
class Stream {
 public:
  explicit Stream(std::uint64_t seed) {
    std::uint64_t sm = seed;
    for (auto& word : state_) word = detail::splitmix64(sm);
  }

  std::uint64_t next_u64() {
    const std::uint64_t result =
        detail::rotl(state_[0] + state_[3], 23) + state_[0];
    const std::uint64_t t = state_[1] << 17;
    state_[2] ^= state_[0];
    state_[3] ^= state_[1];
    state_[1] ^= state_[2];
    state_[0] ^= state_[3];
    state_[2] ^= t;
    state_[3] = detail::rotl(state_[3], 45);
    return result;
  }

  /// Uniform double in [0, 1) with 53 random bits.
  double uniform01() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  /// Uniform integer in [0, bound). Rejection sampling, no modulo bias.
  std::uint64_t below(std::uint64_t bound) {
    if (bound == 0) throw std::invalid_argument("rng: bound must be positive");
    const std::uint64_t threshold = (0 - bound) % bound;
    for (;;) {
      const std::uint64_t r = next_u64();
      if (r >= threshold) return r % bound;
    }
  }

  /// Standard normal via Box-Muller; generates pairs, caches the second.
  double normal() {
    if (has_cached_) {
      has_cached_ = false;
      return cached_;
    }
    double u1 = uniform01();
    while (u1 <= 0.0) u1 = uniform01();
    const double u2 = uniform01();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double theta = 6.283185307179586476925286766559 * u2;
    cached_ = r * std::sin(theta);
    has_cached_ = true;
    return r * std::cos(theta);
  }

  /// k distinct indices from [0, n), uniform over size-k subsets.
  /// Partial Fisher-Yates; output order is the shuffle order.
  std::vector<std::size_t> sample_without_replacement(std::size_t n,
                                                      std::size_t k) {
    if (k > n) throw std::invalid_argument("rng: sample size exceeds population");
    std::vector<std::size_t> idx(n);
    for (std::size_t i = 0; i < n; ++i) idx[i] = i;
    for (std::size_t i = 0; i < k; ++i) {
      const std::size_t j = i + static_cast<std::size_t>(below(n - i));
      std::swap(idx[i], idx[j]);
    }
    idx.resize(k);
    return idx;
  }

  /// In-place Fisher-Yates shuffle of a full index permutation.
  std::vector<std::size_t> permutation(std::size_t n) {
    return sample_without_replacement(n, n);
  }

 private:
  std::array<std::uint64_t, 4> state_{};
  double cached_ = 0.0;
  bool has_cached_ = false;
};

/// Derive a stream for (master, purpose, agent, iteration). The key schedule
/// hashes all four words through SplitMix64 so nearby keys decorrelate.
inline Stream make_stream(std::uint64_t master_seed, Purpose purpose,
                          std::uint64_t agent = 0, std::uint64_t iteration = 0) {
  std::uint64_t h = master_seed;
  std::uint64_t mix = detail::splitmix64(h);
  h ^= static_cast<std::uint64_t>(purpose) + 0x632be59bd9b4e019ULL;
  mix ^= detail::splitmix64(h);
  h ^= agent * 0xff51afd7ed558ccdULL + 0x2545f4914f6cdd1dULL;
  mix ^= detail::splitmix64(h);
  h ^= iteration * 0xc4ceb9fe1a85ec53ULL + 0x9e3779b97f4a7c15ULL;
  mix ^= detail::splitmix64(h);
  return Stream(mix);
}

}  // namespace porter::rng
