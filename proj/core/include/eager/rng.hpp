#pragma once

// SPDX-License-Identifier: Apache-2.0

/**
 * Seeded, platform-independent random streams.
 *
 * Every sequence node draws from its own stream keyed by
 * (root seed, prompt id, node id), so the order in which branches are
 * created cannot perturb the randomness of unrelated nodes, and reruns
 * with offset node ids get fresh draws. splitmix64 is used instead of
 * <random> engines because uniform_real_distribution is not guaranteed
 * to be bit-identical across standard library implementations.
 */

#include <cstdint>
#include <string_view>

namespace eager {

namespace detail {

inline uint64_t splitmix64(uint64_t& state) {
  state += 0x9e3779b97f4a7c15ULL;
  uint64_t z = state;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

inline uint64_t fnv1a64(std::string_view s) {
  uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

inline uint64_t mix(uint64_t a, uint64_t b) {
  uint64_t s = a ^ (b + 0x9e3779b97f4a7c15ULL + (a << 6) + (a >> 2));
  return splitmix64(s);
}

}  // namespace detail

class RandomStream {
 public:
  explicit RandomStream(uint64_t seed) : state_(seed) {}

  static RandomStream keyed(uint64_t root_seed, std::string_view prompt_id,
                            uint64_t node_id) {
    uint64_t h = detail::mix(root_seed, detail::fnv1a64(prompt_id));
    return RandomStream(detail::mix(h, node_id));
  }

  uint64_t next_u64() { return detail::splitmix64(state_); }

  /// Uniform draw in [0, 1) with 53 bits of precision.
  double next_unit() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  /// Uniform integer in [0, n).
  uint64_t next_below(uint64_t n) { return next_u64() % n; }

 private:
  uint64_t state_;
};

/// Stable scalar hash used for seeded, order-independent derivations.
inline uint64_t stable_hash(uint64_t seed, uint64_t a, uint64_t b = 0) {
  return detail::mix(detail::mix(seed, a), b);
}

/// Hash of (seed, string) for prompt-level seed derivation.
inline uint64_t stable_hash(uint64_t seed, std::string_view s) {
  return detail::mix(seed, detail::fnv1a64(s));
}

}  // namespace eager
