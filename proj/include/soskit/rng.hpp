// Copyright 2026 The soskit Authors
// SPDX-License-Identifier: Apache-2.0
//
// Counter-based splittable random stream. Each draw hashes (key, counter)
// with the SplitMix64 finalizer, so streams are stateless apart from the
// counter, reruns are bit-reproducible on every platform, and split children
// are statistically independent of the parent. No std::random machinery.
#pragma once

#include <cmath>
#include <cstdint>

namespace soskit {

namespace detail {

inline constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ULL;
inline constexpr std::uint64_t kSplitSalt = 0xD1B54A32D192ED03ULL;

inline std::uint64_t mix64(std::uint64_t z) {
  z ^= z >> 30;
  z *= 0xBF58476D1CE4E5B9ULL;
  z ^= z >> 27;
  z *= 0x94D049BB133111EBULL;
  z ^= z >> 31;
  return z;
}

}  // namespace detail

class RandomStream {
 public:
  explicit RandomStream(std::uint64_t seed) : key_(detail::mix64(seed + detail::kGolden)) {}

  // Child stream fully determined by (parent key, id); advancing the parent
  // afterwards does not affect children already split off.
  RandomStream split(std::uint64_t id) const {
    RandomStream child(0);
    child.key_ = detail::mix64(key_ ^ detail::mix64(id + detail::kSplitSalt));
    child.counter_ = 0;
    return child;
  }

  std::uint64_t next_u64() { return detail::mix64(key_ + detail::kGolden * (++counter_)); }

  // Uniform on [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  // Uniform on [0, 1e) via rejection-free scaling.
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  bool bernoulli(double p) { return uniform() < p; }

  // Box-Muller; consumes two uniforms per call, no cached state.
  double normal(double mean = 0.0, double stddev = 1.0) {
    double u1 = uniform();
    while (u1 <= 0.0) u1 = uniform();
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    constexpr double two_pi = 6.283185307179586476925286766559;
    return mean + stddev * r * std::cos(two_pi * u2);
  }

  // Integer in [0, n).
  std::uint64_t below(std::uint64_t n) { return next_u64() % n; }

  std::uint64_t key() const { return key_; }
  std::uint64_t counter() const { return counter_; }

 private:
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

}  // namespace soskit
