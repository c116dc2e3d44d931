// Copyright 2026 The majprop Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <algorithm>
#include <cstdint>
#include <numeric>
#include <vector>

namespace majprop {

/// SplitMix64 generator (Steele, Lea & Flood). Every random draw in the
/// library flows from one 64-bit seed through this generator, and the
/// derived distributions below are implemented here rather than taken from
/// <random>, so seeded runs reproduce bit-for-bit across platforms.
class SplitMix64 {
 public:
  using result_type = std::uint64_t;

  explicit SplitMix64(std::uint64_t seed = 0) noexcept : state_(seed) {}

  static constexpr result_type min() noexcept { return 0; }
  static constexpr result_type max() noexcept { return ~result_type{0}; }

  result_type operator()() noexcept {
    std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  /// Uniform double in [0, 1) with 53 random bits.
  double uniform() noexcept { return static_cast<double>((*this)() >> 11) * 0x1.0p-53; }

  /// Uniform double in [lo, hi).
  double uniform(double lo, double hi) noexcept { return lo + (hi - lo) * uniform(); }

  /// Uniform integer in [0, n) by rejection; n must be positive.
  std::uint64_t below(std::uint64_t n) noexcept {
    const std::uint64_t limit = max() - max() % n;
    std::uint64_t x;
    do {
      x = (*this)();
    } while (x >= limit);
    return x % n;
  }

  /// Derive an independent stream for sub-task `index`.
  SplitMix64 fork(std::uint64_t index) const noexcept {
    SplitMix64 tmp(state_ ^ (0xd1b54a32d192ed03ULL * (index + 1)));
    return SplitMix64(tmp());
  }

 private:
  std::uint64_t state_;
};

/// Uniformly random k-subset of {0, ..., n-1}, sorted ascending (Floyd).
inline std::vector<int> sample_subset(int n, int k, SplitMix64& rng) {
  std::vector<int> chosen;
  chosen.reserve(static_cast<std::size_t>(k));
  for (int j = n - k; j < n; ++j) {
    const int t = static_cast<int>(rng.below(static_cast<std::uint64_t>(j) + 1));
    if (std::find(chosen.begin(), chosen.end(), t) == chosen.end()) {
      chosen.push_back(t);
    } else {
      chosen.push_back(j);
    }
  }
  std::sort(chosen.begin(), chosen.end());
  return chosen;
}

/// Fisher-Yates shuffle driven by SplitMix64.
template <typename T>
void shuffle(std::vector<T>& values, SplitMix64& rng) {
  for (std::size_t i = values.size(); i > 1; --i) {
    const auto j = static_cast<std::size_t>(rng.below(i));
    std::swap(values[i - 1], values[j]);
  }
}

}  // namespace majprop
