// Copyright 2026 The majprop Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <bit>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "majprop/errors.hpp"
#include "majprop/monomial.hpp"
#include "majprop/operator_sum.hpp"

namespace majprop {

/// Occupation-number basis state |n_1 n_2 ... n_N>.
class FockState {
 public:
  FockState() = default;

  explicit FockState(std::vector<std::uint8_t> occupations) : occ_(std::move(occupations)) {
    if (occ_.empty()) throw InputError("Fock state needs at least one mode");
    for (auto n : occ_) {
      if (n > 1) throw InputError("occupation numbers must be 0 or 1");
    }
  }

  /// Parses a bitstring such as "1100"; the leftmost character is mode 1.
  static FockState parse(std::string_view bits) {
    std::vector<std::uint8_t> occ;
    for (char ch : bits) {
      if (ch == '0' || ch == '1') {
        occ.push_back(static_cast<std::uint8_t>(ch - '0'));
      } else if (ch != ' ' && ch != '\n' && ch != '\r' && ch != '\t') {
        throw InputError("Fock state must be a 0/1 bitstring, got '" + std::string(bits) + "'");
      }
    }
    return FockState(std::move(occ));
  }

  int modes() const noexcept { return static_cast<int>(occ_.size()); }

  /// n_j for 1-based mode j.
  int occupation(int mode) const { return occ_.at(static_cast<std::size_t>(mode - 1)); }

  int particle_count() const noexcept {
    int n = 0;
    for (auto x : occ_) n += x;
    return n;
  }

  std::string to_string() const {
    std::string s;
    for (auto n : occ_) s += static_cast<char>('0' + n);
    return s;
  }

  friend bool operator==(const FockState&, const FockState&) = default;

 private:
  std::vector<std::uint8_t> occ_;
};

namespace detail {

inline constexpr std::uint64_t kOddMajoranas = 0x5555555555555555ULL;  // m_1, m_3, ...

/// Bits at positions 2(j-1) for every occupied mode j.
template <std::size_t W>
typename Monomial<W>::WordArray occupied_mask(const FockState& phi) {
  typename Monomial<W>::WordArray mask{};
  for (int j = 1; j <= phi.modes(); ++j) {
    if (phi.occupation(j) != 0) {
      const auto bit = static_cast<std::size_t>(2 * (j - 1));
      mask[bit / 64] |= std::uint64_t{1} << (bit % 64);
    }
  }
  return mask;
}

template <std::size_t W>
double fock_trace_masked(const Monomial<W>& m, const typename Monomial<W>::WordArray& occupied) noexcept {
  int pairs = 0;
  int empty_pairs = 0;
  for (std::size_t w = 0; w < W; ++w) {
    const std::uint64_t x = m.words()[w];
    if (((x ^ (x >> 1)) & kOddMajoranas) != 0) return 0.0;
    const std::uint64_t firsts = x & kOddMajoranas;
    pairs += std::popcount(firsts);
    empty_pairs += std::popcount(firsts & ~occupied[w]);
  }
  // i m_{2j-1} m_{2j} = 2 n_j - 1 and the pair factors commute, so
  // <phi|M|phi> = (-1)^{floor(p/2)} * prod_j (2 n_j - 1) over the p pairs in M.
  return (((pairs / 2) + empty_pairs) & 1) != 0 ? -1.0 : 1.0;
}

}  // namespace detail

/// True iff every pair (m_{2j-1}, m_{2j}) is either fully present or absent.
template <std::size_t W>
bool is_paired(const Monomial<W>& m) noexcept {
  for (auto x : m.words()) {
    if (((x ^ (x >> 1)) & detail::kOddMajoranas) != 0) return false;
  }
  return true;
}

/// <phi|M|phi> in {-1, 0, +1}.
template <std::size_t W>
double fock_trace(const Monomial<W>& m, const FockState& phi) {
  detail::require_same_modes(m.modes(), phi.modes());
  return detail::fock_trace_masked(m, detail::occupied_mask<W>(phi));
}

/// Σ c_M <phi|M|phi>.
template <std::size_t W>
double expectation(const OperatorSum<W>& sum, const FockState& phi) {
  detail::require_same_modes(sum.modes(), phi.modes());
  const auto mask = detail::occupied_mask<W>(phi);
  // Sorted order keeps the result independent of hash-map layout.
  double e = 0.0;
  for (const auto& [m, c] : sum.sorted_terms()) e += c * detail::fock_trace_masked(m, mask);
  return e;
}

/// The Fock-state functional as an OperatorSum: weight <phi|M|phi> on every
/// paired monomial M (2^N entries).
template <std::size_t W = 1>
OperatorSum<W> fock_weights(const FockState& phi) {
  const int n = phi.modes();
  if (n > 24) throw ResourceLimit("fock_weights enumerates 2^N monomials; N too large");
  OperatorSum<W> out(n);
  const auto mask = detail::occupied_mask<W>(phi);
  out.reserve(std::size_t{1} << n);
  for (std::uint64_t subset = 0; subset < (std::uint64_t{1} << n); ++subset) {
    typename Monomial<W>::WordArray words{};
    for (int j = 0; j < n; ++j) {
      if ((subset >> j) & 1U) {
        const auto bit = static_cast<std::size_t>(2 * j);
        words[bit / 64] |= std::uint64_t{3} << (bit % 64);
      }
    }
    const auto m = Monomial<W>::from_words(n, words);
    out.add_term(m, detail::fock_trace_masked(m, mask));
  }
  return out;
}

}  // namespace majprop
