// Copyright 2026 The majprop Authors
// SPDX-License-Identifier: Apache-2.0

/**
 * @file monomial.hpp
 * @brief Canonical Hermitian Majorana monomials and their exact products.
 *
 * A monomial on N modes is stored as a 2N-bit vector b; bit i (0-based) set
 * means the Majorana operator m_{i+1} is present. The represented operator is
 * the Hermitian product
 *
 *     M_b = i^{r(w)} m_1^{b_1} m_2^{b_2} ... m_{2N}^{b_{2N}},   w = |b|,
 *
 * where the phase exponent r(w) is derived from the length and never stored.
 * Products of two such monomials are again a monomial up to a power of i,
 * which is tracked exactly.
 */

#pragma once

#include <algorithm>
#include <array>
#include <bit>
#include <cstdint>
#include <initializer_list>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "majprop/errors.hpp"

namespace majprop {

template <std::size_t Words = 1>
class Monomial {
  static_assert(Words >= 1, "at least one storage word is required");

 public:
  using WordArray = std::array<std::uint64_t, Words>;
  /// Two Majorana operators per mode, 64 bits per word.
  static constexpr int kMaxModes = static_cast<int>(32 * Words);

  Monomial() noexcept = default;

  /// Identity monomial on `modes` modes.
  explicit Monomial(int modes) : modes_(checked_modes(modes)) {}

  /// Builds a monomial from 1-based Majorana indices (any order).
  static Monomial from_indices(int modes, std::span<const int> indices) {
    Monomial m(modes);
    for (int idx : indices) {
      if (idx < 1 || idx > 2 * modes) {
        throw InputError("Majorana index " + std::to_string(idx) + " outside 1.." +
                         std::to_string(2 * modes));
      }
      if (m.contains(idx)) {
        throw InputError("duplicate Majorana index " + std::to_string(idx));
      }
      m.bits_[static_cast<std::size_t>(idx - 1) / 64] |= std::uint64_t{1} << ((idx - 1) % 64);
    }
    return m;
  }

  static Monomial from_indices(int modes, std::initializer_list<int> indices) {
    return from_indices(modes, std::span<const int>(indices.begin(), indices.size()));
  }

  /// Builds a monomial from raw storage words. Bits at positions >= 2N must be clear.
  static Monomial from_words(int modes, const WordArray& words) {
    Monomial m(modes);
    m.bits_ = words;
    const int used = 2 * modes;
    for (std::size_t w = 0; w < Words; ++w) {
      const int lo = static_cast<int>(w * 64);
      std::uint64_t allowed = 0;
      if (used >= lo + 64) {
        allowed = ~std::uint64_t{0};
      } else if (used > lo) {
        allowed = (std::uint64_t{1} << (used - lo)) - 1;
      }
      if ((words[w] & ~allowed) != 0) throw InputError("monomial bits beyond 2N");
    }
    return m;
  }

  int modes() const noexcept { return modes_; }

  int length() const noexcept {
    int n = 0;
    for (auto w : bits_) n += std::popcount(w);
    return n;
  }

  bool is_identity() const noexcept {
    return std::all_of(bits_.begin(), bits_.end(), [](std::uint64_t w) { return w == 0; });
  }

  /// True if Majorana operator m_index (1-based) is present.
  bool contains(int index) const noexcept {
    const auto bit = static_cast<std::size_t>(index - 1);
    return ((bits_[bit / 64] >> (bit % 64)) & 1U) != 0;
  }

  /// Ascending 1-based Majorana indices.
  std::vector<int> indices() const {
    std::vector<int> out;
    out.reserve(static_cast<std::size_t>(length()));
    for (std::size_t w = 0; w < Words; ++w) {
      for (std::uint64_t x = bits_[w]; x != 0; x &= x - 1) {
        out.push_back(static_cast<int>(w * 64) + std::countr_zero(x) + 1);
      }
    }
    return out;
  }

  const WordArray& words() const noexcept { return bits_; }

  /// Monomial whose bit vector is the XOR of the two operands (no phase).
  friend Monomial symmetric_difference(const Monomial& a, const Monomial& b) {
    detail::require_same_modes(a.modes_, b.modes_);
    Monomial out(a);
    for (std::size_t w = 0; w < Words; ++w) out.bits_[w] ^= b.bits_[w];
    return out;
  }

  friend bool operator==(const Monomial&, const Monomial&) = default;

 private:
  static std::uint16_t checked_modes(int modes) {
    if (modes < 1 || modes > kMaxModes) {
      throw ResourceLimit("mode count " + std::to_string(modes) + " outside 1.." +
                          std::to_string(kMaxModes) + " for this storage width");
    }
    return static_cast<std::uint16_t>(modes);
  }

  WordArray bits_{};
  std::uint16_t modes_ = 0;
};

// ---------------------------------------------------------------------------
// Lengths, overlaps and commutation
// ---------------------------------------------------------------------------

template <std::size_t W>
int length(const Monomial<W>& m) noexcept {
  return m.length();
}

/// Exponent r in {0,1} making i^r m_{x1}...m_{xw} Hermitian: reversing w
/// factors costs (-1)^{w(w-1)/2}, so r = 0 iff w or w-1 is a multiple of 4.
constexpr int hermitian_phase_exponent(int w) noexcept {
  return (w % 4 == 0 || w % 4 == 1) ? 0 : 1;
}

/// Number of Majorana operators common to both monomials.
template <std::size_t W>
int overlap(const Monomial<W>& a, const Monomial<W>& b) {
  detail::require_same_modes(a.modes(), b.modes());
  int s = 0;
  for (std::size_t w = 0; w < W; ++w) s += std::popcount(a.words()[w] & b.words()[w]);
  return s;
}

/// AB = (-1)^{|A||B| - s} BA for monomials with overlap s.
template <std::size_t W>
bool commutes(const Monomial<W>& a, const Monomial<W>& b) {
  const int s = overlap(a, b);
  return ((a.length() * b.length() - s) & 1) == 0;
}

namespace detail {

/// Parity of the number of transpositions needed to bring the concatenated
/// ordered product raw(a) * raw(b) into ascending order, i.e. the parity of
/// #{(x, y) : x in a, y in b, x > y}. Equal indices cancel in place without
/// contributing beyond that count.
template <std::size_t W>
int ordered_product_parity(const Monomial<W>& a, const Monomial<W>& b) noexcept {
  // For each position p, mask bit p = parity of #{y in b : y < p}.
  std::uint64_t carry = 0;
  int acc = 0;
  for (std::size_t w = 0; w < W; ++w) {
    const std::uint64_t x = b.words()[w];
    std::uint64_t p = x;
    p ^= p << 1;
    p ^= p << 2;
    p ^= p << 4;
    p ^= p << 8;
    p ^= p << 16;
    p ^= p << 32;
    const std::uint64_t below = (p ^ x) ^ carry;
    acc ^= std::popcount(a.words()[w] & below);
    if ((p >> 63) != 0) carry = ~carry;
  }
  return acc & 1;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Products
// ---------------------------------------------------------------------------

/// i^phase * M, phase in {0,1,2,3}.
template <std::size_t W>
struct PhasedMonomial {
  Monomial<W> monomial;
  int phase = 0;
};

/// sign * M, sign in {+1,-1}.
template <std::size_t W>
struct SignedMonomial {
  Monomial<W> monomial;
  int sign = 1;
};

/// Exact operator product a*b = i^phase * M_c with c = a XOR b.
template <std::size_t W>
PhasedMonomial<W> product(const Monomial<W>& a, const Monomial<W>& b) {
  auto c = symmetric_difference(a, b);
  const int phase = hermitian_phase_exponent(a.length()) + hermitian_phase_exponent(b.length()) +
                    2 * detail::ordered_product_parity(a, b) - hermitian_phase_exponent(c.length());
  return {std::move(c), ((phase % 4) + 4) % 4};
}

/// Returns sign * M_c equal to i * g * m. Only defined for anticommuting
/// inputs, which is exactly when i*g*m is Hermitian.
template <std::size_t W>
SignedMonomial<W> multiply_hermitian(const Monomial<W>& g, const Monomial<W>& m) {
  auto p = product(g, m);
  const int phase = (p.phase + 1) % 4;
  if (phase % 2 != 0) {
    throw ContractViolation("multiply_hermitian requires anticommuting monomials");
  }
  return {std::move(p.monomial), phase == 0 ? 1 : -1};
}

/// Returns sign * M_c equal to g * m for commuting inputs.
template <std::size_t W>
SignedMonomial<W> hermitian_product(const Monomial<W>& g, const Monomial<W>& m) {
  auto p = product(g, m);
  if (p.phase % 2 != 0) {
    throw ContractViolation("hermitian_product requires commuting monomials");
  }
  return {std::move(p.monomial), p.phase == 0 ? 1 : -1};
}

// ---------------------------------------------------------------------------
// Ordering, hashing, text
// ---------------------------------------------------------------------------

/// Lexicographic order on (b_1, ..., b_{2N}) with 0 < 1; the identity is smallest.
template <std::size_t W>
bool lex_less(const Monomial<W>& a, const Monomial<W>& b) noexcept {
  if (a.modes() != b.modes()) return a.modes() < b.modes();
  for (std::size_t w = 0; w < W; ++w) {
    const std::uint64_t diff = a.words()[w] ^ b.words()[w];
    if (diff != 0) {
      const int bit = std::countr_zero(diff);
      return ((a.words()[w] >> bit) & 1U) == 0;
    }
  }
  return false;
}

struct LexLess {
  template <std::size_t W>
  bool operator()(const Monomial<W>& a, const Monomial<W>& b) const noexcept {
    return lex_less(a, b);
  }
};

struct MonomialHash {
  template <std::size_t W>
  std::size_t operator()(const Monomial<W>& m) const noexcept {
    std::uint64_t h = 0x9e3779b97f4a7c15ULL ^ m.modes();
    for (auto w : m.words()) {
      h ^= w + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
      h ^= h >> 31;
      h *= 0xbf58476d1ce4e5b9ULL;
      h ^= h >> 29;
    }
    return static_cast<std::size_t>(h);
  }
};

/// "[i1,i2,...,ik]" with ascending 1-based indices; identity is "[]".
template <std::size_t W>
std::string to_string(const Monomial<W>& m) {
  std::string out = "[";
  bool first = true;
  for (int idx : m.indices()) {
    if (!first) out += ',';
    out += std::to_string(idx);
    first = false;
  }
  out += ']';
  return out;
}

/// Parses "[i1,...,ik]". Whitespace is allowed around tokens.
template <std::size_t W = 1>
Monomial<W> parse_monomial(std::string_view text, int modes) {
  auto trim = [](std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
    return s;
  };
  text = trim(text);
  if (text.size() < 2 || text.front() != '[' || text.back() != ']') {
    throw InputError("expected monomial of the form [i1,...,ik], got '" + std::string(text) + "'");
  }
  std::string_view body = trim(text.substr(1, text.size() - 2));
  std::vector<int> indices;
  while (!body.empty()) {
    const auto comma = body.find(',');
    const std::string_view token = trim(body.substr(0, comma));
    if (token.empty()) throw InputError("empty index in monomial '" + std::string(text) + "'");
    int value = 0;
    for (char ch : token) {
      if (ch < '0' || ch > '9') {
        throw InputError("bad index '" + std::string(token) + "' in monomial");
      }
      value = value * 10 + (ch - '0');
      if (value > 1'000'000) throw InputError("index too large in monomial");
    }
    indices.push_back(value);
    if (comma == std::string_view::npos) break;
    body.remove_prefix(comma + 1);
    if (trim(body).empty()) throw InputError("trailing comma in monomial");
  }
  return Monomial<W>::from_indices(modes, indices);
}

}  // namespace majprop
