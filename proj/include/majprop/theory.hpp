// Copyright 2026 The majprop Authors
// SPDX-License-Identifier: Apache-2.0

/**
 * @file theory.hpp
 * @brief Exact combinatorics of monomial lengths under random gates.
 *
 * All probabilities are ratios of binomial coefficients, computed exactly
 * with big integers and converted to double only at the end.
 *
 * Conventions for a length-w monomial and a random length-k generator with
 * overlap s: the sine branch has length w + k - 2s and exists only for odd s.
 * p_plus sums odd s < k/2, p_minus sums odd s > k/2, and p_same is the
 * complement (even s, and s = k/2 when that is odd).
 */

#pragma once

#include <boost/multiprecision/cpp_int.hpp>

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

#include "majprop/random.hpp"
#include "majprop/text_io.hpp"

namespace majprop::theory {

using BigInt = boost::multiprecision::cpp_int;
using Rational = boost::multiprecision::cpp_rational;

inline constexpr int kMaxModes = 200;

namespace detail {

inline void check_modes(int n) {
  if (n < 1 || n > kMaxModes) {
    throw std::invalid_argument("mode count must be in 1.." + std::to_string(kMaxModes));
  }
}

inline void check_length(int n, int w, const char* what) {
  if (w < 0 || w > 2 * n) {
    throw std::invalid_argument(std::string(what) + " must be in 0..2N, got " + std::to_string(w));
  }
}

inline double to_double(const Rational& r) { return r.convert_to<double>(); }

}  // namespace detail

/// C(n, k); zero outside 0 <= k <= n.
inline BigInt binomial(int n, int k) {
  if (k < 0 || n < 0 || k > n) return 0;
  k = std::min(k, n - k);
  BigInt r = 1;
  for (int i = 1; i <= k; ++i) {
    r *= n - k + i;
    r /= i;
  }
  return r;
}

/// Probability that a uniformly random length-w monomial on N modes is
/// paired: C(N, w/2) / C(2N, w), and 0 for odd w.
inline Rational pairing_probability_exact(int n, int w) {
  detail::check_modes(n);
  detail::check_length(n, w, "length w");
  if (w % 2 != 0) return 0;
  return Rational(binomial(n, w / 2), binomial(2 * n, w));
}

inline double pairing_probability(int n, int w) { return detail::to_double(pairing_probability_exact(n, w)); }

/// Probability that a fixed length-w monomial and a random length-k monomial
/// share exactly s Majorana operators: C(k,s) C(2N-k, w-s) / C(2N, w).
inline Rational overlap_probability_exact(int n, int w, int k, int s) {
  detail::check_modes(n);
  detail::check_length(n, w, "length w");
  detail::check_length(n, k, "generator length k");
  if (s < 0 || s > std::min(w, k)) {
    throw std::invalid_argument("overlap s must be in 0..min(w,k)");
  }
  if (w - s > 2 * n - k) return 0;
  return Rational(binomial(k, s) * binomial(2 * n - k, w - s), binomial(2 * n, w));
}

inline double overlap_probability(int n, int w, int k, int s) {
  return detail::to_double(overlap_probability_exact(n, w, k, s));
}

template <typename T>
struct BasicBranchProbabilities {
  T p_plus{};
  T p_minus{};
  T p_same{};
};

using ExactBranchProbabilities = BasicBranchProbabilities<Rational>;
using BranchProbabilities = BasicBranchProbabilities<double>;

inline ExactBranchProbabilities branch_probabilities_exact(int n, int w, int k) {
  detail::check_modes(n);
  detail::check_length(n, w, "length w");
  detail::check_length(n, k, "generator length k");
  if (k % 2 != 0) throw std::invalid_argument("generator length k must be even");
  ExactBranchProbabilities p;
  for (int s = 1; s <= std::min(w, k); s += 2) {
    if (2 * s < k) p.p_plus += overlap_probability_exact(n, w, k, s);
    if (2 * s > k) p.p_minus += overlap_probability_exact(n, w, k, s);
  }
  p.p_same = Rational(1) - p.p_plus - p.p_minus;
  return p;
}

inline BranchProbabilities branch_probabilities(int n, int w, int k) {
  const auto e = branch_probabilities_exact(n, w, k);
  return {detail::to_double(e.p_plus), detail::to_double(e.p_minus), detail::to_double(e.p_same)};
}

/// P_minus / P_plus for k = 4: (w-1)(w-2) / ((2N-1-w)(2N-2-w)).
inline Rational backflow_ratio_k4_exact(int n, int w) {
  detail::check_modes(n);
  if (w < 3 || w > 2 * n - 3) throw std::invalid_argument("backflow ratio needs 3 <= w <= 2N-3");
  return Rational(BigInt((w - 1) * (w - 2)), BigInt((2 * n - 1 - w) * (2 * n - 2 - w)));
}

inline double backflow_ratio_k4(int n, int w) { return detail::to_double(backflow_ratio_k4_exact(n, w)); }

/// Length of the sine branch, w + k - 2s.
inline int result_length(int w, int k, int s) {
  if (s < 0 || s > std::min(w, k)) throw std::invalid_argument("overlap s must be in 0..min(w,k)");
  return w + k - 2 * s;
}

struct Figure2Row {
  int w = 0;
  double p_plus = 0.0;
  double p_minus = 0.0;
  double p_same = 0.0;
  double pairing = 0.0;
};

/// One row per length w = 0..2N.
inline std::vector<Figure2Row> figure2_data(int n, int k) {
  detail::check_modes(n);
  std::vector<Figure2Row> rows;
  rows.reserve(static_cast<std::size_t>(2 * n + 1));
  for (int w = 0; w <= 2 * n; ++w) {
    const auto b = branch_probabilities(n, w, k);
    rows.push_back({w, b.p_plus, b.p_minus, b.p_same, pairing_probability(n, w)});
  }
  return rows;
}

inline void write_figure2_csv(std::ostream& out, const std::vector<Figure2Row>& rows) {
  out << "w,p_plus,p_minus,p_same,pairing\n";
  for (const auto& r : rows) {
    out << r.w << ',' << majprop::detail::format_double(r.p_plus) << ','
        << majprop::detail::format_double(r.p_minus) << ',' << majprop::detail::format_double(r.p_same) << ','
        << majprop::detail::format_double(r.pairing) << '\n';
  }
}

/// Fraction of `samples` uniformly random length-w monomials that are paired.
inline double monte_carlo_pairing(int n, int w, std::uint64_t samples, std::uint64_t seed) {
  detail::check_modes(n);
  detail::check_length(n, w, "length w");
  if (w % 2 != 0) throw std::invalid_argument("monte_carlo_pairing needs even w");
  if (w == 0) return 1.0;
  if (samples == 0) throw std::invalid_argument("at least one sample is required");
  SplitMix64 rng(seed);
  std::uint64_t hits = 0;
  for (std::uint64_t t = 0; t < samples; ++t) {
    const auto idx = sample_subset(2 * n, w, rng);  // sorted, 0-based
    bool paired = true;
    for (std::size_t i = 0; i < idx.size() && paired; i += 2) {
      paired = idx[i] % 2 == 0 && idx[i + 1] == idx[i] + 1;
    }
    hits += paired ? 1 : 0;
  }
  return static_cast<double>(hits) / static_cast<double>(samples);
}

/// Exhaustive count over all C(2N, w) monomials: paired / total, exactly.
inline Rational exhaustive_pairing_fraction(int n, int w) {
  if (n < 1 || n > 12) throw std::invalid_argument("exhaustive enumeration limited to N <= 12");
  detail::check_length(n, w, "length w");
  std::uint64_t paired = 0, total = 0;
  const std::uint64_t odd = 0x5555555555555555ULL;
  for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << (2 * n)); ++mask) {
    if (std::popcount(mask) != w) continue;
    ++total;
    if (((mask ^ (mask >> 1)) & odd) == 0) ++paired;
  }
  return Rational(BigInt(paired), BigInt(total));
}

}  // namespace majprop::theory
