// Copyright 2026 The majprop Authors
// SPDX-License-Identifier: Apache-2.0

/**
 * @file operator_sum.hpp
 * @brief Sparse real combinations of Hermitian Majorana monomials.
 *
 * Observables, Hamiltonians and back-propagated operators are all stored as
 * OperatorSum. Also provides the exact fermionic -> Majorana conversion and
 * the `.majh` text format:
 *
 *     modes N
 *     <coeff> [i1,...,ik]     # one term per line, '#' starts a comment
 */

#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <map>
#include <ostream>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "majprop/errors.hpp"
#include "majprop/monomial.hpp"
#include "majprop/random.hpp"
#include "majprop/text_io.hpp"

namespace majprop {

template <std::size_t W = 1>
class OperatorSum {
 public:
  using Map = std::unordered_map<Monomial<W>, double, MonomialHash>;
  using Term = std::pair<Monomial<W>, double>;

  OperatorSum() = default;
  explicit OperatorSum(int modes) : modes_(modes) {
    if (modes < 1 || modes > Monomial<W>::kMaxModes) {
      throw ResourceLimit("mode count " + std::to_string(modes) + " unsupported at this width");
    }
  }

  int modes() const noexcept { return modes_; }
  std::size_t size() const noexcept { return terms_.size(); }
  bool empty() const noexcept { return terms_.empty(); }

  /// Adds c to the coefficient of m; the key is dropped if the result is exactly zero.
  OperatorSum& add_term(const Monomial<W>& m, double c) {
    detail::require_same_modes(modes_, m.modes());
    if (c == 0.0) return *this;
    auto [it, inserted] = terms_.try_emplace(m, c);
    if (!inserted) {
      it->second += c;
      if (it->second == 0.0) terms_.erase(it);
    }
    return *this;
  }

  double coefficient(const Monomial<W>& m) const {
    const auto it = terms_.find(m);
    return it == terms_.end() ? 0.0 : it->second;
  }

  bool contains(const Monomial<W>& m) const { return terms_.find(m) != terms_.end(); }

  auto begin() const noexcept { return terms_.begin(); }
  auto end() const noexcept { return terms_.end(); }

  /// Terms sorted by lexicographic bit-vector order.
  std::vector<Term> sorted_terms() const {
    std::vector<Term> out(terms_.begin(), terms_.end());
    std::sort(out.begin(), out.end(),
              [](const Term& a, const Term& b) { return lex_less(a.first, b.first); });
    return out;
  }

  /// Sum of squared coefficients (Hilbert-Schmidt norm over 2^N).
  double squared_norm() const noexcept {
    double s = 0.0;
    for (const auto& [m, c] : terms_) s += c * c;
    return s;
  }

  /// Largest monomial length present (0 for an empty sum).
  int max_length() const noexcept {
    int w = 0;
    for (const auto& [m, c] : terms_) w = std::max(w, m.length());
    return w;
  }

  OperatorSum& operator+=(const OperatorSum& other) {
    detail::require_same_modes(modes_, other.modes_);
    for (const auto& [m, c] : other.terms_) add_term(m, c);
    return *this;
  }

  OperatorSum& operator*=(double s) {
    if (s == 0.0) {
      terms_.clear();
      return *this;
    }
    for (auto& [m, c] : terms_) c *= s;
    return *this;
  }

  void reserve(std::size_t n) { terms_.reserve(n); }

  /// Direct access for engines that build sums in bulk.
  Map& raw_terms() noexcept { return terms_; }
  const Map& raw_terms() const noexcept { return terms_; }

 private:
  int modes_ = 0;
  Map terms_;
};

template <std::size_t W>
OperatorSum<W> add_term(OperatorSum<W> sum, const Monomial<W>& m, double c) {
  sum.add_term(m, c);
  return sum;
}

/// Σ_M a_M b_M over monomials present in both sums.
template <std::size_t W>
double inner_product(const OperatorSum<W>& a, const OperatorSum<W>& b) {
  detail::require_same_modes(a.modes(), b.modes());
  const auto& small = a.size() <= b.size() ? a : b;
  const auto& large = a.size() <= b.size() ? b : a;
  double s = 0.0;
  for (const auto& [m, c] : small) {
    if (const auto it = large.raw_terms().find(m); it != large.raw_terms().end()) s += c * it->second;
  }
  return s;
}

// ---------------------------------------------------------------------------
// Fermionic -> Majorana conversion
// ---------------------------------------------------------------------------

/// h_ij for the term h_ij a_i^† a_j, 1-based mode indices.
using OneBodyTable = std::map<std::array<int, 2>, std::complex<double>>;
/// h_ijkl for the term h_ijkl a_i^† a_j^† a_k a_l, 1-based mode indices.
using TwoBodyTable = std::map<std::array<int, 4>, std::complex<double>>;

namespace detail {

template <std::size_t W>
using RawPolynomial = std::unordered_map<Monomial<W>, std::complex<double>, MonomialHash>;

/// a_j^† = (m_{2j-1} - i m_{2j})/2 and a_j = (m_{2j-1} + i m_{2j})/2 in the
/// basis of ascending raw Majorana products.
template <std::size_t W>
RawPolynomial<W> ladder(int modes, int mode, bool creation) {
  using namespace std::complex_literals;
  RawPolynomial<W> p;
  p[Monomial<W>::from_indices(modes, {2 * mode - 1})] = 0.5;
  p[Monomial<W>::from_indices(modes, {2 * mode})] = creation ? -0.5i : 0.5i;
  return p;
}

template <std::size_t W>
RawPolynomial<W> multiply(const RawPolynomial<W>& a, const RawPolynomial<W>& b) {
  RawPolynomial<W> out;
  for (const auto& [ma, ca] : a) {
    for (const auto& [mb, cb] : b) {
      const double sign = ordered_product_parity(ma, mb) != 0 ? -1.0 : 1.0;
      out[symmetric_difference(ma, mb)] += sign * ca * cb;
    }
  }
  return out;
}

template <std::size_t W>
void check_mode(int mode, int modes) {
  if (mode < 1 || mode > modes) {
    throw InputError("mode index " + std::to_string(mode) + " outside 1.." + std::to_string(modes));
  }
}

}  // namespace detail

/// Exact Majorana expansion of Σ h_ij a_i^† a_j + Σ h_ijkl a_i^† a_j^† a_k a_l.
/// Throws InputError if the input is not Hermitian (imaginary residue > 1e-12).
template <std::size_t W = 1>
OperatorSum<W> fermionic_to_majorana(const OneBodyTable& one_body, const TwoBodyTable& two_body,
                                     int modes) {
  using namespace std::complex_literals;
  OperatorSum<W> result(modes);
  detail::RawPolynomial<W> raw;

  std::vector<detail::RawPolynomial<W>> create, annihilate;
  for (int j = 1; j <= modes; ++j) {
    create.push_back(detail::ladder<W>(modes, j, true));
    annihilate.push_back(detail::ladder<W>(modes, j, false));
  }
  auto accumulate = [&raw](const detail::RawPolynomial<W>& p, std::complex<double> h) {
    for (const auto& [m, c] : p) raw[m] += h * c;
  };

  for (const auto& [ij, h] : one_body) {
    if (h == 0.0) continue;
    detail::check_mode<W>(ij[0], modes);
    detail::check_mode<W>(ij[1], modes);
    accumulate(detail::multiply(create[ij[0] - 1], annihilate[ij[1] - 1]), h);
  }
  for (const auto& [ijkl, h] : two_body) {
    if (h == 0.0) continue;
    for (int idx : ijkl) detail::check_mode<W>(idx, modes);
    auto p = detail::multiply(create[ijkl[0] - 1], create[ijkl[1] - 1]);
    p = detail::multiply(p, annihilate[ijkl[2] - 1]);
    p = detail::multiply(p, annihilate[ijkl[3] - 1]);
    accumulate(p, h);
  }

  // raw_c = i^{-r_c} M_c.
  std::vector<std::pair<Monomial<W>, std::complex<double>>> hermitian;
  hermitian.reserve(raw.size());
  for (const auto& [m, c] : raw) {
    const std::complex<double> z = hermitian_phase_exponent(m.length()) == 1 ? c * -1.0i : c;
    hermitian.emplace_back(m, z);
  }
  std::sort(hermitian.begin(), hermitian.end(),
            [](const auto& a, const auto& b) { return lex_less(a.first, b.first); });
  for (const auto& [m, z] : hermitian) {
    if (std::abs(z.imag()) > 1e-12) {
      throw InputError("fermionic Hamiltonian is not Hermitian: imaginary residue " +
                       detail::format_double(z.imag()) + " on " + to_string(m));
    }
    if (std::abs(z.real()) >= 1e-14) result.add_term(m, z.real());
  }
  return result;
}

/// Coefficient tables of a random number-conserving two-body Hamiltonian.
struct FermionicTables {
  int modes = 0;
  OneBodyTable one_body;
  TwoBodyTable two_body;
};

/// Draws h_ij uniform in [-1,1] and h_ijkl uniform in [-two_body_scale, two_body_scale],
/// then imposes h_ji = conj(h_ij) and h_lkji = conj(h_ijkl).
inline FermionicTables random_fermionic_tables(int modes, std::uint64_t seed, bool complex_coefficients = false,
                                               double two_body_scale = 0.5) {
  SplitMix64 rng(seed);
  FermionicTables t;
  t.modes = modes;
  auto draw = [&](double scale) {
    const double re = rng.uniform(-scale, scale);
    const double im = complex_coefficients ? rng.uniform(-scale, scale) : 0.0;
    return std::complex<double>(re, im);
  };
  for (int i = 1; i <= modes; ++i) {
    for (int j = i; j <= modes; ++j) {
      auto h = draw(1.0);
      if (i == j) h = h.real();
      t.one_body[{i, j}] = h;
      t.one_body[{j, i}] = std::conj(h);
    }
  }
  for (int i = 1; i <= modes; ++i) {
    for (int j = 1; j <= modes; ++j) {
      if (i == j) continue;
      for (int k = 1; k <= modes; ++k) {
        for (int l = 1; l <= modes; ++l) {
          if (k == l) continue;
          const std::array<int, 4> key{i, j, k, l};
          const std::array<int, 4> mirror{l, k, j, i};
          if (mirror < key) continue;
          auto h = draw(two_body_scale);
          if (mirror == key) h = h.real();
          t.two_body[key] = h;
          t.two_body[mirror] = std::conj(h);
        }
      }
    }
  }
  return t;
}

/// Random number-conserving two-body Hamiltonian in the Majorana basis.
template <std::size_t W = 1>
OperatorSum<W> random_two_body_hamiltonian(int modes, std::uint64_t seed) {
  const auto t = random_fermionic_tables(modes, seed);
  return fermionic_to_majorana<W>(t.one_body, t.two_body, modes);
}

// ---------------------------------------------------------------------------
// .majh text format
// ---------------------------------------------------------------------------

template <std::size_t W = 1>
OperatorSum<W> parse_majh(std::string_view text, std::string_view source = "<majh>") {
  const int modes = detail::header_modes(text, source);
  if (modes > Monomial<W>::kMaxModes) {
    throw ResourceLimit(std::string(source) + ": " + std::to_string(modes) + " modes exceed storage width");
  }
  OperatorSum<W> sum(modes);
  const auto lines = detail::content_lines(text);
  for (std::size_t i = 1; i < lines.size(); ++i) {
    const auto tok = detail::tokens(lines[i].text);
    double c = 0.0;
    if (tok.size() != 2 || !detail::parse_double(tok[0], c) || !std::isfinite(c)) {
      detail::fail_at(source, lines[i].number, "expected '<coeff> [i1,...,ik]'");
    }
    try {
      sum.add_term(parse_monomial<W>(tok[1], modes), c);
    } catch (const InputError& e) {
      detail::fail_at(source, lines[i].number, e.what());
    }
  }
  return sum;
}

template <std::size_t W>
void write_majh(std::ostream& out, const OperatorSum<W>& sum) {
  out << "modes " << sum.modes() << '\n';
  for (const auto& [m, c] : sum.sorted_terms()) {
    out << detail::format_double(c) << ' ' << to_string(m) << '\n';
  }
}

}  // namespace majprop
