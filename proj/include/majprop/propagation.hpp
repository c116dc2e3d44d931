// Copyright 2026 The majprop Authors
// SPDX-License-Identifier: Apache-2.0

/**
 * @file propagation.hpp
 * @brief Heisenberg-picture back-propagation with coefficient and length truncation.
 *
 * For U = exp(-i theta G / 2) and a monomial M that anticommutes with G,
 *
 *     U^dagger M U = cos(theta) M + sin(theta) (i G M),
 *
 * while commuting monomials pass through unchanged. Gates are applied in the
 * order L, L-1, ..., 1 so that the result represents U^dagger H U.
 */

#pragma once

#include <cmath>
#include <functional>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "majprop/circuit.hpp"
#include "majprop/errors.hpp"
#include "majprop/monomial.hpp"
#include "majprop/operator_sum.hpp"
#include "majprop/parallel.hpp"

namespace majprop {

/// Bookkeeping for one gate application.
struct StepStats {
  std::size_t gate = 0;  ///< 1-based gate index
  std::size_t terms_in = 0;
  std::size_t terms_out = 0;
  std::size_t anticommuting = 0;
  std::size_t dropped_by_coefficient = 0;
  std::size_t dropped_by_length = 0;
};

struct PropagateOptions {
  unsigned threads = 1;  ///< 0 selects the hardware thread count
  std::function<void(const StepStats&)> on_step;
};

namespace detail {

struct FilterCounts {
  std::size_t by_coefficient = 0;
  std::size_t by_length = 0;
};

template <std::size_t W>
inline void emit_filtered(std::vector<std::pair<Monomial<W>, double>>& out, const Monomial<W>& m, double c,
                          const TruncationPolicy& policy, FilterCounts& counts) {
  if (c == 0.0) return;
  if (std::abs(c) < policy.coeff_threshold) {
    ++counts.by_coefficient;
    return;
  }
  if (!policy.keeps_length(m.length())) {
    ++counts.by_length;
    return;
  }
  out.emplace_back(m, c);
}

}  // namespace detail

/// Conjugates `sum` by exp(-i theta G / 2), then applies the truncation filters.
///
/// Each output coefficient is a fixed two-term expression of input
/// coefficients (a monomial M and its partner i G M), so every output key is
/// produced by exactly one input term and the result is bit-identical for
/// any thread count.
template <std::size_t W>
OperatorSum<W> apply_gate_adjoint(const OperatorSum<W>& sum, const Monomial<W>& generator, double theta,
                                  const TruncationPolicy& policy, unsigned threads = 1,
                                  StepStats* stats = nullptr) {
  detail::require_same_modes(sum.modes(), generator.modes());
  const int k = generator.length();
  if (k < 2 || k % 2 != 0) throw InputError("gate generator must have even length >= 2");

  const double cs = std::cos(theta);
  const double sn = std::sin(theta);
  const auto& map = sum.raw_terms();

  std::vector<const std::pair<const Monomial<W>, double>*> items;
  items.reserve(map.size());
  for (const auto& kv : map) items.push_back(&kv);

  const std::size_t chunks = std::max<std::size_t>(1, threads == 0 ? default_thread_count() : threads);
  std::vector<std::vector<std::pair<Monomial<W>, double>>> parts(chunks);
  std::vector<detail::FilterCounts> counts(chunks);
  std::vector<std::size_t> anti(chunks, 0);

  for_each_chunk(items.size(), chunks, [&](std::size_t c, std::size_t begin, std::size_t end) {
    auto& out = parts[c];
    out.reserve(2 * (end - begin));
    for (std::size_t i = begin; i < end; ++i) {
      const auto& [m, coeff] = *items[i];
      if (commutes(generator, m)) {
        detail::emit_filtered(out, m, coeff, policy, counts[c]);
        continue;
      }
      ++anti[c];
      const auto partner = multiply_hermitian(generator, m);  // i G M = s M'
      const auto it = map.find(partner.monomial);
      if (it != map.end()) {
        // i G M' = -s M, so M receives -s sin(theta) c_{M'} from its partner.
        detail::emit_filtered(out, m, coeff * cs - partner.sign * it->second * sn, policy, counts[c]);
      } else {
        detail::emit_filtered(out, m, coeff * cs, policy, counts[c]);
        detail::emit_filtered(out, partner.monomial, partner.sign * coeff * sn, policy, counts[c]);
      }
    }
  });

  OperatorSum<W> result(sum.modes());
  std::size_t total = 0;
  for (const auto& p : parts) total += p.size();
  result.reserve(total);
  auto& dst = result.raw_terms();
  for (auto& p : parts) {
    for (auto& [m, c] : p) dst.emplace(std::move(m), c);
  }

  if (stats != nullptr) {
    stats->terms_in = map.size();
    stats->terms_out = dst.size();
    stats->anticommuting = 0;
    stats->dropped_by_coefficient = 0;
    stats->dropped_by_length = 0;
    for (std::size_t c = 0; c < chunks; ++c) {
      stats->anticommuting += anti[c];
      stats->dropped_by_coefficient += counts[c].by_coefficient;
      stats->dropped_by_length += counts[c].by_length;
    }
  }
  return result;
}

/// Back-propagates H through the circuit using the given gate angles.
template <std::size_t W>
OperatorSum<W> propagate(const OperatorSum<W>& hamiltonian, const Circuit<W>& circuit, std::span<const double> angles,
                         const TruncationPolicy& policy, const PropagateOptions& options = {}) {
  policy.validate();
  detail::require_same_modes(hamiltonian.modes(), circuit.modes());
  if (angles.size() != circuit.size()) throw std::invalid_argument("one angle per gate is required");

  OperatorSum<W> current = hamiltonian;
  for (std::size_t j = circuit.size(); j-- > 0;) {
    StepStats stats;
    current = apply_gate_adjoint(current, circuit.gate(j).generator, angles[j], policy, options.threads, &stats);
    stats.gate = j + 1;
    if (options.on_step) options.on_step(stats);
  }
  return current;
}

/// Back-propagates H through the circuit at its stored parameter values.
template <std::size_t W>
OperatorSum<W> propagate(const OperatorSum<W>& hamiltonian, const Circuit<W>& circuit,
                         const TruncationPolicy& policy, const PropagateOptions& options = {}) {
  const auto angles = circuit.resolved_angles();
  return propagate(hamiltonian, circuit, std::span<const double>(angles), policy, options);
}

}  // namespace majprop
