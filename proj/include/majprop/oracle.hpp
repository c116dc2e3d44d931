// Copyright 2026 The majprop Authors
// SPDX-License-Identifier: Apache-2.0

/**
 * @file oracle.hpp
 * @brief Brute-force dense reference simulator on the 2^N-dimensional Fock space.
 *
 * Basis states are indexed by occupation bitstrings with mode 1 as the most
 * significant bit. Creation and annihilation operators follow
 *
 *     a_j |n> = (-1)^{n_1 + ... + n_{j-1}} n_j |n with n_j -> 0>,
 *
 * and m_{2j-1} = a_j^dagger + a_j, m_{2j} = i (a_j^dagger - a_j).
 *
 * Everything here is deliberately direct; it exists to check the fast code.
 */

#pragma once

#include <Eigen/Dense>

#include <bit>
#include <cmath>
#include <complex>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "majprop/circuit.hpp"
#include "majprop/errors.hpp"
#include "majprop/fock.hpp"
#include "majprop/monomial.hpp"
#include "majprop/operator_sum.hpp"

namespace majprop::oracle {

using Complex = std::complex<double>;
using DenseOperator = Eigen::MatrixXcd;
using StateVector = Eigen::VectorXcd;

inline constexpr int kDefaultCeiling = 12;
inline constexpr int kHardCeiling = 14;

struct Limits {
  int ceiling = kDefaultCeiling;
};

inline void check_size(int modes, const Limits& limits) {
  if (limits.ceiling > kHardCeiling) {
    throw ResourceLimit("oracle ceiling " + std::to_string(limits.ceiling) + " exceeds the hard limit " +
                        std::to_string(kHardCeiling));
  }
  if (modes < 1 || modes > limits.ceiling) {
    throw ResourceLimit("dense oracle limited to " + std::to_string(limits.ceiling) + " modes, got " +
                        std::to_string(modes));
  }
}

inline std::size_t dimension(int modes) { return std::size_t{1} << modes; }

/// Basis index of a Fock state (mode 1 is the most significant bit).
inline std::size_t basis_index(const FockState& phi) {
  std::size_t idx = 0;
  for (int j = 1; j <= phi.modes(); ++j) idx = (idx << 1) | static_cast<std::size_t>(phi.occupation(j));
  return idx;
}

/// Result of a Majorana string acting on a basis state: i^phase |index>.
struct BasisImage {
  std::size_t index = 0;
  int phase = 0;
};

/// m_x |basis>, x 1-based.
inline BasisImage majorana_action(int x, int modes, std::size_t basis) {
  const int j = (x + 1) / 2;
  const int bit = modes - j;
  int phase = 0;
  if ((std::popcount(basis >> (bit + 1)) & 1) != 0) phase += 2;
  if (x % 2 == 0) {
    // i (a^dagger - a): +i on an empty mode, -i on an occupied one.
    phase += ((basis >> bit) & 1U) != 0 ? 3 : 1;
  }
  return {basis ^ (std::size_t{1} << bit), phase % 4};
}

/// M |basis> for the canonical Hermitian monomial M.
template <std::size_t W>
BasisImage monomial_action(const Monomial<W>& m, std::size_t basis) {
  const auto idx = m.indices();
  BasisImage img{basis, hermitian_phase_exponent(static_cast<int>(idx.size()))};
  for (auto it = idx.rbegin(); it != idx.rend(); ++it) {
    const auto step = majorana_action(*it, m.modes(), img.index);
    img.index = step.index;
    img.phase = (img.phase + step.phase) % 4;
  }
  return img;
}

inline Complex i_power(int phase) {
  switch (phase & 3) {
    case 0: return {1.0, 0.0};
    case 1: return {0.0, 1.0};
    case 2: return {-1.0, 0.0};
    default: return {0.0, -1.0};
  }
}

inline DenseOperator majorana_matrix(int index, int modes, const Limits& limits = {}) {
  check_size(modes, limits);
  if (index < 1 || index > 2 * modes) throw InputError("Majorana index out of range");
  const auto dim = dimension(modes);
  DenseOperator out = DenseOperator::Zero(static_cast<Eigen::Index>(dim), static_cast<Eigen::Index>(dim));
  for (std::size_t b = 0; b < dim; ++b) {
    const auto img = majorana_action(index, modes, b);
    out(static_cast<Eigen::Index>(img.index), static_cast<Eigen::Index>(b)) = i_power(img.phase);
  }
  return out;
}

/// i^r times the ordered product of Majorana matrices.
template <std::size_t W>
DenseOperator monomial_matrix(const Monomial<W>& m, const Limits& limits = {}) {
  check_size(m.modes(), limits);
  const auto dim = static_cast<Eigen::Index>(dimension(m.modes()));
  DenseOperator out = DenseOperator::Identity(dim, dim);
  for (int x : m.indices()) out = out * majorana_matrix(x, m.modes(), limits);
  return out * i_power(hermitian_phase_exponent(m.length()));
}

template <std::size_t W>
StateVector apply_monomial(const Monomial<W>& m, const StateVector& psi) {
  StateVector out = StateVector::Zero(psi.size());
  for (Eigen::Index b = 0; b < psi.size(); ++b) {
    if (psi[b] == Complex{}) continue;
    const auto img = monomial_action(m, static_cast<std::size_t>(b));
    out[static_cast<Eigen::Index>(img.index)] += i_power(img.phase) * psi[b];
  }
  return out;
}

template <std::size_t W>
DenseOperator dense_hamiltonian(const OperatorSum<W>& h, const Limits& limits = {}) {
  check_size(h.modes(), limits);
  const auto dim = dimension(h.modes());
  DenseOperator out = DenseOperator::Zero(static_cast<Eigen::Index>(dim), static_cast<Eigen::Index>(dim));
  for (const auto& [m, c] : h.sorted_terms()) {
    for (std::size_t b = 0; b < dim; ++b) {
      const auto img = monomial_action(m, b);
      out(static_cast<Eigen::Index>(img.index), static_cast<Eigen::Index>(b)) += c * i_power(img.phase);
    }
  }
  return out;
}

/// exp(-i theta M / 2) = cos(theta/2) I - i sin(theta/2) M.
template <std::size_t W>
DenseOperator gate_matrix(const Monomial<W>& generator, double theta, const Limits& limits = {}) {
  const auto mm = monomial_matrix(generator, limits);
  const auto dim = mm.rows();
  return std::cos(theta / 2) * DenseOperator::Identity(dim, dim) - Complex(0.0, std::sin(theta / 2)) * mm;
}

inline StateVector basis_state(const FockState& phi, const Limits& limits = {}) {
  check_size(phi.modes(), limits);
  StateVector psi = StateVector::Zero(static_cast<Eigen::Index>(dimension(phi.modes())));
  psi[static_cast<Eigen::Index>(basis_index(phi))] = 1.0;
  return psi;
}

/// U |phi> with gate 1 applied first.
template <std::size_t W>
StateVector circuit_state(const Circuit<W>& circuit, std::span<const double> angles, const FockState& phi,
                          const Limits& limits = {}) {
  detail::require_same_modes(circuit.modes(), phi.modes());
  if (angles.size() != circuit.size()) throw std::invalid_argument("one angle per gate is required");
  StateVector psi = basis_state(phi, limits);
  for (std::size_t j = 0; j < circuit.size(); ++j) {
    const double t = angles[j];
    psi = std::cos(t / 2) * psi - Complex(0.0, std::sin(t / 2)) * apply_monomial(circuit.gate(j).generator, psi);
  }
  return psi;
}

template <std::size_t W>
StateVector circuit_state(const Circuit<W>& circuit, const FockState& phi, const Limits& limits = {}) {
  const auto angles = circuit.resolved_angles();
  return circuit_state(circuit, std::span<const double>(angles), phi, limits);
}

/// <psi|H|psi> for a normalized state; throws if the result is not real.
template <std::size_t W>
double state_expectation(const OperatorSum<W>& h, const StateVector& psi) {
  Complex e{};
  for (const auto& [m, c] : h.sorted_terms()) e += c * psi.dot(apply_monomial(m, psi));
  if (std::abs(e.imag()) > 1e-10) {
    throw ContractViolation("dense expectation has imaginary residue " + std::to_string(e.imag()));
  }
  return e.real();
}

template <std::size_t W>
double exact_expectation(const OperatorSum<W>& h, const Circuit<W>& circuit, std::span<const double> angles,
                         const FockState& phi, const Limits& limits = {}) {
  detail::require_same_modes(h.modes(), circuit.modes());
  return state_expectation(h, circuit_state(circuit, angles, phi, limits));
}

template <std::size_t W>
double exact_expectation(const OperatorSum<W>& h, const Circuit<W>& circuit, const FockState& phi,
                         const Limits& limits = {}) {
  const auto angles = circuit.resolved_angles();
  return exact_expectation(h, circuit, std::span<const double>(angles), phi, limits);
}

struct Eigensystem {
  double e0 = 0.0;
  double e1 = 0.0;
  StateVector ground;
  bool degenerate = false;  ///< E1 - E0 below 1e-10
  double gap() const noexcept { return e1 - e0; }
};

template <std::size_t W>
Eigensystem exact_eigensystem(const OperatorSum<W>& h, const Limits& limits = {}) {
  const auto dense = dense_hamiltonian(h, limits);
  Eigen::SelfAdjointEigenSolver<DenseOperator> solver(dense);
  if (solver.info() != Eigen::Success) throw ContractViolation("dense eigensolver failed");
  Eigensystem out;
  const auto& ev = solver.eigenvalues();
  out.e0 = ev[0];
  out.e1 = ev.size() > 1 ? ev[1] : ev[0];
  out.ground = solver.eigenvectors().col(0);
  out.degenerate = out.e1 - out.e0 < 1e-10;
  return out;
}

}  // namespace majprop::oracle
