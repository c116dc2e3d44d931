// Copyright 2026 The majprop Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <stdexcept>
#include <string>

namespace majprop {

/// Operands built for different numbers of fermionic modes.
class DimensionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A numeric or algebraic contract was violated (e.g. a product that is not
/// Hermitian under the requested convention, or an imaginary residue).
class ContractViolation : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

/// Malformed or unsupported user input. Parsers attach `file:line:` context.
class InputError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A configured resource ceiling (dense oracle size, bit width) was exceeded.
class ResourceLimit : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

namespace detail {

inline void require_same_modes(int a, int b) {
  if (a != b) {
    throw DimensionError("mode count mismatch: " + std::to_string(a) + " vs " + std::to_string(b));
  }
}

}  // namespace detail
}  // namespace majprop
