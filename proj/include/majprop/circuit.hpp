// Copyright 2026 The majprop Authors
// SPDX-License-Identifier: Apache-2.0

/**
 * @file circuit.hpp
 * @brief Circuits of Majorana-monomial rotations and truncation policies.
 *
 * A circuit is U = U_L ... U_1 with U_j = exp(-i theta_j M_j / 2); gate 1
 * acts on the state first. Angles are either fixed numbers or references
 * into the circuit's named parameter table.
 *
 * `.majc` text format:
 *
 *     modes N
 *     gate [i1,...,ik] <angle>
 *     gate [i1,...,ik] @<param-name>
 *     param <name> <value>
 */

#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "majprop/errors.hpp"
#include "majprop/monomial.hpp"
#include "majprop/random.hpp"
#include "majprop/text_io.hpp"

namespace majprop {

/// Truncation applied after every gate: drop |c| < coeff_threshold and
/// length > length_cutoff. sine_cutoff bounds sine factors per surrogate path.
struct TruncationPolicy {
  double coeff_threshold = 0.0;
  std::optional<int> length_cutoff;
  std::optional<int> sine_cutoff;

  static TruncationPolicy exact() { return {}; }

  void validate() const {
    if (!(coeff_threshold >= 0.0)) throw std::invalid_argument("coefficient threshold must be >= 0");
    if (length_cutoff && (*length_cutoff < 0 || *length_cutoff % 2 != 0)) {
      throw std::invalid_argument("length cutoff must be a non-negative even integer");
    }
    if (sine_cutoff && *sine_cutoff < 0) throw std::invalid_argument("sine cutoff must be >= 0");
  }

  bool keeps_length(int w) const noexcept { return !length_cutoff || w <= *length_cutoff; }
};

struct ParamRef {
  std::size_t index = 0;
  friend bool operator==(const ParamRef&, const ParamRef&) = default;
};

template <std::size_t W = 1>
struct Gate {
  Monomial<W> generator;
  std::variant<double, ParamRef> angle;

  bool is_parametrized() const noexcept { return std::holds_alternative<ParamRef>(angle); }
};

struct Parameter {
  std::string name;
  double value = std::numeric_limits<double>::quiet_NaN();
};

template <std::size_t W = 1>
class Circuit {
 public:
  Circuit() = default;
  explicit Circuit(int modes) : modes_(modes) {
    if (modes < 1 || modes > Monomial<W>::kMaxModes) {
      throw ResourceLimit("mode count " + std::to_string(modes) + " unsupported at this width");
    }
  }

  int modes() const noexcept { return modes_; }
  std::size_t size() const noexcept { return gates_.size(); }
  bool empty() const noexcept { return gates_.empty(); }
  const std::vector<Gate<W>>& gates() const noexcept { return gates_; }
  const Gate<W>& gate(std::size_t j) const { return gates_.at(j); }
  const std::vector<Parameter>& parameters() const noexcept { return params_; }

  /// Registers a named parameter and returns its index. A NaN value marks it unset.
  std::size_t add_parameter(std::string name, double value = std::numeric_limits<double>::quiet_NaN()) {
    if (name.empty()) throw InputError("parameter name must be non-empty");
    if (find_parameter(name)) throw InputError("duplicate parameter '" + name + "'");
    params_.push_back({std::move(name), value});
    return params_.size() - 1;
  }

  std::optional<std::size_t> find_parameter(std::string_view name) const {
    for (std::size_t i = 0; i < params_.size(); ++i) {
      if (params_[i].name == name) return i;
    }
    return std::nullopt;
  }

  void set_parameter(std::size_t index, double value) { params_.at(index).value = value; }

  std::vector<double> parameter_values() const {
    std::vector<double> v;
    v.reserve(params_.size());
    for (const auto& p : params_) v.push_back(p.value);
    return v;
  }

  void set_parameter_values(std::span<const double> values) {
    if (values.size() != params_.size()) throw std::invalid_argument("parameter vector size mismatch");
    for (std::size_t i = 0; i < values.size(); ++i) params_[i].value = values[i];
  }

  Circuit& add_gate(const Monomial<W>& generator, double angle) {
    check_generator(generator);
    gates_.push_back({generator, angle});
    return *this;
  }

  Circuit& add_gate(const Monomial<W>& generator, ParamRef ref) {
    check_generator(generator);
    if (ref.index >= params_.size()) {
      throw std::out_of_range("gate references missing parameter index " + std::to_string(ref.index));
    }
    gates_.push_back({generator, ref});
    return *this;
  }

  /// Adds a fresh named parameter and a gate that uses it.
  std::size_t add_parametrized_gate(const Monomial<W>& generator, std::string name, double value) {
    check_generator(generator);
    const auto idx = add_parameter(std::move(name), value);
    gates_.push_back({generator, ParamRef{idx}});
    return idx;
  }

  void set_gate_angle(std::size_t j, double angle) {
    auto& g = gates_.at(j);
    if (auto* ref = std::get_if<ParamRef>(&g.angle)) {
      params_[ref->index].value = angle;
    } else {
      g.angle = angle;
    }
  }

  /// Numeric angle of every gate, using `values` for parameters when given.
  std::vector<double> resolved_angles(std::optional<std::span<const double>> values = std::nullopt) const {
    if (values && values->size() != params_.size()) {
      throw std::invalid_argument("parameter vector size mismatch");
    }
    std::vector<double> angles;
    angles.reserve(gates_.size());
    for (const auto& g : gates_) {
      double theta;
      if (const auto* ref = std::get_if<ParamRef>(&g.angle)) {
        theta = values ? (*values)[ref->index] : params_[ref->index].value;
        if (std::isnan(theta)) {
          throw InputError("unresolved parameter '" + params_[ref->index].name + "'");
        }
      } else {
        theta = std::get<double>(g.angle);
      }
      angles.push_back(theta);
    }
    return angles;
  }

  /// True if no parameter is used by more than one gate.
  bool has_distinct_parameters() const {
    std::vector<int> uses(params_.size(), 0);
    for (const auto& g : gates_) {
      if (const auto* ref = std::get_if<ParamRef>(&g.angle)) {
        if (++uses[ref->index] > 1) return false;
      }
    }
    return true;
  }

 private:
  void check_generator(const Monomial<W>& generator) const {
    detail::require_same_modes(modes_, generator.modes());
    const int k = generator.length();
    if (k < 2 || k % 2 != 0) {
      throw InputError("gate generator " + to_string(generator) + " must have even length >= 2");
    }
  }

  int modes_ = 0;
  std::vector<Gate<W>> gates_;
  std::vector<Parameter> params_;
};

/// Unstructured circuit: each generator uniform over all even monomials of
/// length 2..max_generator_length, angles uniform in [-angle_range, angle_range].
template <std::size_t W = 1>
Circuit<W> random_unstructured_circuit(int modes, std::size_t gate_count, int max_generator_length,
                                       double angle_range, std::uint64_t seed) {
  if (max_generator_length < 2 || max_generator_length % 2 != 0 || max_generator_length > 2 * modes) {
    throw std::invalid_argument("max generator length must be even and in [2, 2N]");
  }
  Circuit<W> circuit(modes);
  // Number of even monomials of each length; doubles are exact enough for weights.
  std::vector<double> weight;
  double total = 0.0;
  for (int w = 2; w <= max_generator_length; w += 2) {
    double c = 1.0;
    for (int i = 0; i < w; ++i) c = c * (2 * modes - i) / (i + 1);
    weight.push_back(c);
    total += c;
  }
  SplitMix64 rng(seed);
  for (std::size_t j = 0; j < gate_count; ++j) {
    double u = rng.uniform() * total;
    std::size_t pick = 0;
    while (pick + 1 < weight.size() && u >= weight[pick]) {
      u -= weight[pick];
      ++pick;
    }
    const int w = 2 * static_cast<int>(pick + 1);
    auto idx = sample_subset(2 * modes, w, rng);
    for (auto& i : idx) ++i;
    const double theta = rng.uniform(-angle_range, angle_range);
    circuit.add_gate(Monomial<W>::from_indices(modes, idx), theta);
  }
  return circuit;
}

/// Replaces every fixed angle with a fresh parameter "t<j>" (1-based) holding that value.
template <std::size_t W>
Circuit<W> parametrize(const Circuit<W>& fixed) {
  Circuit<W> out(fixed.modes());
  const auto angles = fixed.resolved_angles();
  for (std::size_t j = 0; j < fixed.size(); ++j) {
    out.add_parametrized_gate(fixed.gate(j).generator, "t" + std::to_string(j + 1), angles[j]);
  }
  return out;
}

// ---------------------------------------------------------------------------
// .majc text format
// ---------------------------------------------------------------------------

template <std::size_t W = 1>
Circuit<W> parse_majc(std::string_view text, std::string_view source = "<majc>") {
  const int modes = detail::header_modes(text, source);
  if (modes > Monomial<W>::kMaxModes) {
    throw ResourceLimit(std::string(source) + ": " + std::to_string(modes) + " modes exceed storage width");
  }
  struct PendingGate {
    Monomial<W> generator;
    std::variant<double, std::string> angle;
    int line;
  };
  std::vector<PendingGate> pending;
  std::map<std::string, std::pair<double, int>> values;

  const auto lines = detail::content_lines(text);
  for (std::size_t i = 1; i < lines.size(); ++i) {
    const auto& line = lines[i];
    const auto tok = detail::tokens(line.text);
    if (tok.size() == 3 && tok[0] == "gate") {
      Monomial<W> g;
      try {
        g = parse_monomial<W>(tok[1], modes);
      } catch (const InputError& e) {
        detail::fail_at(source, line.number, e.what());
      }
      const int k = g.length();
      if (k < 2 || k % 2 != 0) detail::fail_at(source, line.number, "gate generator must have even length >= 2");
      if (tok[2].front() == '@') {
        const auto name = std::string(tok[2].substr(1));
        if (name.empty()) detail::fail_at(source, line.number, "empty parameter name");
        pending.push_back({g, name, line.number});
      } else {
        double theta = 0.0;
        if (!detail::parse_double(tok[2], theta) || !std::isfinite(theta)) {
          detail::fail_at(source, line.number, "bad angle '" + std::string(tok[2]) + "'");
        }
        pending.push_back({g, theta, line.number});
      }
    } else if (tok.size() == 3 && tok[0] == "param") {
      double v = 0.0;
      if (!detail::parse_double(tok[2], v) || !std::isfinite(v)) {
        detail::fail_at(source, line.number, "bad parameter value '" + std::string(tok[2]) + "'");
      }
      if (!values.emplace(std::string(tok[1]), std::make_pair(v, line.number)).second) {
        detail::fail_at(source, line.number, "duplicate parameter '" + std::string(tok[1]) + "'");
      }
    } else {
      detail::fail_at(source, line.number, "expected 'gate [..] <angle|@name>' or 'param <name> <value>'");
    }
  }

  Circuit<W> circuit(modes);
  // Parameter indices follow first use by a gate; unused params come last, by name.
  for (const auto& g : pending) {
    if (const auto* name = std::get_if<std::string>(&g.angle)) {
      auto idx = circuit.find_parameter(*name);
      if (!idx) {
        const auto it = values.find(*name);
        if (it == values.end()) detail::fail_at(source, g.line, "parameter '" + *name + "' has no value");
        idx = circuit.add_parameter(*name, it->second.first);
      }
      circuit.add_gate(g.generator, ParamRef{*idx});
    } else {
      circuit.add_gate(g.generator, std::get<double>(g.angle));
    }
  }
  for (const auto& [name, v] : values) {
    if (!circuit.find_parameter(name)) circuit.add_parameter(name, v.first);
  }
  return circuit;
}

/// Gates in application order, then parameters sorted by name.
template <std::size_t W>
void write_majc(std::ostream& out, const Circuit<W>& circuit) {
  out << "modes " << circuit.modes() << '\n';
  for (const auto& g : circuit.gates()) {
    out << "gate " << to_string(g.generator) << ' ';
    if (const auto* ref = std::get_if<ParamRef>(&g.angle)) {
      out << '@' << circuit.parameters()[ref->index].name << '\n';
    } else {
      out << detail::format_double(std::get<double>(g.angle)) << '\n';
    }
  }
  std::vector<Parameter> sorted = circuit.parameters();
  std::sort(sorted.begin(), sorted.end(), [](const auto& a, const auto& b) { return a.name < b.name; });
  for (const auto& p : sorted) out << "param " << p.name << ' ' << detail::format_double(p.value) << '\n';
}

}  // namespace majprop
