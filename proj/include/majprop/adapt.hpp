// Copyright 2026 The majprop Authors
// SPDX-License-Identifier: Apache-2.0

/**
 * @file adapt.hpp
 * @brief Adaptive ansatz construction: gradient-ranked gate selection from a
 *        monomial pool, sequential single-parameter minimization, and the
 *        overlap bound from the relative energy error.
 *
 * Energy landscape
 * ----------------
 * With the length filter P applied after every gate and A_j the conjugation
 * by gate j, the truncated energy is
 *
 *     E = < F, P A_1 P A_2 ... P A_L H >,
 *
 * where F holds <phi|M|phi> for every paired monomial. Each A_j is an
 * orthogonal map on coefficient space with transpose A_j(-theta_j), so with
 *
 *     rho_1 = P F,            rho_{j+1} = P A_j(-theta_j) rho_j,
 *     O_L   = H,              O_{j-1}   = P A_j(theta_j) O_j,
 *
 * the energy as a function of theta_j alone is <rho_j, A_j(theta_j) O_j>,
 * which is exactly a + b cos(theta_j) + c sin(theta_j). A sweep over
 * j = 1..L reuses the O_j computed at the start of the sweep, because O_j
 * depends only on the angles of later gates.
 *
 * This identity needs the truncation to be linear. With a coefficient
 * threshold the landscape falls back to three-point evaluations of full
 * propagations; with a sine-count cutoff it uses the symbolic model.
 */

#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <numbers>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "majprop/circuit.hpp"
#include "majprop/errors.hpp"
#include "majprop/fock.hpp"
#include "majprop/operator_sum.hpp"
#include "majprop/propagation.hpp"
#include "majprop/random.hpp"
#include "majprop/surrogate.hpp"
#include "majprop/text_io.hpp"

namespace majprop {

// ---------------------------------------------------------------------------
// Pool
// ---------------------------------------------------------------------------

template <std::size_t W = 1>
struct GatePool {
  int modes = 0;
  std::vector<Monomial<W>> candidates;

  void validate() const {
    std::vector<Monomial<W>> sorted = candidates;
    std::sort(sorted.begin(), sorted.end(), LexLess{});
    for (std::size_t i = 0; i < sorted.size(); ++i) {
      detail::require_same_modes(modes, sorted[i].modes());
      const int k = sorted[i].length();
      if (k < 2 || k % 2 != 0) throw InputError("pool generator " + to_string(sorted[i]) + " must be even, length >= 2");
      if (i > 0 && sorted[i] == sorted[i - 1]) throw InputError("duplicate pool generator " + to_string(sorted[i]));
    }
  }
};

/// All even monomials of length 2..max_length, in lexicographic order.
template <std::size_t W = 1>
GatePool<W> default_pool(int modes, int max_length = 4) {
  if (max_length < 2 || max_length % 2 != 0) throw std::invalid_argument("pool length must be even and >= 2");
  GatePool<W> pool{modes, {}};
  for (int w = 2; w <= std::min(max_length, 2 * modes); w += 2) {
    std::vector<int> idx(static_cast<std::size_t>(w));
    for (int i = 0; i < w; ++i) idx[static_cast<std::size_t>(i)] = i + 1;
    while (true) {
      pool.candidates.push_back(Monomial<W>::from_indices(modes, idx));
      int i = w - 1;
      while (i >= 0 && idx[static_cast<std::size_t>(i)] == 2 * modes - (w - 1 - i)) --i;
      if (i < 0) break;
      ++idx[static_cast<std::size_t>(i)];
      for (int t = i + 1; t < w; ++t) idx[static_cast<std::size_t>(t)] = idx[static_cast<std::size_t>(t - 1)] + 1;
    }
  }
  std::sort(pool.candidates.begin(), pool.candidates.end(), LexLess{});
  return pool;
}

/// Pool file: "modes N" then one monomial per line.
template <std::size_t W = 1>
GatePool<W> parse_pool(std::string_view text, std::string_view source = "<pool>") {
  const int modes = detail::header_modes(text, source);
  if (modes > Monomial<W>::kMaxModes) throw ResourceLimit(std::string(source) + ": too many modes");
  GatePool<W> pool{modes, {}};
  const auto lines = detail::content_lines(text);
  for (std::size_t i = 1; i < lines.size(); ++i) {
    try {
      pool.candidates.push_back(parse_monomial<W>(lines[i].text, modes));
      pool.validate();
    } catch (const InputError& e) {
      detail::fail_at(source, lines[i].number, e.what());
    }
  }
  return pool;
}

// ---------------------------------------------------------------------------
// Configuration and trace
// ---------------------------------------------------------------------------

struct AdaptConfig {
  std::size_t max_gates = 40;
  double gradient_floor = 1e-8;
  double energy_tolerance = 1e-12;
  int sweep_limit = 50;
  TruncationPolicy truncation;
  std::uint64_t seed = 0;
  std::size_t pool_sample = 0;  ///< candidates scored per iteration; 0 scores the whole pool
  unsigned threads = 1;

  void validate() const {
    if (max_gates < 1) throw std::invalid_argument("max_gates must be >= 1");
    if (!(gradient_floor >= 0.0) || !(energy_tolerance >= 0.0)) {
      throw std::invalid_argument("tolerances must be >= 0");
    }
    if (sweep_limit < 1) throw std::invalid_argument("sweep_limit must be >= 1");
    truncation.validate();
  }
};

/// Flat "key = value" file. Unknown keys are errors.
inline AdaptConfig parse_adapt_config(std::string_view text, std::string_view source = "<config>",
                                      AdaptConfig config = {}) {
  for (const auto& line : detail::content_lines(text)) {
    const auto eq = line.text.find('=');
    if (eq == std::string_view::npos) detail::fail_at(source, line.number, "expected key = value");
    const auto key = detail::trim(line.text.substr(0, eq));
    const auto val = detail::trim(line.text.substr(eq + 1));
    double d = 0.0;
    long long n = 0;
    auto need_int = [&](long long lo) {
      if (!detail::parse_int(val, n) || n < lo) detail::fail_at(source, line.number, "bad integer for " + std::string(key));
      return n;
    };
    auto need_double = [&]() {
      if (!detail::parse_double(val, d) || !std::isfinite(d) || d < 0) {
        detail::fail_at(source, line.number, "bad value for " + std::string(key));
      }
      return d;
    };
    if (key == "max_gates") config.max_gates = static_cast<std::size_t>(need_int(1));
    else if (key == "gradient_floor") config.gradient_floor = need_double();
    else if (key == "energy_tolerance") config.energy_tolerance = need_double();
    else if (key == "sweep_limit") config.sweep_limit = static_cast<int>(need_int(1));
    else if (key == "eps") config.truncation.coeff_threshold = need_double();
    else if (key == "wstar") config.truncation.length_cutoff = static_cast<int>(need_int(0));
    else if (key == "sine_cutoff") config.truncation.sine_cutoff = static_cast<int>(need_int(0));
    else if (key == "seed") config.seed = static_cast<std::uint64_t>(need_int(0));
    else if (key == "pool_sample") config.pool_sample = static_cast<std::size_t>(need_int(0));
    else if (key == "threads") config.threads = static_cast<unsigned>(need_int(0));
    else detail::fail_at(source, line.number, "unknown key '" + std::string(key) + "'");
  }
  try {
    config.validate();
  } catch (const std::invalid_argument& e) {
    throw InputError(std::string(source) + ": " + e.what());
  }
  return config;
}

enum class StopReason { kGradientFloor, kMaxGates, kStalled };

inline const char* to_string(StopReason r) {
  switch (r) {
    case StopReason::kGradientFloor: return "gradient_floor";
    case StopReason::kMaxGates: return "max_gates";
    default: return "stalled";
  }
}

template <std::size_t W = 1>
struct AdaptRecord {
  std::size_t iteration = 0;
  Monomial<W> generator;
  double gradient = 0.0;
  double energy = 0.0;
  std::size_t gates = 0;
  std::vector<double> parameters;
};

template <std::size_t W = 1>
struct AdaptTrace {
  double initial_energy = 0.0;
  std::vector<AdaptRecord<W>> records;
  StopReason stop = StopReason::kGradientFloor;

  double final_energy() const { return records.empty() ? initial_energy : records.back().energy; }
};

template <std::size_t W>
void write_trace_csv(std::ostream& out, const AdaptTrace<W>& trace) {
  out << "iter,generator,grad,energy,gates\n";
  for (const auto& r : trace.records) {
    out << r.iteration << ",\"" << to_string(r.generator) << "\"," << detail::format_double(r.gradient) << ','
        << detail::format_double(r.energy) << ',' << r.gates << '\n';
  }
}

// ---------------------------------------------------------------------------
// Energy landscape
// ---------------------------------------------------------------------------

template <std::size_t W = 1>
class EnergyLandscape {
 public:
  EnergyLandscape(OperatorSum<W> hamiltonian, FockState phi, TruncationPolicy policy, unsigned threads = 1)
      : h_(std::move(hamiltonian)), phi_(std::move(phi)), policy_(policy), threads_(threads) {
    policy_.validate();
    detail::require_same_modes(h_.modes(), phi_.modes());
    for (const auto& [m, c] : h_) {
      if (m.length() % 2 != 0) throw InputError("Hamiltonian term " + to_string(m) + " has odd length");
    }
    if (uses_adjoint()) {
      auto weights = fock_weights<W>(phi_);
      rho0_ = OperatorSum<W>(h_.modes());
      for (const auto& [m, c] : weights) {
        if (policy_.keeps_length(m.length())) rho0_.add_term(m, c);
      }
    }
  }

  const OperatorSum<W>& hamiltonian() const noexcept { return h_; }
  const FockState& reference() const noexcept { return phi_; }
  const TruncationPolicy& policy() const noexcept { return policy_; }

  /// True when the exact adjoint identities apply (no coefficient threshold, no sine cutoff).
  bool uses_adjoint() const noexcept { return policy_.coeff_threshold == 0.0 && !policy_.sine_cutoff; }

  double energy(const Circuit<W>& circuit) const {
    const auto angles = circuit.resolved_angles();
    return energy(circuit, angles);
  }

  double energy(const Circuit<W>& circuit, std::span<const double> angles) const {
    if (policy_.sine_cutoff) {
      const auto symbolic = parametrize_fixed(circuit, angles);
      const auto model = build_surrogate(h_, symbolic, policy_, {threads_});
      const auto p = symbolic.parameter_values();
      return model.evaluate(p, phi_, threads_);
    }
    PropagateOptions opts;
    opts.threads = threads_;
    return expectation(propagate(h_, circuit, angles, policy_, opts), phi_);
  }

  /// Energy as a function of the angle of a trial gate appended to the circuit.
  std::vector<TrigRestriction> trial_restrictions(const Circuit<W>& circuit,
                                                  std::span<const Monomial<W>> candidates) const {
    std::vector<TrigRestriction> out(candidates.size());
    if (uses_adjoint()) {
      const auto rho = forward_weights(circuit, circuit.resolved_angles());
      parallel_for(candidates.size(), threads_, [&](std::size_t i) {
        out[i] = restriction(rho, h_, candidates[i]);
      });
      return out;
    }
    for (std::size_t i = 0; i < candidates.size(); ++i) {
      Circuit<W> trial = circuit;
      trial.add_gate(candidates[i], 0.0);
      out[i] = three_point(trial, trial.size() - 1);
    }
    return out;
  }

  /// One pass of exact single-parameter minimization over every parametrized
  /// gate, in circuit order. Returns the energy at the new parameters.
  double sweep(Circuit<W>& circuit) const {
    if (!circuit.has_distinct_parameters()) {
      throw ContractViolation("parameter optimization requires one gate per parameter");
    }
    auto angles = circuit.resolved_angles();
    const auto& gates = circuit.gates();

    if (uses_adjoint()) {
      const auto observables = backward_observables(circuit, angles);
      OperatorSum<W> rho = rho0_;
      for (std::size_t j = 0; j < gates.size(); ++j) {
        if (const auto* ref = std::get_if<ParamRef>(&gates[j].angle)) {
          const auto r = restriction(rho, observables[j], gates[j].generator);
          const double best = r.argmin();
          if (r.value(best) < r.value(angles[j])) {
            angles[j] = best;
            circuit.set_parameter(ref->index, best);
          }
        }
        rho = apply_gate_adjoint(rho, gates[j].generator, -angles[j], policy_, threads_);
      }
      return inner_product(rho, h_);
    }

    if (policy_.sine_cutoff) {
      auto symbolic = parametrize_fixed(circuit, angles);
      const auto model = build_surrogate(h_, symbolic, policy_, {threads_});
      auto values = symbolic.parameter_values();
      for (std::size_t j = 0; j < gates.size(); ++j) {
        if (!gates[j].is_parametrized()) continue;
        const auto r = model.restrict_to_parameter(values, phi_, j);
        const double best = r->argmin();
        if (r->value(best) < r->value(values[j])) {
          values[j] = best;
          circuit.set_gate_angle(j, best);
        }
      }
      return model.evaluate(values, phi_, threads_);
    }

    // Coefficient threshold: the landscape is only approximately trigonometric,
    // so candidate angles are accepted only if a full evaluation confirms them.
    double current = energy(circuit, angles);
    for (std::size_t j = 0; j < gates.size(); ++j) {
      if (!gates[j].is_parametrized()) continue;
      const auto r = three_point(circuit, j, angles);
      auto trial = angles;
      trial[j] = r.argmin();
      const double e = energy(circuit, trial);
      if (e < current) {
        current = e;
        angles = std::move(trial);
        circuit.set_gate_angle(j, angles[j]);
      }
    }
    return current;
  }

 private:
  static Circuit<W> parametrize_fixed(const Circuit<W>& circuit, std::span<const double> angles) {
    Circuit<W> out(circuit.modes());
    for (std::size_t j = 0; j < circuit.size(); ++j) {
      out.add_parametrized_gate(circuit.gate(j).generator, "g" + std::to_string(j + 1), angles[j]);
    }
    return out;
  }

  /// <rho, A_G(theta) O> = a + b cos(theta) + c sin(theta).
  static TrigRestriction restriction(const OperatorSum<W>& rho, const OperatorSum<W>& obs, const Monomial<W>& g) {
    TrigRestriction r;
    const auto& weights = rho.raw_terms();
    for (const auto& [m, c] : obs.sorted_terms()) {
      const auto it = weights.find(m);
      const double wm = it == weights.end() ? 0.0 : it->second;
      if (commutes(g, m)) {
        r.a += wm * c;
        continue;
      }
      r.b += wm * c;
      const auto partner = multiply_hermitian(g, m);
      const auto jt = weights.find(partner.monomial);
      if (jt != weights.end()) r.c += partner.sign * c * jt->second;
    }
    return r;
  }

  /// observables[j] = P A_{j+1} ... P A_{L-1} H (0-based gates).
  std::vector<OperatorSum<W>> backward_observables(const Circuit<W>& circuit, std::span<const double> angles) const {
    std::vector<OperatorSum<W>> obs(circuit.size(), OperatorSum<W>(h_.modes()));
    if (circuit.empty()) return obs;
    obs.back() = h_;
    for (std::size_t j = circuit.size() - 1; j > 0; --j) {
      obs[j - 1] = apply_gate_adjoint(obs[j], circuit.gate(j).generator, angles[j], policy_, threads_);
    }
    return obs;
  }

  OperatorSum<W> forward_weights(const Circuit<W>& circuit, std::span<const double> angles) const {
    OperatorSum<W> rho = rho0_;
    for (std::size_t j = 0; j < circuit.size(); ++j) {
      rho = apply_gate_adjoint(rho, circuit.gate(j).generator, -angles[j], policy_, threads_);
    }
    return rho;
  }

  TrigRestriction three_point(const Circuit<W>& circuit, std::size_t gate) const {
    return three_point(circuit, gate, circuit.resolved_angles());
  }

  TrigRestriction three_point(const Circuit<W>& circuit, std::size_t gate, std::vector<double> angles) const {
    angles[gate] = 0.0;
    const double e0 = energy(circuit, angles);
    angles[gate] = std::numbers::pi / 2;
    const double ep = energy(circuit, angles);
    angles[gate] = -std::numbers::pi / 2;
    const double em = energy(circuit, angles);
    TrigRestriction r;
    r.a = (ep + em) / 2;
    r.c = (ep - em) / 2;
    r.b = e0 - r.a;
    return r;
  }

  OperatorSum<W> h_;
  FockState phi_;
  TruncationPolicy policy_;
  unsigned threads_ = 1;
  OperatorSum<W> rho0_;
};

// ---------------------------------------------------------------------------
// Operations
// ---------------------------------------------------------------------------

/// dE/dtheta at theta = 0 for a trial gate exp(-i theta G / 2) appended to the circuit.
template <std::size_t W>
double candidate_gradient(const EnergyLandscape<W>& landscape, const Circuit<W>& circuit,
                          const Monomial<W>& candidate) {
  const std::array<Monomial<W>, 1> one{candidate};
  return landscape.trial_restrictions(circuit, one).front().c;
}

/// Candidate with the largest |gradient|; ties go to the lexicographically smallest.
template <std::size_t W>
Monomial<W> select_gate(std::span<const std::pair<Monomial<W>, double>> gradients) {
  if (gradients.empty()) throw InputError("gate pool is empty");
  const auto* best = &gradients.front();
  for (const auto& g : gradients) {
    const double a = std::abs(g.second), b = std::abs(best->second);
    if (a > b || (a == b && lex_less(g.first, best->first))) best = &g;
  }
  return best->first;
}

template <std::size_t W>
struct OptimizeResult {
  Circuit<W> circuit;
  double energy = 0.0;
  int sweeps = 0;
};

/// Repeated sweeps until the improvement drops below the tolerance.
template <std::size_t W>
OptimizeResult<W> optimize_parameters(Circuit<W> circuit, const EnergyLandscape<W>& landscape,
                                      const AdaptConfig& config) {
  double energy = landscape.energy(circuit);
  int sweeps = 0;
  bool any = false;
  for (const auto& g : circuit.gates()) any = any || g.is_parametrized();
  if (!any) return {std::move(circuit), energy, 0};
  while (sweeps < config.sweep_limit) {
    const double next = landscape.sweep(circuit);
    ++sweeps;
    const double gain = energy - next;
    energy = std::min(energy, next);
    if (gain < config.energy_tolerance) break;
  }
  return {std::move(circuit), energy, sweeps};
}

template <std::size_t W>
OptimizeResult<W> optimize_parameters(Circuit<W> circuit, const OperatorSum<W>& hamiltonian, const FockState& phi,
                                      const TruncationPolicy& policy, const AdaptConfig& config) {
  const EnergyLandscape<W> landscape(hamiltonian, phi, policy, config.threads);
  return optimize_parameters(std::move(circuit), landscape, config);
}

template <std::size_t W>
struct AdaptResult {
  Circuit<W> circuit;
  AdaptTrace<W> trace;
};

template <std::size_t W>
AdaptResult<W> adapt_run(const OperatorSum<W>& hamiltonian, const FockState& phi, const GatePool<W>& pool,
                         const AdaptConfig& config) {
  config.validate();
  pool.validate();
  if (pool.candidates.empty()) throw InputError("gate pool is empty");
  detail::require_same_modes(pool.modes, hamiltonian.modes());
  const EnergyLandscape<W> landscape(hamiltonian, phi, config.truncation, config.threads);

  AdaptResult<W> result{Circuit<W>(hamiltonian.modes()), {}};
  auto& circuit = result.circuit;
  auto& trace = result.trace;
  double energy = landscape.energy(circuit);
  trace.initial_energy = energy;
  SplitMix64 rng(config.seed);

  for (std::size_t iter = 1;; ++iter) {
    if (circuit.size() >= config.max_gates) {
      trace.stop = StopReason::kMaxGates;
      break;
    }
    std::vector<Monomial<W>> candidates;
    const Monomial<W>* last = circuit.empty() ? nullptr : &circuit.gates().back().generator;
    for (const auto& g : pool.candidates) {
      if (last == nullptr || !(g == *last)) candidates.push_back(g);
    }
    if (config.pool_sample > 0 && config.pool_sample < candidates.size()) {
      const auto pick = sample_subset(static_cast<int>(candidates.size()), static_cast<int>(config.pool_sample), rng);
      std::vector<Monomial<W>> subset;
      for (int i : pick) subset.push_back(candidates[static_cast<std::size_t>(i)]);
      candidates = std::move(subset);
    }
    if (candidates.empty()) throw InputError("gate pool has no eligible candidate");

    const auto restr = landscape.trial_restrictions(circuit, candidates);
    std::vector<std::pair<Monomial<W>, double>> grads;
    grads.reserve(candidates.size());
    for (std::size_t i = 0; i < candidates.size(); ++i) grads.emplace_back(candidates[i], restr[i].c);
    const auto chosen = select_gate<W>(grads);
    const auto idx = static_cast<std::size_t>(
        std::find_if(grads.begin(), grads.end(), [&](const auto& g) { return g.first == chosen; }) - grads.begin());
    const double gradient = grads[idx].second;
    if (std::abs(gradient) < config.gradient_floor) {
      trace.stop = StopReason::kGradientFloor;
      break;
    }

    circuit.add_parametrized_gate(chosen, "t" + std::to_string(circuit.size() + 1), restr[idx].argmin());
    auto opt = optimize_parameters(std::move(circuit), landscape, config);
    circuit = std::move(opt.circuit);
    const double gain = energy - opt.energy;
    energy = opt.energy;
    trace.records.push_back({iter, chosen, gradient, energy, circuit.size(), circuit.parameter_values()});
    if (gain < config.energy_tolerance) {
      trace.stop = StopReason::kStalled;
      break;
    }
  }
  return result;
}

/// 1 - sqrt(1 - p): bound on 1 - |<psi|psi_0>| given the relative energy error
/// p = (E - E0) / (E1 - E0).
inline double state_error_bound(double p) {
  if (!(p >= 0.0 && p <= 1.0)) throw std::invalid_argument("relative error p must lie in [0, 1]");
  return 1.0 - std::sqrt(1.0 - p);
}

}  // namespace majprop
