// Copyright 2026 The majprop Authors
// SPDX-License-Identifier: Apache-2.0

/**
 * @file surrogate.hpp
 * @brief Symbolic back-propagation: coefficients as sums of trigonometric paths.
 *
 * Every propagated monomial carries a list of paths. A path is a real weight
 * times a product of cos(theta_p) and sin(theta_p) factors, one factor for
 * each parametrized gate at which the path's monomial anticommuted with the
 * generator. Gates with fixed angles are folded into the weights numerically.
 *
 * Once built, the model evaluates the expectation at any parameter vector
 * without repeating the operator algebra.
 */

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <memory>
#include <mutex>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <unordered_map>
#include <utility>
#include <variant>
#include <vector>

#include "majprop/circuit.hpp"
#include "majprop/errors.hpp"
#include "majprop/fock.hpp"
#include "majprop/monomial.hpp"
#include "majprop/operator_sum.hpp"
#include "majprop/parallel.hpp"

namespace majprop {

enum class TrigKind : std::uint8_t { kCos = 0, kSin = 1 };

/// cos(theta_param) or sin(theta_param), packed as (param << 1) | kind.
struct Factor {
  std::uint32_t code = 0;

  static Factor make(std::size_t param, TrigKind kind) {
    return {static_cast<std::uint32_t>((param << 1) | static_cast<std::uint32_t>(kind))};
  }
  std::size_t param() const noexcept { return code >> 1; }
  TrigKind kind() const noexcept { return static_cast<TrigKind>(code & 1U); }

  friend bool operator==(Factor, Factor) = default;
  friend auto operator<=>(Factor, Factor) = default;
};

struct PathTerm {
  double weight = 0.0;
  std::vector<Factor> factors;  ///< sorted

  int sine_count() const noexcept {
    int n = 0;
    for (auto f : factors) n += f.kind() == TrigKind::kSin ? 1 : 0;
    return n;
  }
};

/// E(theta) = a + b cos(theta) + c sin(theta).
struct TrigRestriction {
  double a = 0.0;
  double b = 0.0;
  double c = 0.0;

  double value(double theta) const noexcept { return a + b * std::cos(theta) + c * std::sin(theta); }
  double argmin() const noexcept { return std::atan2(-c, -b); }
  double minimum() const noexcept { return a - std::hypot(b, c); }
};

struct SurrogateOptions {
  unsigned threads = 1;
  std::size_t max_paths = 20'000'000;  ///< ResourceLimit beyond this many paths
};

template <std::size_t W = 1>
class SurrogateModel {
 public:
  struct Entry {
    Monomial<W> monomial;
    std::vector<PathTerm> paths;
  };

  SurrogateModel() : cache_(std::make_unique<Cache>()) {}
  SurrogateModel(const SurrogateModel& other)
      : modes_(other.modes_),
        policy_(other.policy_),
        param_uses_(other.param_uses_),
        entries_(other.entries_),
        cache_(std::make_unique<Cache>()) {}
  SurrogateModel(SurrogateModel&&) noexcept = default;
  SurrogateModel& operator=(SurrogateModel other) noexcept {
    modes_ = other.modes_;
    policy_ = other.policy_;
    param_uses_ = std::move(other.param_uses_);
    entries_ = std::move(other.entries_);
    cache_ = std::move(other.cache_);
    return *this;
  }

  int modes() const noexcept { return modes_; }
  const TruncationPolicy& policy() const noexcept { return policy_; }
  std::size_t parameter_count() const noexcept { return param_uses_.size(); }
  /// Number of gates that use parameter p.
  int parameter_uses(std::size_t p) const { return param_uses_.at(p); }
  const std::vector<Entry>& entries() const noexcept { return entries_; }
  std::size_t size() const noexcept { return entries_.size(); }

  std::size_t path_count() const noexcept {
    std::size_t n = 0;
    for (const auto& e : entries_) n += e.paths.size();
    return n;
  }

  /// Σ_b c_b(theta) <phi|M_b|phi>.
  double evaluate(std::span<const double> params, const FockState& phi, unsigned threads = 1) const {
    check_params(params);
    const auto weights = fock_weights_for(phi);
    std::vector<double> cs(params.size()), sn(params.size());
    for (std::size_t p = 0; p < params.size(); ++p) {
      cs[p] = std::cos(params[p]);
      sn[p] = std::sin(params[p]);
    }
    std::vector<double> partial(entries_.size(), 0.0);
    parallel_for(entries_.size(), threads == 0 ? default_thread_count() : threads, [&](std::size_t i) {
      const double w = (*weights)[i];
      if (w == 0.0) return;
      double v = 0.0;
      for (const auto& path : entries_[i].paths) {
        double t = path.weight;
        for (auto f : path.factors) t *= f.kind() == TrigKind::kSin ? sn[f.param()] : cs[f.param()];
        v += t;
      }
      partial[i] = w * v;
    });
    double e = 0.0;
    for (double v : partial) e += v;
    return e;
  }

  /// The expectation as a function of parameter p alone, all others fixed.
  /// Returns nullopt if p drives more than one gate (the dependence is then
  /// not of the form a + b cos + c sin).
  std::optional<TrigRestriction> restrict_to_parameter(std::span<const double> params, const FockState& phi,
                                                       std::size_t p) const {
    check_params(params);
    if (p >= param_uses_.size()) throw InputError("parameter index " + std::to_string(p) + " not in model");
    if (param_uses_[p] > 1) return std::nullopt;
    const auto weights = fock_weights_for(phi);
    TrigRestriction r;
    for (std::size_t i = 0; i < entries_.size(); ++i) {
      const double w = (*weights)[i];
      if (w == 0.0) continue;
      for (const auto& path : entries_[i].paths) {
        double t = w * path.weight;
        int slot = 0;
        for (auto f : path.factors) {
          if (f.param() == p) {
            slot = f.kind() == TrigKind::kSin ? 2 : 1;
            continue;
          }
          t *= f.kind() == TrigKind::kSin ? std::sin(params[f.param()]) : std::cos(params[f.param()]);
        }
        (slot == 0 ? r.a : slot == 1 ? r.b : r.c) += t;
      }
    }
    return r;
  }

  template <std::size_t V>
  friend SurrogateModel<V> build_surrogate(const OperatorSum<V>&, const Circuit<V>&, const TruncationPolicy&,
                                           const SurrogateOptions&);

 private:
  struct Cache {
    std::mutex mutex;
    std::optional<FockState> state;
    std::shared_ptr<const std::vector<double>> weights;
  };

  void check_params(std::span<const double> params) const {
    if (params.size() != param_uses_.size()) {
      throw InputError("surrogate expects " + std::to_string(param_uses_.size()) + " parameters, got " +
                       std::to_string(params.size()));
    }
  }

  std::shared_ptr<const std::vector<double>> fock_weights_for(const FockState& phi) const {
    detail::require_same_modes(modes_, phi.modes());
    std::lock_guard lock(cache_->mutex);
    if (!cache_->state || !(*cache_->state == phi)) {
      const auto mask = detail::occupied_mask<W>(phi);
      auto w = std::make_shared<std::vector<double>>(entries_.size());
      for (std::size_t i = 0; i < entries_.size(); ++i) {
        (*w)[i] = detail::fock_trace_masked(entries_[i].monomial, mask);
      }
      cache_->state = phi;
      cache_->weights = std::move(w);
    }
    return cache_->weights;
  }

  int modes_ = 0;
  TruncationPolicy policy_;
  std::vector<int> param_uses_;
  std::vector<Entry> entries_;
  std::unique_ptr<Cache> cache_;
};

namespace detail {

using PathList = std::vector<PathTerm>;

inline void sort_and_merge(PathList& paths) {
  std::sort(paths.begin(), paths.end(), [](const PathTerm& x, const PathTerm& y) { return x.factors < y.factors; });
  std::size_t out = 0;
  for (std::size_t i = 0; i < paths.size();) {
    std::size_t j = i + 1;
    double w = paths[i].weight;
    while (j < paths.size() && paths[j].factors == paths[i].factors) w += paths[j++].weight;
    if (w != 0.0) {
      if (out != i) paths[out] = std::move(paths[i]);
      paths[out].weight = w;
      ++out;
    }
    i = j;
  }
  paths.resize(out);
}

inline void insert_factor(std::vector<Factor>& factors, Factor f) {
  factors.insert(std::upper_bound(factors.begin(), factors.end(), f), f);
}

/// Paths of the cosine branch: each path gains cos(theta_p) (or is scaled by cos theta).
inline PathList cosine_branch(const PathList& in, std::optional<std::size_t> param, double cs) {
  PathList out;
  out.reserve(in.size());
  for (const auto& path : in) {
    PathTerm t = path;
    if (param) {
      insert_factor(t.factors, Factor::make(*param, TrigKind::kCos));
    } else {
      t.weight *= cs;
      if (t.weight == 0.0) continue;
    }
    out.push_back(std::move(t));
  }
  return out;
}

/// Paths of the sine branch with overall sign; paths over the sine budget are dropped.
inline void append_sine_branch(PathList& out, const PathList& in, std::optional<std::size_t> param, double sn,
                               int sign, std::optional<int> sine_cutoff) {
  for (const auto& path : in) {
    PathTerm t = path;
    t.weight *= sign;
    if (param) {
      if (sine_cutoff && path.sine_count() + 1 > *sine_cutoff) continue;
      insert_factor(t.factors, Factor::make(*param, TrigKind::kSin));
    } else {
      t.weight *= sn;
      if (t.weight == 0.0) continue;
    }
    out.push_back(std::move(t));
  }
}

}  // namespace detail

/// Symbolic counterpart of propagate(): same gate order and length filter,
/// no coefficient threshold, optional sine-count pruning.
template <std::size_t W>
SurrogateModel<W> build_surrogate(const OperatorSum<W>& hamiltonian, const Circuit<W>& circuit,
                                  const TruncationPolicy& policy, const SurrogateOptions& options = {}) {
  policy.validate();
  detail::require_same_modes(hamiltonian.modes(), circuit.modes());
  using Map = std::unordered_map<Monomial<W>, detail::PathList, MonomialHash>;

  SurrogateModel<W> model;
  model.modes_ = hamiltonian.modes();
  model.policy_ = policy;
  model.param_uses_.assign(circuit.parameters().size(), 0);
  for (const auto& g : circuit.gates()) {
    if (const auto* ref = std::get_if<ParamRef>(&g.angle)) ++model.param_uses_[ref->index];
  }

  Map current;
  for (const auto& [m, c] : hamiltonian.sorted_terms()) current[m].push_back({c, {}});

  const std::size_t chunks = std::max<std::size_t>(1, options.threads == 0 ? default_thread_count() : options.threads);
  for (std::size_t j = circuit.size(); j-- > 0;) {
    const auto& gate = circuit.gate(j);
    std::optional<std::size_t> param;
    double cs = 1.0, sn = 0.0;
    if (const auto* ref = std::get_if<ParamRef>(&gate.angle)) {
      param = ref->index;
    } else {
      cs = std::cos(std::get<double>(gate.angle));
      sn = std::sin(std::get<double>(gate.angle));
    }

    std::vector<const typename Map::value_type*> items;
    items.reserve(current.size());
    for (const auto& kv : current) items.push_back(&kv);
    std::vector<std::vector<std::pair<Monomial<W>, detail::PathList>>> parts(chunks);

    for_each_chunk(items.size(), chunks, [&](std::size_t c, std::size_t begin, std::size_t end) {
      auto& out = parts[c];
      auto emit = [&](const Monomial<W>& m, detail::PathList&& paths) {
        if (!paths.empty() && policy.keeps_length(m.length())) out.emplace_back(m, std::move(paths));
      };
      for (std::size_t i = begin; i < end; ++i) {
        const auto& [m, paths] = *items[i];
        if (commutes(gate.generator, m)) {
          emit(m, detail::PathList(paths));
          continue;
        }
        const auto partner = multiply_hermitian(gate.generator, m);
        auto mine = detail::cosine_branch(paths, param, cs);
        if (const auto it = current.find(partner.monomial); it != current.end()) {
          // i G M' = -s M for the partner M' = s^{-1} i G M.
          detail::append_sine_branch(mine, it->second, param, sn, -partner.sign, policy.sine_cutoff);
          detail::sort_and_merge(mine);
          emit(m, std::move(mine));
        } else {
          emit(m, std::move(mine));
          detail::PathList branch;
          detail::append_sine_branch(branch, paths, param, sn, partner.sign, policy.sine_cutoff);
          emit(partner.monomial, std::move(branch));
        }
      }
    });

    Map next;
    std::size_t total = 0, path_total = 0;
    for (const auto& p : parts) total += p.size();
    next.reserve(total);
    for (auto& p : parts) {
      for (auto& [m, paths] : p) {
        path_total += paths.size();
        next.emplace(m, std::move(paths));
      }
    }
    if (path_total > options.max_paths) {
      throw ResourceLimit("surrogate exceeds " + std::to_string(options.max_paths) + " paths at gate " +
                          std::to_string(j + 1));
    }
    current = std::move(next);
  }

  model.entries_.reserve(current.size());
  for (auto& [m, paths] : current) model.entries_.push_back({m, std::move(paths)});
  std::sort(model.entries_.begin(), model.entries_.end(),
            [](const auto& a, const auto& b) { return lex_less(a.monomial, b.monomial); });
  for (auto& e : model.entries_) {
    std::sort(e.paths.begin(), e.paths.end(),
              [](const PathTerm& x, const PathTerm& y) { return x.factors < y.factors; });
  }
  return model;
}

/// One line per path: "<monomial> <weight> cos:<p>,... sin:<p>,..." (1-based parameters).
template <std::size_t W>
void dump_surrogate(std::ostream& out, const SurrogateModel<W>& model) {
  for (const auto& e : model.entries()) {
    for (const auto& path : e.paths) {
      out << to_string(e.monomial) << ' ' << detail::format_double(path.weight);
      for (auto kind : {TrigKind::kCos, TrigKind::kSin}) {
        out << (kind == TrigKind::kCos ? " cos:" : " sin:");
        bool first = true;
        for (auto f : path.factors) {
          if (f.kind() != kind) continue;
          out << (first ? "" : ",") << f.param() + 1;
          first = false;
        }
      }
      out << '\n';
    }
  }
}

}  // namespace majprop
