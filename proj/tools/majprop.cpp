// Copyright 2026 The majprop Authors
// SPDX-License-Identifier: Apache-2.0

// Command-line front end. Every subcommand buffers its report and output
// files, then writes them only after the computation has succeeded.

#include <CLI11.hpp>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <numbers>
#include <optional>
#include <sstream>
#include <string>
#include <type_traits>
#include <vector>

#include "majprop/majprop.hpp"

namespace {

using majprop::detail::format_double;

constexpr int kExitInput = 2;
constexpr int kExitContract = 3;
constexpr int kExitResource = 4;

struct Options {
  std::string hamiltonian;
  std::string circuit;
  std::string fock;
  std::string out;
  std::optional<double> eps;
  std::optional<int> wstar;
  std::optional<int> sine_cutoff;
  std::optional<std::uint64_t> seed;
  unsigned threads = 0;
  int oracle_ceiling = majprop::oracle::kDefaultCeiling;

  // surrogate-eval
  std::vector<std::string> params;
  std::string dump;
  std::size_t max_paths = majprop::SurrogateOptions{}.max_paths;

  // adapt
  std::string pool;
  int pool_length = 4;
  std::string config;
  std::string circuit_out;
  std::optional<std::size_t> max_gates;
  std::optional<double> gradient_floor;
  std::optional<double> e0;
  std::optional<double> e1;

  // theory, bench
  int modes = 100;
  int k = 4;
  std::size_t gates = 30;
  int repeat = 1;

  // oracle-check, wstar-sweep
  bool spectrum = false;
  std::optional<double> reference;
  bool randomize = false;
};

/// Report text plus pending output files, committed together on success.
class Report {
 public:
  std::ostream& text() { return text_; }
  void add_file(const std::string& path, std::string content) { files_.emplace_back(path, std::move(content)); }

  void commit() {
    for (const auto& [path, content] : files_) {
      const std::string tmp = path + ".tmp";
      {
        std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
        if (!f) throw majprop::InputError(path + ": cannot open for writing");
        f << content;
        if (!f.flush()) throw majprop::InputError(path + ": write failed");
      }
      std::filesystem::rename(tmp, path);
    }
    std::cout << text_.str() << std::flush;
  }

 private:
  std::ostringstream text_;
  std::vector<std::pair<std::string, std::string>> files_;
};

void kv(std::ostream& out, const std::string& key, double value) { out << key << ' ' << format_double(value) << '\n'; }

template <typename T>
void kv(std::ostream& out, const std::string& key, const T& value) {
  out << key << ' ' << value << '\n';
}

void require(const std::string& value, const char* flag) {
  if (value.empty()) throw majprop::InputError(std::string("missing required option ") + flag);
}

majprop::TruncationPolicy numeric_policy(const Options& o) {
  majprop::TruncationPolicy p;
  if (o.eps) p.coeff_threshold = *o.eps;
  p.length_cutoff = o.wstar;
  try {
    p.validate();
  } catch (const std::invalid_argument& e) {
    throw majprop::InputError(e.what());
  }
  return p;
}

majprop::FockState load_fock(const Options& o, int modes) {
  require(o.fock, "--fock");
  std::string bits = o.fock;
  if (bits.find_first_not_of("01 ") != std::string::npos) bits = majprop::detail::read_file(o.fock);
  auto phi = majprop::FockState::parse(bits);
  if (phi.modes() != modes) {
    throw majprop::InputError("Fock state has " + std::to_string(phi.modes()) + " modes, Hamiltonian has " +
                              std::to_string(modes));
  }
  return phi;
}

int file_modes(const std::string& path) {
  return majprop::detail::header_modes(majprop::detail::read_file(path), path);
}

template <typename F>
int dispatch_width(int modes, F&& f) {
  if (modes <= majprop::Monomial<1>::kMaxModes) return f(std::integral_constant<std::size_t, 1>{});
  if (modes <= majprop::Monomial<2>::kMaxModes) return f(std::integral_constant<std::size_t, 2>{});
  if (modes <= majprop::Monomial<4>::kMaxModes) return f(std::integral_constant<std::size_t, 4>{});
  throw majprop::ResourceLimit(std::to_string(modes) + " modes exceed the largest supported width of " +
                               std::to_string(majprop::Monomial<4>::kMaxModes));
}

template <std::size_t W>
majprop::OperatorSum<W> load_hamiltonian(const Options& o) {
  require(o.hamiltonian, "--hamiltonian");
  return majprop::parse_majh<W>(majprop::detail::read_file(o.hamiltonian), o.hamiltonian);
}

template <std::size_t W>
majprop::Circuit<W> load_circuit(const Options& o, int modes) {
  require(o.circuit, "--circuit");
  auto c = majprop::parse_majc<W>(majprop::detail::read_file(o.circuit), o.circuit);
  if (c.modes() != modes) {
    throw majprop::InputError(o.circuit + ": circuit has " + std::to_string(c.modes()) +
                              " modes, Hamiltonian has " + std::to_string(modes));
  }
  return c;
}

std::string step_table(const std::vector<majprop::StepStats>& steps) {
  std::ostringstream t;
  t << "step,gate,terms_in,terms_out,anticommuting,dropped_by_coefficient,dropped_by_length\n";
  for (std::size_t i = 0; i < steps.size(); ++i) {
    const auto& s = steps[i];
    t << i + 1 << ',' << s.gate << ',' << s.terms_in << ',' << s.terms_out << ',' << s.anticommuting << ','
      << s.dropped_by_coefficient << ',' << s.dropped_by_length << '\n';
  }
  return t.str();
}

// ---------------------------------------------------------------------------

int cmd_propagate(const Options& o, Report& r) {
  if (o.sine_cutoff) throw majprop::InputError("--sine-cutoff applies to surrogate-eval only");
  require(o.hamiltonian, "--hamiltonian");
  return dispatch_width(file_modes(o.hamiltonian), [&](auto width) {
    constexpr std::size_t W = decltype(width)::value;
    const auto h = load_hamiltonian<W>(o);
    const auto c = load_circuit<W>(o, h.modes());
    const auto phi = load_fock(o, h.modes());
    const auto policy = numeric_policy(o);

    std::vector<majprop::StepStats> steps;
    majprop::PropagateOptions opts;
    opts.threads = o.threads;
    opts.on_step = [&](const majprop::StepStats& s) { steps.push_back(s); };
    const auto result = majprop::propagate(h, c, policy, opts);
    const double energy = majprop::expectation(result, phi);

    std::size_t peak = h.size(), by_coeff = 0, by_len = 0;
    for (const auto& s : steps) {
      peak = std::max(peak, s.terms_out);
      by_coeff += s.dropped_by_coefficient;
      by_len += s.dropped_by_length;
    }
    auto& t = r.text();
    kv(t, "energy", energy);
    kv(t, "gates", c.size());
    kv(t, "terms_initial", h.size());
    kv(t, "terms_final", result.size());
    kv(t, "terms_peak", peak);
    kv(t, "dropped_by_coefficient", by_coeff);
    kv(t, "dropped_by_length", by_len);
    const auto table = step_table(steps);
    if (o.out.empty()) {
      t << table;
    } else {
      r.add_file(o.out, table);
    }
    return 0;
  });
}

int cmd_surrogate_eval(const Options& o, Report& r) {
  if (o.eps && *o.eps != 0.0) throw majprop::InputError("the surrogate keeps every path; --eps must be 0");
  require(o.hamiltonian, "--hamiltonian");
  return dispatch_width(file_modes(o.hamiltonian), [&](auto width) {
    constexpr std::size_t W = decltype(width)::value;
    const auto h = load_hamiltonian<W>(o);
    auto c = load_circuit<W>(o, h.modes());
    const auto phi = load_fock(o, h.modes());
    for (const auto& assignment : o.params) {
      const auto eq = assignment.find('=');
      double v = 0.0;
      if (eq == std::string::npos || !majprop::detail::parse_double(assignment.substr(eq + 1), v)) {
        throw majprop::InputError("--param expects name=value, got '" + assignment + "'");
      }
      const auto idx = c.find_parameter(assignment.substr(0, eq));
      if (!idx) throw majprop::InputError("circuit has no parameter '" + assignment.substr(0, eq) + "'");
      c.set_parameter(*idx, v);
    }
    majprop::TruncationPolicy policy;
    policy.length_cutoff = o.wstar;
    policy.sine_cutoff = o.sine_cutoff;
    try {
      policy.validate();
    } catch (const std::invalid_argument& e) {
      throw majprop::InputError(e.what());
    }
    majprop::SurrogateOptions so;
    so.threads = o.threads;
    so.max_paths = o.max_paths;
    const auto model = majprop::build_surrogate(h, c, policy, so);
    const auto theta = c.parameter_values();
    for (std::size_t p = 0; p < theta.size(); ++p) {
      if (std::isnan(theta[p])) throw majprop::InputError("parameter '" + c.parameters()[p].name + "' has no value");
    }
    const double energy = model.evaluate(theta, phi, o.threads);
    auto& t = r.text();
    kv(t, "energy", energy);
    kv(t, "parameters", theta.size());
    kv(t, "entries", model.size());
    kv(t, "paths", model.path_count());
    if (!o.dump.empty()) {
      std::ostringstream d;
      majprop::dump_surrogate(d, model);
      r.add_file(o.dump, d.str());
    }
    return 0;
  });
}

int cmd_adapt(const Options& o, Report& r) {
  require(o.hamiltonian, "--hamiltonian");
  return dispatch_width(file_modes(o.hamiltonian), [&](auto width) {
    constexpr std::size_t W = decltype(width)::value;
    const auto h = load_hamiltonian<W>(o);
    const auto phi = load_fock(o, h.modes());

    majprop::AdaptConfig cfg;
    if (!o.config.empty()) cfg = majprop::parse_adapt_config(majprop::detail::read_file(o.config), o.config);
    if (o.eps) cfg.truncation.coeff_threshold = *o.eps;
    if (o.wstar) cfg.truncation.length_cutoff = o.wstar;
    if (o.sine_cutoff) cfg.truncation.sine_cutoff = o.sine_cutoff;
    if (o.seed) cfg.seed = *o.seed;
    if (o.max_gates) cfg.max_gates = *o.max_gates;
    if (o.gradient_floor) cfg.gradient_floor = *o.gradient_floor;
    cfg.threads = o.threads;
    try {
      cfg.validate();
    } catch (const std::invalid_argument& e) {
      throw majprop::InputError(e.what());
    }

    majprop::GatePool<W> pool;
    if (o.pool.empty()) {
      try {
        pool = majprop::default_pool<W>(h.modes(), o.pool_length);
      } catch (const std::invalid_argument& e) {
        throw majprop::InputError(e.what());
      }
    } else {
      pool = majprop::parse_pool<W>(majprop::detail::read_file(o.pool), o.pool);
    }

    const auto run = majprop::adapt_run(h, phi, pool, cfg);
    auto& t = r.text();
    kv(t, "initial_energy", run.trace.initial_energy);
    kv(t, "final_energy", run.trace.final_energy());
    kv(t, "gates", run.circuit.size());
    kv(t, "iterations", run.trace.records.size());
    kv(t, "stop", majprop::to_string(run.trace.stop));

    std::optional<double> e0 = o.e0, e1 = o.e1;
    if ((!e0 || !e1) && h.modes() <= o.oracle_ceiling) {
      const auto eig = majprop::oracle::exact_eigensystem(h, majprop::oracle::Limits{o.oracle_ceiling});
      if (!e0) e0 = eig.e0;
      if (!e1) e1 = eig.e1;
    }
    if (e0 && e1) {
      kv(t, "e0", *e0);
      kv(t, "e1", *e1);
      if (*e1 - *e0 <= 0.0) {
        kv(t, "state_error_bound", "undefined (zero gap)");
      } else {
        double p = (run.trace.final_energy() - *e0) / (*e1 - *e0);
        if (p < 0.0 && p > -1e-9) p = 0.0;
        if (p > 1.0 && p < 1.0 + 1e-9) p = 1.0;
        kv(t, "p", p);
        if (p >= 0.0 && p <= 1.0) {
          kv(t, "state_error_bound", majprop::state_error_bound(p));
        } else {
          kv(t, "state_error_bound", "undefined (p outside [0,1])");
        }
      }
    }

    std::ostringstream trace;
    majprop::write_trace_csv(trace, run.trace);
    if (o.out.empty()) {
      t << trace.str();
    } else {
      r.add_file(o.out, trace.str());
    }
    if (!o.circuit_out.empty()) {
      std::ostringstream majc;
      majprop::write_majc(majc, run.circuit);
      r.add_file(o.circuit_out, majc.str());
    }
    return 0;
  });
}

int cmd_theory(const Options& o, Report& r) {
  std::vector<majprop::theory::Figure2Row> rows;
  try {
    rows = majprop::theory::figure2_data(o.modes, o.k);
  } catch (const std::invalid_argument& e) {
    throw majprop::InputError(e.what());
  }
  std::ostringstream csv;
  majprop::theory::write_figure2_csv(csv, rows);
  if (o.out.empty()) {
    r.text() << csv.str();
  } else {
    r.add_file(o.out, csv.str());
    kv(r.text(), "rows", rows.size());
  }
  return 0;
}

int cmd_oracle_check(const Options& o, Report& r) {
  require(o.hamiltonian, "--hamiltonian");
  return dispatch_width(file_modes(o.hamiltonian), [&](auto width) {
    constexpr std::size_t W = decltype(width)::value;
    const auto h = load_hamiltonian<W>(o);
    const majprop::oracle::Limits limits{o.oracle_ceiling};
    majprop::oracle::check_size(h.modes(), limits);
    auto& t = r.text();
    if (!o.circuit.empty()) {
      const auto c = load_circuit<W>(o, h.modes());
      const auto phi = load_fock(o, h.modes());
      const double exact = majprop::oracle::exact_expectation(h, c, phi, limits);
      majprop::PropagateOptions opts;
      opts.threads = o.threads;
      const double numeric = majprop::expectation(majprop::propagate(h, c, numeric_policy(o), opts), phi);
      kv(t, "energy", exact);
      kv(t, "propagate_energy", numeric);
      kv(t, "abs_diff", std::abs(exact - numeric));
    } else if (!o.fock.empty()) {
      kv(t, "energy", majprop::expectation(h, load_fock(o, h.modes())));
    }
    if (o.spectrum || (o.circuit.empty() && o.fock.empty())) {
      const auto eig = majprop::oracle::exact_eigensystem(h, limits);
      kv(t, "e0", eig.e0);
      kv(t, "e1", eig.e1);
      kv(t, "gap", eig.gap());
    }
    return 0;
  });
}

int cmd_wstar_sweep(const Options& o, Report& r) {
  require(o.hamiltonian, "--hamiltonian");
  return dispatch_width(file_modes(o.hamiltonian), [&](auto width) {
    constexpr std::size_t W = decltype(width)::value;
    const auto h = load_hamiltonian<W>(o);
    const auto c = load_circuit<W>(o, h.modes());
    const auto phi = load_fock(o, h.modes());

    auto angles = c.resolved_angles();
    if (o.randomize) {
      majprop::SplitMix64 rng(o.seed.value_or(0));
      for (auto& a : angles) a = rng.uniform(-0.1, 0.1);
    }
    double reference = 0.0;
    if (o.reference) {
      reference = *o.reference;
    } else if (h.modes() <= o.oracle_ceiling) {
      reference = majprop::oracle::exact_expectation(h, c, angles, phi, majprop::oracle::Limits{o.oracle_ceiling});
    } else {
      throw majprop::ResourceLimit("no --reference given and " + std::to_string(h.modes()) +
                                   " modes exceed the oracle ceiling " + std::to_string(o.oracle_ceiling));
    }

    std::ostringstream csv;
    csv << "wstar,energy,abs_error\n";
    majprop::PropagateOptions opts;
    opts.threads = o.threads;
    for (int w = 2; w <= 2 * h.modes(); w += 2) {
      auto policy = numeric_policy(o);
      policy.length_cutoff = w;
      const double e = majprop::expectation(majprop::propagate(h, c, angles, policy, opts), phi);
      csv << w << ',' << format_double(e) << ',' << format_double(std::abs(e - reference)) << '\n';
    }
    if (o.out.empty()) {
      r.text() << csv.str();
    } else {
      r.add_file(o.out, csv.str());
      kv(r.text(), "reference", reference);
    }
    return 0;
  });
}

int cmd_bench(const Options& o, Report& r) {
  if (o.modes < 2 || o.modes > 12) throw majprop::InputError("bench --modes must be in 2..12");
  if (o.k < 2 || o.k % 2 != 0 || o.k > 2 * o.modes) throw majprop::InputError("bench --k must be even and <= 2N");
  if (o.repeat < 1) throw majprop::InputError("--repeat must be >= 1");
  const std::uint64_t seed = o.seed.value_or(0);
  const auto h = majprop::random_two_body_hamiltonian<1>(o.modes, seed);
  const auto c = majprop::random_unstructured_circuit<1>(o.modes, o.gates, o.k, std::numbers::pi, seed + 1);
  std::vector<std::uint8_t> occ(static_cast<std::size_t>(o.modes), 0);
  for (int j = 0; j < o.modes / 2; ++j) occ[static_cast<std::size_t>(j)] = 1;
  const majprop::FockState phi(occ);
  const auto policy = numeric_policy(o);

  majprop::PropagateOptions opts;
  opts.threads = o.threads;
  double energy = 0.0;
  std::size_t terms = 0;
  const auto start = std::chrono::steady_clock::now();
  for (int i = 0; i < o.repeat; ++i) {
    const auto result = majprop::propagate(h, c, policy, opts);
    energy = majprop::expectation(result, phi);
    terms = result.size();
  }
  const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  auto& t = r.text();
  kv(t, "energy", energy);
  kv(t, "terms_final", terms);
  kv(t, "gates", c.size());
  std::cerr << "seconds_per_run " << format_double(seconds / o.repeat) << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"majprop: Majorana propagation simulator"};
  app.require_subcommand(1);
  Options o;

  auto io_flags = [&o](CLI::App* sub, bool circuit) {
    sub->add_option("--hamiltonian", o.hamiltonian, "Hamiltonian file (.majh)");
    if (circuit) sub->add_option("--circuit", o.circuit, "Circuit file (.majc)");
    sub->add_option("--fock", o.fock, "Fock reference as a bit string (mode 1 first) or a file holding one");
  };
  auto common = [&o](CLI::App* sub) {
    sub->add_option("--threads", o.threads, "Worker threads; 0 uses every core")->capture_default_str();
    sub->add_option("--seed", o.seed, "Random seed");
    sub->add_option("--out", o.out, "Output file");
  };
  auto truncation = [&o](CLI::App* sub, bool sine) {
    sub->add_option("--eps", o.eps, "Coefficient threshold")->check(CLI::NonNegativeNumber);
    sub->add_option("--wstar", o.wstar, "Monomial length cutoff")->check(CLI::NonNegativeNumber);
    if (sine) sub->add_option("--sine-cutoff", o.sine_cutoff, "Maximum sine factors per path")->check(CLI::NonNegativeNumber);
  };

  auto* prop = app.add_subcommand("propagate", "Backpropagate H through a circuit and evaluate on a Fock state");
  io_flags(prop, true);
  common(prop);
  truncation(prop, true);

  auto* surr = app.add_subcommand("surrogate-eval", "Build the trigonometric surrogate and evaluate it");
  io_flags(surr, true);
  common(surr);
  truncation(surr, true);
  surr->add_option("--param", o.params, "Override a parameter, name=value (repeatable)");
  surr->add_option("--dump", o.dump, "Write every path to this file");
  surr->add_option("--max-paths", o.max_paths, "Resource ceiling on stored paths")->capture_default_str();

  auto* adapt = app.add_subcommand("adapt", "Grow a circuit gate by gate to lower the energy");
  io_flags(adapt, false);
  common(adapt);
  truncation(adapt, true);
  adapt->add_option("--pool", o.pool, "Gate pool file; default is every even monomial up to --pool-length");
  adapt->add_option("--pool-length", o.pool_length, "Longest generator in the default pool")->capture_default_str();
  adapt->add_option("--config", o.config, "key = value configuration file");
  adapt->add_option("--circuit-out", o.circuit_out, "Write the final circuit (.majc)");
  adapt->add_option("--max-gates", o.max_gates, "Gate budget");
  adapt->add_option("--gradient-floor", o.gradient_floor, "Stop when every |gradient| is below this");
  adapt->add_option("--e0", o.e0, "Ground energy for the error bound");
  adapt->add_option("--e1", o.e1, "First excited energy for the error bound");
  adapt->add_option("--oracle-ceiling", o.oracle_ceiling, "Largest N for dense reference values")->capture_default_str();

  auto* theory = app.add_subcommand("theory", "Branching and pairing probabilities as CSV");
  theory->add_option("--modes", o.modes, "Number of modes N")->capture_default_str();
  theory->add_option("--k", o.k, "Generator length")->capture_default_str();
  theory->add_option("--out", o.out, "Output CSV");

  auto* oracle = app.add_subcommand("oracle-check", "Dense reference expectation and spectrum");
  io_flags(oracle, true);
  common(oracle);
  truncation(oracle, false);
  oracle->add_option("--oracle-ceiling", o.oracle_ceiling, "Largest N for the dense oracle")->capture_default_str();
  oracle->add_flag("--spectrum", o.spectrum, "Also print the two lowest eigenvalues");

  auto* sweep = app.add_subcommand("wstar-sweep", "Energy error versus length cutoff");
  io_flags(sweep, true);
  common(sweep);
  sweep->add_option("--eps", o.eps, "Coefficient threshold")->check(CLI::NonNegativeNumber);
  sweep->add_option("--reference", o.reference, "Reference energy; default is the dense oracle");
  sweep->add_flag("--randomize", o.randomize, "Replace angles with seeded uniform draws in [-0.1, 0.1]");
  sweep->add_option("--oracle-ceiling", o.oracle_ceiling, "Largest N for the dense oracle")->capture_default_str();

  auto* bench = app.add_subcommand("bench", "Time propagation on a seeded random instance");
  common(bench);
  truncation(bench, false);
  bench->add_option("--modes", o.modes, "Number of modes")->default_val(8);
  bench->add_option("--gates", o.gates, "Circuit length")->capture_default_str();
  bench->add_option("--k", o.k, "Longest generator")->capture_default_str();
  bench->add_option("--repeat", o.repeat, "Timed repetitions")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitInput;
  }

  Report report;
  try {
    int code = 0;
    if (*prop) code = cmd_propagate(o, report);
    else if (*surr) code = cmd_surrogate_eval(o, report);
    else if (*adapt) code = cmd_adapt(o, report);
    else if (*theory) code = cmd_theory(o, report);
    else if (*oracle) code = cmd_oracle_check(o, report);
    else if (*sweep) code = cmd_wstar_sweep(o, report);
    else if (*bench) code = cmd_bench(o, report);
    if (code == 0) report.commit();
    return code;
  } catch (const majprop::ResourceLimit& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitResource;
  } catch (const std::bad_alloc&) {
    std::cerr << "error: out of memory\n";
    return kExitResource;
  } catch (const majprop::ContractViolation& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitContract;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitInput;
  }
}
