// Copyright 2026 The majprop Authors
// SPDX-License-Identifier: Apache-2.0

// End-to-end acceptance checks. Prints one PASS/FAIL line per criterion and
// exits nonzero if any criterion fails.

#include <sys/wait.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include "majprop/majprop.hpp"

namespace {

using namespace majprop;
using Clock = std::chrono::steady_clock;
using M1 = Monomial<1>;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

std::string fmt(double x, int digits = 3) {
  std::ostringstream s;
  s.precision(digits);
  s << x;
  return s.str();
}

FockState random_fock(int n, SplitMix64& rng) {
  std::vector<std::uint8_t> occ(static_cast<std::size_t>(n));
  for (auto& o : occ) o = static_cast<std::uint8_t>(rng.below(2));
  return FockState(occ);
}

FockState fock_from_basis(int n, std::uint64_t b) {
  std::vector<std::uint8_t> occ(static_cast<std::size_t>(n));
  for (int j = 0; j < n; ++j) occ[static_cast<std::size_t>(j)] = static_cast<std::uint8_t>((b >> (n - 1 - j)) & 1);
  return FockState(occ);
}

/// Lowest-diagonal-energy Fock state with the particle number of the ground state.
FockState sector_reference(const OperatorSum<1>& h, const oracle::Eigensystem& eig) {
  const int n = h.modes();
  Eigen::Index dominant = 0;
  eig.ground.cwiseAbs2().maxCoeff(&dominant);
  const int particles = std::popcount(static_cast<std::uint64_t>(dominant));
  FockState best;
  double best_e = INFINITY;
  for (std::uint64_t b = 0; b < (std::uint64_t{1} << n); ++b) {
    if (std::popcount(b) != particles) continue;
    const auto phi = fock_from_basis(n, b);
    const double e = expectation(h, phi);
    if (e < best_e) {
      best_e = e;
      best = phi;
    }
  }
  return best;
}

struct Instance {
  OperatorSum<1> h;
  Circuit<1> circuit;
  FockState phi;
};

std::vector<Instance> exact_regime_instances() {
  std::vector<Instance> out;
  SplitMix64 rng(20260101);
  for (int i = 0; i < 50; ++i) {
    const int n = 4 + 2 * (i % 3);
    const std::size_t gates = 1 + rng.below(30);
    const auto seed = rng();
    out.push_back({random_two_body_hamiltonian<1>(n, seed),
                   random_unstructured_circuit<1>(n, gates, 4, std::numbers::pi, seed + 1), random_fock(n, rng)});
  }
  return out;
}

struct Outcome {
  bool pass = false;
  std::string detail;
};

// ---------------------------------------------------------------------------

Outcome oracle_equivalence() {
  const auto t0 = Clock::now();
  const auto instances = exact_regime_instances();
  double worst = 0.0;
  std::size_t longest = 0;
  for (const auto& inst : instances) {
    TruncationPolicy policy;
    policy.length_cutoff = 2 * inst.h.modes();
    const double e = expectation(propagate(inst.h, inst.circuit, policy), inst.phi);
    worst = std::max(worst, std::abs(e - oracle::exact_expectation(inst.h, inst.circuit, inst.phi)));
    longest = std::max(longest, inst.circuit.size());
  }
  const double dt = seconds_since(t0);
  return {worst <= 1e-10 && dt < 60.0, "50 instances, L<=" + std::to_string(longest) + ", max |diff| " +
                                           fmt(worst) + ", " + fmt(dt) + " s"};
}

Outcome algebra_exhaustive() {
  const auto t0 = Clock::now();
  std::size_t checked = 0, mismatches = 0;
  auto check_pair = [&](int n, std::uint64_t a, std::uint64_t b, const std::vector<oracle::DenseOperator>& dense) {
    const auto ma = M1::from_words(n, {a});
    const auto mb = M1::from_words(n, {b});
    const oracle::DenseOperator ab = dense[a] * dense[b];
    const oracle::DenseOperator ba = dense[b] * dense[a];
    const auto p = product(ma, mb);
    bool ok = p.monomial == M1::from_words(n, {a ^ b});
    ok = ok && (oracle::i_power(p.phase) * dense[a ^ b] - ab).cwiseAbs().maxCoeff() == 0.0;
    ok = ok && commutes(ma, mb) == ((ab - ba).cwiseAbs().maxCoeff() == 0.0);
    ++checked;
    mismatches += ok ? 0 : 1;
  };
  for (int n : {2, 3}) {
    const std::uint64_t count = std::uint64_t{1} << (2 * n);
    std::vector<oracle::DenseOperator> dense;
    for (std::uint64_t a = 0; a < count; ++a) dense.push_back(oracle::monomial_matrix(M1::from_words(n, {a})));
    if (n == 2) {
      for (std::uint64_t a = 0; a < count; ++a) {
        for (std::uint64_t b = 0; b < count; ++b) check_pair(n, a, b, dense);
      }
    } else {
      SplitMix64 rng(33);
      for (int t = 0; t < 10000; ++t) check_pair(n, rng.below(count), rng.below(count), dense);
    }
  }
  return {mismatches == 0 && checked == 256 + 10000,
          std::to_string(checked) + " pairs (256 at N=2, 10000 at N=3), " + std::to_string(mismatches) +
              " mismatches, " + fmt(seconds_since(t0)) + " s"};
}

Outcome pairing_formula() {
  int exact_cases = 0, exact_bad = 0;
  for (int n = 1; n <= 6; ++n) {
    for (int w = 0; w <= 2 * n; ++w) {
      ++exact_cases;
      if (theory::exhaustive_pairing_fraction(n, w) != theory::pairing_probability_exact(n, w)) ++exact_bad;
    }
  }
  const std::uint64_t samples = 100000;
  double worst_sigma = 0.0;
  for (int w : {2, 4, 6, 8}) {
    const double p = theory::pairing_probability(20, w);
    const double est = theory::monte_carlo_pairing(20, w, samples, 700 + static_cast<std::uint64_t>(w));
    const double sigma = std::sqrt(p * (1 - p) / static_cast<double>(samples));
    worst_sigma = std::max(worst_sigma, std::abs(est - p) / sigma);
  }
  return {exact_bad == 0 && worst_sigma <= 3.0,
          std::to_string(exact_cases) + " exhaustive (N<=6) cases exact, " + std::to_string(exact_bad) +
              " wrong; Monte Carlo N=20 w=2..8 worst deviation " + fmt(worst_sigma) + " sigma"};
}

Outcome backflow_closed_form() {
  double worst = 0.0;
  int cases = 0;
  for (int n : {25, 50, 100}) {
    for (int w = 3; w <= 40; ++w) {
      const auto b = theory::branch_probabilities_exact(n, w, 4);
      const double from_branches = (b.p_minus / b.p_plus).convert_to<double>();
      const double closed = static_cast<double>((w - 1) * (w - 2)) /
                            static_cast<double>((2 * n - 1 - w) * (2 * n - 2 - w));
      worst = std::max(worst, std::abs(from_branches - closed) / std::max(1.0, std::abs(closed)));
      ++cases;
    }
  }
  double lo = INFINITY, hi = -INFINITY;
  for (int n = 50; n <= 100; ++n) {
    const double q = theory::backflow_ratio_k4(2 * n, 4) / theory::backflow_ratio_k4(n, 4);
    lo = std::min(lo, q);
    hi = std::max(hi, q);
  }
  return {worst <= 1e-12 && lo >= 0.225 && hi <= 0.275,
          std::to_string(cases) + " (N,w) cases, max rel diff " + fmt(worst) + "; R(2N)/R(N) at w=4, N=50..100 in [" +
              fmt(lo, 4) + ", " + fmt(hi, 4) + "]"};
}

Outcome length_two_preserves_length() {
  SplitMix64 rng(55);
  int violations = 0;
  double worst_norm = 0.0;
  for (int g = 0; g < 1000; ++g) {
    const int n = 2 + static_cast<int>(rng.below(7));
    OperatorSum<1> sum(n);
    const int terms = 1 + static_cast<int>(rng.below(20));
    for (int t = 0; t < terms; ++t) {
      const int w = 1 + static_cast<int>(rng.below(static_cast<std::uint64_t>(2 * n)));
      auto idx = sample_subset(2 * n, w, rng);
      for (auto& i : idx) ++i;
      sum.add_term(M1::from_indices(n, idx), rng.uniform(-1, 1));
    }
    auto gidx = sample_subset(2 * n, 2, rng);
    for (auto& i : gidx) ++i;
    const auto out = apply_gate_adjoint(sum, M1::from_indices(n, gidx), rng.uniform(-std::numbers::pi, std::numbers::pi), {});
    std::map<int, double> before, after;
    for (const auto& [m, c] : sum) before[m.length()] += c * c;
    for (const auto& [m, c] : out) {
      if (!before.contains(m.length())) ++violations;
      after[m.length()] += c * c;
    }
    for (const auto& [w, s] : before) worst_norm = std::max(worst_norm, std::abs(s - after[w]));
  }
  return {violations == 0 && worst_norm < 1e-12,
          "1000 random gates, " + std::to_string(violations) + " new lengths, max per-length norm drift " +
              fmt(worst_norm)};
}

Outcome figure2() {
  const auto t0 = Clock::now();
  const int n = 100;
  const auto rows = theory::figure2_data(n, 4);
  const auto path = std::filesystem::temp_directory_path() / "majprop_figure2.csv";
  {
    std::ofstream f(path);
    theory::write_figure2_csv(f, rows);
  }
  const double dt = seconds_since(t0);
  bool min_at_n = true, plus_above = true, mirrored = true;
  for (const auto& r : rows) {
    if (r.w % 2 == 0 && r.w != n && !(r.pairing > rows[n].pairing)) min_at_n = false;
    if (r.w >= 1 && r.w < n && !(r.p_plus > r.p_minus)) plus_above = false;
    if (r.p_plus != rows[static_cast<std::size_t>(2 * n - r.w)].p_minus) mirrored = false;
  }
  const bool zero_row = rows[0].p_plus == 0.0 && rows[0].p_minus == 0.0;
  std::filesystem::remove(path);
  return {min_at_n && plus_above && mirrored && dt < 5.0,
          std::string("pairing min at w=N (even w): ") + (min_at_n ? "yes" : "no") +
              "; P+>P- for 1<=w<N: " + (plus_above ? "yes" : "no") + " (w=0 has P+=P-=" +
              (zero_row ? "0" : "?") + "); P+(w)=P-(2N-w): " + (mirrored ? "yes" : "no") + "; CSV " + fmt(dt) + " s"};
}

Outcome wstar_sweep_desk_scale() {
  const auto t0 = Clock::now();
  int better = 0, exact_ok = 0;
  double worst_full = 0.0;
  std::size_t min_gates = 1000, max_gates = 0;
  for (int inst = 0; inst < 10; ++inst) {
    const int n = 8;
    const auto h = random_two_body_hamiltonian<1>(n, 8000 + static_cast<std::uint64_t>(inst));
    const auto eig = oracle::exact_eigensystem(h);
    const auto phi = sector_reference(h, eig);
    AdaptConfig cfg;
    cfg.max_gates = 15;
    cfg.sweep_limit = 5;
    cfg.threads = 0;
    const auto run = adapt_run(h, phi, default_pool<1>(n), cfg);
    const auto& c = run.circuit;
    min_gates = std::min(min_gates, c.size());
    max_gates = std::max(max_gates, c.size());
    const double reference = oracle::exact_expectation(h, c, phi);
    auto error_at = [&](int w) {
      TruncationPolicy p;
      p.length_cutoff = w;
      return std::abs(expectation(propagate(h, c, p), phi) - reference);
    };
    if (error_at(6) < error_at(2)) ++better;
    const double full = error_at(2 * n);
    worst_full = std::max(worst_full, full);
    if (full < 1e-10) ++exact_ok;
  }
  const double dt = seconds_since(t0);
  return {better >= 9 && exact_ok == 10 && dt < 300.0,
          "8 modes, ADAPT circuits of " + std::to_string(min_gates) + "-" + std::to_string(max_gates) +
              " gates: err(w*=6)<err(w*=2) in " + std::to_string(better) + "/10, err(w*=16) max " +
              fmt(worst_full) + ", " + fmt(dt) + " s"};
}

Outcome surrogate_consistency() {
  const auto t0 = Clock::now();
  // Exact-regime comparison on the criterion-1 instances.
  const auto instances = exact_regime_instances();
  constexpr std::size_t kPathBudget = 3'000'000;
  double worst = 0.0;
  int compared_w4 = 0, compared_full = 0, over_budget = 0;
  for (const auto& inst : instances) {
    const auto c = parametrize(inst.circuit);
    const auto theta = c.parameter_values();
    for (int wstar : {4, 2 * inst.h.modes()}) {
      TruncationPolicy policy;
      policy.length_cutoff = wstar;
      SurrogateOptions so;
      so.max_paths = kPathBudget;
      so.threads = 0;
      try {
        const auto model = build_surrogate(inst.h, c, policy, so);
        const double s = model.evaluate(theta, inst.phi, 0);
        const double e = expectation(propagate(inst.h, c, policy), inst.phi);
        worst = std::max(worst, std::abs(s - e));
        (wstar == 4 ? compared_w4 : compared_full) += 1;
      } catch (const ResourceLimit&) {
        if (wstar == 4) return {false, "w*=4 surrogate exceeded the path budget"};
        ++over_budget;
      }
    }
  }

  // Small-angle regime: mean |error| over 100 draws for sine cutoffs 0..4.
  const int n = 8;
  const std::size_t layers = 20;
  const auto h = random_two_body_hamiltonian<1>(n, 4242);
  const auto c = parametrize(random_unstructured_circuit<1>(n, layers, 4, 1.0, 4343));
  const auto phi = FockState::parse("11110000");
  SplitMix64 rng(4444);
  std::vector<std::vector<double>> draws(100);
  std::vector<double> exact;
  for (auto& d : draws) {
    d.resize(c.size());
    for (auto& x : d) x = rng.uniform(-1.0 / layers, 1.0 / layers);
    exact.push_back(expectation(propagate(h, c, d, TruncationPolicy{}), phi));
  }
  std::vector<double> mean_err;
  for (int cutoff = 0; cutoff <= 4; ++cutoff) {
    TruncationPolicy p;
    p.sine_cutoff = cutoff;
    SurrogateOptions so;
    so.threads = 0;
    const auto model = build_surrogate(h, c, p, so);
    double sum = 0.0;
    for (std::size_t i = 0; i < draws.size(); ++i) sum += std::abs(model.evaluate(draws[i], phi, 0) - exact[i]);
    mean_err.push_back(sum / static_cast<double>(draws.size()));
  }
  bool decreasing = true;
  for (std::size_t i = 1; i < mean_err.size(); ++i) decreasing = decreasing && mean_err[i] < mean_err[i - 1];

  std::string errs;
  for (double e : mean_err) errs += (errs.empty() ? "" : " > ") + fmt(e, 2);
  return {worst <= 1e-10 && compared_w4 == 50 && decreasing,
          "exact regime: 50/50 instances at w*=4 and " + std::to_string(compared_full) + "/50 at w*=2N (" +
              std::to_string(over_budget) + " over the " + std::to_string(kPathBudget / 1000000) +
              "M-path budget), max |diff| " + fmt(worst) + "; small-angle mean error by cutoff 0..4: " + errs +
              "; " + fmt(seconds_since(t0)) + " s"};
}

struct AdaptCase {
  OperatorSum<1> h;
  oracle::Eigensystem eig;
  FockState phi;
  AdaptResult<1> run;
};

std::vector<AdaptCase>& adapt_cases() {
  static std::vector<AdaptCase> cases;
  return cases;
}

Outcome adapt_convergence() {
  const auto t0 = Clock::now();
  auto& cases = adapt_cases();
  int converged = 0, monotone = 0;
  std::uint64_t seed = 1000;
  while (cases.size() < 10) {
    const int n = 4 + static_cast<int>(cases.size() % 3);
    auto h = random_two_body_hamiltonian<1>(n, seed++);
    auto eig = oracle::exact_eigensystem(h);
    if (eig.degenerate) continue;
    auto phi = sector_reference(h, eig);
    AdaptConfig cfg;
    cfg.threads = 0;
    auto run = adapt_run(h, phi, default_pool<1>(n), cfg);
    cases.push_back({std::move(h), std::move(eig), std::move(phi), std::move(run)});
  }
  std::string gates;
  for (const auto& cs : cases) {
    const auto& tr = cs.run.trace;
    if (std::abs(tr.final_energy() - cs.eig.e0) < 1e-6 && cs.run.circuit.size() <= 40) ++converged;
    bool mono = true;
    double prev = tr.initial_energy;
    for (const auto& r : tr.records) {
      mono = mono && r.energy <= prev;
      prev = r.energy;
    }
    monotone += mono ? 1 : 0;
    gates += (gates.empty() ? "" : ",") + std::to_string(cs.run.circuit.size());
  }
  const double dt = seconds_since(t0);
  return {converged >= 8 && monotone == 10 && dt < 600.0,
          "N=4..6: " + std::to_string(converged) + "/10 within 1e-6 of E0 (gates " + gates + "), " +
              std::to_string(monotone) + "/10 monotone traces, " + fmt(dt) + " s"};
}

Outcome state_error_bound_check() {
  int points = 0, skipped = 0, violations = 0;
  double worst_energy_gap = 0.0;
  for (const auto& cs : adapt_cases()) {
    const auto& c = cs.run.circuit;
    for (const auto& r : cs.run.trace.records) {
      Circuit<1> prefix(c.modes());
      for (std::size_t j = 0; j < r.gates; ++j) prefix.add_gate(c.gate(j).generator, r.parameters[j]);
      const auto psi = oracle::circuit_state(prefix, cs.phi);
      worst_energy_gap = std::max(worst_energy_gap, std::abs(oracle::state_expectation(cs.h, psi) - r.energy));
      double p = (r.energy - cs.eig.e0) / cs.eig.gap();
      if (p < 0.0 && p > -1e-9) p = 0.0;
      if (p > 1.0) {
        ++skipped;
        continue;
      }
      ++points;
      const double infidelity = 1.0 - std::abs(cs.eig.ground.dot(psi));
      if (infidelity > state_error_bound(p) + 1e-9) ++violations;
    }
  }
  const double worked = state_error_bound(0.05);
  return {violations == 0 && points > 0 && std::abs(worked - 0.0253) <= 5e-4 && worst_energy_gap < 1e-8,
          std::to_string(points) + " trace points checked, " + std::to_string(violations) + " violations, " +
              std::to_string(skipped) + " with p>1 skipped; bound(0.05)=" + fmt(worked, 4)};
}

// ---------------------------------------------------------------------------

struct CliRun {
  int code = -1;
  std::string out;
};

CliRun run_cli(const std::string& cli, const std::string& args) {
  CliRun r;
  FILE* pipe = ::popen((cli + " " + args + " 2>/dev/null").c_str(), "r");
  if (pipe == nullptr) return r;
  char buf[4096];
  std::size_t n = 0;
  while ((n = std::fread(buf, 1, sizeof buf, pipe)) > 0) r.out.append(buf, n);
  const int status = ::pclose(pipe);
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return r;
}

std::vector<std::string> lines_of(const std::string& text) {
  std::vector<std::string> out;
  std::istringstream in(text);
  for (std::string line; std::getline(in, line);) out.push_back(line);
  return out;
}

/// Same line structure, every numeric token within tol.
bool outputs_agree(const std::string& a, const std::string& b, double tol) {
  const auto la = lines_of(a), lb = lines_of(b);
  if (la.size() != lb.size()) return false;
  for (std::size_t i = 0; i < la.size(); ++i) {
    std::string x = la[i], y = lb[i];
    std::replace(x.begin(), x.end(), ',', ' ');
    std::replace(y.begin(), y.end(), ',', ' ');
    std::istringstream sx(x), sy(y);
    std::string tx, ty;
    while (true) {
      const bool gx = static_cast<bool>(sx >> tx), gy = static_cast<bool>(sy >> ty);
      if (gx != gy) return false;
      if (!gx) break;
      if (tx == ty) continue;
      char* ex = nullptr;
      char* ey = nullptr;
      const double vx = std::strtod(tx.c_str(), &ex), vy = std::strtod(ty.c_str(), &ey);
      if (*ex != '\0' || *ey != '\0' || std::abs(vx - vy) > tol) return false;
    }
  }
  return true;
}

Outcome determinism(const std::string& cli, const std::string& data) {
  const std::string six = "--hamiltonian " + data + "/random_6mode.majh --circuit " + data +
                          "/random_6mode.majc --fock 111000 --seed 5";
  const std::vector<std::pair<std::string, std::string>> commands{
      {"propagate", "propagate " + six + " --wstar 8"},
      {"surrogate-eval", "surrogate-eval " + six + " --wstar 6"},
      {"adapt", "adapt --hamiltonian " + data + "/random_4mode.majh --fock 1000 --seed 5 --pool-length 4"},
      {"theory", "theory --modes 60 --k 4"},
      {"oracle-check", "oracle-check " + six + " --spectrum"},
      {"wstar-sweep", "wstar-sweep " + six + " --randomize"},
      {"bench", "bench --modes 8 --gates 20 --seed 5"},
  };
  int ok = 0;
  std::string failed;
  for (const auto& [name, args] : commands) {
    const auto a = run_cli(cli, args + (name == "theory" ? "" : " --threads 1"));
    const auto b = run_cli(cli, args + (name == "theory" ? "" : " --threads 1"));
    const auto c = run_cli(cli, args + (name == "theory" ? "" : " --threads 4"));
    const bool good = a.code == 0 && b.code == 0 && c.code == 0 && !a.out.empty() &&
                      outputs_agree(a.out, b.out, 1e-12) && outputs_agree(a.out, c.out, 1e-12);
    if (good) {
      ++ok;
    } else {
      failed += " " + name;
    }
  }
  return {ok == static_cast<int>(commands.size()),
          std::to_string(ok) + "/" + std::to_string(commands.size()) +
              " subcommands identical across reruns and --threads 1/4" + (failed.empty() ? "" : "; failed:" + failed)};
}

}  // namespace

int main(int argc, char** argv) {
  const std::string cli = argc > 1 ? argv[1] : "majprop";
  const std::string data = argc > 2 ? argv[2] : "data";
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
      {"oracle equivalence, exact regime", oracle_equivalence},
      {"algebra exhaustive verification", algebra_exhaustive},
      {"pairing formula", pairing_formula},
      {"backflow ratio closed form", backflow_closed_form},
      {"length-2 generators preserve length", length_two_preserves_length},
      {"transition and pairing table, N=100 k=4", figure2},
      {"length-cutoff sweep at 8 modes", wstar_sweep_desk_scale},
      {"surrogate consistency", surrogate_consistency},
      {"ADAPT convergence", adapt_convergence},
      {"state error bound", state_error_bound_check},
      {"determinism across reruns and threads", [&] { return determinism(cli, data); }},
  };
  int failures = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    failures += o.pass ? 0 : 1;
    std::cout << "criterion " << i + 1 << " " << (o.pass ? "PASS" : "FAIL") << ": " << criteria[i].first << ": "
              << o.detail << std::endl;
  }
  return failures == 0 ? 0 : 1;
}
