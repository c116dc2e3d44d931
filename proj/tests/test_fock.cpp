// Copyright 2026 The majprop Authors
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <boost/math/special_functions/binomial.hpp>

#include "majprop/fock.hpp"
#include "majprop/oracle.hpp"
#include "majprop/random.hpp"

namespace {

using majprop::FockState;
using M1 = majprop::Monomial<1>;

M1 mono(int n, std::initializer_list<int> idx) { return M1::from_indices(n, idx); }

FockState state_from_bits(int modes, std::uint64_t bits) {
  std::vector<std::uint8_t> occ(static_cast<std::size_t>(modes));
  for (int j = 0; j < modes; ++j) occ[static_cast<std::size_t>(j)] = (bits >> j) & 1U;
  return FockState(occ);
}

double dense_diagonal(const M1& m, const FockState& phi) {
  const auto mat = majprop::oracle::monomial_matrix(m);
  const auto idx = static_cast<Eigen::Index>(majprop::oracle::basis_index(phi));
  const auto z = mat(idx, idx);
  EXPECT_EQ(z.imag(), 0.0);
  return z.real();
}

TEST(Fock, Parse) {
  const auto phi = FockState::parse("1100");
  EXPECT_EQ(phi.modes(), 4);
  EXPECT_EQ(phi.occupation(1), 1);
  EXPECT_EQ(phi.occupation(3), 0);
  EXPECT_EQ(phi.particle_count(), 2);
  EXPECT_EQ(phi.to_string(), "1100");
  EXPECT_THROW(FockState::parse("10a1"), majprop::InputError);
  EXPECT_THROW(FockState::parse(""), majprop::InputError);
}

TEST(Fock, IsPaired) {
  EXPECT_TRUE(is_paired(M1(3)));
  EXPECT_TRUE(is_paired(mono(3, {1, 2})));
  EXPECT_FALSE(is_paired(mono(3, {1, 3})));
  EXPECT_TRUE(is_paired(mono(3, {1, 2, 3, 4})));
  EXPECT_FALSE(is_paired(mono(3, {1, 2, 3, 5})));
  EXPECT_FALSE(is_paired(mono(3, {2, 3})));
}

TEST(Fock, TraceExamples) {
  const auto occupied = FockState::parse("1");
  const auto empty = FockState::parse("0");
  EXPECT_EQ(fock_trace(M1(1), occupied), 1.0);
  EXPECT_EQ(fock_trace(mono(1, {1, 2}), occupied), 1.0);
  EXPECT_EQ(fock_trace(mono(1, {1, 2}), empty), -1.0);
  EXPECT_EQ(fock_trace(mono(2, {1, 3}), FockState::parse("11")), 0.0);
  EXPECT_THROW(fock_trace(mono(2, {1, 2}), occupied), majprop::DimensionError);
}

TEST(Fock, ExpectationExamples) {
  majprop::OperatorSum<1> h(1);
  h.add_term(M1(1), 3.5);
  EXPECT_EQ(expectation(h, FockState::parse("0")), 3.5);
  majprop::OperatorSum<1> g(2);
  g.add_term(mono(2, {1, 2}), 0.5).add_term(mono(2, {1, 3}), 7.0);
  EXPECT_EQ(expectation(g, FockState::parse("10")), 0.5);
}

// All 4^N monomials against all 2^N Fock states.
TEST(Fock, ExhaustiveAgainstDenseUpToThreeModes) {
  for (int n = 1; n <= 3; ++n) {
    for (std::uint64_t mask = 0; mask < (1u << (2 * n)); ++mask) {
      const auto m = M1::from_words(n, {mask});
      for (std::uint64_t s = 0; s < (1u << n); ++s) {
        const auto phi = state_from_bits(n, s);
        ASSERT_EQ(fock_trace(m, phi), dense_diagonal(m, phi)) << to_string(m) << " " << phi.to_string();
      }
    }
  }
}

TEST(Fock, SampledAgainstDenseAtSixModes) {
  constexpr int n = 6;
  majprop::SplitMix64 rng(21);
  for (int t = 0; t < 2000; ++t) {
    // Bias towards paired monomials so the sign rule is exercised.
    std::uint64_t mask = 0;
    for (int j = 0; j < n; ++j) {
      const auto r = rng.below(8);
      if (r < 3) mask |= std::uint64_t{3} << (2 * j);
      else if (r == 3) mask |= std::uint64_t{1} << (2 * j + rng.below(2));
    }
    const auto m = M1::from_words(n, {mask});
    const auto phi = state_from_bits(n, rng.below(1u << n));
    ASSERT_EQ(fock_trace(m, phi), dense_diagonal(m, phi));
  }
}

TEST(Fock, RandomSumExpectationMatchesDense) {
  for (int n = 2; n <= 6; n += 2) {
    majprop::SplitMix64 rng(n);
    majprop::OperatorSum<1> h(n);
    for (int t = 0; t < 60; ++t) {
      auto idx = majprop::sample_subset(2 * n, 2 * (1 + static_cast<int>(rng.below(2))), rng);
      for (auto& i : idx) ++i;
      h.add_term(M1::from_indices(n, idx), rng.uniform(-1, 1));
    }
    const auto phi = state_from_bits(n, rng.below(1u << n));
    const auto psi = majprop::oracle::basis_state(phi);
    EXPECT_NEAR(expectation(h, phi), majprop::oracle::state_expectation(h, psi), 1e-12);
  }
}

TEST(Fock, PairedFractionMatchesBinomialRatio) {
  for (int n = 1; n <= 6; ++n) {
    std::vector<long long> total(2 * n + 1, 0), paired(2 * n + 1, 0);
    for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << (2 * n)); ++mask) {
      const auto m = M1::from_words(n, {mask});
      ++total[m.length()];
      if (is_paired(m)) ++paired[m.length()];
    }
    for (int w = 0; w <= 2 * n; ++w) {
      if (w % 2 == 1) {
        EXPECT_EQ(paired[w], 0);
        continue;
      }
      const auto num = boost::math::binomial_coefficient<double>(n, w / 2);
      const auto den = boost::math::binomial_coefficient<double>(2 * n, w);
      EXPECT_EQ(static_cast<double>(total[w]), den);
      EXPECT_EQ(static_cast<double>(paired[w]), num);
    }
  }
}

TEST(Fock, WeightsReproduceExpectation) {
  const auto phi = FockState::parse("1010");
  const auto weights = majprop::fock_weights<1>(phi);
  EXPECT_EQ(weights.size(), 16u);
  const auto h = majprop::OperatorSum<1>(4)
                     .add_term(mono(4, {1, 2}), 0.3)
                     .add_term(mono(4, {1, 2, 5, 6}), -1.25)
                     .add_term(mono(4, {1, 4}), 9.0);
  EXPECT_DOUBLE_EQ(majprop::inner_product(weights, h), expectation(h, phi));
}

}  // namespace
