#include <gtest/gtest.h>

#include <algorithm>

#include "oracles.hpp"
#include "tmxor/dtmc.hpp"

using namespace tmxor;
using namespace tmxor::dtmc;

namespace {

Bits bits(std::initializer_list<int> v) {
  Bits b;
  for (int x : v) b.push_back(static_cast<std::uint8_t>(x));
  return b;
}

// Test-side index: 1 + sum of bit_i * 2^(width-1-i).
int ref_index(const Bits& b) {
  int v = 0;
  for (std::size_t i = 0; i < b.size(); ++i) v += b[i] << (b.size() - 1 - i);
  return v + 1;
}

const TransitionMatrix& two_clause() {
  static const TransitionMatrix P = build_two_clause_matrix();
  return P;
}

const LimitingResult& two_clause_limit() {
  static const LimitingResult L = limiting_matrix(two_clause());
  return L;
}

}  // namespace

TEST(Encoding, Anchors) {
  EXPECT_EQ(encode_state(bits({0, 0, 0, 0, 0, 0, 0, 0})), 1);
  EXPECT_EQ(encode_state(bits({1, 1, 1, 1, 1, 1, 1, 1})), 256);
  const auto a = bits({0, 1, 1, 0, 1, 0, 0, 1});
  const auto b = bits({1, 0, 0, 1, 0, 1, 1, 0});
  EXPECT_EQ(encode_state(a), ref_index(a));
  EXPECT_EQ(encode_state(b), ref_index(b));
  EXPECT_EQ(encode_state(a), 106);
  EXPECT_EQ(encode_state(b), 151);
  EXPECT_EQ(decode_state(7, 4), bits({0, 1, 1, 0}));
  EXPECT_EQ(decode_state(10, 4), bits({1, 0, 0, 1}));
}

TEST(Encoding, Bijection) {
  for (std::size_t w : {4u, 8u}) {
    for (int i = 1; i <= (1 << w); ++i) EXPECT_EQ(encode_state(decode_state(i, w)), i);
  }
  EXPECT_THROW(decode_state(0, 4), std::out_of_range);
  EXPECT_THROW(decode_state(17, 4), std::out_of_range);
  EXPECT_THROW(encode_state(bits({0, 2})), std::invalid_argument);
}

TEST(Encoding, MachineRoundTrip) {
  Machine m{MachineConfig{}};
  const auto b = decode_state(151, 8);
  set_system_bits(m, b);
  EXPECT_EQ(system_bits(m), b);
  EXPECT_TRUE(m.includes(0, 0));
  EXPECT_FALSE(m.includes(0, 1));
}

TEST(StayFlip, Examples) {
  auto sf = per_ta_stay_flip(FeedbackType::TypeI, 1, 1, Action::Include, 10);
  EXPECT_EQ(sf.stay, 1.0);
  EXPECT_EQ(sf.flip, 0.0);
  sf = per_ta_stay_flip(FeedbackType::TypeI, 1, 1, Action::Exclude, 10);
  EXPECT_DOUBLE_EQ(sf.stay, 0.1);
  EXPECT_DOUBLE_EQ(sf.flip, 0.9);
  sf = per_ta_stay_flip(FeedbackType::TypeII, 1, 0, Action::Exclude, 10);
  EXPECT_EQ(sf.stay, 0.0);
  EXPECT_EQ(sf.flip, 1.0);
  EXPECT_THROW(per_ta_stay_flip(FeedbackType::TypeI, 1, 0, Action::Include, 10), NaCellError);
}

TEST(ClauseTransition, Examples) {
  const auto x = bits({0, 1});
  const auto a = bits({0, 1, 1, 0});
  for (double p : {0.0, 0.3, 1.0}) {
    EXPECT_DOUBLE_EQ(clause_transition_prob(a, a, x, FeedbackType::TypeI, p, 10), 1.0);
    EXPECT_EQ(clause_transition_prob(a, bits({0, 1, 1, 1}), x, FeedbackType::TypeI, p, 10), 0.0);
  }
  // Independent product of table cells: TA1 Exclude/lit 0 stays, TA2 Exclude/lit 1 stays,
  // TA3 Exclude/lit 1 flips, TA4 Exclude/lit 0 stays; clause output 1.
  oracle::Triple t1{}, t2{}, t3{}, t4{};
  oracle::table(1, false, 1, 0, 10, t1);
  oracle::table(1, false, 1, 1, 10, t2);
  oracle::table(1, false, 1, 1, 10, t3);
  oracle::table(1, false, 1, 0, 10, t4);
  const double expected_feed =
      (t1.reward + t1.inaction) * (t2.reward + t2.inaction) * t3.penalty * (t4.reward + t4.inaction);
  for (double p : {0.25, 0.5, 1.0}) {
    EXPECT_NEAR(clause_transition_prob(bits({0, 0, 0, 0}), bits({0, 0, 1, 0}), x, FeedbackType::TypeI, p, 10),
                p * expected_feed, 1e-15);
  }
  EXPECT_THROW(clause_transition_prob(a, bits({0, 1}), x, FeedbackType::TypeI, 0.5, 10), InputShapeError);
}

TEST(Chain, TwoClauseMatchesEnumerationOracle) {
  const auto& P = two_clause();
  const auto ref = oracle::enumerate_chain(2, oracle::xor_rows(), 10, 1);
  ASSERT_EQ(P.dim(), 256u);
  double worst = 0;
  for (std::size_t i = 0; i < 256; ++i)
    for (std::size_t j = 0; j < 256; ++j) worst = std::max(worst, std::abs(P(i, j) - ref[i * 256 + j]));
  EXPECT_LT(worst, 1e-14);
}

TEST(Chain, OtherHyperparametersMatchOracle) {
  const auto P = build_two_clause_matrix(3.5, 2, {0.1, 0.2, 0.3, 0.4});
  std::vector<oracle::Row> rows = oracle::xor_rows();
  rows[0].w = 0.1;
  rows[1].w = 0.2;
  rows[2].w = 0.3;
  rows[3].w = 0.4;
  const auto ref = oracle::enumerate_chain(2, rows, 3.5, 2);
  for (std::size_t i = 0; i < 256; ++i)
    for (std::size_t j = 0; j < 256; ++j) ASSERT_NEAR(P(i, j), ref[i * 256 + j], 1e-14);
}

TEST(Chain, SingleClauseMatchesOracle) {
  for (const auto& data : {subpattern_a(), subpattern_b(), xor_full()}) {
    const auto P = build_single_clause_matrix(data, 0.5, 0.5, 10);
    std::vector<oracle::Row> rows;
    for (const auto& r : data.rows) rows.push_back({{r.x[0], r.x[1]}, r.y, 1.0 / data.rows.size()});
    const auto ref = oracle::enumerate_chain(1, rows, 10, 1, true, 0.5, 0.5);
    for (std::size_t i = 0; i < 16; ++i)
      for (std::size_t j = 0; j < 16; ++j) ASSERT_NEAR(P(i, j), ref[i * 16 + j], 1e-15) << data.name;
  }
}

TEST(ChainProperty, RowStochastic) {
  EXPECT_TRUE(two_clause().is_row_stochastic(1e-12));
  for (double s : {1.0, 2.0, 10.0, 40.0}) {
    for (int T : {1, 2, 3}) EXPECT_TRUE(build_two_clause_matrix(s, T).is_row_stochastic(1e-12)) << s << ' ' << T;
  }
}

TEST(ChainProperty, ClauseSwapSymmetry) {
  const auto& P = two_clause();
  for (std::size_t i = 0; i < 256; ++i)
    for (std::size_t j = 0; j < 256; ++j) ASSERT_EQ(P(i, j), P(swap_clauses(i), swap_clauses(j)));
}

TEST(ChainProperty, InputSwapSymmetry) {
  const auto& P = two_clause();
  for (std::size_t i = 0; i < 256; ++i)
    for (std::size_t j = 0; j < 256; ++j) ASSERT_EQ(P(i, j), P(swap_inputs(i, 2), swap_inputs(j, 2)));
}

TEST(Limit, IdentityIsItsOwnLimit) {
  const auto I = TransitionMatrix::identity(8);
  const auto L = limiting_matrix(I);
  EXPECT_EQ(max_abs_difference(L.limit, I), 0.0);
  EXPECT_EQ(L.last_change, 0.0);
  const auto cls = classify_states(I, L.limit);
  EXPECT_EQ(cls.absorbing.size(), 8u);
  EXPECT_TRUE(cls.verdict());
}

TEST(Limit, PeriodicChainDoesNotConverge) {
  // 3-cycle: P^(2^k) alternates between the two rotations.
  TransitionMatrix P(3);
  P(0, 1) = 1;
  P(1, 2) = 1;
  P(2, 0) = 1;
  try {
    limiting_matrix(P, 1e-12, 10);
    FAIL() << "expected NonConvergenceError";
  } catch (const NonConvergenceError& e) {
    EXPECT_EQ(e.iterations(), 10);
    EXPECT_EQ(e.last_change(), 1.0);
  }
}

TEST(Limit, TwoClauseChainAbsorbsInAnchors) {
  const auto& L = two_clause_limit();
  EXPECT_LT(L.residual, 1e-9);
  const auto cls = classify_states(two_clause(), L.limit);
  EXPECT_EQ(cls.absorbing, (std::vector<int>{106, 151}));
  EXPECT_TRUE(cls.b1);
  EXPECT_TRUE(cls.b2);
  EXPECT_TRUE(cls.b3);
}

// The limit columns 106/151 must equal absorption probabilities from the
// fundamental matrix, solved independently from the enumerated chain.
TEST(Limit, MatchesAbsorptionProbabilities) {
  const auto ref = oracle::enumerate_chain(2, oracle::xor_rows(), 10, 1);
  const auto B = oracle::absorption_probabilities(ref, 256, {105, 150});
  const auto& A = two_clause_limit().limit;
  double worst = 0;
  for (std::size_t j = 0; j < 256; ++j) {
    worst = std::max(worst, std::abs(A(j, 105) - B[j][0]));
    worst = std::max(worst, std::abs(A(j, 150) - B[j][1]));
  }
  EXPECT_LT(worst, 1e-9);
  // By symmetry the all-Exclude start splits evenly.
  EXPECT_NEAR(B[0][0], 0.5, 1e-9);
}

TEST(Limit, SubpatternChains) {
  struct Case {
    Dataset data;
    Bits target;
  };
  for (const auto& c : {Case{subpattern_a(), bits({0, 1, 1, 0})}, Case{subpattern_b(), bits({1, 0, 0, 1})}}) {
    const auto P = build_single_clause_matrix(c.data);
    const auto L = limiting_matrix(P);
    const int idx = ref_index(c.target);
    for (std::size_t j = 0; j < 16; ++j) {
      for (std::size_t i = 0; i < 16; ++i) {
        EXPECT_NEAR(L.limit(j, i), static_cast<int>(i) + 1 == idx ? 1.0 : 0.0, 1e-9) << c.data.name;
      }
    }
    const auto cls = classify_states(P, L.limit);
    EXPECT_EQ(cls.absorbing, std::vector<int>{idx});
    EXPECT_TRUE(cls.verdict());
  }
}

TEST(Limit, FullXorSingleClauseHasNoAbsorbingState) {
  const auto P = build_single_clause_matrix(xor_full());
  const auto report = verify_chain(P);
  EXPECT_TRUE(report.states.absorbing.empty());
  EXPECT_FALSE(report.states.verdict());
}

TEST(Chain, RejectsBadShapes) {
  EXPECT_THROW(build_chain(4, xor_full(), uniform_weights(4), 10, 1), std::invalid_argument);
  EXPECT_THROW(build_chain(2, xor_full(), uniform_weights(3), 10, 1), std::invalid_argument);
}
