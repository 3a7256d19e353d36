#include <gtest/gtest.h>

#include "oracles.hpp"
#include "tmxor/feedback.hpp"

using namespace tmxor;

TEST(Gates, U1Examples) {
  for (int T = 1; T <= 6; ++T) {
    EXPECT_EQ(u1(0, T), 0.5);
    EXPECT_EQ(u1(T, T), 0.0);
    EXPECT_EQ(u1(-T, T), 1.0);
    EXPECT_EQ(u1(T + 3, T), 0.0);
    EXPECT_EQ(u1(-T - 3, T), 1.0);
  }
}

TEST(Gates, U2Examples) {
  for (int T = 1; T <= 6; ++T) {
    EXPECT_EQ(u2(0, T), 0.5);
    EXPECT_EQ(u2(T, T), 1.0);
    EXPECT_EQ(u2(-T, T), 0.0);
  }
}

TEST(Gates, RejectBadT) {
  EXPECT_THROW(u1(0, 0), std::invalid_argument);
  EXPECT_THROW(u2(0, -1), std::invalid_argument);
}

TEST(GateProperty, ComplementaryMonotoneAndBounded) {
  for (int T = 1; T <= 7; ++T) {
    for (int f = -10; f <= 10; ++f) {
      const double a = u1(f, T);
      const double b = u2(f, T);
      EXPECT_EQ(a + b, 1.0);
      EXPECT_GE(a, 0.0);
      EXPECT_LE(a, 1.0);
      EXPECT_LE(u1(f + 1, T), a);
      EXPECT_GE(u2(f + 1, T), b);
      // Reference clamp.
      const int c = f < -T ? -T : (f > T ? T : f);
      EXPECT_DOUBLE_EQ(a, (T - c) / (2.0 * T));
    }
  }
}

TEST(FeedbackProbs, TableExamples) {
  auto p = feedback_probs(FeedbackType::TypeI, 1, 1, Action::Include, 10);
  EXPECT_DOUBLE_EQ(p.reward, 0.9);
  EXPECT_DOUBLE_EQ(p.inaction, 0.1);
  EXPECT_EQ(p.penalty, 0.0);

  EXPECT_EQ(feedback_probs(FeedbackType::TypeII, 1, 0, Action::Exclude, 10), (FeedbackProbs{0, 0, 1}));

  for (int c = 0; c < 2; ++c) {
    for (int l = 0; l < 2; ++l) {
      if (c == 1 && l == 0) continue;
      EXPECT_EQ(feedback_probs(FeedbackType::TypeII, c, l, Action::Include, 10), (FeedbackProbs{0, 1, 0}));
    }
  }

  p = feedback_probs(FeedbackType::TypeI, 0, 1, Action::Exclude, 10);
  EXPECT_DOUBLE_EQ(p.reward, 0.1);
  EXPECT_DOUBLE_EQ(p.inaction, 0.9);
  EXPECT_EQ(p.penalty, 0.0);
}

TEST(FeedbackProbs, NaCellThrows) {
  EXPECT_THROW(feedback_probs(FeedbackType::TypeI, 1, 0, Action::Include, 10), NaCellError);
  EXPECT_THROW(feedback_probs(FeedbackType::TypeII, 1, 0, Action::Include, 10), NaCellError);
}

TEST(FeedbackProbs, RejectsBadS) {
  EXPECT_THROW(feedback_probs(FeedbackType::TypeI, 1, 1, Action::Include, 0.5), std::invalid_argument);
  EXPECT_THROW(feedback_probs(FeedbackType::TypeI, 1, 1, Action::Include, std::nan("")), std::invalid_argument);
}

// Every reachable cell agrees with the test-side transcription and sums to 1.
TEST(FeedbackProperty, MatchesReferenceAndSumsToOne) {
  for (double s : {1.0, 2.0, 3.9, 10.0, 25.0}) {
    for (int type = 1; type <= 2; ++type) {
      for (int inc = 0; inc < 2; ++inc) {
        for (int c = 0; c < 2; ++c) {
          for (int l = 0; l < 2; ++l) {
            oracle::Triple ref{};
            const bool reachable = oracle::table(type, inc == 1, c, l, s, ref);
            const auto ft = type == 1 ? FeedbackType::TypeI : FeedbackType::TypeII;
            const auto act = inc == 1 ? Action::Include : Action::Exclude;
            if (!reachable) {
              EXPECT_THROW(feedback_probs(ft, c, l, act, s), NaCellError);
              continue;
            }
            const auto p = feedback_probs(ft, c, l, act, s);
            EXPECT_DOUBLE_EQ(p.reward, ref.reward);
            EXPECT_DOUBLE_EQ(p.inaction, ref.inaction);
            EXPECT_DOUBLE_EQ(p.penalty, ref.penalty);
            EXPECT_NEAR(p.sum(), 1.0, 1e-15);
          }
        }
      }
    }
  }
}

TEST(SampleFeedback, DegenerateTriples) {
  CounterRng rng(3);
  for (int i = 0; i < 100; ++i) {
    EXPECT_EQ(sample_feedback({1, 0, 0}, rng), Feedback::Reward);
    EXPECT_EQ(sample_feedback({0, 1, 0}, rng), Feedback::Inaction);
    EXPECT_EQ(sample_feedback({0, 0, 1}, rng), Feedback::Penalty);
  }
  EXPECT_EQ(rng.counter(), 0u);
}

TEST(SampleFeedback, FrequenciesMatchProbabilities) {
  CounterRng rng(2024);
  const int n = 100000;
  int reward = 0, penalty = 0;
  for (int i = 0; i < n; ++i) {
    const auto fb = sample_feedback({0.9, 0.1, 0.0}, rng);
    reward += fb == Feedback::Reward;
    penalty += fb == Feedback::Penalty;
  }
  EXPECT_NEAR(static_cast<double>(reward) / n, 0.9, 0.01);
  EXPECT_EQ(penalty, 0);

  int pen = 0;
  for (int i = 0; i < n; ++i) pen += sample_feedback({0.0, 0.1, 0.9}, rng) == Feedback::Penalty;
  EXPECT_NEAR(static_cast<double>(pen) / n, 0.9, 0.01);
}
