#include <gtest/gtest.h>

#include "tmxor/presets.hpp"

using namespace tmxor;
using namespace tmxor::presets;

namespace {

lab::ExperimentSpec spec_for(int m, int T) {
  lab::ExperimentSpec s;
  s.config.m = m;
  s.config.T = T;
  return s;
}

}  // namespace

TEST(Prepare, RejectsUncoveredConfigs) {
  auto s = spec_for(2, 2);
  EXPECT_THROW(prepare("lemma4", s, false), PresetUsageError);
  s = spec_for(4, 3);
  EXPECT_THROW(prepare("theorem6", s, false), PresetUsageError);
  s = spec_for(4, 2);
  EXPECT_THROW(prepare("remark2", s, false), PresetUsageError);
  s = spec_for(3, 1);
  EXPECT_THROW(prepare("theorem1", s, false), PresetUsageError);
  s = spec_for(2, 1);
  EXPECT_THROW(prepare("nonsense", s, false), PresetUsageError);
}

TEST(Prepare, DatasetConflict) {
  auto s = spec_for(1, 1);
  s.dataset = subpattern_b();
  EXPECT_THROW(prepare("lemma1", s, true), PresetUsageError);
  s.dataset = subpattern_a();
  EXPECT_NO_THROW(prepare("lemma1", s, true));
}

TEST(Prepare, SetsDatasetGatesAndStop) {
  auto s = spec_for(1, 1);
  prepare("lemma2", s, false);
  EXPECT_EQ(s.dataset.name, "subpattern-b");
  ASSERT_TRUE(s.config.fixed_gates.has_value());
  EXPECT_EQ(s.config.fixed_gates->u1, 0.5);

  s = spec_for(4, 2);
  prepare("theorem6", s, false);
  EXPECT_EQ(s.stop, lab::StopRule::BothSubpatternsAtT);
}

TEST(Evaluate, SubpatternAOnShortRun) {
  auto s = spec_for(1, 1);
  s.runs = 40;
  s.steps = 20000;
  prepare("lemma1", s, false);
  const auto out = evaluate("lemma1", lab::run_experiment(s, 3));
  EXPECT_EQ(out.threshold, 0.99);
  EXPECT_TRUE(out.passed) << out.value;
}

TEST(Evaluate, ZeroStepsFails) {
  auto s = spec_for(2, 1);
  s.runs = 5;
  s.steps = 0;
  prepare("theorem1", s, false);
  const auto out = evaluate("theorem1", lab::run_experiment(s, 1));
  EXPECT_EQ(out.value, 0.0);
  EXPECT_FALSE(out.passed);
}

TEST(Evaluate, FullXorVisitsBothForms) {
  auto s = spec_for(1, 1);
  s.runs = 50;
  s.steps = 100000;
  prepare("lemma3", s, false);
  const auto out = evaluate("lemma3", lab::run_experiment(s, 5));
  EXPECT_GE(out.value, 0.95);
}
