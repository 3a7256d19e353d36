#include <gtest/gtest.h>

#include <sstream>

#include "tmxor/io.hpp"

using namespace tmxor;

TEST(MachineJson, RoundTrip) {
  MachineConfig c;
  c.m = 3;
  c.N = 4;
  c.s = 3.5;
  Machine m(c);
  m.set_state(1, 2, 1);
  m.set_state(2, 3, 8);
  const auto j = machine_to_json(m);
  for (const char* key : {"m", "o", "T", "s", "N", "Th", "ta_states"}) EXPECT_TRUE(j.contains(key)) << key;
  EXPECT_EQ(j["ta_states"].size(), 12u);
  const auto back = machine_from_json(json::parse(j.dump()));
  EXPECT_EQ(back, m);
}

TEST(MachineJson, RejectsBadStates) {
  auto j = machine_to_json(Machine{MachineConfig{}});
  j["ta_states"][0] = 7;
  EXPECT_THROW(machine_from_json(j), std::out_of_range);
}

TEST(ChainJson, Fields) {
  const auto report = dtmc::verify_chain(dtmc::build_single_clause_matrix(subpattern_a()));
  const auto j = dtmc::to_json(report);
  EXPECT_EQ(j["absorbing"], json::array({7}));
  EXPECT_TRUE(j["bullets"]["b1"].get<bool>());
  EXPECT_TRUE(j["bullets"]["b2"].get<bool>());
  EXPECT_TRUE(j["bullets"]["b3"].get<bool>());
  EXPECT_TRUE(j.contains("residual"));
  EXPECT_TRUE(j.contains("iterations"));
}

TEST(ChainCsv, HeaderAndRows) {
  const auto P = dtmc::TransitionMatrix::identity(3);
  std::ostringstream os;
  dtmc::write_csv(os, P);
  EXPECT_EQ(os.str(), "from,1,2,3\n1,1,0,0\n2,0,1,0\n3,0,0,1\n");
}

TEST(ChainCsv, ProbabilitiesRoundTrip) {
  const double v = 0.1 + 0.2;
  EXPECT_EQ(std::stod(dtmc::format_probability(v)), v);
}

TEST(ReportJson, FieldsAndTrajectoryCsv) {
  lab::ExperimentSpec spec;
  spec.config.m = 2;
  spec.runs = 2;
  spec.steps = 100;
  spec.snapshot_stride = 50;
  const auto report = lab::run_experiment(spec, 9);
  const auto j = lab::to_json(report);
  EXPECT_EQ(j["master_seed"], 9);
  EXPECT_EQ(j["run_records"].size(), 2u);
  EXPECT_TRUE(j["run_records"][0]["final"].contains("n_A"));
  EXPECT_EQ(j["config"]["feedback_mode"]["kind"], "t-driven");

  std::ostringstream os;
  lab::write_trajectories_csv(os, report);
  std::istringstream in(os.str());
  std::string line;
  std::getline(in, line);
  EXPECT_EQ(line, "step,run,n_A,n_B,n_empty,n_other");
  int rows = 0;
  while (std::getline(in, line)) ++rows;
  EXPECT_EQ(rows, 6);  // steps 0, 50, 100 for each run
}
