#pragma once

// JSON and CSV encodings of machines, matrices and reports.

#include <cstdio>
#include <ostream>
#include <sstream>
#include <string>

#include <json.hpp>

#include "tmxor/dtmc.hpp"
#include "tmxor/lab.hpp"
#include "tmxor/machine.hpp"

namespace tmxor {

using json = nlohmann::json;

inline json config_to_json(const MachineConfig& c) {
  json j = {{"m", c.m}, {"o", c.o}, {"T", c.T}, {"s", c.s}, {"N", c.N}, {"Th", c.Th}, {"input_dist", c.input_dist}};
  if (c.fixed_gates) {
    j["feedback_mode"] = {{"kind", "fixed"}, {"u1", c.fixed_gates->u1}, {"u2", c.fixed_gates->u2}};
  } else {
    j["feedback_mode"] = {{"kind", "t-driven"}};
  }
  return j;
}

// Snapshot: hyperparameters plus the flat, clause-major TA state array.
inline json machine_to_json(const Machine& machine) {
  const auto& c = machine.config();
  return {{"m", c.m},   {"o", c.o},   {"T", c.T},
          {"s", c.s},   {"N", c.N},   {"Th", c.Th},
          {"ta_states", std::vector<int>(machine.states().begin(), machine.states().end())}};
}

inline Machine machine_from_json(const json& j) {
  MachineConfig c;
  c.m = j.at("m").get<int>();
  c.o = j.at("o").get<int>();
  c.T = j.at("T").get<int>();
  c.s = j.at("s").get<double>();
  c.N = j.at("N").get<int>();
  c.Th = j.at("Th").get<int>();
  Machine machine(c);
  machine.set_states(j.at("ta_states").get<std::vector<int>>());
  return machine;
}

namespace dtmc {

inline json to_json(const ChainReport& r) {
  return {{"absorbing", r.states.absorbing},
          {"bullets", {{"b1", r.states.b1}, {"b2", r.states.b2}, {"b3", r.states.b3}}},
          {"residual", r.residual},
          {"iterations", r.iterations},
          {"violations",
           {{"b1", r.states.b1_violations}, {"b2", r.states.b2_violations}, {"b3", r.states.b3_violations}}}};
}

inline json to_json(const TransitionMatrix& P) { return {{"dim", P.dim()}, {"entries", P.entries()}}; }

inline std::string format_probability(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

// Header row "from,1,2,...,dim"; one row per source state.
inline void write_csv(std::ostream& out, const TransitionMatrix& P) {
  out << "from";
  for (std::size_t i = 1; i <= P.dim(); ++i) out << ',' << i;
  out << '\n';
  for (std::size_t r = 0; r < P.dim(); ++r) {
    out << r + 1;
    for (double v : P.row(r)) out << ',' << format_probability(v);
    out << '\n';
  }
}

}  // namespace dtmc

namespace lab {

inline json to_json(const CoverageCounts& c) {
  return {{"n_A", c.n_a}, {"n_B", c.n_b}, {"n_empty", c.n_empty}, {"n_other", c.n_other}};
}

inline json optional_step(const std::optional<std::size_t>& v) { return v ? json(*v) : json(nullptr); }

inline json to_json(const FirstHitDistribution& d) {
  return {{"hits", d.hits}, {"censored", d.censored}, {"runs", d.runs}, {"hit_fraction", d.hit_fraction()}};
}

inline json to_json(const CoverageReport& r) {
  const auto& spec = r.spec;
  json runs = json::array();
  for (const auto& rec : r.runs) {
    runs.push_back({{"run", rec.run},
                    {"stream", rec.stream},
                    {"steps_run", rec.steps_run},
                    {"final", to_json(rec.final_counts)},
                    {"classifies_xor", rec.classifies_xor},
                    {"first_hit", optional_step(rec.first_hit)},
                    {"sustained_from", optional_step(rec.sustained_from)},
                    {"saw_A", rec.saw_a},
                    {"saw_B", rec.saw_b}});
  }
  const int T = spec.config.T;
  const int m = spec.config.m;
  return {{"config", config_to_json(spec.config)},
          {"dataset", spec.dataset.name},
          {"runs", spec.runs},
          {"steps", spec.steps},
          {"snapshot_stride", spec.snapshot_stride},
          {"stop", to_string(spec.stop)},
          {"dwell", spec.dwell},
          {"master_seed", r.master_seed},
          {"summary",
           {{"fraction_sustained", r.fraction_sustained()},
            {"fraction_final_both_at_least_T", r.fraction_final_both_at_least(T)},
            {"fraction_final_both_at_least_m_minus_T", r.fraction_final_both_at_least(m - T)},
            {"fraction_classifies_xor", r.fraction_classifies_xor()},
            {"first_hit", to_json(r.first_hits())}}},
          {"run_records", runs}};
}

// step,run,n_A,n_B,n_empty,n_other
inline void write_trajectories_csv(std::ostream& out, const CoverageReport& r) {
  out << "step,run,n_A,n_B,n_empty,n_other\n";
  for (const auto& rec : r.runs) {
    for (const auto& p : rec.trajectory) {
      out << p.step << ',' << rec.run << ',' << p.counts.n_a << ',' << p.counts.n_b << ',' << p.counts.n_empty << ','
          << p.counts.n_other << '\n';
    }
  }
}

}  // namespace lab

}  // namespace tmxor
