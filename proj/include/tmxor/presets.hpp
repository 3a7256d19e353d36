#pragma once

// Named Monte Carlo assertions, one per convergence claim.

#include <algorithm>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "tmxor/dtmc.hpp"
#include "tmxor/lab.hpp"

namespace tmxor::presets {

// A preset whose preconditions the configuration does not meet.
class PresetUsageError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

struct Outcome {
  std::string preset;
  std::string metric;
  double value = 0.0;
  double threshold = 0.0;
  bool passed = false;
};

inline const std::vector<std::string>& names() {
  static const std::vector<std::string> n{"theorem1", "lemma1", "lemma2", "lemma3", "lemma4", "theorem6", "remark2"};
  return n;
}

// Adjusts `spec` for the preset and rejects configurations the claim does
// not cover. `dataset_given` tells whether the user chose the dataset.
inline void prepare(const std::string& preset, lab::ExperimentSpec& spec, bool dataset_given) {
  auto& c = spec.config;
  auto need = [&](bool ok, const std::string& what) {
    if (!ok) throw PresetUsageError(preset + ": " + what);
  };
  auto use_dataset = [&](const std::string& name) {
    if (dataset_given) need(spec.dataset.name == name, "requires --dataset " + name);
    spec.dataset = dataset_by_name(name);
    c.input_dist.clear();
  };

  if (preset == "theorem1") {
    need(c.m == 2 && c.T == 1 && c.N == 1, "requires --m 2 --T 1 --N 1");
    need(!c.fixed_gates, "requires T-driven gates");
    use_dataset("xor-full");
  } else if (preset == "lemma1" || preset == "lemma2" || preset == "lemma3") {
    use_dataset(preset == "lemma1" ? "subpattern-a" : preset == "lemma2" ? "subpattern-b" : "xor-full");
    if (!c.fixed_gates) c.fixed_gates = GateConstants{};
  } else if (preset == "lemma4") {
    need(c.T < c.m, "requires T < m");
    need(!c.fixed_gates, "requires T-driven gates");
  } else if (preset == "theorem6") {
    need(2 * c.T <= c.m, "requires T <= m/2");
    need(!c.fixed_gates, "requires T-driven gates");
    use_dataset("xor-full");
    spec.stop = lab::StopRule::BothSubpatternsAtT;
  } else if (preset == "remark2") {
    need(2 * c.T > c.m && c.T <= c.m, "requires m/2 < T <= m");
    need(!c.fixed_gates, "requires T-driven gates");
    use_dataset("xor-full");
  } else {
    throw PresetUsageError("unknown assertion preset '" + preset + "'");
  }
}

inline Outcome evaluate(const std::string& preset, const lab::CoverageReport& report) {
  const auto& c = report.spec.config;
  Outcome o{preset, {}, 0.0, 0.0, false};
  if (preset == "theorem1") {
    o.metric = "fraction of runs ending in state 106 or 151";
    o.threshold = 0.95;
    o.value = report.fraction([](const lab::RunRecord& r) {
      Bits bits;
      for (int s : r.final_states) bits.push_back(s == 1 ? 1 : 0);
      const int idx = dtmc::encode_state(bits);
      return idx == 106 || idx == 151;
    });
  } else if (preset == "lemma1" || preset == "lemma2") {
    const auto target = preset == "lemma1" ? lab::ClauseForm::NotX1AndX2 : lab::ClauseForm::X1AndNotX2;
    o.metric = preset == "lemma1" ? "fraction of clauses ending as !x1 & x2" : "fraction of clauses ending as x1 & !x2";
    o.threshold = 0.99;
    std::size_t hits = 0;
    for (const auto& r : report.runs) {
      const std::span<const int> states(r.final_states);
      for (int j = 0; j < c.m; ++j) {
        if (lab::clause_form(states.subspan(static_cast<std::size_t>(j) * 4, 4), c.N) == target) ++hits;
      }
    }
    o.value = static_cast<double>(hits) / static_cast<double>(report.runs.size() * static_cast<std::size_t>(c.m));
  } else if (preset == "lemma3") {
    o.metric = "fraction of runs visiting both sub-pattern forms";
    o.threshold = 0.95;
    o.value = report.fraction([](const lab::RunRecord& r) { return r.saw_a && r.saw_b; });
  } else if (preset == "lemma4") {
    o.metric = "fraction of runs where a sub-pattern reached T clauses";
    o.threshold = 0.99;
    o.value = report.first_hits().hit_fraction();
  } else if (preset == "theorem6") {
    o.metric = "fraction of runs with sustained n_A >= T and n_B >= T";
    o.threshold = 0.95;
    o.value = report.fraction_sustained();
  } else if (preset == "remark2") {
    o.metric = "fraction of runs ending with n_A >= m-T and n_B >= m-T";
    o.threshold = 0.95;
    o.value = report.fraction_final_both_at_least(c.m - c.T);
  } else {
    throw PresetUsageError("unknown assertion preset '" + preset + "'");
  }
  o.passed = o.value >= o.threshold;
  return o;
}

}  // namespace tmxor::presets
