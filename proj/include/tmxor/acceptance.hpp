#pragma once

// The acceptance criteria as runnable checks. Shared by the acceptance test
// binary and `tmxor verify-all`.

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <functional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "tmxor/dtmc.hpp"
#include "tmxor/feedback.hpp"
#include "tmxor/io.hpp"
#include "tmxor/lab.hpp"
#include "tmxor/machine.hpp"

namespace tmxor::acceptance {

struct CriterionResult {
  int id = 0;
  std::string name;
  std::string group;
  bool passed = false;
  std::string detail;
  double seconds = 0.0;
};

// Thresholds pinned for the acceptance run.
struct Thresholds {
  double chain_residual = 1e-9;
  double theorem1_seconds = 5.0;
  double lemmas_seconds = 1.0;
  double oracle_tv = 0.01;
  std::size_t oracle_samples = 100000;
  std::size_t oracle_states = 5;
  double theorem6_fraction = 0.95;
  double theorem6_seconds = 120.0;
  double remark2_fraction = 0.95;
  std::size_t mc_runs = 200;
  std::size_t mc_steps = 100000;
  // m=5, T=3 uses deep automata; with N = 1 the T > m/2 machine keeps
  // drifting and rarely holds both sub-patterns at the stopping time.
  int remark2_half_depth = 100;
  std::uint64_t seed = 20240601;
};

namespace detail {

inline std::string join(const std::vector<int>& v) {
  std::ostringstream os;
  os << '[';
  for (std::size_t i = 0; i < v.size(); ++i) os << (i ? "," : "") << v[i];
  os << ']';
  return os.str();
}

template <typename F>
CriterionResult timed(int id, std::string name, std::string group, F&& body) {
  CriterionResult r{id, std::move(name), std::move(group), false, {}, 0.0};
  const auto t0 = std::chrono::steady_clock::now();
  try {
    body(r);
  } catch (const std::exception& e) {
    r.passed = false;
    r.detail = std::string("exception: ") + e.what();
  }
  r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return r;
}

inline CriterionResult within_budget(CriterionResult r, double seconds) {
  if (r.seconds >= seconds) {
    r.passed = false;
    r.detail += " [exceeded " + std::to_string(seconds) + "s budget]";
  }
  return r;
}

// Both feedback tables written out cell by cell, independent of feedback_probs.
// Columns: (clause, literal) = (1,1), (1,0), (0,1), (0,0). Rows: reward,
// inaction, penalty.
struct ReferenceCell {
  FeedbackType type;
  Action action;
  int clause;
  int literal;
  FeedbackProbs probs;
  bool na;
};

inline std::vector<ReferenceCell> reference_tables(double s) {
  const double hi = (s - 1) / s;
  const double lo = 1 / s;
  std::vector<ReferenceCell> cells;
  auto add = [&](FeedbackType t, Action a, int c, int l, double r, double i, double p, bool na = false) {
    cells.push_back({t, a, c, l, {r, i, p}, na});
  };
  using FT = FeedbackType;
  using A = Action;
  // Type I, Include
  add(FT::TypeI, A::Include, 1, 1, hi, lo, 0);
  add(FT::TypeI, A::Include, 1, 0, 0, 0, 0, true);
  add(FT::TypeI, A::Include, 0, 1, 0, hi, lo);
  add(FT::TypeI, A::Include, 0, 0, 0, hi, lo);
  // Type I, Exclude
  add(FT::TypeI, A::Exclude, 1, 1, 0, lo, hi);
  add(FT::TypeI, A::Exclude, 1, 0, lo, hi, 0);
  add(FT::TypeI, A::Exclude, 0, 1, lo, hi, 0);
  add(FT::TypeI, A::Exclude, 0, 0, lo, hi, 0);
  // Type II, Include
  add(FT::TypeII, A::Include, 1, 1, 0, 1.0, 0);
  add(FT::TypeII, A::Include, 1, 0, 0, 0, 0, true);
  add(FT::TypeII, A::Include, 0, 1, 0, 1.0, 0);
  add(FT::TypeII, A::Include, 0, 0, 0, 1.0, 0);
  // Type II, Exclude
  add(FT::TypeII, A::Exclude, 1, 1, 0, 1.0, 0);
  add(FT::TypeII, A::Exclude, 1, 0, 0, 0, 1.0);
  add(FT::TypeII, A::Exclude, 0, 1, 0, 1.0, 0);
  add(FT::TypeII, A::Exclude, 0, 0, 0, 1.0, 0);
  return cells;
}

// Clauses that can never fire in Test mode on a 2-bit input.
inline bool silent_in_test(std::span<const int> clause, int n) {
  for (const auto& row : xor_full().rows) {
    if (clause_output(clause, n, row.x, EvalMode::Test) != 0) return false;
  }
  return true;
}

}  // namespace detail

inline CriterionResult check_theorem1(const Thresholds& th) {
  auto result = detail::timed(1, "two-clause chain: 256 states absorb only in {106,151}", "dtmc", [&](CriterionResult& r) {
    const auto P = dtmc::build_two_clause_matrix(10.0, 1);
    const auto rep = dtmc::verify_chain(P);
    const bool stochastic = P.is_row_stochastic(1e-12);
    const bool exact_set = rep.states.absorbing == std::vector<int>{106, 151};
    r.passed = stochastic && exact_set && rep.states.verdict() && rep.residual < th.chain_residual;
    std::ostringstream os;
    os << "absorbing=" << detail::join(rep.states.absorbing) << " b1=" << rep.states.b1 << " b2=" << rep.states.b2
       << " b3=" << rep.states.b3 << " residual=" << rep.residual << " squarings=" << rep.iterations;
    r.detail = os.str();
  });
  return detail::within_budget(std::move(result), th.theorem1_seconds);
}

inline CriterionResult check_single_clause_lemmas(const Thresholds& th) {
  auto result = detail::timed(2, "single-clause chains: sub-patterns absorb, full XOR does not", "dtmc", [&](CriterionResult& r) {
    const auto a = dtmc::verify_chain(dtmc::build_single_clause_matrix(subpattern_a(), 0.5, 0.5, 10.0));
    const auto b = dtmc::verify_chain(dtmc::build_single_clause_matrix(subpattern_b(), 0.5, 0.5, 10.0));
    const auto x = dtmc::verify_chain(dtmc::build_single_clause_matrix(xor_full(), 0.5, 0.5, 10.0));
    const Bits eiie{0, 1, 1, 0};
    const Bits ieei{1, 0, 0, 1};
    const int ia = dtmc::encode_state(eiie);
    const int ib = dtmc::encode_state(ieei);
    r.passed = a.states.absorbing == std::vector<int>{ia} && a.states.verdict() &&
               b.states.absorbing == std::vector<int>{ib} && b.states.verdict() && x.states.absorbing.empty();
    std::ostringstream os;
    os << "subpattern-a=" << detail::join(a.states.absorbing) << " (want " << ia << ")"
       << " subpattern-b=" << detail::join(b.states.absorbing) << " (want " << ib << ")"
       << " xor-full=" << detail::join(x.states.absorbing);
    r.detail = os.str();
  });
  return detail::within_budget(std::move(result), th.lemmas_seconds);
}

// Total-variation distance between one analytic row and the empirical
// next-state distribution of train_step started from the same state.
inline double one_step_tv(const dtmc::TransitionMatrix& P, int state, std::size_t samples, CounterRng rng) {
  MachineConfig cfg;
  cfg.m = 2;
  cfg.T = 1;
  cfg.s = 10.0;
  cfg.N = 1;
  Machine start(cfg);
  const Bits bits = dtmc::decode_state(state, 8);
  dtmc::set_system_bits(start, bits);
  const Dataset data = xor_full();
  const RowSampler sampler(uniform_weights(data.rows.size()));

  std::vector<std::size_t> counts(P.dim(), 0);
  for (std::size_t i = 0; i < samples; ++i) {
    Machine m = start;
    train_step(m, data.rows[sampler(rng)], rng);
    ++counts[static_cast<std::size_t>(dtmc::encode_state(dtmc::system_bits(m)) - 1)];
  }
  double tv = 0.0;
  const auto row = P.row(static_cast<std::size_t>(state - 1));
  for (std::size_t to = 0; to < P.dim(); ++to) {
    tv += std::abs(static_cast<double>(counts[to]) / static_cast<double>(samples) - row[to]);
  }
  return 0.5 * tv;
}

inline CriterionResult check_oracle_equivalence(const Thresholds& th) {
  return detail::timed(3, "oracle: analytic rows match Monte Carlo one-step frequencies", "oracle",
                       [&](CriterionResult& r) {
    const auto P = dtmc::build_two_clause_matrix(10.0, 1);
    CounterRng pick(th.seed);
    std::set<int> chosen;
    while (chosen.size() < th.oracle_states) chosen.insert(static_cast<int>(pick.below(256)) + 1);
    std::ostringstream os;
    double worst = 0.0;
    std::size_t i = 0;
    for (int state : chosen) {
      const double tv = one_step_tv(P, state, th.oracle_samples, CounterRng(th.seed).split(++i));
      worst = std::max(worst, tv);
      os << state << ":" << tv << " ";
    }
    r.passed = worst < th.oracle_tv;
    os << "max_tv=" << worst;
    r.detail = os.str();
  });
}

inline CriterionResult check_feedback_tables(const Thresholds&) {
  return detail::timed(4, "feedback tables reproduced for s in {1,2,10,100}", "feedback",
                       [&](CriterionResult& r) {
    int mismatches = 0;
    int bad_sums = 0;
    int missing_errors = 0;
    int cells = 0;
    for (double s : {1.0, 2.0, 10.0, 100.0}) {
      for (const auto& ref : detail::reference_tables(s)) {
        ++cells;
        if (ref.na) {
          try {
            (void)feedback_probs(ref.type, ref.clause, ref.literal, ref.action, s);
            ++missing_errors;
          } catch (const NaCellError&) {
          }
          continue;
        }
        const auto got = feedback_probs(ref.type, ref.clause, ref.literal, ref.action, s);
        if (!(got == ref.probs)) ++mismatches;
        if (got.sum() != 1.0) ++bad_sums;
      }
    }
    r.passed = mismatches == 0 && bad_sums == 0 && missing_errors == 0;
    std::ostringstream os;
    os << cells << " cells, mismatches=" << mismatches << " non-unit sums=" << bad_sums
       << " NA cells without error=" << missing_errors;
    r.detail = os.str();
  });
}

inline CriterionResult check_gate_algebra(const Thresholds&) {
  return detail::timed(5, "u1/u2 algebra", "feedback", [&](CriterionResult& r) {
    int failures = 0;
    for (int T : {1, 2, 5}) {
      for (int f = -2 * T; f <= 2 * T; ++f) {
        if (u1(f, T) + u2(f, T) != 1.0) ++failures;
      }
      if (u1(T, T) != 0.0 || u2(T, T) != 1.0 || u1(0, T) != 0.5) ++failures;
    }
    r.passed = failures == 0;
    r.detail = "failures=" + std::to_string(failures);
  });
}

inline CriterionResult check_theorem6(const Thresholds& th) {
  return detail::timed(6, "m=4 T=2 reaches sustained two-per-sub-pattern coverage", "mc",
                       [&](CriterionResult& r) {
    lab::ExperimentSpec spec;
    spec.config.m = 4;
    spec.config.T = 2;
    spec.config.s = 10.0;
    spec.config.N = 1;
    spec.runs = th.mc_runs;
    spec.steps = th.mc_steps;
    spec.stop = lab::StopRule::BothSubpatternsAtT;
    const auto t0 = std::chrono::steady_clock::now();
    const auto rep = lab::run_experiment(spec, th.seed);
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    const double frac = rep.fraction_sustained();
    r.passed = frac >= th.theorem6_fraction && secs < th.theorem6_seconds;
    const auto never = std::count_if(rep.runs.begin(), rep.runs.end(),
                                     [](const lab::RunRecord& run) { return !run.sustained_from; });
    std::ostringstream os;
    os << "sustained fraction=" << frac << " (need >= " << th.theorem6_fraction << "), censored=" << never;
    r.detail = os.str();
  });
}

inline CriterionResult check_remark2(const Thresholds& th) {
  return detail::timed(7, "m=5 T=3 leaves >= 2 clauses on each sub-pattern", "mc", [&](CriterionResult& r) {
    lab::ExperimentSpec spec;
    spec.config.m = 5;
    spec.config.T = 3;
    spec.config.s = 10.0;
    spec.config.N = th.remark2_half_depth;
    spec.config.Th = 1;
    spec.runs = th.mc_runs;
    spec.steps = th.mc_steps;
    const auto rep = lab::run_experiment(spec, th.seed);
    const int k = spec.config.m - spec.config.T;
    const double covered = rep.fraction_final_both_at_least(k);

    // Covered runs whose remaining clauses never fire in Test mode (empty or
    // self-contradictory) must classify XOR.
    std::size_t silent_leftover = 0;
    std::size_t silent_leftover_ok = 0;
    for (const auto& run : rep.runs) {
      if (run.final_counts.n_a < k || run.final_counts.n_b < k) continue;
      const std::span<const int> states(run.final_states);
      bool silent = true;
      for (int j = 0; j < spec.config.m; ++j) {
        const auto clause = states.subspan(static_cast<std::size_t>(j) * 4, 4);
        const auto form = lab::clause_form(clause, spec.config.N);
        if (form == lab::ClauseForm::NotX1AndX2 || form == lab::ClauseForm::X1AndNotX2) continue;
        silent = silent && detail::silent_in_test(clause, spec.config.N);
      }
      if (!silent) continue;
      ++silent_leftover;
      if (run.classifies_xor) ++silent_leftover_ok;
    }
    r.passed = covered >= th.remark2_fraction && silent_leftover_ok == silent_leftover;
    std::ostringstream os;
    os << "covered fraction=" << covered << " (need >= " << th.remark2_fraction << "), N=" << spec.config.N
       << ", runs with silent leftovers classifying XOR=" << silent_leftover_ok << "/" << silent_leftover
       << ", all runs classifying XOR=" << rep.fraction_classifies_xor();
    r.detail = os.str();
  });
}

inline CriterionResult check_determinism(const Thresholds& th) {
  return detail::timed(8, "determinism: identical seeds give byte-identical reports", "determinism",
                       [&](CriterionResult& r) {
    lab::ExperimentSpec spec;
    spec.config.m = 4;
    spec.config.T = 2;
    spec.runs = 24;
    spec.steps = 20000;
    spec.snapshot_stride = 1000;
    spec.threads = 1;
    const auto first = lab::run_experiment(spec, th.seed);
    spec.threads = 4;
    const auto second = lab::run_experiment(spec, th.seed);
    spec.threads = 1;
    const std::string a = lab::to_json(first).dump();
    std::ostringstream ca, cb;
    lab::write_trajectories_csv(ca, first);
    lab::write_trajectories_csv(cb, second);
    const bool reports_equal = a == lab::to_json(second).dump() && ca.str() == cb.str();
    const bool seed_matters = a != lab::to_json(lab::run_experiment(spec, th.seed + 1)).dump();

    const auto c1 = dtmc::to_json(dtmc::verify_chain(dtmc::build_two_clause_matrix())).dump();
    const auto c2 = dtmc::to_json(dtmc::verify_chain(dtmc::build_two_clause_matrix())).dump();
    r.passed = reports_equal && seed_matters && c1 == c2;
    r.detail = std::string("coverage reports identical=") + (reports_equal ? "yes" : "no") +
               ", different seed differs=" + (seed_matters ? "yes" : "no") +
               ", chain reports identical=" + (c1 == c2 ? "yes" : "no");
  });
}

inline CriterionResult check_symmetry(const Thresholds&) {
  return detail::timed(9, "symmetry: clause-swap and input-swap invariance", "dtmc", [&](CriterionResult& r) {
    const auto P = dtmc::build_two_clause_matrix(10.0, 1);
    std::size_t clause_breaks = 0;
    std::size_t input_breaks = 0;
    for (std::size_t a = 0; a < P.dim(); ++a) {
      for (std::size_t b = 0; b < P.dim(); ++b) {
        if (P(dtmc::swap_clauses(a), dtmc::swap_clauses(b)) != P(a, b)) ++clause_breaks;
        if (P(dtmc::swap_inputs(a, 2), dtmc::swap_inputs(b, 2)) != P(a, b)) ++input_breaks;
      }
    }
    r.passed = clause_breaks == 0 && input_breaks == 0;
    r.detail = "clause-swap mismatches=" + std::to_string(clause_breaks) +
               " input-swap mismatches=" + std::to_string(input_breaks);
  });
}

inline const std::vector<std::string>& groups() {
  static const std::vector<std::string> g{"feedback", "dtmc", "oracle", "mc", "determinism"};
  return g;
}

// Runs the criteria whose group is in `only` (all when empty), in criterion
// order.
inline std::vector<CriterionResult> run_all(const Thresholds& th = {}, const std::vector<std::string>& only = {}) {
  using Check = CriterionResult (*)(const Thresholds&);
  const std::vector<std::pair<std::string, Check>> checks{
      {"dtmc", check_theorem1},     {"dtmc", check_single_clause_lemmas}, {"oracle", check_oracle_equivalence},
      {"feedback", check_feedback_tables}, {"feedback", check_gate_algebra}, {"mc", check_theorem6},
      {"mc", check_remark2},        {"determinism", check_determinism},  {"dtmc", check_symmetry}};
  std::vector<CriterionResult> out;
  for (const auto& [group, check] : checks) {
    if (!only.empty() && std::find(only.begin(), only.end(), group) == only.end()) continue;
    out.push_back(check(th));
  }
  return out;
}

inline std::string format_line(const CriterionResult& r) {
  std::ostringstream os;
  os << (r.passed ? "PASS" : "FAIL") << "  [" << r.id << "] " << r.name << " (" << r.group << ", ";
  os.setf(std::ios::fixed);
  os.precision(2);
  os << r.seconds << "s): " << r.detail;
  return os.str();
}

}  // namespace tmxor::acceptance
