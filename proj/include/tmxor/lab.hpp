#pragma once

// Seeded Monte Carlo experiments over many independent training runs.

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <cstdint>
#include <exception>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "tmxor/clause.hpp"
#include "tmxor/dataset.hpp"
#include "tmxor/machine.hpp"
#include "tmxor/rng.hpp"

namespace tmxor::lab {

enum class ClauseForm { NotX1AndX2, X1AndNotX2, Empty, Other };

// Compares include-sets only; TA depth is irrelevant.
inline ClauseForm clause_form(std::span<const int> states, int n) {
  if (states.size() != 4) return ClauseForm::Other;
  unsigned mask = 0;
  for (std::size_t k = 0; k < 4; ++k) mask = (mask << 1) | (states[k] <= n ? 1U : 0U);
  switch (mask) {
    case 0b0110: return ClauseForm::NotX1AndX2;
    case 0b1001: return ClauseForm::X1AndNotX2;
    case 0b0000: return ClauseForm::Empty;
    default: return ClauseForm::Other;
  }
}

struct CoverageCounts {
  int n_a = 0;      // clauses equal to !x1 & x2
  int n_b = 0;      // clauses equal to x1 & !x2
  int n_empty = 0;  // all-Exclude clauses
  int n_other = 0;

  int total() const noexcept { return n_a + n_b + n_empty + n_other; }
  friend bool operator==(const CoverageCounts&, const CoverageCounts&) = default;
};

inline CoverageCounts coverage(const Machine& machine) {
  CoverageCounts c;
  for (std::size_t j = 0; j < machine.clauses(); ++j) {
    switch (clause_form(machine.clause_states(j), machine.config().N)) {
      case ClauseForm::NotX1AndX2: ++c.n_a; break;
      case ClauseForm::X1AndNotX2: ++c.n_b; break;
      case ClauseForm::Empty: ++c.n_empty; break;
      case ClauseForm::Other: ++c.n_other; break;
    }
  }
  return c;
}

// True when the machine reproduces the XOR truth table in Test mode.
inline bool classifies_xor(const Machine& machine) {
  for (const auto& row : xor_full().rows) {
    if (classify(machine, row.x) != row.y) return false;
  }
  return true;
}

enum class StopRule { Budget, BothSubpatternsAtT, Custom };

inline const char* to_string(StopRule r) noexcept {
  switch (r) {
    case StopRule::Budget: return "budget";
    case StopRule::BothSubpatternsAtT: return "both-subpatterns-at-T";
    case StopRule::Custom: return "custom";
  }
  return "?";
}

struct ExperimentSpec {
  MachineConfig config;
  Dataset dataset = xor_full();
  std::size_t runs = 200;
  std::size_t steps = 100000;
  // Trajectory sampling; 0 records no trajectory.
  std::size_t snapshot_stride = 0;
  StopRule stop = StopRule::Budget;
  // Consecutive steps (n_A >= T and n_B >= T) must hold to count as absorbed.
  std::size_t dwell = 1000;
  std::function<bool(const Machine&, std::size_t)> custom_stop;
  // Worker threads; 0 uses the hardware concurrency.
  unsigned threads = 0;

  void validate() const {
    if (runs < 1) throw std::invalid_argument("ExperimentSpec: runs must be >= 1");
    config.validate_for(dataset);
    if (stop == StopRule::Custom && !custom_stop) {
      throw std::invalid_argument("ExperimentSpec: custom stop rule without a predicate");
    }
  }
};

struct TrajectoryPoint {
  std::size_t step = 0;
  CoverageCounts counts;
  friend bool operator==(const TrajectoryPoint&, const TrajectoryPoint&) = default;
};

struct RunRecord {
  std::size_t run = 0;
  std::uint64_t stream = 0;  // key of the run's random stream
  std::size_t steps_run = 0;
  CoverageCounts final_counts;
  std::vector<int> final_states;
  bool classifies_xor = false;
  // First step with n_A >= T or n_B >= T.
  std::optional<std::size_t> first_hit;
  // Step at which a dwell-long streak of (n_A >= T and n_B >= T) began.
  std::optional<std::size_t> sustained_from;
  // Whether any clause ever held !x1 & x2 (resp. x1 & !x2) during the run.
  bool saw_a = false;
  bool saw_b = false;
  std::vector<TrajectoryPoint> trajectory;
};

struct FirstHitDistribution {
  std::vector<std::size_t> hits;  // sorted
  std::size_t censored = 0;
  std::size_t runs = 0;

  double hit_fraction() const noexcept {
    return runs == 0 ? 0.0 : static_cast<double>(hits.size()) / static_cast<double>(runs);
  }
};

struct CoverageReport {
  ExperimentSpec spec;
  std::uint64_t master_seed = 0;
  std::vector<RunRecord> runs;

  double fraction(const std::function<bool(const RunRecord&)>& pred) const {
    if (runs.empty()) return 0.0;
    const auto n = std::count_if(runs.begin(), runs.end(), pred);
    return static_cast<double>(n) / static_cast<double>(runs.size());
  }

  double fraction_sustained() const {
    return fraction([](const RunRecord& r) { return r.sustained_from.has_value(); });
  }

  double fraction_final_both_at_least(int k) const {
    return fraction([k](const RunRecord& r) { return r.final_counts.n_a >= k && r.final_counts.n_b >= k; });
  }

  double fraction_classifies_xor() const {
    return fraction([](const RunRecord& r) { return r.classifies_xor; });
  }

  FirstHitDistribution first_hits() const {
    FirstHitDistribution d;
    d.runs = runs.size();
    for (const auto& r : runs) {
      if (r.first_hit) d.hits.push_back(*r.first_hit);
      else ++d.censored;
    }
    std::sort(d.hits.begin(), d.hits.end());
    return d;
  }
};

// Runs body(i) for i in [0, count) on a small pool of threads. Each index is
// handled exactly once; results must be written to per-index slots.
inline void parallel_for(std::size_t count, unsigned threads, const std::function<void(std::size_t)>& body) {
  unsigned workers = threads != 0 ? threads : std::max(1U, std::thread::hardware_concurrency());
  workers = static_cast<unsigned>(std::min<std::size_t>(workers, count));
  if (workers <= 1) {
    for (std::size_t i = 0; i < count; ++i) body(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::atomic<bool> failed{false};
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (unsigned w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < count && !failed; i = next++) {
        try {
          body(i);
        } catch (...) {
          if (!failed.exchange(true)) error = std::current_exception();
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);
}

inline RunRecord run_once(const ExperimentSpec& spec, std::size_t run, CounterRng rng) {
  RunRecord rec;
  rec.run = run;
  rec.stream = rng.key();
  Machine machine(spec.config);
  const int T = spec.config.T;
  std::size_t streak = 0;

  TrainOptions opts;
  opts.observe = [&](const Machine& m, std::size_t step) {
    const auto c = coverage(m);
    rec.saw_a = rec.saw_a || c.n_a > 0;
    rec.saw_b = rec.saw_b || c.n_b > 0;
    if (!rec.first_hit && (c.n_a >= T || c.n_b >= T)) rec.first_hit = step;
    if (c.n_a >= T && c.n_b >= T) {
      ++streak;
      if (!rec.sustained_from && streak >= spec.dwell) rec.sustained_from = step + 1 - streak;
    } else {
      streak = 0;
    }
    if (spec.snapshot_stride != 0 && step % spec.snapshot_stride == 0) rec.trajectory.push_back({step, c});
  };
  switch (spec.stop) {
    case StopRule::Budget: break;
    case StopRule::BothSubpatternsAtT:
      opts.stop = [&](const Machine&, std::size_t) { return rec.sustained_from.has_value(); };
      break;
    case StopRule::Custom: opts.stop = spec.custom_stop; break;
  }

  const Trace trace = train(machine, spec.dataset, spec.steps, rng, opts);
  rec.steps_run = trace.steps_run;
  rec.final_counts = coverage(machine);
  rec.final_states.assign(machine.states().begin(), machine.states().end());
  rec.classifies_xor = classifies_xor(machine);
  if (spec.snapshot_stride != 0 && (rec.trajectory.empty() || rec.trajectory.back().step != trace.steps_run)) {
    rec.trajectory.push_back({trace.steps_run, rec.final_counts});
  }
  return rec;
}

// Run r uses stream split(r) of the master seed, so the report depends only
// on (spec, master_seed).
inline CoverageReport run_experiment(const ExperimentSpec& spec, std::uint64_t master_seed) {
  spec.validate();
  CoverageReport report;
  report.spec = spec;
  report.master_seed = master_seed;
  report.runs.resize(spec.runs);
  const CounterRng master(master_seed);
  parallel_for(spec.runs, spec.threads,
               [&](std::size_t r) { report.runs[r] = run_once(spec, r, master.split(r)); });
  return report;
}

// Fraction of (run, clause) pairs that end on the dataset's sub-pattern,
// with the T gate replaced by constant probabilities.
inline double lemma12_experiment(const Dataset& dataset, int m, double s, std::size_t steps, std::size_t runs,
                                 std::uint64_t seed, GateConstants gates = {}, int N = 1) {
  ClauseForm target;
  if (dataset.name == "subpattern-a") target = ClauseForm::NotX1AndX2;
  else if (dataset.name == "subpattern-b") target = ClauseForm::X1AndNotX2;
  else throw std::invalid_argument("lemma12_experiment: dataset must be subpattern-a or subpattern-b");

  ExperimentSpec spec;
  spec.config.m = m;
  spec.config.s = s;
  spec.config.N = N;
  spec.config.fixed_gates = gates;
  spec.dataset = dataset;
  spec.runs = runs;
  spec.steps = steps;
  const auto report = run_experiment(spec, seed);

  std::size_t hits = 0;
  for (const auto& r : report.runs) {
    for (int j = 0; j < m; ++j) {
      const std::span<const int> states(r.final_states);
      if (clause_form(states.subspan(static_cast<std::size_t>(j) * 4, 4), N) == target) ++hits;
    }
  }
  return static_cast<double>(hits) / static_cast<double>(runs * static_cast<std::size_t>(m));
}

struct BlockingProbe {
  int f_sum = 0;
  double gate = 0.0;
  bool unchanged = false;  // every trial step left the machine as it was
};

// For a positive sample whose Train-mode vote has reached T, the Type I gate
// is closed: no clause can be updated by that sample.
inline BlockingProbe blocking_probe(const Machine& machine, const Sample& sample, std::size_t trials = 256,
                                    std::uint64_t seed = 0) {
  if (machine.config().fixed_gates) throw std::invalid_argument("blocking_probe: machine must use T-driven gates");
  if (sample.y != 1) throw std::invalid_argument("blocking_probe: sample must be positive");
  BlockingProbe probe;
  probe.f_sum = vote_sum(machine, sample.x, EvalMode::Train);
  if (probe.f_sum < machine.config().T) {
    throw std::invalid_argument("blocking_probe: vote " + std::to_string(probe.f_sum) + " has not reached T=" +
                                std::to_string(machine.config().T));
  }
  probe.gate = gate_probability(machine, sample);
  probe.unchanged = true;
  const CounterRng base(seed);
  for (std::size_t i = 0; i < trials && probe.unchanged; ++i) {
    Machine copy = machine;
    CounterRng rng = base.split(i);
    train_step(copy, sample, rng);
    probe.unchanged = copy == machine;
  }
  return probe;
}

// First step at which either sub-pattern is held by T clauses. Runs that do
// not get there within the budget are counted as censored.
inline FirstHitDistribution time_to_threshold(const ExperimentSpec& spec, std::uint64_t seed) {
  if (spec.config.T > spec.config.m) {
    throw std::invalid_argument("time_to_threshold: T must not exceed m");
  }
  return run_experiment(spec, seed).first_hits();
}

}  // namespace tmxor::lab
