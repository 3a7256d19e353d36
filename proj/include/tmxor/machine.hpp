#pragma once

// A single-class, positive-polarity Tsetlin Machine and its training game.

#include <array>
#include <cassert>
#include <cmath>
#include <cstddef>
#include <functional>
#include <numeric>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "tmxor/clause.hpp"
#include "tmxor/dataset.hpp"
#include "tmxor/feedback.hpp"
#include "tmxor/rng.hpp"
#include "tmxor/ta.hpp"

namespace tmxor {

// Constant gate probabilities that replace u1/u2, disabling T.
struct GateConstants {
  double u1 = 0.5;
  double u2 = 0.5;
  friend bool operator==(const GateConstants&, const GateConstants&) = default;
};

struct MachineConfig {
  int m = 2;
  int o = 2;
  int T = 1;
  double s = 10.0;
  int N = 1;
  int Th = 1;
  // One weight per row of the dataset being trained on; empty means uniform.
  std::vector<double> input_dist;
  // Empty: gates follow u1/u2 of the clause vote (T-driven).
  std::optional<GateConstants> fixed_gates;

  void validate() const {
    auto fail = [](const std::string& what) { throw std::invalid_argument("MachineConfig: " + what); };
    if (m < 1) fail("m must be >= 1");
    if (o < 1) fail("o must be >= 1");
    if (T < 1) fail("T must be >= 1");
    if (!(s >= 1.0) || !std::isfinite(s)) fail("s must be a finite real >= 1");
    if (N < 1) fail("N must be >= 1");
    if (!input_dist.empty()) {
      double total = 0.0;
      for (double w : input_dist) {
        if (!(w > 0.0)) fail("input_dist weights must be > 0");
        total += w;
      }
      if (std::abs(total - 1.0) > 1e-12) fail("input_dist must sum to 1");
    }
    if (fixed_gates) {
      const auto& g = *fixed_gates;
      if (!(g.u1 > 0.0 && g.u1 <= 1.0)) fail("fixed u1 must lie in (0, 1]");
      if (!(g.u2 > 0.0 && g.u2 <= 1.0)) fail("fixed u2 must lie in (0, 1]");
    }
  }

  void validate_for(const Dataset& data) const {
    validate();
    if (data.rows.empty()) throw std::invalid_argument("MachineConfig: dataset is empty");
    for (const auto& row : data.rows) {
      if (row.x.size() != static_cast<std::size_t>(o)) {
        throw InputShapeError("MachineConfig: dataset '" + data.name + "' row width differs from o=" +
                              std::to_string(o));
      }
    }
    if (!input_dist.empty() && input_dist.size() != data.rows.size()) {
      throw std::invalid_argument("MachineConfig: input_dist has " + std::to_string(input_dist.size()) +
                                  " weights for " + std::to_string(data.rows.size()) + " dataset rows");
    }
  }

  std::vector<double> weights_for(const Dataset& data) const {
    return input_dist.empty() ? uniform_weights(data.rows.size()) : input_dist;
  }

  friend bool operator==(const MachineConfig&, const MachineConfig&) = default;
};

// All reachable cells of the feedback tables for one s, indexed by
// [type][clause_out][literal][action]. NA cells are flagged.
class FeedbackTable {
 public:
  explicit FeedbackTable(double s) {
    for (int t = 0; t < 2; ++t) {
      for (int c = 0; c < 2; ++c) {
        for (int l = 0; l < 2; ++l) {
          for (int a = 0; a < 2; ++a) {
            auto& cell = cells_[index(t, c, l, a)];
            try {
              cell.probs = feedback_probs(t == 0 ? FeedbackType::TypeI : FeedbackType::TypeII, c, l,
                                          a == 0 ? Action::Include : Action::Exclude, s);
              cell.reachable = true;
            } catch (const NaCellError&) {
              cell.reachable = false;
            }
          }
        }
      }
    }
  }

  const FeedbackProbs& at(FeedbackType type, int clause_out, int literal, Action action) const {
    const auto& cell = cells_[index(type == FeedbackType::TypeI ? 0 : 1, clause_out != 0, literal != 0,
                                    action == Action::Include ? 0 : 1)];
    if (!cell.reachable) throw NaCellError("FeedbackTable: unreachable cell queried");
    return cell.probs;
  }

 private:
  struct Cell {
    FeedbackProbs probs;
    bool reachable = false;
  };
  static constexpr std::size_t index(int t, int c, int l, int a) noexcept {
    return static_cast<std::size_t>(((t * 2 + c) * 2 + l) * 2 + a);
  }
  std::array<Cell, 16> cells_{};
};

class Machine {
 public:
  explicit Machine(MachineConfig config)
      : config_(validated(std::move(config))),
        table_(config_.s),
        states_(static_cast<std::size_t>(config_.m) * tas_per_clause(), config_.N + 1) {}

  const MachineConfig& config() const noexcept { return config_; }
  const FeedbackTable& table() const noexcept { return table_; }

  std::size_t clauses() const noexcept { return static_cast<std::size_t>(config_.m); }
  std::size_t tas_per_clause() const noexcept { return 2 * static_cast<std::size_t>(config_.o); }

  // Clause-major: TA k of clause j lives at j * 2o + k.
  std::span<const int> states() const noexcept { return states_; }
  std::span<const int> clause_states(std::size_t j) const {
    check_clause(j);
    return std::span<const int>(states_).subspan(j * tas_per_clause(), tas_per_clause());
  }

  int state(std::size_t j, std::size_t k) const { return clause_states(j)[k]; }
  void set_state(std::size_t j, std::size_t k, int value) {
    check_clause(j);
    if (k >= tas_per_clause()) throw std::out_of_range("Machine: TA index out of range");
    states_[j * tas_per_clause() + k] = TaState(value, config_.N).value();
  }

  void set_states(std::vector<int> values) {
    if (values.size() != states_.size()) throw std::invalid_argument("Machine: wrong number of TA states");
    for (int v : values) (void)TaState(v, config_.N);
    states_ = std::move(values);
  }

  ClauseConfig clause(std::size_t j) const {
    std::vector<TaState> tas;
    for (int v : clause_states(j)) tas.emplace_back(v, config_.N);
    return ClauseConfig(std::move(tas));
  }

  void set_clause(std::size_t j, const ClauseConfig& c) {
    check_clause(j);
    if (c.tas().size() != tas_per_clause() || c.half_depth() != config_.N) {
      throw std::invalid_argument("Machine: clause shape does not match the machine");
    }
    for (std::size_t k = 0; k < tas_per_clause(); ++k) states_[j * tas_per_clause() + k] = c.ta(k).value();
  }

  // Actions ordered x1, !x1, x2, !x2, ...; placed at the shallowest state.
  void set_clause_actions(std::size_t j, const std::vector<bool>& include) {
    set_clause(j, ClauseConfig::from_actions(include, config_.N));
  }

  bool includes(std::size_t j, std::size_t k) const { return state(j, k) <= config_.N; }

  friend bool operator==(const Machine& a, const Machine& b) {
    return a.config_ == b.config_ && a.states_ == b.states_;
  }

 private:
  friend class MachineAccess;

  static MachineConfig validated(MachineConfig c) {
    c.validate();
    return c;
  }

  void check_clause(std::size_t j) const {
    if (j >= clauses()) throw std::out_of_range("Machine: clause index out of range");
  }

  MachineConfig config_;
  FeedbackTable table_;
  std::vector<int> states_;
};

// Mutable view used by the training step; keeps the invariant checks out of
// the inner loop.
class MachineAccess {
 public:
  static std::vector<int>& states(Machine& m) noexcept { return m.states_; }
};

inline void check_input(const Machine& machine, std::span<const std::uint8_t> x) {
  if (x.size() != static_cast<std::size_t>(machine.config().o)) {
    throw InputShapeError("input width " + std::to_string(x.size()) + " != o=" +
                          std::to_string(machine.config().o));
  }
}

inline int vote_sum(const Machine& machine, std::span<const std::uint8_t> x, EvalMode mode) {
  check_input(machine, x);
  int total = 0;
  for (std::size_t j = 0; j < machine.clauses(); ++j) {
    total += clause_output(machine.clause_states(j), machine.config().N, x, mode);
  }
  return total;
}

inline int classify(const Machine& machine, std::span<const std::uint8_t> x) {
  return vote_sum(machine, x, EvalMode::Test) >= machine.config().Th ? 1 : 0;
}

// Probability that any single clause is selected for feedback on `sample`.
inline double gate_probability(const Machine& machine, const Sample& sample) {
  const auto& cfg = machine.config();
  if (cfg.fixed_gates) return sample.y != 0 ? cfg.fixed_gates->u1 : cfg.fixed_gates->u2;
  const int f = vote_sum(machine, sample.x, EvalMode::Train);
  return sample.y != 0 ? u1(f, cfg.T) : u2(f, cfg.T);
}

// One round of the game: evaluate every clause (Train mode) on the
// pre-update state, then gate each clause independently and give its TAs
// independent feedback.
inline void train_step(Machine& machine, const Sample& sample, CounterRng& rng) {
  check_input(machine, sample.x);
  const auto& cfg = machine.config();
  const std::size_t width = machine.tas_per_clause();
  const std::size_t m = machine.clauses();
  auto& states = MachineAccess::states(machine);
  const std::span<const std::uint8_t> x(sample.x);

  std::array<int, 64> small_outputs{};
  std::vector<int> big_outputs;
  std::span<int> outputs;
  if (m <= small_outputs.size()) {
    outputs = std::span<int>(small_outputs.data(), m);
  } else {
    big_outputs.resize(m);
    outputs = big_outputs;
  }

  int f_sum = 0;
  for (std::size_t j = 0; j < m; ++j) {
    outputs[j] = clause_output(std::span<const int>(states).subspan(j * width, width), cfg.N, x, EvalMode::Train);
    f_sum += outputs[j];
  }

  const FeedbackType type = feedback_type_for(sample.y);
  double gate = 0.0;
  if (cfg.fixed_gates) {
    gate = sample.y != 0 ? cfg.fixed_gates->u1 : cfg.fixed_gates->u2;
  } else {
    gate = sample.y != 0 ? u1(f_sum, cfg.T) : u2(f_sum, cfg.T);
    // A sub-pattern whose vote already reaches T is blocked.
    assert(!(sample.y != 0 && f_sum >= cfg.T) || gate == 0.0);
  }
  if (gate <= 0.0) return;

  const FeedbackTable& table = machine.table();
  for (std::size_t j = 0; j < m; ++j) {
    if (gate < 1.0 && !(rng.uniform() < gate)) continue;
    int* clause = states.data() + j * width;
    for (std::size_t k = 0; k < width; ++k) {
      const Action action = action_of(clause[k], cfg.N);
      const auto& probs = table.at(type, outputs[j], literal_value(x, k), action);
      clause[k] = step_state(clause[k], cfg.N, sample_feedback(probs, rng));
    }
  }
}

// Draws a dataset row index from cumulative weights.
class RowSampler {
 public:
  explicit RowSampler(const std::vector<double>& weights) : cumulative_(weights.size()) {
    std::partial_sum(weights.begin(), weights.end(), cumulative_.begin());
  }

  std::size_t operator()(CounterRng& rng) const noexcept {
    const double r = rng.uniform() * cumulative_.back();
    for (std::size_t i = 0; i + 1 < cumulative_.size(); ++i) {
      if (r < cumulative_[i]) return i;
    }
    return cumulative_.size() - 1;
  }

 private:
  std::vector<double> cumulative_;
};

// Every TA uniformly at random on the Exclude side (N+1 .. 2N).
inline void initialize_exclude(Machine& machine, CounterRng& rng) {
  const int n = machine.config().N;
  for (int& s : MachineAccess::states(machine)) s = n + 1 + static_cast<int>(rng.below(static_cast<std::uint64_t>(n)));
}

struct Snapshot {
  std::size_t step = 0;
  std::vector<int> ta_states;
  friend bool operator==(const Snapshot&, const Snapshot&) = default;
};

struct Trace {
  std::vector<Snapshot> snapshots;
  std::size_t steps_run = 0;
  bool stopped_early = false;
  friend bool operator==(const Trace&, const Trace&) = default;
};

struct TrainOptions {
  // Snapshot every `stride` steps; 0 keeps only the initial and final state.
  std::size_t stride = 0;
  // Checked after every step; returning true ends training.
  std::function<bool(const Machine&, std::size_t step)> stop;
  // Called after every step (including step 0, before any update).
  std::function<void(const Machine&, std::size_t step)> observe;
};

inline Trace train(Machine& machine, const Dataset& data, std::size_t steps, CounterRng& rng,
                   const TrainOptions& options = {}) {
  const auto& cfg = machine.config();
  cfg.validate_for(data);
  const RowSampler sampler(cfg.weights_for(data));

  Trace trace;
  auto snap = [&](std::size_t step) {
    trace.snapshots.push_back({step, std::vector<int>(machine.states().begin(), machine.states().end())});
  };

  initialize_exclude(machine, rng);
  snap(0);
  if (options.observe) options.observe(machine, 0);

  std::size_t t = 0;
  while (t < steps) {
    train_step(machine, data.rows[sampler(rng)], rng);
    ++t;
    if (options.observe) options.observe(machine, t);
    const bool stop = options.stop && options.stop(machine, t);
    if ((options.stride != 0 && t % options.stride == 0) || ((stop || t == steps) && trace.snapshots.back().step != t)) {
      if (trace.snapshots.back().step != t) snap(t);
    }
    if (stop) {
      trace.stopped_early = t < steps;
      break;
    }
  }
  trace.steps_run = t;
  return trace;
}

}  // namespace tmxor
