#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "tmxor/ta.hpp"

namespace tmxor {

using Bits = std::vector<std::uint8_t>;

enum class EvalMode { Train, Test };

class InputShapeError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Literal value seen by TA k (0-based) of a clause: TA 2j reads x_j, TA 2j+1
// reads its negation.
inline constexpr int literal_value(std::span<const std::uint8_t> x, std::size_t ta_index) noexcept {
  const int bit = x[ta_index / 2] != 0 ? 1 : 0;
  return (ta_index % 2 == 0) ? bit : 1 - bit;
}

// Conjunction over included literals. `states` holds the 2o raw TA states of
// one clause. An empty clause is 1 in Train mode and 0 in Test mode.
inline int clause_output(std::span<const int> states, int n, std::span<const std::uint8_t> x,
                         EvalMode mode) noexcept {
  bool any_included = false;
  for (std::size_t k = 0; k < states.size(); ++k) {
    if (states[k] > n) continue;
    any_included = true;
    if (literal_value(x, k) == 0) return 0;
  }
  if (!any_included) return mode == EvalMode::Train ? 1 : 0;
  return 1;
}

class ClauseConfig {
 public:
  explicit ClauseConfig(std::vector<TaState> tas) : tas_(std::move(tas)) {
    if (tas_.empty() || tas_.size() % 2 != 0) {
      throw std::invalid_argument("ClauseConfig: need an even, non-zero number of automata, got " +
                                  std::to_string(tas_.size()));
    }
    for (const auto& ta : tas_) {
      if (ta.half_depth() != tas_.front().half_depth()) {
        throw std::invalid_argument("ClauseConfig: all automata must share the same half-depth");
      }
    }
  }

  // Clause over o inputs from per-TA actions, each at the shallowest state of
  // its side. `include` is ordered x1, !x1, x2, !x2, ...
  static ClauseConfig from_actions(const std::vector<bool>& include, int n = 1) {
    std::vector<TaState> tas;
    tas.reserve(include.size());
    for (bool inc : include) tas.push_back(inc ? TaState::shallow_include(n) : TaState::shallow_exclude(n));
    return ClauseConfig(std::move(tas));
  }

  static ClauseConfig all_exclude(std::size_t o, int n = 1) {
    return from_actions(std::vector<bool>(2 * o, false), n);
  }

  std::size_t inputs() const noexcept { return tas_.size() / 2; }
  int half_depth() const noexcept { return tas_.front().half_depth(); }
  const std::vector<TaState>& tas() const noexcept { return tas_; }
  TaState& ta(std::size_t k) { return tas_.at(k); }
  const TaState& ta(std::size_t k) const { return tas_.at(k); }

  // k is 0-based input index.
  bool includes_positive(std::size_t k) const { return tas_.at(2 * k).includes(); }
  bool includes_negated(std::size_t k) const { return tas_.at(2 * k + 1).includes(); }

  std::vector<int> raw_states() const {
    std::vector<int> out;
    out.reserve(tas_.size());
    for (const auto& ta : tas_) out.push_back(ta.value());
    return out;
  }

  friend bool operator==(const ClauseConfig&, const ClauseConfig&) = default;

 private:
  std::vector<TaState> tas_;
};

inline int clause_eval(const ClauseConfig& clause, std::span<const std::uint8_t> x, EvalMode mode) {
  if (x.size() != clause.inputs()) {
    throw InputShapeError("clause_eval: input width " + std::to_string(x.size()) + " != clause width " +
                          std::to_string(clause.inputs()));
  }
  const auto raw = clause.raw_states();
  return clause_output(raw, clause.half_depth(), x, mode);
}

}  // namespace tmxor
