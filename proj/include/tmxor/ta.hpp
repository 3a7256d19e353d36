#pragma once

// Two-action Tsetlin Automaton with 2N states.
//
//   Include                      Exclude
//   1  2  ...  N  |  N+1  ...  2N-1  2N
//
// A reward pushes the state towards its end of the chain, a penalty pushes it
// towards (and across) the centre.

#include <stdexcept>
#include <string>

namespace tmxor {

enum class Action { Include, Exclude };

enum class Feedback { Reward, Inaction, Penalty };

inline const char* to_string(Action a) noexcept {
  return a == Action::Include ? "Include" : "Exclude";
}

inline const char* to_string(Feedback f) noexcept {
  switch (f) {
    case Feedback::Reward: return "Reward";
    case Feedback::Inaction: return "Inaction";
    case Feedback::Penalty: return "Penalty";
  }
  return "?";
}

// Raw-state helpers used on the hot path, where a Machine keeps plain ints.
inline constexpr Action action_of(int state, int n) noexcept {
  return state <= n ? Action::Include : Action::Exclude;
}

inline constexpr int step_state(int state, int n, Feedback fb) noexcept {
  if (fb == Feedback::Inaction) return state;
  const bool include = state <= n;
  if (fb == Feedback::Penalty) return include ? state + 1 : state - 1;
  if (include) return state > 1 ? state - 1 : 1;
  return state < 2 * n ? state + 1 : 2 * n;
}

class TaState {
 public:
  TaState(int state, int n) : state_(state), n_(n) {
    if (n < 1) throw std::invalid_argument("TaState: half-depth N must be >= 1, got " + std::to_string(n));
    if (state < 1 || state > 2 * n) {
      throw std::out_of_range("TaState: state " + std::to_string(state) + " outside [1, " +
                              std::to_string(2 * n) + "]");
    }
  }

  // Shallowest state on each side of the centre.
  static TaState shallow_include(int n) { return {n, n}; }
  static TaState shallow_exclude(int n) { return {n + 1, n}; }

  int value() const noexcept { return state_; }
  int half_depth() const noexcept { return n_; }
  Action action() const noexcept { return action_of(state_, n_); }
  bool includes() const noexcept { return action() == Action::Include; }

  friend bool operator==(const TaState&, const TaState&) = default;

 private:
  int state_;
  int n_;
};

inline TaState ta_update(TaState ta, Feedback fb) {
  return {step_state(ta.value(), ta.half_depth(), fb), ta.half_depth()};
}

}  // namespace tmxor
