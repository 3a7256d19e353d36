#pragma once

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "tmxor/rng.hpp"
#include "tmxor/ta.hpp"

namespace tmxor {

// Type I answers positive samples (y = 1), Type II negative ones (y = 0).
enum class FeedbackType { TypeI, TypeII };

inline const char* to_string(FeedbackType t) noexcept { return t == FeedbackType::TypeI ? "TypeI" : "TypeII"; }

inline constexpr FeedbackType feedback_type_for(int label) noexcept {
  return label != 0 ? FeedbackType::TypeI : FeedbackType::TypeII;
}

struct FeedbackProbs {
  double reward = 0.0;
  double inaction = 0.0;
  double penalty = 0.0;

  double sum() const noexcept { return reward + inaction + penalty; }
  friend bool operator==(const FeedbackProbs&, const FeedbackProbs&) = default;
};

// Raised for the (Include, clause = 1, literal = 0) cell: an included false
// literal forces the clause to 0, so reaching it means the caller is broken.
class NaCellError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

inline int clamp_vote(int f_sum, int T) noexcept { return std::max(-T, std::min(T, f_sum)); }

// Probability that a clause receives Type I feedback for the current sample.
inline double u1(int f_sum, int T) {
  if (T < 1) throw std::invalid_argument("u1: T must be >= 1");
  return static_cast<double>(T - clamp_vote(f_sum, T)) / (2.0 * T);
}

// Probability that a clause receives Type II feedback for the current sample.
inline double u2(int f_sum, int T) {
  if (T < 1) throw std::invalid_argument("u2: T must be >= 1");
  return static_cast<double>(T + clamp_vote(f_sum, T)) / (2.0 * T);
}

inline FeedbackProbs feedback_probs(FeedbackType type, int clause_out, int literal, Action action, double s) {
  if (!(s >= 1.0) || !std::isfinite(s)) {
    throw std::invalid_argument("feedback_probs: s must be a finite real >= 1, got " + std::to_string(s));
  }
  const double low = 1.0 / s;
  const double high = (s - 1.0) / s;
  const bool include = action == Action::Include;

  if (include && clause_out != 0 && literal == 0) {
    throw NaCellError(std::string("feedback_probs: unreachable cell (") + to_string(type) +
                      ", Include, clause=1, literal=0)");
  }

  if (type == FeedbackType::TypeI) {
    if (include) {
      if (clause_out != 0) return {high, low, 0.0};   // literal 1
      return {0.0, high, low};                        // clause 0, any literal
    }
    if (clause_out != 0) {
      if (literal != 0) return {0.0, low, high};
      return {low, high, 0.0};
    }
    return {low, high, 0.0};
  }

  // Type II only ever penalises an excluded false literal in a firing clause.
  if (include) return {0.0, 1.0, 0.0};
  if (clause_out != 0 && literal == 0) return {0.0, 0.0, 1.0};
  return {0.0, 1.0, 0.0};
}

// One draw per call unless the triple is degenerate, in which case no random
// number is consumed.
inline Feedback sample_feedback(const FeedbackProbs& p, CounterRng& rng) noexcept {
  if (p.inaction >= 1.0) return Feedback::Inaction;
  if (p.reward >= 1.0) return Feedback::Reward;
  if (p.penalty >= 1.0) return Feedback::Penalty;
  const double r = rng.uniform();
  if (r < p.reward) return Feedback::Reward;
  if (r < p.reward + p.penalty) return Feedback::Penalty;
  return Feedback::Inaction;
}

}  // namespace tmxor
