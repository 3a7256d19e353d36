#pragma once

// Exact discrete-time Markov chains over the TA action configurations of
// small machines with two-state automata (N = 1).
//
// A system state is the bit vector (h1, ..., hW), h = 1 for Include, clause
// after clause, four TAs per clause ordered x1, !x1, x2, !x2. States are
// numbered 1..2^W with h1 as the most significant bit, so for two clauses
// (0,1,1,0,1,0,0,1) is state 106 and (1,0,0,1,0,1,1,0) is state 151.
//
// Matrices are stored row-stochastic, P(from, to), with 0-based rows and
// columns (row r is state r + 1). Reports use 1-based state numbers.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "tmxor/clause.hpp"
#include "tmxor/dataset.hpp"
#include "tmxor/feedback.hpp"
#include "tmxor/machine.hpp"

namespace tmxor::dtmc {

inline constexpr std::size_t kTasPerClause = 4;
inline constexpr std::size_t kClauseStates = 16;

inline int encode_state(std::span<const std::uint8_t> bits) {
  if (bits.empty() || bits.size() > 30) throw std::invalid_argument("encode_state: width must be in [1, 30]");
  int index = 0;
  for (auto b : bits) {
    if (b > 1) throw std::invalid_argument("encode_state: bits must be 0 or 1");
    index = (index << 1) | b;
  }
  return index + 1;
}

inline Bits decode_state(int index, std::size_t width) {
  if (width == 0 || width > 30) throw std::invalid_argument("decode_state: width must be in [1, 30]");
  if (index < 1 || index > (1 << width)) {
    throw std::out_of_range("decode_state: index " + std::to_string(index) + " outside [1, " +
                            std::to_string(1 << width) + "]");
  }
  Bits bits(width);
  const int value = index - 1;
  for (std::size_t i = 0; i < width; ++i) bits[i] = static_cast<std::uint8_t>((value >> (width - 1 - i)) & 1);
  return bits;
}

// Action bits of a machine whose automata have two states.
inline Bits system_bits(const Machine& machine) {
  if (machine.config().N != 1) throw std::invalid_argument("system_bits: chain states need N = 1");
  Bits bits;
  bits.reserve(machine.states().size());
  for (int s : machine.states()) bits.push_back(s == 1 ? 1 : 0);
  return bits;
}

inline void set_system_bits(Machine& machine, std::span<const std::uint8_t> bits) {
  if (machine.config().N != 1) throw std::invalid_argument("set_system_bits: chain states need N = 1");
  if (bits.size() != machine.states().size()) throw std::invalid_argument("set_system_bits: width mismatch");
  std::vector<int> states;
  states.reserve(bits.size());
  for (auto b : bits) states.push_back(b != 0 ? 1 : 2);
  machine.set_states(std::move(states));
}

struct StayFlip {
  double stay = 0.0;
  double flip = 0.0;
};

// With two states per TA a penalty always flips the action; rewards and
// inactions keep it.
inline StayFlip per_ta_stay_flip(FeedbackType type, int clause_out, int literal, Action action, double s) {
  const auto p = feedback_probs(type, clause_out, literal, action, s);
  return {p.reward + p.inaction, p.penalty};
}

// Product of non-negative factors in ascending order, so the result does not
// depend on the order the factors were produced in.
template <std::size_t Max>
double canonical_product(std::array<double, Max> factors, std::size_t count) {
  std::sort(factors.begin(), factors.begin() + static_cast<std::ptrdiff_t>(count));
  double p = 1.0;
  for (std::size_t i = 0; i < count; ++i) p *= factors[i];
  return p;
}

template <std::size_t Max>
double canonical_sum(std::array<double, Max> terms, std::size_t count) {
  std::sort(terms.begin(), terms.begin() + static_cast<std::ptrdiff_t>(count));
  double total = 0.0;
  for (std::size_t i = 0; i < count; ++i) total += terms[i];
  return total;
}

// Train-mode clause output from action bits; an empty clause fires.
inline int clause_output_bits(std::span<const std::uint8_t> include, std::span<const std::uint8_t> x) {
  for (std::size_t k = 0; k < include.size(); ++k) {
    if (include[k] != 0 && literal_value(x, k) == 0) return 0;
  }
  return 1;
}

// Probability that one clause moves from `from` to `to` on sample input x,
// given that it is selected for `type` feedback with probability p_act.
inline double clause_transition_prob(std::span<const std::uint8_t> from, std::span<const std::uint8_t> to,
                                     std::span<const std::uint8_t> x, FeedbackType type, double p_act, double s) {
  if (from.size() != to.size() || from.size() != 2 * x.size()) {
    throw InputShapeError("clause_transition_prob: clause width must be 2 * input width");
  }
  if (!(p_act >= 0.0 && p_act <= 1.0)) throw std::invalid_argument("clause_transition_prob: p_act outside [0, 1]");
  if (from.size() > 8) throw std::invalid_argument("clause_transition_prob: at most 8 automata per clause");

  const int out = clause_output_bits(from, x);
  std::array<double, 8> factors{};
  bool same = true;
  for (std::size_t k = 0; k < from.size(); ++k) {
    const Action action = from[k] != 0 ? Action::Include : Action::Exclude;
    const auto sf = per_ta_stay_flip(type, out, literal_value(x, k), action, s);
    const bool flipped = (from[k] != 0) != (to[k] != 0);
    same = same && !flipped;
    factors[k] = flipped ? sf.flip : sf.stay;
  }
  const double p_feed = canonical_product(factors, from.size());
  return same ? p_act * p_feed + (1.0 - p_act) : p_act * p_feed;
}

class TransitionMatrix {
 public:
  TransitionMatrix() = default;
  explicit TransitionMatrix(std::size_t dim) : dim_(dim), entries_(dim * dim, 0.0) {}

  static TransitionMatrix identity(std::size_t dim) {
    TransitionMatrix m(dim);
    for (std::size_t i = 0; i < dim; ++i) m(i, i) = 1.0;
    return m;
  }

  std::size_t dim() const noexcept { return dim_; }
  double& operator()(std::size_t from, std::size_t to) noexcept { return entries_[from * dim_ + to]; }
  double operator()(std::size_t from, std::size_t to) const noexcept { return entries_[from * dim_ + to]; }

  // 1-based state numbers.
  double at_state(int from, int to) const {
    if (from < 1 || to < 1 || static_cast<std::size_t>(from) > dim_ || static_cast<std::size_t>(to) > dim_) {
      throw std::out_of_range("TransitionMatrix: state number out of range");
    }
    return (*this)(static_cast<std::size_t>(from - 1), static_cast<std::size_t>(to - 1));
  }

  std::span<const double> row(std::size_t from) const {
    return std::span<const double>(entries_).subspan(from * dim_, dim_);
  }
  const std::vector<double>& entries() const noexcept { return entries_; }

  double max_row_sum_error() const noexcept {
    double worst = 0.0;
    for (std::size_t i = 0; i < dim_; ++i) {
      double sum = 0.0;
      for (double v : row(i)) sum += v;
      worst = std::max(worst, std::abs(sum - 1.0));
    }
    return worst;
  }

  bool entries_in_unit_interval() const noexcept {
    return std::all_of(entries_.begin(), entries_.end(), [](double v) { return v >= 0.0 && v <= 1.0; });
  }

  bool is_row_stochastic(double tol = 1e-12) const noexcept {
    return entries_in_unit_interval() && max_row_sum_error() <= tol;
  }

  friend bool operator==(const TransitionMatrix&, const TransitionMatrix&) = default;

 private:
  std::size_t dim_ = 0;
  std::vector<double> entries_;
};

inline TransitionMatrix multiply(const TransitionMatrix& a, const TransitionMatrix& b) {
  if (a.dim() != b.dim()) throw std::invalid_argument("multiply: dimension mismatch");
  const std::size_t n = a.dim();
  TransitionMatrix c(n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t k = 0; k < n; ++k) {
      const double aik = a(i, k);
      if (aik == 0.0) continue;
      for (std::size_t j = 0; j < n; ++j) c(i, j) += aik * b(k, j);
    }
  }
  return c;
}

inline double max_abs_difference(const TransitionMatrix& a, const TransitionMatrix& b) {
  double worst = 0.0;
  for (std::size_t i = 0; i < a.entries().size(); ++i) worst = std::max(worst, std::abs(a.entries()[i] - b.entries()[i]));
  return worst;
}

// Chain of a machine with `clauses` clauses over two inputs, N = 1. Each step
// draws one dataset row with probability `weights[row]`; the rows' terms are
// combined by the law of total probability. With `fixed` set the gate is the
// constant u1/u2, otherwise it is u1/u2 of the Train-mode vote (clamped by T).
inline TransitionMatrix build_chain(std::size_t clauses, const Dataset& data, const std::vector<double>& weights,
                                    double s, int T, std::optional<GateConstants> fixed = std::nullopt) {
  if (clauses < 1 || clauses > 3) throw std::invalid_argument("build_chain: exact chains support 1 to 3 clauses");
  if (data.width() != 2) throw InputShapeError("build_chain: dataset rows must have two inputs");
  if (weights.size() != data.rows.size()) throw std::invalid_argument("build_chain: one weight per dataset row");
  if (data.rows.size() > 8) throw std::invalid_argument("build_chain: at most 8 dataset rows");
  MachineConfig probe;
  probe.m = static_cast<int>(clauses);
  probe.T = T;
  probe.s = s;
  probe.input_dist = weights;
  probe.fixed_gates = fixed;
  probe.validate_for(data);

  const std::size_t width = clauses * kTasPerClause;
  const std::size_t dim = std::size_t{1} << width;
  TransitionMatrix P(dim);

  std::array<std::array<std::uint8_t, kTasPerClause>, kClauseStates> clause_bits{};
  for (std::size_t c = 0; c < kClauseStates; ++c) {
    for (std::size_t k = 0; k < kTasPerClause; ++k) clause_bits[c][k] = static_cast<std::uint8_t>((c >> (3 - k)) & 1);
  }
  auto clause_of = [&](std::size_t state, std::size_t j) {
    return (state >> (kTasPerClause * (clauses - 1 - j))) & (kClauseStates - 1);
  };

  // trans[row][j][to_clause]
  std::vector<std::array<std::array<double, kClauseStates>, 3>> trans(data.rows.size());
  for (std::size_t from = 0; from < dim; ++from) {
    for (std::size_t r = 0; r < data.rows.size(); ++r) {
      const auto& sample = data.rows[r];
      int f_sum = 0;
      for (std::size_t j = 0; j < clauses; ++j) f_sum += clause_output_bits(clause_bits[clause_of(from, j)], sample.x);
      const FeedbackType type = feedback_type_for(sample.y);
      const double p_act = fixed ? (sample.y != 0 ? fixed->u1 : fixed->u2)
                                 : (sample.y != 0 ? u1(f_sum, T) : u2(f_sum, T));
      for (std::size_t j = 0; j < clauses; ++j) {
        const auto& src = clause_bits[clause_of(from, j)];
        for (std::size_t to = 0; to < kClauseStates; ++to) {
          trans[r][j][to] = clause_transition_prob(src, clause_bits[to], sample.x, type, p_act, s);
        }
      }
    }
    for (std::size_t to = 0; to < dim; ++to) {
      std::array<double, 8> terms{};
      for (std::size_t r = 0; r < data.rows.size(); ++r) {
        std::array<double, 3> factors{};
        for (std::size_t j = 0; j < clauses; ++j) factors[j] = trans[r][j][clause_of(to, j)];
        terms[r] = weights[r] * canonical_product(factors, clauses);
      }
      P(from, to) = canonical_sum(terms, data.rows.size());
    }
  }
  return P;
}

inline TransitionMatrix build_two_clause_matrix(double s = 10.0, int T = 1,
                                                std::vector<double> input_dist = uniform_weights(4)) {
  return build_chain(2, xor_full(), input_dist, s, T);
}

inline TransitionMatrix build_single_clause_matrix(const Dataset& data, double u1_const = 0.5,
                                                   double u2_const = 0.5, double s = 10.0) {
  return build_chain(1, data, uniform_weights(data.rows.size()), s, 1, GateConstants{u1_const, u2_const});
}

class NonConvergenceError : public std::runtime_error {
 public:
  NonConvergenceError(double last_change, int iterations)
      : std::runtime_error("limiting_matrix: no convergence after " + std::to_string(iterations) +
                           " squarings (last change " + std::to_string(last_change) + ")"),
        last_change_(last_change),
        iterations_(iterations) {}

  double last_change() const noexcept { return last_change_; }
  int iterations() const noexcept { return iterations_; }

 private:
  double last_change_;
  int iterations_;
};

struct LimitingResult {
  TransitionMatrix limit;
  double residual = 0.0;     // max |A P - A|
  double last_change = 0.0;  // max entry change at the final squaring
  int iterations = 0;        // squarings performed
};

inline constexpr double kSquaringTolerance = 1e-12;
inline constexpr int kMaxSquarings = 64;
inline constexpr double kAbsorbingTolerance = 1e-9;

// Repeated squaring P, P^2, P^4, ... until successive powers agree.
inline LimitingResult limiting_matrix(const TransitionMatrix& P, double tol = kSquaringTolerance,
                                      int max_iters = kMaxSquarings) {
  if (P.dim() == 0) throw std::invalid_argument("limiting_matrix: empty matrix");
  TransitionMatrix A = P;
  double change = 0.0;
  for (int it = 1; it <= max_iters; ++it) {
    TransitionMatrix next = multiply(A, A);
    change = max_abs_difference(next, A);
    A = std::move(next);
    if (change < tol) {
      const double residual = max_abs_difference(multiply(A, P), A);
      return {std::move(A), residual, change, it};
    }
  }
  throw NonConvergenceError(change, max_iters);
}

struct StateClassification {
  std::vector<int> absorbing;  // 1-based
  // The three limiting-matrix properties: absorbing states return to
  // themselves, all mass ends in absorbing states, none in the others.
  bool b1 = false;
  bool b2 = false;
  bool b3 = false;
  std::vector<int> b1_violations;  // absorbing states with A(i, i) != 1
  std::vector<int> b2_violations;  // source states whose absorbed mass != 1
  std::vector<int> b3_violations;  // non-absorbing targets with mass in the limit

  bool verdict() const noexcept { return b1 && b2 && b3; }
};

inline StateClassification classify_states(const TransitionMatrix& P, const TransitionMatrix& A,
                                           double tol = kAbsorbingTolerance) {
  if (P.dim() != A.dim()) throw std::invalid_argument("classify_states: dimension mismatch");
  const std::size_t n = P.dim();
  StateClassification out;
  std::vector<bool> is_abs(n, false);
  for (std::size_t i = 0; i < n; ++i) {
    if (P(i, i) >= 1.0 - tol) {
      is_abs[i] = true;
      out.absorbing.push_back(static_cast<int>(i + 1));
    }
  }
  for (int s : out.absorbing) {
    const auto i = static_cast<std::size_t>(s - 1);
    if (std::abs(A(i, i) - 1.0) > tol) out.b1_violations.push_back(s);
  }
  for (std::size_t j = 0; j < n; ++j) {
    double mass = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      if (is_abs[i]) mass += A(j, i);
    }
    if (std::abs(mass - 1.0) > tol) out.b2_violations.push_back(static_cast<int>(j + 1));
  }
  for (std::size_t i = 0; i < n; ++i) {
    if (is_abs[i]) continue;
    for (std::size_t j = 0; j < n; ++j) {
      if (A(j, i) > tol) {
        out.b3_violations.push_back(static_cast<int>(i + 1));
        break;
      }
    }
  }
  out.b1 = out.b1_violations.empty();
  out.b2 = out.b2_violations.empty();
  out.b3 = out.b3_violations.empty();
  return out;
}

struct ChainReport {
  StateClassification states;
  double residual = 0.0;
  int iterations = 0;
};

inline ChainReport verify_chain(const TransitionMatrix& P, double squaring_tol = kSquaringTolerance,
                                int max_iters = kMaxSquarings, double absorbing_tol = kAbsorbingTolerance) {
  const auto limit = limiting_matrix(P, squaring_tol, max_iters);
  return {classify_states(P, limit.limit, absorbing_tol), limit.residual, limit.iterations};
}

// State permutations used by the symmetry checks (0-based state values).
// Exchanges the clause blocks of a two-clause state.
inline std::size_t swap_clauses(std::size_t state) noexcept { return ((state & 0xF) << 4) | (state >> 4); }

// Exchanges x1 and x2 inside every clause: TA order (1,2,3,4) -> (3,4,1,2).
inline std::size_t swap_inputs(std::size_t state, std::size_t clauses) noexcept {
  std::size_t out = 0;
  for (std::size_t j = 0; j < clauses; ++j) {
    const std::size_t c = (state >> (4 * j)) & 0xF;
    const std::size_t swapped = ((c & 0x3) << 2) | (c >> 2);
    out |= swapped << (4 * j);
  }
  return out;
}

}  // namespace tmxor::dtmc
