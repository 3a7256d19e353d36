#pragma once

#include <stdexcept>
#include <string>
#include <vector>

#include "tmxor/clause.hpp"

namespace tmxor {

struct Sample {
  Bits x;
  int y = 0;

  friend bool operator==(const Sample&, const Sample&) = default;
};

struct Dataset {
  std::string name;
  std::vector<Sample> rows;

  std::size_t width() const { return rows.empty() ? 0 : rows.front().x.size(); }
  std::size_t size() const noexcept { return rows.size(); }
};

// Full XOR truth table, in the row order (0,0), (1,1), (0,1), (1,0).
inline Dataset xor_full() {
  return {"xor-full", {{{0, 0}, 0}, {{1, 1}, 0}, {{0, 1}, 1}, {{1, 0}, 1}}};
}

// Negatives plus the (0,1) positive: the sub-pattern !x1 & x2.
inline Dataset subpattern_a() {
  return {"subpattern-a", {{{0, 0}, 0}, {{1, 1}, 0}, {{0, 1}, 1}}};
}

// Negatives plus the (1,0) positive: the sub-pattern x1 & !x2.
inline Dataset subpattern_b() {
  return {"subpattern-b", {{{0, 0}, 0}, {{1, 1}, 0}, {{1, 0}, 1}}};
}

inline Dataset dataset_by_name(const std::string& name) {
  if (name == "xor-full" || name == "xor") return xor_full();
  if (name == "subpattern-a") return subpattern_a();
  if (name == "subpattern-b") return subpattern_b();
  throw std::invalid_argument("unknown dataset '" + name + "' (expected xor-full, subpattern-a, subpattern-b)");
}

inline std::vector<double> uniform_weights(std::size_t rows) {
  return std::vector<double>(rows, rows == 0 ? 0.0 : 1.0 / static_cast<double>(rows));
}

}  // namespace tmxor
