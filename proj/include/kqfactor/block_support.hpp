#pragma once

#include <compare>
#include <vector>

#include "kqfactor/linalg.hpp"

namespace kqf {

/// Row/column index sets of a k x q block. Both sets sorted and duplicate-free.
struct BlockSupport {
  std::vector<Index> rows;
  std::vector<Index> cols;

  auto operator<=>(const BlockSupport&) const = default;
  bool operator==(const BlockSupport&) const = default;

  /// Throws std::invalid_argument when indices are unsorted, repeated or out of range.
  void validate(Index m1, Index m2) const;
  Matrix gather(const Matrix& z) const;
  /// Adds `block` (rows.size() x cols.size()) into `z` at this support.
  void scatter_add(Matrix& z, const Matrix& block, double scale = 1.0) const;
};

inline void BlockSupport::validate(Index m1, Index m2) const {
  auto check = [](const std::vector<Index>& s, Index dim) {
    for (std::size_t i = 0; i < s.size(); ++i) {
      if (s[i] < 0 || s[i] >= dim) throw std::invalid_argument("block support: index out of range");
      if (i > 0 && s[i] <= s[i - 1]) throw std::invalid_argument("block support: indices must be sorted and unique");
    }
  };
  check(rows, m1);
  check(cols, m2);
}

inline Matrix BlockSupport::gather(const Matrix& z) const { return z(rows, cols); }

inline void BlockSupport::scatter_add(Matrix& z, const Matrix& block, double scale) const {
  z(rows, cols) += scale * block;
}

}  // namespace kqf
