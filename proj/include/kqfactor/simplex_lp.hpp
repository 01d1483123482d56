#pragma once

#include "kqfactor/linalg.hpp"

namespace kqf {

struct LpSolution {
  double objective = 0.0;
  Vector x;
};

/// Dense two-phase simplex for  min c^T x  s.t.  A x = b, x >= 0.
/// Bland's rule; intended for the small enumeration oracles only.
/// Throws std::runtime_error when infeasible or unbounded.
LpSolution solve_standard_lp(const Matrix& a, const Vector& b, const Vector& c);

}  // namespace kqf
