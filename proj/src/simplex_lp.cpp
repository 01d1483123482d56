#include "kqfactor/simplex_lp.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

namespace kqf {
namespace {

constexpr double kPivotEps = 1e-11;

struct Tableau {
  Matrix t;                  // constraint rows, last column = rhs
  std::vector<Index> basis;  // basic column per row
  Index rhs_col() const { return t.cols() - 1; }

  void pivot(Index row, Index col) {
    t.row(row) /= t(row, col);
    for (Index i = 0; i < t.rows(); ++i) {
      if (i == row) continue;
      const double f = t(i, col);
      if (f != 0.0) t.row(i) -= f * t.row(row);
    }
    basis[row] = col;
  }

  // Minimises cost^T x over columns [0, allowed). Bland's rule.
  void optimise(const Vector& cost, Index allowed) {
    const Index m = t.rows();
    for (int iter = 0; iter < 100000; ++iter) {
      Index enter = -1;
      for (Index j = 0; j < allowed; ++j) {
        double reduced = cost(j);
        for (Index i = 0; i < m; ++i) reduced -= cost(basis[i]) * t(i, j);
        if (reduced < -1e-10) {
          enter = j;
          break;
        }
      }
      if (enter < 0) return;
      Index leave = -1;
      double best = std::numeric_limits<double>::infinity();
      for (Index i = 0; i < m; ++i) {
        if (t(i, enter) > kPivotEps) {
          const double ratio = t(i, rhs_col()) / t(i, enter);
          if (ratio < best - 1e-14 || (std::abs(ratio - best) <= 1e-14 && leave >= 0 && basis[i] < basis[leave])) {
            best = ratio;
            leave = i;
          }
        }
      }
      if (leave < 0) throw std::runtime_error("simplex: problem is unbounded");
      pivot(leave, enter);
    }
    throw std::runtime_error("simplex: iteration limit reached");
  }
};

}  // namespace

LpSolution solve_standard_lp(const Matrix& a, const Vector& b, const Vector& c) {
  const Index m = a.rows();
  const Index n = a.cols();
  if (b.size() != m || c.size() != n) throw std::invalid_argument("simplex: dimension mismatch");

  Tableau tab;
  tab.t = Matrix::Zero(m, n + m + 1);
  tab.basis.resize(m);
  for (Index i = 0; i < m; ++i) {
    const double sign = b(i) < 0 ? -1.0 : 1.0;
    tab.t.row(i).head(n) = sign * a.row(i);
    tab.t(i, n + i) = 1.0;
    tab.t(i, n + m) = sign * b(i);
    tab.basis[i] = n + i;
  }

  Vector phase1 = Vector::Zero(n + m);
  phase1.tail(m).setOnes();
  tab.optimise(phase1, n + m);
  double infeasibility = 0.0;
  for (Index i = 0; i < m; ++i)
    if (tab.basis[i] >= n) infeasibility += tab.t(i, n + m);
  if (infeasibility > 1e-8 * std::max(1.0, b.lpNorm<1>())) {
    throw std::runtime_error("simplex: problem is infeasible");
  }
  // Drive remaining artificials out of the basis; rows with no pivot are redundant.
  for (Index i = 0; i < m; ++i) {
    if (tab.basis[i] < n) continue;
    for (Index j = 0; j < n; ++j) {
      if (std::abs(tab.t(i, j)) > 1e-9) {
        tab.pivot(i, j);
        break;
      }
    }
  }

  Vector phase2 = Vector::Zero(n + m);
  phase2.head(n) = c;
  // Artificial columns stuck in the basis sit on redundant rows with zero rhs;
  // giving them zero cost keeps them inert.
  tab.optimise(phase2, n);

  LpSolution sol;
  sol.x = Vector::Zero(n);
  for (Index i = 0; i < m; ++i)
    if (tab.basis[i] < n) sol.x(tab.basis[i]) = tab.t(i, n + m);
  sol.objective = c.dot(sol.x);
  return sol;
}

}  // namespace kqf
