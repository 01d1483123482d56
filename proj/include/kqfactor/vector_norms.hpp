#pragma once

#include <vector>

#include "kqfactor/linalg.hpp"

namespace kqf {

/// Sparsity budget k of a vector or of one side of a matrix factor.
struct SparsityLevel {
  Index k = 1;
  void check(Index dim) const;
};

/// Value of the k-support norm together with the partition used by the
/// closed form: `head` holds the k-r-1 largest entries (squared individually),
/// `tail_nonzero` and `tail_zero` the remaining entries (aggregated in l1).
struct ThetaResult {
  double value = 0.0;
  Index r = 0;
  std::vector<Index> head;
  std::vector<Index> tail_nonzero;
  std::vector<Index> tail_zero;
};

ThetaResult theta_k(const Vector& w, SparsityLevel k);
double theta_k_dual(const Vector& s, SparsityLevel k);

/// A subgradient of theta_k at w (the h = 0 element): dual norm <= 1 and
/// <alpha, w> = theta_k(w). Returns zero for w = 0.
Vector theta_k_subgradient(const Vector& w, SparsityLevel k);

/// Gauge of the convex hull of flat k-sparse atoms (entries +-1/sqrt(k)).
double kappa_k(const Vector& w, SparsityLevel k);
double kappa_k_dual(const Vector& s, SparsityLevel k);

enum class VectorDual { theta, kappa };

/// Exact dual value by enumerating every size-k support. Test oracle.
double dual_oracle_enumerate(const Vector& s, SparsityLevel k, VectorDual which);

/// kappa_k through a linear program over all flat k-sparse atoms. Test oracle.
double gauge_oracle_lp(const Vector& w, SparsityLevel k);

/// Indices of the k largest magnitudes, ties resolved toward smaller index,
/// listed in decreasing magnitude order.
std::vector<Index> top_k_indices(const Vector& v, Index k);

}  // namespace kqf
