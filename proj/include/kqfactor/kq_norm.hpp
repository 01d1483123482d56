#pragma once

#include <functional>
#include <vector>

#include "kqfactor/atoms.hpp"
#include "kqfactor/block_support.hpp"
#include "kqfactor/linalg.hpp"
#include "kqfactor/tpi.hpp"

namespace kqf {

/// Maximizing block of the dual norm with its top singular pair, embedded in
/// full-length vectors. value = left^T Z right.
struct DualCertificate {
  double value = 0.0;
  BlockSupport support;
  Vector left;
  Vector right;
  bool exact = false;
};

/// Largest number of (I, J) pairs the enumeration paths accept.
inline constexpr double kEnumerationGuard = 1e6;

/// C(n, k) as a double.
double binomial(Index n, Index k);

/// Exact dual norm: max operator norm over every k x q submatrix.
/// Throws std::invalid_argument when the block count exceeds kEnumerationGuard.
DualCertificate omega_dual_enumerate(const Matrix& z, Index k, Index q);

/// Lower bound on the dual norm from the bi-truncated power iteration.
DualCertificate omega_dual_tpi(const Matrix& z, Index k, Index q, const TpiConfig& cfg = {});

/// Sum of weights of a feasible decomposition (an upper bound on the norm).
double omega_value_from_decomposition(const AtomicDecomposition& d, Index k, Index q);

struct PrimalOracleResult {
  double value = 0.0;  // sum of block trace norms of a feasible split
  double lower = 0.0;  // <K, Z> with dual norm of K at most 1
  double gap = 0.0;
  Matrix dual;         // K
  std::vector<std::pair<BlockSupport, Matrix>> components;
  int iterations = 0;
};

/// Norm value by Douglas-Rachford splitting over all k x q blocks, stopped on
/// the duality gap relative to max(1, value). Throws ConvergenceError
/// (residual = gap) after `iters`.
PrimalOracleResult omega_primal_oracle(const Matrix& z, Index k, Index q, int iters = 100000,
                                       double tol = Tolerances::primal_oracle_gap);

/// (mu / sqrt(kq)) ||Z||_1 + (1 - mu) ||Z||_*.
double gamma_mu(const Matrix& z, double mu, Index k, Index q);

enum class CheckMode { exact, tpi };

struct SubgradientReport {
  bool member = false;
  double orthogonality_residual = 0.0;
  double max_block_norm = 0.0;
  BlockSupport worst_block;
  bool exact = false;
};

/// Tests whether g lies in the subdifferential of the norm at atom a.
SubgradientReport subgradient_check(const Atom& a, const Matrix& g, Index k, Index q, CheckMode mode,
                                    const TpiConfig& cfg = {});

/// Calls fn(subset) for every size-k subset of {0..n-1} in lexicographic order.
void for_each_combination(Index n, Index k, const std::function<void(const std::vector<Index>&)>& fn);

/// All k x q block supports in lexicographic (rows, cols) order.
std::vector<BlockSupport> all_block_supports(Index m1, Index m2, Index k, Index q);

}  // namespace kqf
