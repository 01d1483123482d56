#pragma once

#include <cstdint>

#include "kqfactor/block_support.hpp"
#include "kqfactor/linalg.hpp"

namespace kqf {

struct TpiConfig {
  double eps = Tolerances::tpi_eps;
  int max_iters = 2000;
  int restarts = 10;
  bool warm_start = true;
  std::uint64_t seed = 0;
  /// Worker threads for restarts; results do not depend on it.
  int threads = 1;

  void validate() const;
};

struct TpiResult {
  Vector left;
  Vector right;
  double rayleigh = 0.0;
  BlockSupport supports;
  int iterations = 0;
  bool converged = false;
  /// Iterations where |a^T A b| decreased by more than the monotonicity slack.
  int monotone_violations = 0;
  /// -1 for the warm start, otherwise the random restart index.
  int run = -1;
};

/// Keeps the k largest magnitudes (ties to the smaller index), zeroes the rest.
Vector truncate_top_k(const Vector& v, Index k);

/// Bi-truncated power iteration for max a^T A b over unit k-sparse a and q-sparse b.
/// Best |rayleigh| over the warm start and `cfg.restarts` Gaussian starts.
TpiResult ssvd_tpi(const Matrix& a, Index k, Index q, const TpiConfig& cfg = {});

struct SpcaTpiResult {
  Vector vector;
  double rayleigh = 0.0;
  std::vector<Index> support;
  int iterations = 0;
  bool converged = false;
  int monotone_violations = 0;
  int run = -1;
};

/// Truncated power iteration a <- T_k(S a)/||T_k(S a)|| for symmetric S.
SpcaTpiResult spca_tpi_psd(const Matrix& s, Index k, const TpiConfig& cfg = {});

}  // namespace kqf
