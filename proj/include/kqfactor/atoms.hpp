#pragma once

#include <cstdint>
#include <string_view>
#include <vector>

#include "kqfactor/linalg.hpp"

namespace kqf {

/// Rank-one matrix left * right^T with unit-norm sparse factors.
struct Atom {
  Vector left;
  Vector right;
  std::vector<Index> left_support;   // sorted
  std::vector<Index> right_support;  // sorted
  bool flat = false;

  Matrix materialize() const { return left * right.transpose(); }
  /// Throws std::invalid_argument when a declared invariant does not hold.
  void validate(Index k, Index q) const;
};

/// Flat atom: entries +-1/sqrt(k) on `left_support`, +-1/sqrt(q) on `right_support`.
/// Sign vectors may be empty (all positive).
Atom make_flat_atom(Index rows, Index cols, Index k, Index q, const std::vector<Index>& left_support,
                    const std::vector<Index>& right_support, const std::vector<int>& left_signs = {},
                    const std::vector<int>& right_signs = {});

/// Atom built from arbitrary unit vectors; supports are the nonzero patterns.
Atom make_atom(const Vector& left, const Vector& right);

struct DecompositionTerm {
  double weight = 0.0;
  Atom atom;
};

struct AtomicDecomposition {
  Index rows = 0;
  Index cols = 0;
  std::vector<DecompositionTerm> terms;

  Matrix materialize() const;
  double weight_sum() const;
  /// Stable sort by nonincreasing weight.
  void sort_terms();
};

struct GroundTruthSpec {
  Index rows = 0;
  Index cols = 0;
  Index k = 1;
  Index q = 1;
  Index atoms = 1;
  Index overlap = 0;
  bool flat = true;
  bool random_signs = false;
  bool random_placement = false;
  std::uint64_t seed = 0;

  void validate() const;
};

struct GroundTruth {
  Matrix matrix;
  AtomicDecomposition decomposition;
};

/// Unit-weight sum of atoms laid out in consecutive windows that share
/// `overlap` indices with their neighbour (or at random offsets when requested).
GroundTruth sample_ground_truth(const GroundTruthSpec& spec);

struct CovarianceModel {
  Matrix samples;     // n x p
  Matrix sigma_star;  // p x p, sum of flat a_i a_i^T
  Matrix sigma_hat;   // (1/n) sum x_i x_i^T, uncentred
  std::vector<Vector> factors;
};

CovarianceModel sample_covariance_model(Index p, Index n, Index k, Index blocks, Index overlap, double sigma,
                                        std::uint64_t seed);

/// Fixture matrices: "ones3", "half_ones4", "psd_example".
Matrix fixture(std::string_view name);

/// Number of entries with |x| > 0.
Index count_nonzeros(const Matrix& m);

}  // namespace kqf
