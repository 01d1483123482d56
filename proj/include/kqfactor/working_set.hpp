#pragma once

#include <map>
#include <vector>

#include "kqfactor/atoms.hpp"
#include "kqfactor/block_support.hpp"
#include "kqfactor/linalg.hpp"
#include "kqfactor/tpi.hpp"

namespace kqf {

/// Observation (x, x', y) of the bilinear model y = x^T Z x' + noise.
struct BilinearSample {
  Vector x;
  Vector xp;
  double y = 0.0;
};

/// Squared loss R(Z): denoising 1/2 ||Z - X||_F^2 or bilinear least squares
/// 1/(2n) sum (x_i^T Z x'_i - y_i)^2.
class Loss {
 public:
  enum class Kind { denoising, bilinear };

  static Loss denoising(Matrix target);
  static Loss bilinear(std::vector<BilinearSample> samples);

  Kind kind() const { return kind_; }
  Index rows() const { return rows_; }
  Index cols() const { return cols_; }
  const Matrix& target() const { return target_; }

  double value(const Matrix& z) const;
  Matrix gradient(const Matrix& z) const;
  Matrix gradient_block(const Matrix& z, const BlockSupport& b) const;
  /// Lipschitz constant of the gradient.
  double curvature() const { return curvature_; }

 private:
  Kind kind_ = Kind::denoising;
  Index rows_ = 0;
  Index cols_ = 0;
  Matrix target_;
  std::vector<BilinearSample> samples_;
  double curvature_ = 1.0;
};

struct WorkingSet {
  Index rows = 0;
  Index cols = 0;
  Index k = 1;
  Index q = 1;
  double lambda = 0.0;
  bool psd_mode = false;
  std::map<BlockSupport, Matrix> blocks;
  Matrix z;

  static WorkingSet empty(Index rows, Index cols, Index k, Index q, double lambda, bool psd_mode);
  void recompute_z();
  /// Sum of block trace norms (traces in PSD mode).
  double penalty() const;
  /// Throws std::logic_error when a structural invariant is broken.
  void check_invariants() const;
};

struct InnerReport {
  int sweeps = 0;
  double objective = 0.0;
  double kkt_residual = 0.0;
  int removed_blocks = 0;
};

struct SolveReport {
  std::vector<double> objective_trace;
  double certificate_value = 0.0;
  bool certified = false;
  bool stalled = false;
  double kkt_residual = 0.0;
  int outer_iterations = 0;
  int inner_sweeps = 0;
  AtomicDecomposition atoms;
};

struct SolverOptions {
  double tol_inner = Tolerances::solver_inner;
  int max_inner = 20000;
  double tol_kkt = Tolerances::solver_kkt;
  int max_outer = 500;
  double weight_floor = 1e-10;
  TpiConfig tpi;
};

/// Thrown when the outer loop exhausts max_outer; carries the partial report.
class SolveError : public std::runtime_error {
 public:
  SolveError(const std::string& what, SolveReport report)
      : std::runtime_error(what), report_(std::move(report)) {}
  const SolveReport& report() const noexcept { return report_; }

 private:
  SolveReport report_;
};

struct SolveResult {
  Matrix z;
  WorkingSet ws;
  SolveReport report;
};

/// Cyclic proximal block coordinate descent on the blocks of `ws`.
/// Throws ConvergenceError after `max_inner` sweeps.
InnerReport solve_restricted(WorkingSet& ws, const Loss& loss, double tol_inner, int max_inner);

/// Active-set solver for  min R(Z) + lambda * Omega(Z). `warm` seeds the block list.
SolveResult solve(const Loss& loss, double lambda, Index k, Index q, bool psd_mode, const SolverOptions& opts = {},
                  const WorkingSet* warm = nullptr);

/// Per-block SVD (eigendecomposition in PSD mode) flattened into weighted atoms.
AtomicDecomposition extract_decomposition(const WorkingSet& ws, double weight_floor);

/// Proximal operator of lambda * Omega at X (denoising loss).
SolveResult prox_omega_kq(const Matrix& x, double lambda, Index k, Index q, bool psd_mode,
                          const SolverOptions& opts = {}, const WorkingSet* warm = nullptr);

}  // namespace kqf
