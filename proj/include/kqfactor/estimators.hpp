#pragma once

#include <optional>
#include <string>
#include <vector>

#include "kqfactor/atoms.hpp"
#include "kqfactor/linalg.hpp"
#include "kqfactor/working_set.hpp"

namespace kqf {

enum class NormKind { l1, trace, omega_kq };

std::string to_string(NormKind n);
NormKind norm_kind_from_string(const std::string& s);

/// How the constrained (k,q) denoiser meets its budget.
enum class OmegaProjection {
  /// Search the penalty level until the prox output's norm matches the radius.
  lambda_search,
  /// One prox at a fixed small lambda, then rescale its weights onto the l1 ball.
  small_lambda,
};

struct DenoiserSpec {
  NormKind norm = NormKind::l1;
  Index k = 1;
  Index q = 1;
  double radius = 0.0;
  OmegaProjection projection = OmegaProjection::lambda_search;
  /// Used by OmegaProjection::small_lambda; <= 0 selects 0.1 * sigma * sqrt(k ln m1 + q ln m2).
  double small_lambda = 0.0;
  /// Noise level used for the default small lambda.
  double sigma = 0.0;
  /// Relative accuracy of the lambda search on the norm budget.
  double search_tol = 1e-6;
  int max_search_steps = 80;
  SolverOptions solver;

  void validate() const;
};

struct DenoiseResult {
  Matrix z;
  AtomicDecomposition decomposition;  // omega_kq only
  double norm_value = 0.0;            // norm of z (decomposition value for omega_kq)
  double lambda = 0.0;                // penalty level used, when any
  int prox_solves = 0;
};

/// Projection of y onto the ball {norm <= spec.radius}.
DenoiseResult constrained_denoise(const Matrix& y, const DenoiserSpec& spec);

/// argmin 1/2 ||Z - Y||^2 + lambda * norm(Z).
DenoiseResult penalized_denoise(const Matrix& y, NormKind norm, double lambda, Index k, Index q,
                                const SolverOptions& opts = {});

/// Closed-form upper bounds on the expected error of the oracle penalized denoisers.
double oracle_slowrate_bound(Index m1, Index m2, Index k, Index q, double sigma, NormKind norm);

enum class SpcaMethod { sample_cov, trace_psd, l1, trace_plus_l1_psd, sequential, omega_k_psd };

std::string to_string(SpcaMethod m);
SpcaMethod spca_method_from_string(const std::string& s);
const std::vector<SpcaMethod>& all_spca_methods();

struct SpcaEstimatorSpec {
  SpcaMethod method = SpcaMethod::sample_cov;
  double lambda = 0.0;
  double mu = 0.0;
  Index k = 1;
  Index r = 1;
  SolverOptions solver;
  int splitting_max_iters = 20000;
  double splitting_tol = Tolerances::splitting_residual;

  void validate() const;
  std::string describe() const;
};

struct CovarianceResult {
  Matrix estimate;
  std::vector<Vector> components;  // sequential: unit loadings per round
  std::optional<WorkingSet> working_set;
  AtomicDecomposition atoms;  // omega_k_psd
  Matrix split_primal;        // trace_plus_l1_psd splitting state
  Matrix split_dual;
  double split_rho = 1.0;
  int iterations = 0;
};

/// `warm` (a previous result of the same method) seeds iterative methods.
CovarianceResult estimate_covariance_detailed(const Matrix& sigma_hat, const SpcaEstimatorSpec& spec,
                                              const CovarianceResult* warm = nullptr);
Matrix estimate_covariance(const Matrix& sigma_hat, const SpcaEstimatorSpec& spec);

/// ||est - truth||_F / ||truth||_F.
double relative_error(const Matrix& est, const Matrix& truth);

struct TuningGrid {
  std::vector<double> lambdas;
  std::vector<double> mus;
};

/// Parameter grid searched for each method (empty lambdas for parameter-free methods).
TuningGrid default_grid(SpcaMethod m);

struct TunedEstimate {
  SpcaEstimatorSpec spec;
  CovarianceResult result;
  double relative_error = 0.0;
  int evaluated = 0;
};

/// Best grid cell by true relative error against `truth`. Penalty grids are
/// walked from large to small lambda with warm starts; omega_k_psd stops after
/// `patience` consecutive cells without improvement.
TunedEstimate tune_oracle(const Matrix& sigma_hat, const Matrix& truth, const SpcaEstimatorSpec& base,
                          const TuningGrid& grid, int patience = 3);

/// Values of 10^a for `count` equally spaced exponents in [lo, hi].
std::vector<double> logspace(double lo, double hi, int count);

}  // namespace kqf
