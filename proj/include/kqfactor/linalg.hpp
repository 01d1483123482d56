#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace kqf {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using Index = Eigen::Index;

/// Numerical tolerances shared across modules. Every hard-coded threshold in
/// the library reads from here so that experiments can be audited in one place.
struct Tolerances {
  static constexpr double svd_reconstruction = 1e-10;
  static constexpr double symmetry = 1e-10;
  static constexpr double psd_floor = 1e-10;
  static constexpr double theta_boundary_slack = 1e-12;
  static constexpr double tpi_eps = 1e-8;
  static constexpr double tpi_monotone_slack = 1e-12;
  static constexpr double tpi_zero_denominator = 1e-300;
  static constexpr double solver_inner = 1e-9;
  static constexpr double solver_kkt = 1e-3;
  static constexpr double primal_oracle_gap = 1e-6;
  static constexpr double splitting_residual = 1e-6;
  /// Largest block side solved with one-sided Jacobi; bidiagonalization above.
  static constexpr Index jacobi_svd_max_dim = 64;
};

/// Raised when an iterative kernel fails to reach its tolerance.
class ConvergenceError : public std::runtime_error {
 public:
  ConvergenceError(const std::string& what, double residual)
      : std::runtime_error(what + " (residual " + std::to_string(residual) + ")"),
        residual_(residual) {}
  double residual() const noexcept { return residual_; }

 private:
  double residual_;
};

struct SvdResult {
  Matrix left;             // m x r, orthonormal columns
  Vector singular_values;  // r = min(m, n), nonincreasing
  Matrix right;            // n x r, orthonormal columns

  Matrix reconstruct() const;
};

struct SymEigResult {
  Vector eigenvalues;  // nonincreasing
  Matrix eigenvectors;
};

/// Thin SVD. One-sided Jacobi for small blocks, divide-and-conquer
/// bidiagonalization otherwise.
SvdResult svd(const Matrix& m);

/// Largest singular value only.
double operator_norm(const Matrix& m);

bool is_symmetric(const Matrix& m, double tol = Tolerances::symmetry);

SymEigResult sym_eig(const Matrix& m);

Vector soft_threshold(const Vector& v, double tau);
Matrix soft_threshold(const Matrix& m, double tau);

/// Euclidean projection onto {x : ||x||_1 <= radius}.
Vector project_l1_ball(const Vector& v, double radius);

/// argmin_Z 1/2 ||Z - M||_F^2 + tau ||Z||_*
Matrix prox_trace_norm(const Matrix& m, double tau);

/// argmin_{Z psd} 1/2 ||Z - M||_F^2 + tau tr(Z)
Matrix prox_psd_trace(const Matrix& m, double tau);

double nuclear_norm(const Matrix& m);
double l1_norm(const Matrix& m);

/// I.i.d. N(0,1) entries from the library's PCG32 stream for `seed`.
Matrix gaussian_matrix(Index rows, Index cols, std::uint64_t seed);

void require_finite(const Matrix& m, const char* what);

}  // namespace kqf
