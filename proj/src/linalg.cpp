#include "kqfactor/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <vector>

#include "kqfactor/rng.hpp"

namespace kqf {

Matrix SvdResult::reconstruct() const {
  return left * singular_values.asDiagonal() * right.transpose();
}

void require_finite(const Matrix& m, const char* what) {
  if (!m.allFinite()) throw std::invalid_argument(std::string(what) + ": non-finite entries");
}

SvdResult svd(const Matrix& m) {
  require_finite(m, "svd");
  SvdResult out;
  if (m.size() == 0) {
    out.left = Matrix(m.rows(), 0);
    out.right = Matrix(m.cols(), 0);
    return out;
  }
  const unsigned opts = Eigen::ComputeThinU | Eigen::ComputeThinV;
  if (std::max(m.rows(), m.cols()) <= Tolerances::jacobi_svd_max_dim) {
    Eigen::JacobiSVD<Matrix> solver(m, opts);
    out.left = solver.matrixU();
    out.singular_values = solver.singularValues();
    out.right = solver.matrixV();
  } else {
    Eigen::BDCSVD<Matrix> solver(m, opts);
    if (solver.info() != Eigen::Success) {
      throw ConvergenceError("svd: bidiagonal divide-and-conquer failed", m.norm());
    }
    out.left = solver.matrixU();
    out.singular_values = solver.singularValues();
    out.right = solver.matrixV();
  }
  const double scale = std::max(1.0, m.norm());
  const double residual = (out.reconstruct() - m).norm();
  if (residual > 1e3 * Tolerances::svd_reconstruction * scale) {
    throw ConvergenceError("svd: reconstruction check failed", residual);
  }
  return out;
}

double operator_norm(const Matrix& m) {
  if (m.size() == 0) return 0.0;
  if (m.rows() == 1 || m.cols() == 1) return m.norm();
  if (std::max(m.rows(), m.cols()) <= Tolerances::jacobi_svd_max_dim) {
    Eigen::JacobiSVD<Matrix> solver(m);
    return solver.singularValues()(0);
  }
  Eigen::BDCSVD<Matrix> solver(m);
  return solver.singularValues()(0);
}

bool is_symmetric(const Matrix& m, double tol) {
  if (m.rows() != m.cols()) return false;
  const double scale = std::max(1.0, m.cwiseAbs().maxCoeff());
  return (m - m.transpose()).cwiseAbs().maxCoeff() <= tol * scale;
}

SymEigResult sym_eig(const Matrix& m) {
  require_finite(m, "sym_eig");
  if (!is_symmetric(m)) throw std::invalid_argument("sym_eig: matrix is not symmetric");
  const Matrix sym = 0.5 * (m + m.transpose());
  Eigen::SelfAdjointEigenSolver<Matrix> solver(sym);
  if (solver.info() != Eigen::Success) {
    throw ConvergenceError("sym_eig: tridiagonal QR failed", m.norm());
  }
  SymEigResult out;
  out.eigenvalues = solver.eigenvalues().reverse();
  out.eigenvectors = solver.eigenvectors().rowwise().reverse();
  return out;
}

Vector soft_threshold(const Vector& v, double tau) {
  if (tau < 0) throw std::invalid_argument("soft_threshold: negative threshold");
  return v.unaryExpr([tau](double x) {
    const double mag = std::abs(x) - tau;
    return mag > 0 ? std::copysign(mag, x) : 0.0;
  });
}

Matrix soft_threshold(const Matrix& m, double tau) {
  if (tau < 0) throw std::invalid_argument("soft_threshold: negative threshold");
  return m.unaryExpr([tau](double x) {
    const double mag = std::abs(x) - tau;
    return mag > 0 ? std::copysign(mag, x) : 0.0;
  });
}

Vector project_l1_ball(const Vector& v, double radius) {
  if (!(radius > 0)) throw std::invalid_argument("project_l1_ball: radius must be positive");
  if (v.lpNorm<1>() <= radius) return v;
  std::vector<double> mags(v.size());
  for (Index i = 0; i < v.size(); ++i) mags[i] = std::abs(v(i));
  std::sort(mags.begin(), mags.end(), std::greater<>());
  // Largest rho with mags[rho] > (sum_{i<=rho} mags[i] - radius) / (rho + 1).
  double cumsum = 0.0;
  double tau = 0.0;
  for (std::size_t i = 0; i < mags.size(); ++i) {
    cumsum += mags[i];
    const double candidate = (cumsum - radius) / static_cast<double>(i + 1);
    if (mags[i] > candidate) tau = candidate;
  }
  return soft_threshold(v, std::max(tau, 0.0));
}

Matrix prox_trace_norm(const Matrix& m, double tau) {
  if (tau < 0) throw std::invalid_argument("prox_trace_norm: negative threshold");
  if (tau == 0) return m;
  const SvdResult d = svd(m);
  const Vector s = soft_threshold(d.singular_values, tau);
  Index r = 0;
  while (r < s.size() && s(r) > 0) ++r;
  if (r == 0) return Matrix::Zero(m.rows(), m.cols());
  return d.left.leftCols(r) * s.head(r).asDiagonal() * d.right.leftCols(r).transpose();
}

Matrix prox_psd_trace(const Matrix& m, double tau) {
  if (tau < 0) throw std::invalid_argument("prox_psd_trace: negative threshold");
  const SymEigResult e = sym_eig(m);
  Index r = 0;
  while (r < e.eigenvalues.size() && e.eigenvalues(r) - tau > 0) ++r;
  if (r == 0) return Matrix::Zero(m.rows(), m.cols());
  const Vector shifted = (e.eigenvalues.head(r).array() - tau).matrix();
  const auto q = e.eigenvectors.leftCols(r);
  Matrix out = q * shifted.asDiagonal() * q.transpose();
  return 0.5 * (out + out.transpose());
}

double nuclear_norm(const Matrix& m) {
  if (m.size() == 0) return 0.0;
  if (std::max(m.rows(), m.cols()) <= Tolerances::jacobi_svd_max_dim) {
    return Eigen::JacobiSVD<Matrix>(m).singularValues().sum();
  }
  return Eigen::BDCSVD<Matrix>(m).singularValues().sum();
}

double l1_norm(const Matrix& m) { return m.cwiseAbs().sum(); }

Matrix gaussian_matrix(Index rows, Index cols, std::uint64_t seed) {
  if (rows <= 0 || cols <= 0) throw std::invalid_argument("gaussian_matrix: non-positive dimension");
  Pcg32 rng(seed);
  Matrix out(rows, cols);
  // Row-major fill order so the stream maps onto the serialized layout.
  for (Index i = 0; i < rows; ++i)
    for (Index j = 0; j < cols; ++j) out(i, j) = rng.normal();
  return out;
}

}  // namespace kqf
