#include "kqfactor/kq_norm.hpp"

#include <cmath>
#include <numeric>
#include <string>

#include <Eigen/SVD>

namespace kqf {

double binomial(Index n, Index k) {
  if (k < 0 || k > n) return 0.0;
  k = std::min(k, n - k);
  double r = 1.0;
  for (Index i = 1; i <= k; ++i) r = r * static_cast<double>(n - k + i) / static_cast<double>(i);
  return std::round(r);
}

void for_each_combination(Index n, Index k, const std::function<void(const std::vector<Index>&)>& fn) {
  std::vector<Index> idx(static_cast<std::size_t>(k));
  std::iota(idx.begin(), idx.end(), Index{0});
  for (;;) {
    fn(idx);
    Index i = k - 1;
    while (i >= 0 && idx[i] == n - k + i) --i;
    if (i < 0) return;
    ++idx[i];
    for (Index j = i + 1; j < k; ++j) idx[j] = idx[j - 1] + 1;
  }
}

namespace {

void check_budget(const Matrix& z, Index k, Index q, const char* who) {
  if (k < 1 || k > z.rows() || q < 1 || q > z.cols()) {
    throw std::invalid_argument(std::string(who) + ": sparsity (k, q) out of range");
  }
}

void check_guard(const Matrix& z, Index k, Index q, const char* who) {
  if (binomial(z.rows(), k) * binomial(z.cols(), q) > kEnumerationGuard) {
    throw std::invalid_argument(std::string(who) +
                                ": block count exceeds the enumeration guard; use the power-iteration path");
  }
}

std::vector<std::vector<Index>> all_combinations(Index n, Index k) {
  std::vector<std::vector<Index>> out;
  for_each_combination(n, k, [&](const std::vector<Index>& s) { out.push_back(s); });
  return out;
}

}  // namespace

std::vector<BlockSupport> all_block_supports(Index m1, Index m2, Index k, Index q) {
  const auto rows = all_combinations(m1, k);
  const auto cols = all_combinations(m2, q);
  std::vector<BlockSupport> out;
  out.reserve(rows.size() * cols.size());
  for (const auto& r : rows)
    for (const auto& c : cols) out.push_back({r, c});
  return out;
}

DualCertificate omega_dual_enumerate(const Matrix& z, Index k, Index q) {
  check_budget(z, k, q, "omega_dual_enumerate");
  check_guard(z, k, q, "omega_dual_enumerate");
  require_finite(z, "omega_dual_enumerate input");
  DualCertificate cert;
  cert.exact = true;
  cert.value = -1.0;
  if (k == z.rows() && q == z.cols()) {
    cert.support.rows.resize(static_cast<std::size_t>(k));
    cert.support.cols.resize(static_cast<std::size_t>(q));
    std::iota(cert.support.rows.begin(), cert.support.rows.end(), Index{0});
    std::iota(cert.support.cols.begin(), cert.support.cols.end(), Index{0});
  } else {
    const auto rows = all_combinations(z.rows(), k);
    const auto cols = all_combinations(z.cols(), q);
    for (const auto& r : rows) {
      for (const auto& c : cols) {
        const Matrix block = z(r, c);
        const double v = Eigen::JacobiSVD<Matrix>(block).singularValues()(0);
        if (v > cert.value) {
          cert.value = v;
          cert.support = {r, c};
        }
      }
    }
  }
  const SvdResult s = svd(cert.support.gather(z));
  cert.left = Vector::Zero(z.rows());
  cert.right = Vector::Zero(z.cols());
  cert.left(cert.support.rows) = s.left.col(0);
  cert.right(cert.support.cols) = s.right.col(0);
  cert.value = cert.left.dot(z * cert.right);
  return cert;
}

DualCertificate omega_dual_tpi(const Matrix& z, Index k, Index q, const TpiConfig& cfg) {
  check_budget(z, k, q, "omega_dual_tpi");
  DualCertificate cert;
  if (z.isZero(0.0)) {
    // Any unit pair certifies the zero value.
    cert.support.rows.resize(static_cast<std::size_t>(k));
    cert.support.cols.resize(static_cast<std::size_t>(q));
    std::iota(cert.support.rows.begin(), cert.support.rows.end(), Index{0});
    std::iota(cert.support.cols.begin(), cert.support.cols.end(), Index{0});
    cert.left = Vector::Zero(z.rows());
    cert.right = Vector::Zero(z.cols());
    cert.left(0) = 1.0;
    cert.right(0) = 1.0;
    return cert;
  }
  TpiResult r = ssvd_tpi(z, k, q, cfg);
  if (r.rayleigh < 0) {
    r.right = -r.right;
    r.rayleigh = -r.rayleigh;
  }
  cert.value = r.rayleigh;
  cert.support = r.supports;
  cert.left = r.left;
  cert.right = r.right;
  return cert;
}

double omega_value_from_decomposition(const AtomicDecomposition& d, Index k, Index q) {
  double total = 0.0;
  for (const auto& t : d.terms) {
    if (t.atom.left.size() != d.rows || t.atom.right.size() != d.cols) {
      throw std::invalid_argument("decomposition: atom shape does not match the matrix");
    }
    t.atom.validate(k, q);
    if (t.weight < 0) throw std::invalid_argument("decomposition: negative weight");
    total += t.weight;
  }
  return total;
}

PrimalOracleResult omega_primal_oracle(const Matrix& z, Index k, Index q, int iters, double tol) {
  check_budget(z, k, q, "omega_primal_oracle");
  check_guard(z, k, q, "omega_primal_oracle");
  require_finite(z, "omega_primal_oracle input");
  const std::vector<BlockSupport> blocks = all_block_supports(z.rows(), z.cols(), k, q);
  const std::size_t nb = blocks.size();
  constexpr double gamma = 1.0;
  constexpr int kCheckEvery = 50;

  // Each entry is covered by the same number of blocks when all are instantiated.
  Matrix coverage = Matrix::Zero(z.rows(), z.cols());
  for (const auto& b : blocks) b.scatter_add(coverage, Matrix::Ones(k, q));

  std::vector<Matrix> y(nb), x(nb), w(nb);
  for (std::size_t i = 0; i < nb; ++i) y[i] = blocks[i].gather(z).cwiseQuotient(blocks[i].gather(coverage));

  PrimalOracleResult res;
  res.gap = std::numeric_limits<double>::infinity();
  Matrix sum(z.rows(), z.cols());
  for (int it = 1; it <= iters; ++it) {
    for (std::size_t i = 0; i < nb; ++i) x[i] = prox_trace_norm(y[i], gamma);
    sum.setZero();
    for (std::size_t i = 0; i < nb; ++i) blocks[i].scatter_add(sum, 2.0 * x[i] - y[i]);
    const Matrix correction = (sum - z).cwiseQuotient(coverage);
    for (std::size_t i = 0; i < nb; ++i) {
      w[i] = 2.0 * x[i] - y[i] - blocks[i].gather(correction);
      y[i] += w[i] - x[i];
    }
    if (it % kCheckEvery != 0 && it != iters) continue;

    // w is feasible by construction; its block trace norms bound the norm from above.
    double upper = 0.0;
    for (std::size_t i = 0; i < nb; ++i) upper += nuclear_norm(w[i]);
    Matrix dual = Matrix::Zero(z.rows(), z.cols());
    for (std::size_t i = 0; i < nb; ++i) blocks[i].scatter_add(dual, (y[i] - x[i]) / gamma);
    dual = dual.cwiseQuotient(coverage);
    double dn = 0.0;
    for (const auto& b : blocks) dn = std::max(dn, operator_norm(b.gather(dual)));
    if (dn > 1.0) dual /= dn;
    const double lower = (dual.array() * z.array()).sum();
    if (upper - lower < res.gap) {
      res.value = upper;
      res.lower = lower;
      res.gap = upper - lower;
      res.dual = dual;
      res.iterations = it;
      res.components.clear();
      for (std::size_t i = 0; i < nb; ++i)
        if (nuclear_norm(w[i]) > 0.0) res.components.emplace_back(blocks[i], w[i]);
    }
    if (res.gap <= tol * std::max(1.0, res.value)) return res;
  }
  throw ConvergenceError("omega_primal_oracle: duality gap " + std::to_string(res.gap) + " above tolerance after " +
                             std::to_string(iters) + " iterations",
                         res.gap);
}

double gamma_mu(const Matrix& z, double mu, Index k, Index q) {
  if (!(mu >= 0.0 && mu <= 1.0)) throw std::invalid_argument("gamma_mu: mu must lie in [0, 1]");
  if (k < 1 || q < 1) throw std::invalid_argument("gamma_mu: k and q must be positive");
  return mu / std::sqrt(static_cast<double>(k * q)) * l1_norm(z) + (1.0 - mu) * nuclear_norm(z);
}

SubgradientReport subgradient_check(const Atom& a, const Matrix& g, Index k, Index q, CheckMode mode,
                                    const TpiConfig& cfg) {
  if (g.rows() != a.left.size() || g.cols() != a.right.size()) {
    throw std::invalid_argument("subgradient_check: shape mismatch");
  }
  a.validate(k, q);
  const Matrix am = a.materialize();
  // Restriction of the perturbation to the atom's own block.
  Matrix w0 = Matrix::Zero(g.rows(), g.cols());
  w0(a.left_support, a.right_support) = (g - am)(a.left_support, a.right_support);
  SubgradientReport rep;
  rep.orthogonality_residual = std::max((am * w0.transpose()).cwiseAbs().maxCoeff(),
                                        (am.transpose() * w0).cwiseAbs().maxCoeff());
  if (mode == CheckMode::exact) {
    const DualCertificate c = omega_dual_enumerate(g, k, q);
    rep.max_block_norm = c.value;
    rep.worst_block = c.support;
    rep.exact = true;
  } else {
    const DualCertificate c = omega_dual_tpi(g, k, q, cfg);
    rep.max_block_norm = c.value;
    rep.worst_block = c.support;
  }
  constexpr double kTol = 1e-8;
  rep.member = rep.orthogonality_residual <= kTol && rep.max_block_norm <= 1.0 + kTol;
  return rep;
}

}  // namespace kqf
