#include "kqfactor/tpi.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <optional>
#include <future>
#include <string>

#include "kqfactor/rng.hpp"
#include "kqfactor/vector_norms.hpp"

namespace kqf {

void TpiConfig::validate() const {
  if (!(eps > 0.0)) throw std::invalid_argument("tpi: eps must be positive");
  if (restarts < 1) throw std::invalid_argument("tpi: restarts must be at least 1");
  if (max_iters < 1) throw std::invalid_argument("tpi: max_iters must be at least 1");
}

Vector truncate_top_k(const Vector& v, Index k) {
  if (k < 1 || k > v.size()) {
    throw std::invalid_argument("truncate_top_k: k=" + std::to_string(k) + " outside [1, " +
                                std::to_string(v.size()) + "]");
  }
  Vector out = Vector::Zero(v.size());
  for (Index i : top_k_indices(v, k)) out(i) = v(i);
  return out;
}

namespace {

constexpr int kMaxRedraws = 16;

std::vector<Index> sorted_top(const Vector& v, Index k) {
  auto idx = top_k_indices(v, k);
  std::sort(idx.begin(), idx.end());
  return idx;
}

// Keeps only `idx` entries of v, normalized. Returns false if they are all zero.
bool truncate_normalize(Vector& v, const std::vector<Index>& idx) {
  Vector out = Vector::Zero(v.size());
  for (Index i : idx) out(i) = v(i);
  const double n = out.norm();
  if (n == 0.0) return false;
  v = out / n;
  return true;
}

Vector gaussian_vector(Index n, std::uint64_t seed) {
  Pcg32 rng(seed);
  Vector v(n);
  for (Index i = 0; i < n; ++i) v(i) = rng.normal();
  return v;
}

// Dense top singular pair; power iteration on A^T A beyond the small-matrix SVD range.
std::pair<Vector, Vector> top_singular_pair(const Matrix& a) {
  if (std::max(a.rows(), a.cols()) <= Tolerances::jacobi_svd_max_dim) {
    const SvdResult s = svd(a);
    return {s.left.col(0), s.right.col(0)};
  }
  Index best_col = 0;
  a.colwise().squaredNorm().maxCoeff(&best_col);
  Vector v = a.transpose() * a.col(best_col);
  if (v.norm() == 0.0) v = Vector::Ones(a.cols());
  v.normalize();
  double prev = 0.0;
  for (int it = 0; it < 300; ++it) {
    Vector w = a.transpose() * (a * v);
    const double n = w.norm();
    if (n == 0.0) break;
    v = w / n;
    if (std::abs(n - prev) <= 1e-12 * n) break;
    prev = n;
  }
  Vector u = a * v;
  const double un = u.norm();
  if (un > 0.0) u /= un;
  return {u, v};
}

void flip_sign_left(TpiResult& r) {
  if (r.left.size() == 0) return;
  Index i = 0;
  r.left.cwiseAbs().maxCoeff(&i);
  if (r.left(i) < 0) {
    r.left = -r.left;
    r.right = -r.right;
  }
}

// One run of the bi-truncated power iteration from b0. `ok` is false when the
// iterate collapsed to zero (degenerate truncation).
TpiResult tpi_run(const Matrix& a, Index k, Index q, Vector b, const TpiConfig& cfg, bool& ok) {
  TpiResult res;
  ok = false;
  std::vector<Index> jset;
  {
    const double n = b.norm();
    if (n == 0.0) return res;
    b /= n;
  }
  // Column subset active in b; the full range until b has been truncated once.
  std::vector<Index> cols_active;
  for (Index j = 0; j < b.size(); ++j)
    if (b(j) != 0.0) cols_active.push_back(j);

  Vector av;
  std::vector<Index> iset;
  double prev = 0.0;
  for (int t = 1; t <= cfg.max_iters; ++t) {
    av = a(Eigen::all, cols_active) * b(cols_active);
    iset = sorted_top(av, k);
    if (!truncate_normalize(av, iset)) return res;
    b = a(iset, Eigen::all).transpose() * av(iset);
    jset = sorted_top(b, q);
    if (!truncate_normalize(b, jset)) return res;
    cols_active = jset;
    const double rho = av(iset).dot(a(iset, jset) * b(jset));
    res.iterations = t;
    if (rho == 0.0) return res;
    if (t > 1) {
      const double slack = Tolerances::tpi_monotone_slack * std::max(1.0, std::abs(prev));
      if (std::abs(rho) < std::abs(prev) - slack) ++res.monotone_violations;
      if (std::abs(prev) < Tolerances::tpi_zero_denominator) {
        prev = rho;
        break;
      }
      if (std::abs(rho - prev) / std::abs(prev) <= cfg.eps) {
        prev = rho;
        res.converged = true;
        break;
      }
    }
    prev = rho;
  }
  res.left = av;
  res.right = b;
  res.supports.rows = iset;
  res.supports.cols = jset;
  res.rayleigh = res.left.dot(a * res.right);
  ok = true;
  return res;
}

template <typename Result, typename RunFn>
Result best_of_runs(const TpiConfig& cfg, RunFn run, std::function<double(const Result&)> score) {
  // Run index -1 is the warm start; reduction is (score, lower index) lexicographic.
  const int first = cfg.warm_start ? -1 : 0;
  const int total = cfg.restarts - first;
  std::vector<std::optional<Result>> results(static_cast<std::size_t>(total));
  const int workers = std::max(1, std::min(cfg.threads, total));
  if (workers == 1) {
    for (int i = 0; i < total; ++i) results[i] = run(first + i);
  } else {
    std::vector<std::future<void>> futs;
    for (int w = 0; w < workers; ++w) {
      futs.push_back(std::async(std::launch::async, [&, w] {
        for (int i = w; i < total; i += workers) results[i] = run(first + i);
      }));
    }
    for (auto& f : futs) f.get();
  }
  std::optional<Result> best;
  for (auto& r : results) {
    if (!r) continue;
    if (!best || score(*r) > score(*best)) best = std::move(r);
  }
  if (!best) throw std::runtime_error("tpi: every run collapsed to zero");
  return *best;
}

}  // namespace

TpiResult ssvd_tpi(const Matrix& a, Index k, Index q, const TpiConfig& cfg) {
  cfg.validate();
  if (k < 1 || k > a.rows() || q < 1 || q > a.cols()) throw std::invalid_argument("ssvd_tpi: sparsity out of range");
  require_finite(a, "ssvd_tpi input");
  if (a.isZero(0.0)) throw std::invalid_argument("ssvd_tpi: input matrix is zero");

  auto run = [&](int idx) -> std::optional<TpiResult> {
    bool ok = false;
    TpiResult r;
    if (idx < 0) {
      auto [u, v] = top_singular_pair(a);
      (void)u;
      r = tpi_run(a, k, q, truncate_top_k(v, q), cfg, ok);
    }
    for (int draw = 0; !ok && draw < kMaxRedraws; ++draw) {
      const std::uint64_t s = mix_seed(derive_seed(cfg.seed, static_cast<std::uint64_t>(idx + 1)) + draw);
      r = tpi_run(a, k, q, gaussian_vector(a.cols(), s), cfg, ok);
    }
    if (!ok) return std::nullopt;
    r.run = idx;
    flip_sign_left(r);
    return r;
  };
  return best_of_runs<TpiResult>(cfg, run, [](const TpiResult& r) { return std::abs(r.rayleigh); });
}

namespace {

SpcaTpiResult spca_run(const Matrix& s, Index k, Vector a, const TpiConfig& cfg, bool& ok) {
  SpcaTpiResult res;
  ok = false;
  std::vector<Index> support;
  {
    support = sorted_top(a, k);
    if (!truncate_normalize(a, support)) return res;
  }
  double prev = a(support).dot(s(support, support) * a(support));
  for (int t = 1; t <= cfg.max_iters; ++t) {
    Vector sa = s(Eigen::all, support) * a(support);
    support = sorted_top(sa, k);
    if (!truncate_normalize(sa, support)) return res;
    a = std::move(sa);
    const double rho = a(support).dot(s(support, support) * a(support));
    res.iterations = t;
    const double slack = Tolerances::tpi_monotone_slack * std::max(1.0, std::abs(prev));
    if (rho < prev - slack) ++res.monotone_violations;
    if (std::abs(prev) < Tolerances::tpi_zero_denominator) {
      prev = rho;
      break;
    }
    const bool stop = std::abs(rho - prev) / std::abs(prev) <= cfg.eps;
    prev = rho;
    if (stop) {
      res.converged = true;
      break;
    }
  }
  Index i = 0;
  a.cwiseAbs().maxCoeff(&i);
  if (a(i) < 0) a = -a;
  res.vector = a;
  res.support = support;
  res.rayleigh = a.dot(s * a);
  ok = true;
  return res;
}

}  // namespace

SpcaTpiResult spca_tpi_psd(const Matrix& s, Index k, const TpiConfig& cfg) {
  cfg.validate();
  if (s.rows() != s.cols()) throw std::invalid_argument("spca_tpi_psd: matrix must be square");
  if (!is_symmetric(s, Tolerances::symmetry)) throw std::invalid_argument("spca_tpi_psd: matrix must be symmetric");
  if (k < 1 || k > s.rows()) throw std::invalid_argument("spca_tpi_psd: k out of range");
  require_finite(s, "spca_tpi_psd input");

  auto run = [&](int idx) -> std::optional<SpcaTpiResult> {
    bool ok = false;
    SpcaTpiResult r;
    if (idx < 0) {
      const SymEigResult e = sym_eig(s);
      r = spca_run(s, k, e.eigenvectors.col(0), cfg, ok);
    }
    for (int draw = 0; !ok && draw < kMaxRedraws; ++draw) {
      const std::uint64_t seed = mix_seed(derive_seed(cfg.seed, static_cast<std::uint64_t>(idx + 1)) + draw);
      r = spca_run(s, k, gaussian_vector(s.rows(), seed), cfg, ok);
    }
    if (!ok) return std::nullopt;
    r.run = idx;
    return r;
  };
  return best_of_runs<SpcaTpiResult>(cfg, run, [](const SpcaTpiResult& r) { return r.rayleigh; });
}

}  // namespace kqf
