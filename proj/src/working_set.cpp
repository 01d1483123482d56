#include "kqfactor/working_set.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "kqfactor/rng.hpp"

namespace kqf {

Loss Loss::denoising(Matrix target) {
  require_finite(target, "denoising target");
  Loss l;
  l.kind_ = Kind::denoising;
  l.rows_ = target.rows();
  l.cols_ = target.cols();
  l.target_ = std::move(target);
  l.curvature_ = 1.0;
  return l;
}

Loss Loss::bilinear(std::vector<BilinearSample> samples) {
  if (samples.empty()) throw std::invalid_argument("bilinear loss: no samples");
  Loss l;
  l.kind_ = Kind::bilinear;
  l.rows_ = samples.front().x.size();
  l.cols_ = samples.front().xp.size();
  for (const auto& s : samples) {
    if (s.x.size() != l.rows_ || s.xp.size() != l.cols_) throw std::invalid_argument("bilinear loss: inconsistent sample sizes");
  }
  l.samples_ = std::move(samples);
  // Largest eigenvalue of Z -> (1/n) sum <x x'^T, Z> x x'^T by 50 power iterations.
  const double n = static_cast<double>(l.samples_.size());
  Matrix z = Matrix::Constant(l.rows_, l.cols_, 1.0);
  z /= z.norm();
  double est = 0.0;
  for (int it = 0; it < 50; ++it) {
    Matrix next = Matrix::Zero(l.rows_, l.cols_);
    for (const auto& s : l.samples_) next.noalias() += (s.x.dot(z * s.xp) / n) * s.x * s.xp.transpose();
    est = next.norm();
    if (est == 0.0) break;
    z = next / est;
  }
  // Power iteration approaches from below; a small margin keeps steps safe.
  l.curvature_ = std::max(est * 1.01, 1e-12);
  return l;
}

double Loss::value(const Matrix& z) const {
  if (kind_ == Kind::denoising) return 0.5 * (z - target_).squaredNorm();
  double acc = 0.0;
  for (const auto& s : samples_) {
    const double r = s.x.dot(z * s.xp) - s.y;
    acc += r * r;
  }
  return 0.5 * acc / static_cast<double>(samples_.size());
}

Matrix Loss::gradient(const Matrix& z) const {
  if (kind_ == Kind::denoising) return z - target_;
  Matrix g = Matrix::Zero(rows_, cols_);
  const double n = static_cast<double>(samples_.size());
  for (const auto& s : samples_) g.noalias() += ((s.x.dot(z * s.xp) - s.y) / n) * s.x * s.xp.transpose();
  return g;
}

Matrix Loss::gradient_block(const Matrix& z, const BlockSupport& b) const {
  if (kind_ == Kind::denoising) return z(b.rows, b.cols) - target_(b.rows, b.cols);
  Matrix g = Matrix::Zero(static_cast<Index>(b.rows.size()), static_cast<Index>(b.cols.size()));
  const double n = static_cast<double>(samples_.size());
  for (const auto& s : samples_) {
    const Vector xi = s.x(b.rows);
    const Vector xj = s.xp(b.cols);
    g.noalias() += ((s.x.dot(z * s.xp) - s.y) / n) * xi * xj.transpose();
  }
  return g;
}

WorkingSet WorkingSet::empty(Index rows, Index cols, Index k, Index q, double lambda, bool psd_mode) {
  if (rows <= 0 || cols <= 0) throw std::invalid_argument("working set: empty shape");
  if (k < 1 || k > rows || q < 1 || q > cols) throw std::invalid_argument("working set: sparsity out of range");
  if (!(lambda > 0.0)) throw std::invalid_argument("working set: lambda must be positive");
  if (psd_mode && (rows != cols || k != q)) throw std::invalid_argument("working set: PSD mode needs square shape and k = q");
  WorkingSet ws;
  ws.rows = rows;
  ws.cols = cols;
  ws.k = k;
  ws.q = q;
  ws.lambda = lambda;
  ws.psd_mode = psd_mode;
  ws.z = Matrix::Zero(rows, cols);
  return ws;
}

void WorkingSet::recompute_z() {
  z = Matrix::Zero(rows, cols);
  for (const auto& [s, b] : blocks) s.scatter_add(z, b);
}

double WorkingSet::penalty() const {
  double p = 0.0;
  for (const auto& [s, b] : blocks) p += psd_mode ? b.trace() : nuclear_norm(b);
  return p;
}

void WorkingSet::check_invariants() const {
  Matrix sum = Matrix::Zero(rows, cols);
  for (const auto& [s, b] : blocks) {
    s.validate(rows, cols);
    if (static_cast<Index>(s.rows.size()) != k || static_cast<Index>(s.cols.size()) != q) {
      throw std::logic_error("working set: block support has the wrong size");
    }
    if (b.rows() != k || b.cols() != q) throw std::logic_error("working set: block value has the wrong shape");
    if (psd_mode) {
      if (s.rows != s.cols) throw std::logic_error("working set: PSD block is not symmetric in support");
      if (!is_symmetric(b, 1e-9)) throw std::logic_error("working set: PSD block is not symmetric");
      if (sym_eig(0.5 * (b + b.transpose())).eigenvalues.minCoeff() < -1e-9) {
        throw std::logic_error("working set: PSD block has a negative eigenvalue");
      }
    }
    s.scatter_add(sum, b);
  }
  if ((sum - z).cwiseAbs().maxCoeff() > 1e-10 * std::max(1.0, sum.cwiseAbs().maxCoeff())) {
    throw std::logic_error("working set: cached Z differs from the block sum");
  }
}

namespace {

struct Shrunk {
  Matrix value;
  double norm = 0.0;
};

// prox of tau * trace norm (PSD mode: tau * trace + PSD indicator).
Shrunk shrink(const Matrix& m, double tau, bool psd) {
  Shrunk out;
  if (psd) {
    const SymEigResult e = sym_eig(0.5 * (m + m.transpose()));
    Vector d = (e.eigenvalues.array() - tau).max(0.0);
    out.norm = d.sum();
    if (out.norm == 0.0) {
      out.value = Matrix::Zero(m.rows(), m.cols());
    } else {
      out.value = e.eigenvectors * d.asDiagonal() * e.eigenvectors.transpose();
      out.value = (0.5 * (out.value + out.value.transpose())).eval();
    }
    return out;
  }
  const SvdResult s = svd(m);
  Vector d = (s.singular_values.array() - tau).max(0.0);
  out.norm = d.sum();
  out.value = out.norm == 0.0 ? Matrix::Zero(m.rows(), m.cols())
                              : Matrix(s.left * d.asDiagonal() * s.right.transpose());
  return out;
}

double block_norm(const Matrix& b, bool psd) { return psd ? b.trace() : nuclear_norm(b); }

double kkt_residual_block(const Matrix& g, const Matrix& b, double lambda, bool psd) {
  constexpr double kRankTol = 1e-12;
  if (psd) {
    const SymEigResult e = sym_eig(0.5 * (b + b.transpose()));
    double res = 0.0;
    for (Index i = 0; i < e.eigenvalues.size(); ++i) {
      if (e.eigenvalues(i) <= kRankTol) continue;
      const Vector u = e.eigenvectors.col(i);
      res = std::max(res, (g * u + lambda * u).norm());
    }
    const double top = sym_eig(-0.5 * (g + g.transpose())).eigenvalues(0);
    return std::max(res, top - lambda);
  }
  const SvdResult s = svd(b);
  double res = 0.0;
  for (Index i = 0; i < s.singular_values.size(); ++i) {
    if (s.singular_values(i) <= kRankTol) continue;
    const Vector u = s.left.col(i);
    const Vector v = s.right.col(i);
    res = std::max({res, (g * v + lambda * u).norm(), (g.transpose() * u + lambda * v).norm()});
  }
  return std::max(res, operator_norm(g) - lambda);
}

double objective(const WorkingSet& ws, const Loss& loss) { return loss.value(ws.z) + ws.lambda * ws.penalty(); }

}  // namespace

InnerReport solve_restricted(WorkingSet& ws, const Loss& loss, double tol_inner, int max_inner) {
  if (loss.rows() != ws.rows || loss.cols() != ws.cols) throw std::invalid_argument("solve_restricted: shape mismatch");
  InnerReport rep;
  const double l = loss.curvature();
  const double tau = ws.lambda / l;
  std::map<BlockSupport, double> norms;
  for (const auto& [s, b] : ws.blocks) norms[s] = block_norm(b, ws.psd_mode);
  auto current = [&] {
    double p = 0.0;
    for (const auto& [s, n] : norms) p += n;
    return loss.value(ws.z) + ws.lambda * p;
  };
  double prev = current();
  rep.objective = prev;
  if (!ws.blocks.empty()) {
    bool done = false;
    for (int sweep = 1; sweep <= max_inner; ++sweep) {
      for (auto& [s, b] : ws.blocks) {
        const Matrix g = loss.gradient_block(ws.z, s);
        Shrunk next = shrink(b - g / l, tau, ws.psd_mode);
        ws.z(s.rows, s.cols) += next.value - b;
        b = std::move(next.value);
        norms[s] = next.norm;
      }
      rep.sweeps = sweep;
      const double obj = current();
      rep.objective = obj;
      if (prev - obj <= tol_inner * std::max(std::abs(obj), 1e-300)) {
        done = true;
        break;
      }
      prev = obj;
    }
    if (!done) {
      throw ConvergenceError("solve_restricted: no convergence after " + std::to_string(max_inner) + " sweeps",
                             prev - rep.objective);
    }
  }
  for (auto it = ws.blocks.begin(); it != ws.blocks.end();) {
    if (it->second.isZero(0.0)) {
      it = ws.blocks.erase(it);
      ++rep.removed_blocks;
    } else {
      ++it;
    }
  }
  ws.recompute_z();
  rep.objective = objective(ws, loss);
  for (const auto& [s, b] : ws.blocks) {
    rep.kkt_residual = std::max(rep.kkt_residual, kkt_residual_block(loss.gradient_block(ws.z, s), b, ws.lambda, ws.psd_mode));
  }
  return rep;
}

namespace {

struct Probe {
  double value = 0.0;
  BlockSupport support;
};

Probe probe_gradient(const Matrix& g, Index k, Index q, bool psd, const TpiConfig& cfg) {
  Probe p;
  if (g.isZero(0.0)) {
    for (Index i = 0; i < k; ++i) p.support.rows.push_back(i);
    for (Index j = 0; j < q; ++j) p.support.cols.push_back(j);
    return p;
  }
  if (psd) {
    // Maximise a^T (-G) a over k-sparse unit a; the shift keeps the iteration on a PSD matrix.
    Matrix s = -0.5 * (g + g.transpose());
    const double shift = std::max(0.0, -sym_eig(s).eigenvalues.minCoeff());
    s.diagonal().array() += shift;
    const SpcaTpiResult r = spca_tpi_psd(s, k, cfg);
    p.value = r.rayleigh - shift;
    p.support.rows = r.support;
    p.support.cols = r.support;
    return p;
  }
  // Random starts seed only the right factor; probing the transpose as well
  // starts the other side and finds narrow violated blocks far more often.
  const TpiResult r = ssvd_tpi(g, k, q, cfg);
  const TpiResult t = ssvd_tpi(g.transpose(), q, k, cfg);
  if (std::abs(t.rayleigh) > std::abs(r.rayleigh)) {
    p.value = std::abs(t.rayleigh);
    p.support = {t.supports.cols, t.supports.rows};
  } else {
    p.value = std::abs(r.rayleigh);
    p.support = r.supports;
  }
  return p;
}

}  // namespace

SolveResult solve(const Loss& loss, double lambda, Index k, Index q, bool psd_mode, const SolverOptions& opts,
                  const WorkingSet* warm) {
  if (!(lambda > 0.0)) throw std::invalid_argument("solve: lambda must be positive");
  if (psd_mode && loss.kind() == Loss::Kind::denoising && !is_symmetric(loss.target(), Tolerances::symmetry)) {
    throw std::invalid_argument("solve: PSD mode requires a symmetric target");
  }
  SolveResult out;
  out.ws = WorkingSet::empty(loss.rows(), loss.cols(), k, q, lambda, psd_mode);
  if (warm) {
    if (warm->rows != loss.rows() || warm->cols != loss.cols() || warm->k != k || warm->q != q ||
        warm->psd_mode != psd_mode) {
      throw std::invalid_argument("solve: warm start does not match the problem");
    }
    out.ws.blocks = warm->blocks;
    out.ws.recompute_z();
  }
  SolveReport& rep = out.report;
  double tol = opts.tol_inner;
  int tightenings = 0;
  constexpr int kMaxTightenings = 3;
  for (int outer = 1;; ++outer) {
    if (outer > opts.max_outer) {
      out.ws.check_invariants();
      rep.atoms = extract_decomposition(out.ws, opts.weight_floor);
      throw SolveError("solve: max_outer (" + std::to_string(opts.max_outer) + ") exceeded", rep);
    }
    const InnerReport inner = solve_restricted(out.ws, loss, tol, opts.max_inner);
    rep.inner_sweeps += inner.sweeps;
    rep.objective_trace.push_back(inner.objective);
    rep.kkt_residual = inner.kkt_residual;
    rep.outer_iterations = outer;

    TpiConfig cfg = opts.tpi;
    cfg.seed = mix_seed(opts.tpi.seed + static_cast<std::uint64_t>(outer));
    const Probe p = probe_gradient(loss.gradient(out.ws.z), k, q, psd_mode, cfg);
    rep.certificate_value = p.value;
    if (p.value <= lambda * (1.0 + opts.tol_kkt)) {
      rep.certified = true;
      break;
    }
    if (out.ws.blocks.count(p.support)) {
      // Active block still violated: the restricted solve was too loose.
      if (tightenings < kMaxTightenings) {
        ++tightenings;
        tol *= 1e-3;
        continue;
      }
      rep.stalled = true;
      break;
    }
    out.ws.blocks.emplace(p.support, Matrix::Zero(k, q));
  }
  out.ws.check_invariants();
  out.z = out.ws.z;
  rep.atoms = extract_decomposition(out.ws, opts.weight_floor);
  return out;
}

AtomicDecomposition extract_decomposition(const WorkingSet& ws, double weight_floor) {
  AtomicDecomposition d;
  d.rows = ws.rows;
  d.cols = ws.cols;
  for (const auto& [s, b] : ws.blocks) {
    if (ws.psd_mode) {
      const SymEigResult e = sym_eig(0.5 * (b + b.transpose()));
      for (Index i = 0; i < e.eigenvalues.size(); ++i) {
        if (e.eigenvalues(i) <= weight_floor) continue;
        Vector u = Vector::Zero(ws.rows);
        u(s.rows) = e.eigenvectors.col(i);
        d.terms.push_back({e.eigenvalues(i), make_atom(u, u)});
      }
    } else {
      const SvdResult sv = svd(b);
      for (Index i = 0; i < sv.singular_values.size(); ++i) {
        if (sv.singular_values(i) <= weight_floor) continue;
        Vector u = Vector::Zero(ws.rows);
        Vector v = Vector::Zero(ws.cols);
        u(s.rows) = sv.left.col(i);
        v(s.cols) = sv.right.col(i);
        d.terms.push_back({sv.singular_values(i), make_atom(u, v)});
      }
    }
  }
  d.sort_terms();
  return d;
}

SolveResult prox_omega_kq(const Matrix& x, double lambda, Index k, Index q, bool psd_mode, const SolverOptions& opts,
                          const WorkingSet* warm) {
  if (psd_mode && !is_symmetric(x, Tolerances::symmetry)) {
    throw std::invalid_argument("prox_omega_kq: PSD mode requires a symmetric input");
  }
  return solve(Loss::denoising(x), lambda, k, q, psd_mode, opts, warm);
}

}  // namespace kqf
