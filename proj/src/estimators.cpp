#include "kqfactor/estimators.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "kqfactor/kq_norm.hpp"
#include "kqfactor/tpi.hpp"

namespace kqf {

std::string to_string(NormKind n) {
  switch (n) {
    case NormKind::l1: return "l1";
    case NormKind::trace: return "trace";
    case NormKind::omega_kq: return "omega";
  }
  return "?";
}

NormKind norm_kind_from_string(const std::string& s) {
  if (s == "l1") return NormKind::l1;
  if (s == "trace") return NormKind::trace;
  if (s == "omega" || s == "omega_kq") return NormKind::omega_kq;
  throw std::invalid_argument("unknown norm '" + s + "' (expected l1, trace or omega)");
}

void DenoiserSpec::validate() const {
  if (!(radius >= 0.0)) throw std::invalid_argument("denoiser: radius must be nonnegative");
  if (k < 1 || q < 1) throw std::invalid_argument("denoiser: k and q must be positive");
  if (!(search_tol > 0.0)) throw std::invalid_argument("denoiser: search_tol must be positive");
}

namespace {

DenoiseResult omega_from_prox(const SolveResult& s) {
  DenoiseResult r;
  r.z = s.z;
  r.decomposition = s.report.atoms;
  r.norm_value = s.ws.penalty();
  return r;
}

// Shrinks decomposition weights onto the l1 ball of the given radius and rebuilds z.
void project_weights(DenoiseResult& r, double radius) {
  const Index n = static_cast<Index>(r.decomposition.terms.size());
  if (n == 0) return;
  Vector w(n);
  for (Index i = 0; i < n; ++i) w(i) = r.decomposition.terms[i].weight;
  if (w.sum() <= radius) {
    r.norm_value = w.sum();
    r.z = r.decomposition.materialize();
    return;
  }
  const Vector p = radius > 0.0 ? project_l1_ball(w, radius) : Vector::Zero(n);
  std::vector<DecompositionTerm> kept;
  for (Index i = 0; i < n; ++i)
    if (p(i) > 0.0) kept.push_back({p(i), r.decomposition.terms[i].atom});
  r.decomposition.terms = std::move(kept);
  r.decomposition.sort_terms();
  r.norm_value = r.decomposition.weight_sum();
  r.z = r.decomposition.materialize();
}

DenoiseResult omega_lambda_search(const Matrix& y, const DenoiserSpec& spec) {
  const double radius = spec.radius;
  std::optional<WorkingSet> warm;
  int solves = 0;
  struct Point {
    double lambda;
    double f;
    DenoiseResult result;
  };
  auto eval = [&](double lambda) {
    SolveResult s = prox_omega_kq(y, lambda, spec.k, spec.q, false, spec.solver, warm ? &*warm : nullptr);
    ++solves;
    warm = s.ws;
    Point p{lambda, 0.0, omega_from_prox(s)};
    p.result.lambda = lambda;
    p.f = p.result.norm_value - radius;
    return p;
  };

  const double tol = spec.search_tol * radius;
  double top = omega_dual_tpi(y, spec.k, spec.q, spec.solver.tpi).value;
  Point hi = eval(top);
  while (hi.f > 0.0) hi = eval(hi.lambda * 2.0);
  if (std::abs(hi.f) <= tol) {
    hi.result.prox_solves = solves;
    project_weights(hi.result, radius);
    return hi.result;
  }
  // Walk down from the top with secant predictions until the budget is exceeded.
  Point lo = eval(hi.lambda * 0.5);
  int steps = 0;
  while (lo.f < -tol) {
    if (++steps > spec.max_search_steps) {
      lo.result.prox_solves = solves;
      return lo.result;  // y lies (numerically) inside the ball
    }
    // Far from the budget: halve. Close to it the active set grows quickly as
    // lambda falls, so descend in small geometric steps.
    const double slope = (lo.f - hi.f) / (lo.lambda - hi.lambda);
    const double floor = lo.f < -0.1 * radius ? 0.5 : 0.9;
    double next = lo.lambda * floor;
    if (slope < 0.0 && std::isfinite(slope)) next = std::max(next, (lo.lambda - lo.f / slope) * 0.98);
    hi = std::move(lo);
    lo = eval(next);
  }
  // Illinois false position on [lo, hi]: f(lo) >= -tol, f(hi) < 0.
  int side = 0;
  double flo = lo.f, fhi = hi.f;
  while (std::abs(lo.f) > tol && steps++ < spec.max_search_steps) {
    const double next = (lo.lambda * fhi - hi.lambda * flo) / (fhi - flo);
    Point mid = eval(next);
    if (mid.f > 0.0) {
      lo = std::move(mid);
      flo = lo.f;
      if (side == 1) fhi *= 0.5;
      side = 1;
    } else {
      hi = std::move(mid);
      fhi = hi.f;
      if (side == -1) flo *= 0.5;
      side = -1;
      if (std::abs(hi.f) <= tol) {
        lo = std::move(hi);
        break;
      }
    }
    if (std::abs(hi.lambda - lo.lambda) <= 1e-14 * hi.lambda) break;
  }
  lo.result.prox_solves = solves;
  project_weights(lo.result, radius);
  return lo.result;
}

}  // namespace

DenoiseResult constrained_denoise(const Matrix& y, const DenoiserSpec& spec) {
  spec.validate();
  require_finite(y, "constrained_denoise input");
  DenoiseResult r;
  if (spec.radius == 0.0) {
    r.z = Matrix::Zero(y.rows(), y.cols());
    r.decomposition.rows = y.rows();
    r.decomposition.cols = y.cols();
    return r;
  }
  switch (spec.norm) {
    case NormKind::l1: {
      const Eigen::Map<const Vector> flat(y.data(), y.size());
      const Vector p = project_l1_ball(flat, spec.radius);
      r.z = Eigen::Map<const Matrix>(p.data(), y.rows(), y.cols());
      r.norm_value = l1_norm(r.z);
      return r;
    }
    case NormKind::trace: {
      const SvdResult s = svd(y);
      const Vector sv = project_l1_ball(s.singular_values, spec.radius);
      r.z = s.left * sv.asDiagonal() * s.right.transpose();
      r.norm_value = sv.sum();
      return r;
    }
    case NormKind::omega_kq: {
      if (spec.projection == OmegaProjection::lambda_search) return omega_lambda_search(y, spec);
      double lambda = spec.small_lambda;
      if (lambda <= 0.0) {
        if (!(spec.sigma > 0.0)) throw std::invalid_argument("denoiser: small-lambda mode needs sigma or small_lambda");
        lambda = 0.1 * spec.sigma *
                 std::sqrt(spec.k * std::log(static_cast<double>(y.rows())) + spec.q * std::log(static_cast<double>(y.cols())));
      }
      const SolveResult s = prox_omega_kq(y, lambda, spec.k, spec.q, false, spec.solver);
      r = omega_from_prox(s);
      r.lambda = lambda;
      r.prox_solves = 1;
      project_weights(r, spec.radius);
      return r;
    }
  }
  throw std::logic_error("constrained_denoise: unhandled norm");
}

DenoiseResult penalized_denoise(const Matrix& y, NormKind norm, double lambda, Index k, Index q,
                                const SolverOptions& opts) {
  if (!(lambda >= 0.0)) throw std::invalid_argument("penalized_denoise: lambda must be nonnegative");
  DenoiseResult r;
  r.lambda = lambda;
  switch (norm) {
    case NormKind::l1:
      r.z = soft_threshold(y, lambda);
      r.norm_value = l1_norm(r.z);
      return r;
    case NormKind::trace:
      r.z = prox_trace_norm(y, lambda);
      r.norm_value = nuclear_norm(r.z);
      return r;
    case NormKind::omega_kq: {
      if (lambda == 0.0) {
        r.z = y;
        return r;
      }
      const SolveResult s = prox_omega_kq(y, lambda, k, q, false, opts);
      r = omega_from_prox(s);
      r.lambda = lambda;
      r.prox_solves = 1;
      return r;
    }
  }
  throw std::logic_error("penalized_denoise: unhandled norm");
}

double oracle_slowrate_bound(Index m1, Index m2, Index k, Index q, double sigma, NormKind norm) {
  if (m1 < 1 || m2 < 1 || k < 1 || q < 1 || k > m1 || q > m2) throw std::invalid_argument("slow-rate bound: invalid dimensions");
  if (!(sigma >= 0.0)) throw std::invalid_argument("slow-rate bound: sigma must be nonnegative");
  const double dm1 = static_cast<double>(m1), dm2 = static_cast<double>(m2);
  const double dk = static_cast<double>(k), dq = static_cast<double>(q);
  switch (norm) {
    case NormKind::omega_kq:
      return 8.0 * sigma * (std::sqrt(dk * std::log(dm1 / dk) + 2.0 * dk) + std::sqrt(dq * std::log(dm2 / dq) + 2.0 * dq));
    case NormKind::l1:
      return 2.0 * sigma * std::sqrt(2.0 * dk * dq * std::log(dm1 * dm2));
    case NormKind::trace:
      return 2.0 * sigma * (std::sqrt(dm1) + std::sqrt(dm2));
  }
  throw std::logic_error("slow-rate bound: unhandled norm");
}

std::string to_string(SpcaMethod m) {
  switch (m) {
    case SpcaMethod::sample_cov: return "sample_cov";
    case SpcaMethod::trace_psd: return "trace_psd";
    case SpcaMethod::l1: return "l1";
    case SpcaMethod::trace_plus_l1_psd: return "trace_plus_l1_psd";
    case SpcaMethod::sequential: return "sequential";
    case SpcaMethod::omega_k_psd: return "omega_k_psd";
  }
  return "?";
}

SpcaMethod spca_method_from_string(const std::string& s) {
  for (SpcaMethod m : all_spca_methods())
    if (to_string(m) == s) return m;
  throw std::invalid_argument("unknown estimator '" + s + "'");
}

const std::vector<SpcaMethod>& all_spca_methods() {
  static const std::vector<SpcaMethod> all = {SpcaMethod::sample_cov,        SpcaMethod::trace_psd,
                                              SpcaMethod::l1,                SpcaMethod::trace_plus_l1_psd,
                                              SpcaMethod::sequential,        SpcaMethod::omega_k_psd};
  return all;
}

void SpcaEstimatorSpec::validate() const {
  if (!(lambda >= 0.0)) throw std::invalid_argument("estimator: lambda must be nonnegative");
  if (method == SpcaMethod::omega_k_psd && !(lambda > 0.0)) throw std::invalid_argument("estimator: omega_k_psd needs lambda > 0");
  if (!(mu >= 0.0 && mu <= 1.0)) throw std::invalid_argument("estimator: mu must lie in [0, 1]");
  if (k < 1) throw std::invalid_argument("estimator: k must be positive");
  if (r < 1) throw std::invalid_argument("estimator: r must be positive");
}

std::string SpcaEstimatorSpec::describe() const {
  std::ostringstream os;
  os.precision(6);
  switch (method) {
    case SpcaMethod::sample_cov: break;
    case SpcaMethod::trace_psd:
    case SpcaMethod::l1: os << "lambda=" << lambda; break;
    case SpcaMethod::trace_plus_l1_psd: os << "lambda=" << lambda << ";mu=" << mu; break;
    case SpcaMethod::sequential: os << "k=" << k << ";r=" << r; break;
    case SpcaMethod::omega_k_psd: os << "lambda=" << lambda << ";k=" << k; break;
  }
  return os.str();
}

namespace {

// min_{Z psd} 1/2 ||Z - S||^2 + a ||Z||_1 + b tr Z  by two-block ADMM on Z = W:
// the l1 part is handled entrywise, the trace and PSD parts together through the
// eigenvalue prox (trace norm and trace agree on the PSD cone).
CovarianceResult trace_plus_l1(const Matrix& s, double a, double b, const SpcaEstimatorSpec& spec,
                               const CovarianceResult* warm) {
  const Index p = s.rows();
  double rho = 1.0;
  Matrix w = Matrix::Zero(p, p), u = Matrix::Zero(p, p);
  if (warm && warm->split_primal.rows() == p) {
    w = warm->split_primal;
    u = warm->split_dual;
    rho = warm->split_rho;
  }
  Matrix z(p, p);
  const double scale = std::max(1.0, s.norm());
  double primal = 0.0, dual = 0.0;
  for (int it = 1; it <= spec.splitting_max_iters; ++it) {
    z = soft_threshold(Matrix((s + rho * (w - u)) / (1.0 + rho)), a / (1.0 + rho));
    const Matrix w_prev = w;
    const Matrix v = z + u;
    w = prox_psd_trace(Matrix(0.5 * (v + v.transpose())), b / rho);
    u += z - w;
    primal = (z - w).norm();
    dual = rho * (w - w_prev).norm();
    if (primal <= spec.splitting_tol * scale && dual <= spec.splitting_tol * scale) {
      CovarianceResult r;
      r.estimate = w;
      r.split_primal = w;
      r.split_dual = u;
      r.split_rho = rho;
      r.iterations = it;
      return r;
    }
    // Residual balancing; u is the scaled dual and is rescaled with rho.
    if (it % 10 == 0) {
      double f = 1.0;
      if (primal > 10.0 * dual) f = 2.0;
      if (dual > 10.0 * primal) f = 0.5;
      rho *= f;
      u /= f;
    }
  }
  throw ConvergenceError("trace_plus_l1_psd: splitting did not converge", std::max(primal, dual));
}

}  // namespace

CovarianceResult estimate_covariance_detailed(const Matrix& sigma_hat, const SpcaEstimatorSpec& spec,
                                              const CovarianceResult* warm) {
  spec.validate();
  if (sigma_hat.rows() != sigma_hat.cols() || !is_symmetric(sigma_hat, Tolerances::symmetry)) {
    throw std::invalid_argument("estimate_covariance: input must be symmetric");
  }
  require_finite(sigma_hat, "estimate_covariance input");
  CovarianceResult r;
  switch (spec.method) {
    case SpcaMethod::sample_cov:
      r.estimate = sigma_hat;
      return r;
    case SpcaMethod::trace_psd:
      r.estimate = prox_psd_trace(sigma_hat, spec.lambda);
      return r;
    case SpcaMethod::l1:
      r.estimate = soft_threshold(sigma_hat, spec.lambda);
      return r;
    case SpcaMethod::trace_plus_l1_psd: {
      const double k = static_cast<double>(std::min<Index>(spec.k, sigma_hat.rows()));
      return trace_plus_l1(sigma_hat, spec.lambda * spec.mu / k, spec.lambda * (1.0 - spec.mu), spec, warm);
    }
    case SpcaMethod::sequential: {
      const Index p = sigma_hat.rows();
      if (spec.k > p) throw std::invalid_argument("estimate_covariance: k exceeds the dimension");
      Matrix z = sigma_hat;
      r.estimate = Matrix::Zero(p, p);
      for (Index t = 0; t < spec.r; ++t) {
        if (z.isZero(0.0)) break;
        TpiConfig cfg = spec.solver.tpi;
        cfg.seed = spec.solver.tpi.seed + static_cast<std::uint64_t>(t);
        const Vector u = spca_tpi_psd(z, spec.k, cfg).vector;
        r.estimate += u.dot(z * u) * u * u.transpose();
        const Matrix proj = Matrix::Identity(p, p) - u * u.transpose();
        z = proj * z * proj;
        z = (0.5 * (z + z.transpose())).eval();
        r.components.push_back(u);
      }
      return r;
    }
    case SpcaMethod::omega_k_psd: {
      const WorkingSet* ws = warm && warm->working_set ? &*warm->working_set : nullptr;
      SolveResult s = prox_omega_kq(sigma_hat, spec.lambda, spec.k, spec.k, true, spec.solver, ws);
      r.estimate = 0.5 * (s.z + s.z.transpose());
      r.atoms = std::move(s.report.atoms);
      r.iterations = s.report.outer_iterations;
      r.working_set = std::move(s.ws);
      return r;
    }
  }
  throw std::logic_error("estimate_covariance: unhandled method");
}

Matrix estimate_covariance(const Matrix& sigma_hat, const SpcaEstimatorSpec& spec) {
  return estimate_covariance_detailed(sigma_hat, spec).estimate;
}

double relative_error(const Matrix& est, const Matrix& truth) {
  const double n = truth.norm();
  if (n == 0.0) throw std::invalid_argument("relative_error: reference matrix is zero");
  return (est - truth).norm() / n;
}

std::vector<double> logspace(double lo, double hi, int count) {
  std::vector<double> out;
  for (int i = 0; i < count; ++i) {
    const double e = count == 1 ? lo : lo + (hi - lo) * i / (count - 1);
    out.push_back(std::pow(10.0, e));
  }
  return out;
}

TuningGrid default_grid(SpcaMethod m) {
  switch (m) {
    case SpcaMethod::sample_cov:
    case SpcaMethod::sequential: return {};
    case SpcaMethod::trace_psd: return {logspace(-2.0, 1.0, 31), {}};
    case SpcaMethod::l1: return {logspace(-3.0, 1.0, 41), {}};
    case SpcaMethod::trace_plus_l1_psd: return {logspace(-2.0, 0.5, 10), {0.0, 0.25, 0.5, 0.75, 1.0}};
    case SpcaMethod::omega_k_psd: return {logspace(-2.0, 1.0, 31), {}};
  }
  return {};
}

TunedEstimate tune_oracle(const Matrix& sigma_hat, const Matrix& truth, const SpcaEstimatorSpec& base,
                          const TuningGrid& grid, int patience) {
  TunedEstimate best;
  best.relative_error = std::numeric_limits<double>::infinity();
  auto consider = [&](const SpcaEstimatorSpec& spec, CovarianceResult res) {
    ++best.evaluated;
    const double err = relative_error(res.estimate, truth);
    const bool better = err < best.relative_error;
    if (better) {
      best.relative_error = err;
      best.spec = spec;
      best.result = std::move(res);
    }
    return better;
  };
  if (grid.lambdas.empty()) {
    consider(base, estimate_covariance_detailed(sigma_hat, base));
    return best;
  }
  std::vector<double> lambdas = grid.lambdas;
  std::sort(lambdas.begin(), lambdas.end(), std::greater<>());
  const std::vector<double> mus = grid.mus.empty() ? std::vector<double>{base.mu} : grid.mus;
  for (double mu : mus) {
    std::optional<CovarianceResult> warm;
    int since_best = 0;
    for (double lambda : lambdas) {
      SpcaEstimatorSpec spec = base;
      spec.lambda = lambda;
      spec.mu = mu;
      CovarianceResult res;
      try {
        res = estimate_covariance_detailed(sigma_hat, spec, warm ? &*warm : nullptr);
      } catch (const SolveError&) {
        break;  // active set too large below this penalty level
      }
      warm = res;
      const bool empty = res.estimate.isZero(0.0);
      const bool improved = consider(spec, std::move(res));
      since_best = improved || empty ? 0 : since_best + 1;
      if (base.method == SpcaMethod::omega_k_psd && since_best >= patience) break;
    }
  }
  return best;
}

}  // namespace kqf
