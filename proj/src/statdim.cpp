#include "kqfactor/statdim.hpp"

#include <chrono>
#include <cmath>
#include <numeric>

#include "kqfactor/kq_norm.hpp"
#include "kqfactor/rng.hpp"
#include "kqfactor/vector_norms.hpp"

namespace kqf {

void StatDimExperiment::validate() const {
  ground_truth.validate();
  if (!(sigma > 0.0)) throw std::invalid_argument("statdim: sigma must be positive");
  if (repeats < 1) throw std::invalid_argument("statdim: repeats must be at least 1");
}

StatDimEstimate nmse_statdim(const StatDimExperiment& exp, std::uint64_t cell) {
  exp.validate();
  const auto t0 = std::chrono::steady_clock::now();
  const GroundTruth gt = sample_ground_truth(exp.ground_truth);
  DenoiserSpec spec = exp.denoiser;
  spec.norm = exp.norm;
  spec.k = exp.ground_truth.k;
  spec.q = exp.ground_truth.q;
  spec.sigma = exp.sigma;
  switch (exp.norm) {
    case NormKind::l1: spec.radius = l1_norm(gt.matrix); break;
    case NormKind::trace: spec.radius = nuclear_norm(gt.matrix); break;
    case NormKind::omega_kq: spec.radius = omega_value_from_decomposition(gt.decomposition, spec.k, spec.q); break;
  }
  if (!(spec.radius > 0.0)) throw std::invalid_argument("statdim: ground truth has zero norm");

  StatDimEstimate out;
  const double s2 = exp.sigma * exp.sigma;
  for (int rep = 0; rep < exp.repeats; ++rep) {
    const std::uint64_t seed = mix_seed(mix_seed(exp.seed + cell) + static_cast<std::uint64_t>(rep));
    const Matrix y = gt.matrix + exp.sigma * gaussian_matrix(gt.matrix.rows(), gt.matrix.cols(), seed);
    try {
      const DenoiseResult r = constrained_denoise(y, spec);
      out.samples.push_back((r.z - gt.matrix).squaredNorm() / s2);
    } catch (const std::exception& e) {
      throw StatDimError(std::string("statdim: repeat ") + std::to_string(rep) + " failed: " + e.what(), out);
    }
  }
  const double n = static_cast<double>(out.samples.size());
  out.estimate = std::accumulate(out.samples.begin(), out.samples.end(), 0.0) / n;
  if (out.samples.size() > 1) {
    double ss = 0.0;
    for (double v : out.samples) ss += (v - out.estimate) * (v - out.estimate);
    out.std_error = std::sqrt(ss / (n - 1.0) / n);
  }
  out.wall_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
  return out;
}

std::string to_string(BoundKind b) {
  switch (b) {
    case BoundKind::cut_prop12: return "cut_prop12";
    case BoundKind::kq_prop14: return "kq_prop14";
    case BoundKind::kappa_lower16: return "kappa_lower16";
    case BoundKind::kappa_upper16: return "kappa_upper16";
    case BoundKind::ksupport_17: return "ksupport_17";
    case BoundKind::ksupport_atom: return "ksupport_atom";
    case BoundKind::lasso: return "lasso";
    case BoundKind::oymak_lower15: return "oymak_lower15";
  }
  return "?";
}

BoundKind bound_kind_from_string(const std::string& s) {
  for (BoundKind b : {BoundKind::cut_prop12, BoundKind::kq_prop14, BoundKind::kappa_lower16, BoundKind::kappa_upper16,
                      BoundKind::ksupport_17, BoundKind::ksupport_atom, BoundKind::lasso, BoundKind::oymak_lower15}) {
    if (to_string(b) == s) return b;
  }
  throw std::invalid_argument("unknown bound '" + s + "'");
}

double atom_strength(const Vector& a, const Vector& b, Index k, Index q) {
  auto min_sq = [](const Vector& v) {
    double m = std::numeric_limits<double>::infinity();
    for (Index i = 0; i < v.size(); ++i)
      if (v(i) != 0.0) m = std::min(m, v(i) * v(i));
    return m;
  };
  return std::min(static_cast<double>(k) * min_sq(a), static_cast<double>(q) * min_sq(b));
}

namespace {

void need(bool ok, const char* what) {
  if (!ok) throw std::invalid_argument(std::string("bound_statdim: ") + what);
}

double gamma_of(const BoundInputs& in) {
  need(in.gamma.has_value(), "gamma is required");
  need(*in.gamma > 0.0 && *in.gamma <= 1.0, "gamma must lie in (0, 1]");
  return *in.gamma;
}

}  // namespace

double bound_statdim(BoundKind which, const BoundInputs& in) {
  const double m1 = static_cast<double>(in.m1), m2 = static_cast<double>(in.m2);
  const double k = static_cast<double>(in.k), q = static_cast<double>(in.q);
  const double p = static_cast<double>(in.p), s = static_cast<double>(in.s);
  switch (which) {
    case BoundKind::cut_prop12:
      need(in.m1 > 0 && in.m2 > 0 && in.k > 0 && in.q > 0 && in.k <= in.m1 && in.q <= in.m2, "needs 0 < k <= m1, 0 < q <= m2");
      return 16.0 * (k + q) + 9.0 * (k * std::log(m1 / k) + q * std::log(m2 / q));
    case BoundKind::kq_prop14: {
      need(in.m1 > 0 && in.m2 > 0 && in.k > 0 && in.q > 0, "needs positive m1, m2, k, q");
      const double g = gamma_of(in);
      return 322.0 / (g * g) * (k + q + 1.0) + 160.0 / g * std::max(k, q) * std::log(std::max(m1, m2));
    }
    case BoundKind::kappa_lower16:
      need(in.p > in.k && in.k > 0, "needs 0 < k < p");
      return k / (2.0 * M_PI) * std::log((p - k) / (k + 1.0));
    case BoundKind::kappa_upper16:
      need(in.p >= in.k && in.k > 0, "needs 0 < k <= p");
      return 9.0 * k * std::log(p / k) + 16.0 * (k + 1.0);
    case BoundKind::ksupport_17: {
      need(in.w.has_value(), "the vector w is required");
      const Vector& w = *in.w;
      const Index nnz = (w.array() != 0.0).count();
      need(in.k > 0 && nnz >= in.k && w.size() > 0, "needs an s-sparse w with s >= k");
      const double sp = static_cast<double>(nnz);
      const double dim = static_cast<double>(w.size());
      const ThetaResult t = theta_k(w, {in.k});
      double head_sq = 0.0, tail_l1 = 0.0;
      for (Index i : t.head) head_sq += w(i) * w(i);
      for (Index i : t.tail_nonzero) tail_l1 += std::abs(w(i));
      const double rr = static_cast<double>(t.r + 1);
      const double tail_count = static_cast<double>(t.tail_nonzero.size());
      return 1.25 * sp + 2.0 * (rr * rr * head_sq / (tail_l1 * tail_l1) + tail_count) * std::log(dim / sp);
    }
    case BoundKind::ksupport_atom: {
      need(in.p >= in.k && in.k > 0, "needs 0 < k <= p");
      const double g = gamma_of(in);
      return 1.25 * k + 2.0 * k / g * std::log(p / k);
    }
    case BoundKind::lasso:
      need(in.p >= in.s && in.s > 0, "needs 0 < s <= p");
      return 1.25 * s + 2.0 * s * std::log(p / s);
    case BoundKind::oymak_lower15: {
      need(in.a.has_value() && in.b.has_value(), "the atom factors a and b are required");
      need(in.k > 0 && in.q > 0, "needs positive k, q");
      const double za = in.a->lpNorm<1>(), zb = in.b->lpNorm<1>();
      const double zeta = 1.0 - (1.0 - za * za / k) * (1.0 - zb * zb / q);
      const double mm = static_cast<double>(in.a->size() + in.b->size() - 1);
      return zeta * std::min(k * q, mm) - 2.0;
    }
  }
  throw std::logic_error("bound_statdim: unhandled bound");
}

std::string to_string(SweepVariable v) {
  switch (v) {
    case SweepVariable::k: return "k";
    case SweepVariable::r: return "r";
    case SweepVariable::overlap: return "overlap";
  }
  return "?";
}

SweepVariable sweep_variable_from_string(const std::string& s) {
  if (s == "k") return SweepVariable::k;
  if (s == "r") return SweepVariable::r;
  if (s == "overlap") return SweepVariable::overlap;
  throw std::invalid_argument("unknown sweep variable '" + s + "' (expected k, r or overlap)");
}

std::vector<SweepRow> run_statdim_sweep(const StatDimExperiment& base, const SweepSpec& sweep,
                                        const std::vector<NormKind>& norms) {
  if (sweep.values.empty()) throw std::invalid_argument("statdim sweep: no values");
  if (norms.empty()) throw std::invalid_argument("statdim sweep: no norms");
  std::vector<SweepRow> rows;
  std::uint64_t cell = 0;
  for (Index value : sweep.values) {
    StatDimExperiment exp = base;
    switch (sweep.variable) {
      case SweepVariable::k: exp.ground_truth.k = exp.ground_truth.q = value; break;
      case SweepVariable::r: exp.ground_truth.atoms = value; break;
      case SweepVariable::overlap: exp.ground_truth.overlap = value; break;
    }
    exp.validate();
    const GroundTruthSpec& g = exp.ground_truth;
    for (NormKind norm : norms) {
      exp.norm = norm;
      const StatDimEstimate est = nmse_statdim(exp, cell++);
      SweepRow row;
      row.sweep_name = sweep.name;
      row.sweep_value = value;
      row.norm = norm;
      row.estimate = est.estimate;
      row.std_error = est.std_error;
      row.seed = exp.seed;
      row.wall_ms = est.wall_ms;
      BoundInputs in;
      in.m1 = g.rows;
      in.m2 = g.cols;
      in.k = g.k;
      in.q = g.q;
      in.r = g.atoms;
      in.gamma = 1.0;
      if (norm == NormKind::l1) {
        const Matrix z = sample_ground_truth(g).matrix;
        in.p = g.rows * g.cols;
        in.s = count_nonzeros(z);
        row.bound_name = to_string(BoundKind::lasso);
        row.bound_value = bound_statdim(BoundKind::lasso, in);
      } else if (norm == NormKind::omega_kq && g.atoms == 1 && g.flat) {
        row.bound_name = to_string(BoundKind::kq_prop14);
        row.bound_value = bound_statdim(BoundKind::kq_prop14, in);
      }
      rows.push_back(std::move(row));
    }
  }
  return rows;
}

LineFit fit_line(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2) throw std::invalid_argument("fit_line: need at least two paired points");
  const double n = static_cast<double>(x.size());
  const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
  const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
    syy += (y[i] - my) * (y[i] - my);
  }
  if (sxx == 0.0) throw std::invalid_argument("fit_line: x values are all equal");
  LineFit f;
  f.slope = sxy / sxx;
  f.intercept = my - f.slope * mx;
  f.r2 = syy == 0.0 ? 1.0 : (sxy * sxy) / (sxx * syy);
  return f;
}

}  // namespace kqf
