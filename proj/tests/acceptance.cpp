// Acceptance checks, one per criterion. Usage: acceptance [--criterion N]...
#include <CLI11.hpp>

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <iostream>
#include <limits>
#include <map>
#include <sstream>

#include "commands.hpp"
#include "kqfactor/estimators.hpp"
#include "kqfactor/kq_norm.hpp"
#include "kqfactor/rng.hpp"
#include "kqfactor/statdim.hpp"
#include "kqfactor/vector_norms.hpp"
#include "kqfactor/working_set.hpp"

using namespace kqf;

namespace {

struct Outcome {
  bool pass = true;
  std::ostringstream detail;

  void require(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      detail << " [failed: " << what << "]";
    }
  }
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

Vector random_vector(Pcg32& rng, Index n) {
  Vector v(n);
  for (Index i = 0; i < n; ++i) {
    const double u = rng.uniform();
    v(i) = u < 0.15 ? 0.0 : (u < 0.3 ? (rng.uniform() < 0.5 ? -1.0 : 1.0) : rng.normal());
  }
  return v;
}

Matrix random_matrix(Pcg32& rng, Index r, Index c) {
  Matrix m(r, c);
  for (Index j = 0; j < c; ++j)
    for (Index i = 0; i < r; ++i) m(i, j) = rng.normal();
  return m;
}

void ac1(Outcome& o) {
  const std::pair<const char*, double> cases[] = {{"ones3", 4.5}, {"half_ones4", 4.0}, {"psd_example", 4.0}};
  for (const auto& [name, expect] : cases) {
    const auto t0 = Clock::now();
    const PrimalOracleResult r = omega_primal_oracle(fixture(name), 2, 2);
    const double t = seconds_since(t0);
    o.detail << " " << name << "=" << r.value << " (" << t << "s)";
    o.require(std::abs(r.value - expect) <= 1e-3, std::string(name) + " value");
    o.require(t < 10.0, std::string(name) + " runtime");
  }
}

void ac2(Outcome& o) {
  const auto t0 = Clock::now();
  Pcg32 rng(mix_seed(2));
  double worst_dual = 0.0;
  for (int c = 0; c < 200; ++c) {
    const Vector s = random_vector(rng, 10);
    for (Index k = 1; k <= 10; ++k) {
      worst_dual = std::max(worst_dual, std::abs(theta_k_dual(s, {k}) - dual_oracle_enumerate(s, {k}, VectorDual::theta)));
      worst_dual = std::max(worst_dual, std::abs(kappa_k_dual(s, {k}) - dual_oracle_enumerate(s, {k}, VectorDual::kappa)));
    }
  }
  double worst_lp = 0.0;
  int instances = 0;
  for (Index p = 1; p <= 8; ++p) {
    for (Index k = 1; k <= std::min<Index>(4, p); ++k) {
      for (int c = 0; c < 25; ++c, ++instances) {
        const Vector w = random_vector(rng, p);
        worst_lp = std::max(worst_lp, std::abs(kappa_k(w, {k}) - gauge_oracle_lp(w, {k})));
      }
    }
  }
  const double t = seconds_since(t0);
  o.detail << " max dual gap " << worst_dual << " over 2000 (vector, k) pairs; max LP gap " << worst_lp << " over "
           << instances << " instances (" << t << "s)";
  o.require(worst_dual <= 1e-10, "dual closed forms");
  o.require(worst_lp <= 1e-6, "kappa vs LP");
  o.require(t < 60.0, "runtime");
}

void ac3(Outcome& o) {
  const auto t0 = Clock::now();
  Pcg32 rng(mix_seed(3));
  int equal = 0, above = 0;
  TpiConfig cfg;
  cfg.restarts = 50;
  for (int c = 0; c < 100; ++c) {
    const Matrix z = random_matrix(rng, 6, 6);
    cfg.seed = rng.next_u32();
    const double exact = omega_dual_enumerate(z, 2, 2).value;
    const double tpi = omega_dual_tpi(z, 2, 2, cfg).value;
    equal += std::abs(tpi - exact) <= 1e-9;
    above += tpi > exact + 1e-9;
  }
  const double t = seconds_since(t0);
  o.detail << " equal on " << equal << "/100, above enumeration on " << above << " (" << t << "s)";
  o.require(equal >= 95, "match count");
  o.require(above == 0, "one-sidedness");
  o.require(t < 60.0, "runtime");
}

void ac4(Outcome& o) {
  const auto t0 = Clock::now();
  const double lambda = 0.3;
  Pcg32 rng(mix_seed(4));
  for (Index r = 1; r <= 3; ++r) {
    for (int trial = 0; trial < 3; ++trial) {
      const Index m1 = 30, m2 = 24;
      const Index k = 2 + trial, q = 3;
      // Disjoint supports from a random permutation of rows and columns.
      std::vector<Index> rows(m1), cols(m2);
      for (Index i = 0; i < m1; ++i) rows[i] = i;
      for (Index j = 0; j < m2; ++j) cols[j] = j;
      for (Index i = m1 - 1; i > 0; --i) std::swap(rows[i], rows[rng.below(static_cast<std::uint32_t>(i + 1))]);
      for (Index j = m2 - 1; j > 0; --j) std::swap(cols[j], cols[rng.below(static_cast<std::uint32_t>(j + 1))]);
      Matrix x = Matrix::Zero(m1, m2);
      std::vector<std::pair<BlockSupport, Matrix>> truth;
      for (Index t = 0; t < r; ++t) {
        std::vector<Index> ri(rows.begin() + t * k, rows.begin() + (t + 1) * k);
        std::vector<Index> ci(cols.begin() + t * q, cols.begin() + (t + 1) * q);
        std::sort(ri.begin(), ri.end());
        std::sort(ci.begin(), ci.end());
        // Flat atom with random signs.
        Vector a = Vector::Zero(m1), b = Vector::Zero(m2);
        for (Index i : ri) a(i) = (rng.uniform() < 0.5 ? -1.0 : 1.0) / std::sqrt(double(k));
        for (Index j : ci) b(j) = (rng.uniform() < 0.5 ? -1.0 : 1.0) / std::sqrt(double(q));
        const Matrix atom = a * b.transpose();
        x += atom;
        truth.push_back({BlockSupport{ri, ci}, atom});
      }
      SolverOptions opts;
      opts.tpi.seed = rng.next_u32();
      const SolveResult s = solve(Loss::denoising(x), lambda, k, q, false, opts);
      bool exact_blocks = s.ws.blocks.size() == static_cast<std::size_t>(r);
      double worst = 0.0;
      for (const auto& [b, atom] : truth) {
        const auto it = s.ws.blocks.find(b);
        if (it == s.ws.blocks.end()) {
          exact_blocks = false;
          continue;
        }
        Matrix block = Matrix::Zero(m1, m2);
        b.scatter_add(block, it->second);
        worst = std::max(worst, (block - (1.0 - lambda) * atom).cwiseAbs().maxCoeff());
      }
      o.require(exact_blocks, "recovered blocks (r=" + std::to_string(r) + ")");
      o.require(worst <= 1e-6, "block values (r=" + std::to_string(r) + ")");
      o.require(s.report.certificate_value <= lambda * (1.0 + 1e-3), "terminal certificate");
      if (trial == 0) o.detail << " r=" << r << ": max block deviation " << worst << ", certificate " << s.report.certificate_value;
    }
  }
  const double t = seconds_since(t0);
  o.detail << " (" << t << "s)";
  o.require(t < 30.0, "runtime");
}

void ac5(Outcome& o) {
  const auto t0 = Clock::now();
  const Index m = 100, k = 10;
  const double sigma = 1.0;
  int wins = 0, bound_ok = 0;
  double mse_o = 0.0, mse_l = 0.0, mse_t = 0.0;
  for (int seed = 1; seed <= 20; ++seed) {
    GroundTruthSpec g;
    g.rows = g.cols = m;
    g.k = g.q = k;
    g.random_placement = true;
    g.seed = static_cast<std::uint64_t>(seed);
    const GroundTruth t = sample_ground_truth(g);
    const Matrix noise = gaussian_matrix(m, m, mix_seed(static_cast<std::uint64_t>(seed) + 1000));
    const Matrix y = t.matrix + sigma * noise;
    TpiConfig cfg;
    cfg.restarts = 50;
    cfg.seed = static_cast<std::uint64_t>(seed);
    // Oracle penalty lambda = sigma * dual norm of the noise, per norm.
    const double lam_o = sigma * omega_dual_tpi(noise, k, k, cfg).value;
    const double lam_l = sigma * noise.cwiseAbs().maxCoeff();
    const double lam_t = sigma * operator_norm(noise);
    SolverOptions opts;
    opts.tpi = cfg;
    const double eo = (penalized_denoise(y, NormKind::omega_kq, lam_o, k, k, opts).z - t.matrix).squaredNorm();
    const double el = (penalized_denoise(y, NormKind::l1, lam_l, k, k).z - t.matrix).squaredNorm();
    const double et = (penalized_denoise(y, NormKind::trace, lam_t, k, k).z - t.matrix).squaredNorm();
    mse_o += eo / 20;
    mse_l += el / 20;
    mse_t += et / 20;
    wins += eo < el && eo < et;
    // Omega(Z*) = 1 for an atom.
    bound_ok += eo <= 4.0 * lam_o * omega_value_from_decomposition(t.decomposition, k, k) + 1e-6;
  }
  const double t = seconds_since(t0);
  o.detail << " mean squared error omega " << mse_o << ", l1 " << mse_l << ", trace " << mse_t << "; omega strictly best on "
           << wins << "/20; bound held on " << bound_ok << "/20 (" << t << "s)";
  o.require(wins >= 19, "paired comparison");
  o.require(bound_ok == 20, "slow-rate bound");
  o.require(t < 600.0, "runtime");
}

StatDimExperiment statdim_base(Index k) {
  StatDimExperiment e;
  e.ground_truth.rows = e.ground_truth.cols = 200;
  e.ground_truth.k = e.ground_truth.q = k;
  e.sigma = 1e-4;
  e.repeats = 20;
  e.seed = 6;
  return e;
}

void ac6(Outcome& o) {
  const auto t0 = Clock::now();
  const double m = 200;
  // (a), (b): l1 and trace over the k sweep; (c): omega at k = 10, 20.
  const std::vector<SweepRow> lk = run_statdim_sweep(statdim_base(5), {"k", SweepVariable::k, {5, 10, 20, 40}}, {NormKind::l1, NormKind::trace});
  std::vector<double> ratios;
  for (const SweepRow& r : lk) {
    if (r.norm == NormKind::l1) {
      ratios.push_back(r.estimate / *r.bound_value);
      o.require(r.estimate <= *r.bound_value + 3.0 * r.std_error, "(a) l1 above bound at k=" + std::to_string(r.sweep_value));
    } else {
      o.require(r.estimate >= 2 * m && r.estimate <= 6 * m, "(b) trace range at k=" + std::to_string(r.sweep_value));
    }
  }
  double mean_ratio = 0.0;
  for (double x : ratios) mean_ratio += x / double(ratios.size());
  double spread = 0.0;
  for (double x : ratios) spread = std::max(spread, std::abs(x / mean_ratio - 1.0));
  o.require(spread <= 0.25, "(a) l1 shape");
  o.detail << " (a) l1/lasso ratios";
  for (double x : ratios) o.detail << " " << x;
  o.detail << ", max deviation from mean " << spread << ";";
  o.detail << " (b) trace";
  for (const SweepRow& r : lk)
    if (r.norm == NormKind::trace) o.detail << " " << r.estimate;
  o.detail << ";";

  const std::vector<SweepRow> ok = run_statdim_sweep(statdim_base(10), {"k", SweepVariable::k, {10, 20}}, {NormKind::omega_kq});
  o.detail << " (c)";
  for (const SweepRow& w : ok) {
    for (const SweepRow& r : lk) {
      if (r.sweep_value != w.sweep_value) continue;
      const double margin = 3.0 * std::max(w.std_error, r.std_error);
      o.require(w.estimate + margin <= r.estimate, "(c) omega vs " + to_string(r.norm) + " at k=" + std::to_string(w.sweep_value));
    }
    o.detail << " omega(k=" << w.sweep_value << ")=" << w.estimate << "+-" << w.std_error;
  }
  o.detail << ";";

  // (d) linearity in the number of disjoint atoms.
  const std::vector<SweepRow> rr = run_statdim_sweep(statdim_base(10), {"r", SweepVariable::r, {1, 2, 3}}, {NormKind::omega_kq});
  std::vector<double> xs, ys;
  for (const SweepRow& r : rr) {
    xs.push_back(double(r.sweep_value));
    ys.push_back(r.estimate);
  }
  const LineFit fit = fit_line(xs, ys);
  o.require(fit.r2 >= 0.9, "(d) linearity");
  o.detail << " (d) r-sweep";
  for (double y : ys) o.detail << " " << y;
  o.detail << ", slope " << fit.slope << ", R^2 " << fit.r2 << ";";

  // (e) growing overlap between three atoms does not improve omega.
  StatDimExperiment ov = statdim_base(10);
  ov.ground_truth.atoms = 3;
  const std::vector<SweepRow> orows = run_statdim_sweep(ov, {"overlap", SweepVariable::overlap, {0, 3, 5}}, {NormKind::omega_kq});
  o.detail << " (e) overlap";
  for (std::size_t i = 0; i < orows.size(); ++i) {
    o.detail << " " << orows[i].estimate << "+-" << orows[i].std_error;
    if (i == 0) continue;
    const double margin = 3.0 * std::max(orows[i].std_error, orows[i - 1].std_error);
    o.require(orows[i].estimate >= orows[i - 1].estimate - margin, "(e) overlap monotone at " + std::to_string(orows[i].sweep_value));
  }
  const double t = seconds_since(t0);
  o.detail << " (" << t << "s)";
  o.require(t < 1800.0, "runtime");
}

void ac7(Outcome& o) {
  const auto t0 = Clock::now();
  cli::SpcaParams params;  // p=200, n=80, k=10, 3 blocks, overlap 3, sigma 0.8, 10 runs
  const cli::SpcaOutcome out = cli::run_spca(params, 1, 1, false);
  const std::vector<std::pair<SpcaMethod, double>> table = {
      {SpcaMethod::sample_cov, 4.20}, {SpcaMethod::trace_psd, 0.98},  {SpcaMethod::l1, 2.07},
      {SpcaMethod::trace_plus_l1_psd, 0.96}, {SpcaMethod::sequential, 0.93}, {SpcaMethod::omega_k_psd, 0.59}};
  std::map<int, std::map<SpcaMethod, double>> per_run;
  for (const auto& rec : out.records) per_run[rec.run][rec.method] = rec.relative_error;
  for (const auto& [method, target] : table) {
    double mean = 0.0;
    for (const auto& [run, errs] : per_run) mean += errs.at(method) / double(per_run.size());
    o.detail << " " << to_string(method) << " " << mean << " (target " << target << ")";
    o.require(std::abs(mean - target) <= 0.15, to_string(method) + " within 0.15");
  }
  int ordered = 0;
  for (const auto& [run, errs] : per_run) {
    double others = std::numeric_limits<double>::infinity();
    for (const auto& [method, err] : errs)
      if (method != SpcaMethod::omega_k_psd) others = std::min(others, err);
    ordered += errs.at(SpcaMethod::omega_k_psd) < others;
  }
  const double t = seconds_since(t0);
  o.detail << "; omega strictly best on " << ordered << "/" << per_run.size() << " runs (" << t << "s)";
  o.require(ordered == static_cast<int>(per_run.size()), "ordering on every run");
  o.require(t < 1200.0, "runtime");
}

void ac8(Outcome& o) {
  const auto t0 = Clock::now();
  std::istringstream list(KQF_PROPERTY_TESTS);
  std::string path;
  int suites = 0;
  while (std::getline(list, path, ',')) {
    if (path.empty()) continue;
    ++suites;
    const std::string cmd = "\"" + path + "\" --minimal > /dev/null 2>&1";
    const int rc = std::system(cmd.c_str());
    const std::string name = path.substr(path.find_last_of('/') + 1);
    o.detail << " " << name << (rc == 0 ? ":ok" : ":FAILED");
    o.require(rc == 0, name);
  }
  const double t = seconds_since(t0);
  o.detail << " (" << suites << " suites, " << t << "s)";
  o.require(t < 600.0, "runtime");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"acceptance checks"};
  std::vector<int> which;
  app.add_option("--criterion", which, "Criterion number (1-8); repeatable, default all")->check(CLI::Range(1, 8));
  CLI11_PARSE(app, argc, argv);
  if (which.empty()) which = {1, 2, 3, 4, 5, 6, 7, 8};

  const std::map<int, std::pair<const char*, std::function<void(Outcome&)>>> criteria = {
      {1, {"fixture exactness", ac1}},        {2, {"vector-norm oracle equivalence", ac2}},
      {3, {"dual-norm heuristic quality", ac3}}, {4, {"separable solver correctness", ac4}},
      {5, {"slow-rate denoising ordering", ac5}}, {6, {"statistical-dimension curves", ac6}},
      {7, {"sparse PCA comparison", ac7}},    {8, {"property suites", ac8}},
  };
  bool all = true;
  for (int c : which) {
    Outcome o;
    const auto& [title, fn] = criteria.at(c);
    try {
      fn(o);
    } catch (const std::exception& e) {
      o.pass = false;
      o.detail << " [exception: " << e.what() << "]";
    }
    std::cout << "AC" << c << " " << (o.pass ? "PASS" : "FAIL") << " " << title << ":" << o.detail.str() << std::endl;
    all = all && o.pass;
  }
  return all ? 0 : 1;
}
