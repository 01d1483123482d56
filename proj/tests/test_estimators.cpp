#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "support.hpp"

#include "kqfactor/estimators.hpp"
#include "kqfactor/kq_norm.hpp"
#include "kqfactor/vector_norms.hpp"

using namespace kqf;
using kqf::test::for_cases;

namespace {

double max_abs(const Matrix& m) { return m.size() ? m.cwiseAbs().maxCoeff() : 0.0; }

Matrix random_covariance(Pcg32& rng, Index p, Index n) {
  const Matrix x = test::random_matrix(rng, n, p);
  return x.transpose() * x / static_cast<double>(n);
}

SpcaEstimatorSpec spec_for(SpcaMethod m, double lambda, double mu = 0.0, Index k = 1, Index r = 1) {
  SpcaEstimatorSpec s;
  s.method = m;
  s.lambda = lambda;
  s.mu = mu;
  s.k = k;
  s.r = r;
  return s;
}

}  // namespace

TEST_CASE("parameter-free and zero-penalty estimators return the input") {
  Pcg32 rng(81);
  const Matrix s = random_covariance(rng, 6, 10);
  CHECK(estimate_covariance(s, spec_for(SpcaMethod::sample_cov, 0.0)) == s);
  CHECK(max_abs(estimate_covariance(s, spec_for(SpcaMethod::l1, 0.0)) - s) == 0.0);
  Matrix asym = s;
  asym(0, 1) += 1.0;
  CHECK_THROWS_AS(estimate_covariance(asym, spec_for(SpcaMethod::trace_psd, 0.1)), std::invalid_argument);
  CHECK_THROWS_AS(estimate_covariance(s, spec_for(SpcaMethod::trace_plus_l1_psd, 0.1, 1.5)), std::invalid_argument);
  CHECK_THROWS_AS(estimate_covariance(s, spec_for(SpcaMethod::sequential, 0.0, 0.0, 2, 0)), std::invalid_argument);
  CHECK(spca_method_from_string("omega_k_psd") == SpcaMethod::omega_k_psd);
  CHECK_THROWS_AS(spca_method_from_string("dspca"), std::invalid_argument);
  CHECK(all_spca_methods().size() == 6);
}

TEST_CASE("PSD estimators return PSD matrices") {
  for_cases(100, 82, [](Pcg32& rng, int c) {
    const Index p = test::uniform_int(rng, 3, 10);
    const Matrix s = random_covariance(rng, p, test::uniform_int(rng, 2, 15));
    const double lambda = 0.05 + 0.5 * rng.uniform();
    const Index k = test::uniform_int(rng, 1, std::min<Index>(p, 3));
    const std::vector<SpcaEstimatorSpec> specs{
        spec_for(SpcaMethod::trace_psd, lambda),
        spec_for(SpcaMethod::trace_plus_l1_psd, lambda, rng.uniform()),
        spec_for(SpcaMethod::sequential, 0.0, 0.0, k, test::uniform_int(rng, 1, 3)),
        spec_for(SpcaMethod::omega_k_psd, lambda, 0.0, k),
    };
    const SpcaEstimatorSpec& sp = specs[static_cast<std::size_t>(c % 4)];
    const Matrix est = estimate_covariance(s, sp);
    CHECK(max_abs(est - est.transpose()) <= 1e-10);
    CHECK(sym_eig(0.5 * (est + est.transpose())).eigenvalues.minCoeff() >= -1e-8);
  });
}

TEST_CASE("sequential deflation annihilates each component") {
  for_cases(100, 83, [](Pcg32& rng, int) {
    const Index p = test::uniform_int(rng, 4, 12);
    const Matrix s = random_covariance(rng, p, 20);
    const Index k = test::uniform_int(rng, 1, p), r = test::uniform_int(rng, 1, 3);
    SpcaEstimatorSpec sp = spec_for(SpcaMethod::sequential, 0.0, 0.0, k, r);
    sp.solver.tpi.seed = rng.next_u32();
    const CovarianceResult res = estimate_covariance_detailed(s, sp);
    REQUIRE(static_cast<Index>(res.components.size()) == r);
    // Replay the deflation chain from the returned loadings.
    Matrix z = s, expect = Matrix::Zero(p, p);
    for (const Vector& u : res.components) {
      CHECK(u.norm() == doctest::Approx(1.0).epsilon(1e-12));
      CHECK((u.array() != 0.0).count() <= k);
      expect += u.dot(z * u) * u * u.transpose();
      const Matrix proj = Matrix::Identity(p, p) - u * u.transpose();
      z = proj * z * proj;
      CHECK((z * u).norm() <= 1e-9);
    }
    CHECK(max_abs(res.estimate - expect) <= 1e-10);
  });
}

TEST_CASE("trace plus l1 reduces to its endpoints") {
  for_cases(100, 84, [](Pcg32& rng, int) {
    const Index p = test::uniform_int(rng, 2, 8);
    const Matrix s = random_covariance(rng, p, test::uniform_int(rng, 2, 12));
    const double lambda = 0.05 + 0.5 * rng.uniform();
    const Matrix a = estimate_covariance(s, spec_for(SpcaMethod::trace_plus_l1_psd, lambda, 0.0));
    const Matrix b = estimate_covariance(s, spec_for(SpcaMethod::trace_psd, lambda));
    CHECK(max_abs(a - b) <= 1e-5);
  });
  // At mu = 1 with a diagonally dominant input the entrywise soft-threshold is
  // already PSD, so the PSD constraint is inactive.
  for_cases(100, 85, [](Pcg32& rng, int) {
    const Index p = test::uniform_int(rng, 2, 8);
    Matrix s = 0.2 * test::random_symmetric(rng, p);
    s.diagonal().array() += 2.0 * static_cast<double>(p);
    const double lambda = 0.05 + 0.3 * rng.uniform();
    const Matrix l1 = estimate_covariance(s, spec_for(SpcaMethod::l1, lambda));
    REQUIRE(sym_eig(l1).eigenvalues.minCoeff() > 0.0);
    // Gamma_1 scales l1 by 1/sqrt(kq); with k = 1 the scale is one.
    const Matrix mix = estimate_covariance(s, spec_for(SpcaMethod::trace_plus_l1_psd, lambda, 1.0, 1));
    CHECK(max_abs(mix - l1) <= 1e-5);
  });
}

TEST_CASE("omega_k_psd recovers a noiseless single block") {
  const CovarianceModel m = sample_covariance_model(40, 200, 5, 1, 0, 0.0, 86);
  const Matrix est = estimate_covariance(m.sigma_hat, spec_for(SpcaMethod::omega_k_psd, 0.01, 0.0, 5));
  CHECK(relative_error(est, m.sigma_star) < 0.05);
  CHECK_THROWS_AS(relative_error(est, Matrix::Zero(40, 40)), std::invalid_argument);
}

TEST_CASE("tuning picks the grid cell with the smallest true error") {
  Pcg32 rng(87);
  const CovarianceModel m = sample_covariance_model(20, 30, 4, 1, 0, 0.8, 87);
  TuningGrid grid;
  grid.lambdas = logspace(-2, 0.5, 6);
  const TunedEstimate t = tune_oracle(m.sigma_hat, m.sigma_star, spec_for(SpcaMethod::trace_psd, 1.0), grid);
  for (double l : grid.lambdas) {
    const double e = relative_error(estimate_covariance(m.sigma_hat, spec_for(SpcaMethod::trace_psd, l)), m.sigma_star);
    CHECK(t.relative_error <= e + 1e-12);
  }
  CHECK(t.evaluated == 6);
  const std::vector<double> ls = logspace(-2, 0.5, 6);
  CHECK(ls.front() == doctest::Approx(0.01).epsilon(1e-14));
  CHECK(ls.back() == doctest::Approx(std::pow(10.0, 0.5)).epsilon(1e-14));
}

TEST_CASE("constrained denoiser examples") {
  DenoiserSpec l1;
  l1.norm = NormKind::l1;
  l1.radius = 10.0;
  Matrix y(2, 2);
  y << 1, -2, 0.5, 3;
  CHECK(constrained_denoise(y, l1).z == y);

  DenoiserSpec tr;
  tr.norm = NormKind::trace;
  tr.radius = 2.0;
  Matrix d = Matrix::Zero(2, 2);
  d.diagonal() << 3, 1;
  Matrix expect = Matrix::Zero(2, 2);
  expect(0, 0) = 2.0;
  CHECK(max_abs(constrained_denoise(d, tr).z - expect) <= 1e-12);

  Pcg32 rng(88);
  const Atom a = make_flat_atom(8, 8, 3, 3, {1, 2, 5}, {0, 3, 7});
  DenoiserSpec om;
  om.norm = NormKind::omega_kq;
  om.k = om.q = 3;
  om.radius = 1.0;
  for (OmegaProjection proj : {OmegaProjection::lambda_search, OmegaProjection::small_lambda}) {
    om.projection = proj;
    om.sigma = 1e-3;
    const DenoiseResult r = constrained_denoise(1.5 * a.materialize() + 1e-3 * test::random_matrix(rng, 8, 8), om);
    REQUIRE(!r.decomposition.terms.empty());
    CHECK(r.decomposition.terms[0].weight <= 1.0 + 1e-6);
    CHECK(r.norm_value <= 1.0 + 1e-6);
    CHECK(relative_error(r.z, a.materialize()) < 0.05);
  }

  DenoiserSpec neg;
  neg.radius = -1.0;
  CHECK_THROWS_AS(constrained_denoise(y, neg), std::invalid_argument);
}

TEST_CASE("constrained denoisers meet their norm budgets") {
  for_cases(100, 89, [](Pcg32& rng, int c) {
    const Index m1 = test::uniform_int(rng, 3, 6), m2 = test::uniform_int(rng, 3, 6);
    const Matrix y = test::random_matrix(rng, m1, m2);
    DenoiserSpec s;
    s.norm = c % 3 == 0 ? NormKind::l1 : (c % 3 == 1 ? NormKind::trace : NormKind::omega_kq);
    s.k = test::uniform_int(rng, 1, 2);
    s.q = test::uniform_int(rng, 1, 2);
    s.radius = 0.2 + 2.0 * rng.uniform();
    s.solver.tpi.seed = rng.next_u32();
    const DenoiseResult r = constrained_denoise(y, s);
    if (s.norm == NormKind::l1) {
      CHECK(l1_norm(r.z) <= s.radius + 1e-8);
    } else if (s.norm == NormKind::trace) {
      CHECK(nuclear_norm(r.z) <= s.radius + 1e-8);
    } else {
      CHECK(omega_value_from_decomposition(r.decomposition, s.k, s.q) <= s.radius * (1.0 + 1e-6));
      CHECK(max_abs(r.decomposition.materialize() - r.z) <= 1e-8);
    }
  });
}

TEST_CASE("slow-rate bound formulas") {
  const double sigma = 0.7;
  for (Index m : {10, 100, 1000}) {
    CHECK(oracle_slowrate_bound(m, m, 3, 3, sigma, NormKind::trace) == doctest::Approx(4.0 * sigma * std::sqrt(double(m))).epsilon(1e-14));
    CHECK(oracle_slowrate_bound(m, m, 1, 1, sigma, NormKind::l1) == doctest::Approx(2.0 * sigma * std::sqrt(2.0 * std::log(double(m) * m))).epsilon(1e-14));
  }
  // Independent evaluation of the (k,q) formula.
  const double m1 = 50, m2 = 80, k = 5, q = 8;
  const double omega = 8 * sigma * (std::sqrt(k * std::log(m1 / k) + 2 * k) + std::sqrt(q * std::log(m2 / q) + 2 * q));
  CHECK(oracle_slowrate_bound(50, 80, 5, 8, sigma, NormKind::omega_kq) == doctest::Approx(omega).epsilon(1e-14));
  CHECK(oracle_slowrate_bound(50, 80, 5, 8, sigma, NormKind::l1) ==
        doctest::Approx(2 * sigma * std::sqrt(2 * k * q * std::log(m1 * m2))).epsilon(1e-14));
  // With k = q = sqrt(m) the (k,q) bound grows like m^{1/4} sqrt(log m).
  const double ratio = oracle_slowrate_bound(10000, 10000, 100, 100, 1.0, NormKind::omega_kq) /
                       oracle_slowrate_bound(100, 100, 10, 10, 1.0, NormKind::omega_kq);
  CHECK(std::abs(ratio / (std::sqrt(10.0) * std::sqrt(2.0)) - 1.0) <= 0.2);
}

TEST_CASE("penalized denoisers with lambda = sigma * dual(G) obey the slow-rate lemma") {
  // l1 and trace use exact duals, so the bound is deterministic.
  for_cases(100, 90, [](Pcg32& rng, int c) {
    const Index m1 = test::uniform_int(rng, 3, 12), m2 = test::uniform_int(rng, 3, 12);
    GroundTruthSpec g;
    g.rows = m1;
    g.cols = m2;
    g.k = test::uniform_int(rng, 1, 3);
    g.q = test::uniform_int(rng, 1, 3);
    g.random_signs = true;
    g.seed = rng.next_u32();
    const GroundTruth t = sample_ground_truth(g);
    const double sigma = 0.05 + rng.uniform();
    const Matrix noise = test::random_matrix(rng, m1, m2);
    const NormKind n = c % 2 ? NormKind::l1 : NormKind::trace;
    const double dual = n == NormKind::l1 ? noise.cwiseAbs().maxCoeff() : operator_norm(noise);
    const double lambda = sigma * dual;
    const DenoiseResult r = penalized_denoise(t.matrix + sigma * noise, n, lambda, g.k, g.q);
    const double norm_truth = n == NormKind::l1 ? l1_norm(t.matrix) : nuclear_norm(t.matrix);
    CHECK((r.z - t.matrix).squaredNorm() <= 4.0 * lambda * norm_truth + 1e-9);
  });
}

TEST_CASE("single spike: omega denoiser within twice the heuristic lemma bound") {
  GroundTruthSpec g;
  g.rows = g.cols = 100;
  g.k = g.q = 10;
  g.seed = 91;
  const GroundTruth t = sample_ground_truth(g);
  const Matrix noise = gaussian_matrix(100, 100, 92);
  TpiConfig cfg;
  cfg.restarts = 50;
  const double dual = omega_dual_tpi(noise, 10, 10, cfg).value;
  SolverOptions opts;
  opts.tpi.restarts = 50;
  const DenoiseResult r = penalized_denoise(t.matrix + noise, NormKind::omega_kq, dual, 10, 10, opts);
  CHECK((r.z - t.matrix).squaredNorm() <= 8.0 * dual);
}
