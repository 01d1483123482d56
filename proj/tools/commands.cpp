#include "commands.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <iostream>
#include <map>
#include <numeric>

#include <CLI11.hpp>

#include "kqfactor/kq_norm.hpp"
#include "kqfactor/rng.hpp"
#include "kqfactor/serialize.hpp"
#include "kqfactor/statdim.hpp"
#include "kqfactor/vector_norms.hpp"
#include "svg.hpp"

namespace kqf::cli {

namespace fs = std::filesystem;

namespace {

using Clock = std::chrono::steady_clock;

double elapsed_ms(Clock::time_point t0) {
  return std::chrono::duration<double, std::milli>(Clock::now() - t0).count();
}

fs::path resolve(const RunOptions& run, const std::string& p) {
  const fs::path path(p);
  return path.is_relative() ? run.config_dir / path : path;
}

Json tool_header(const RunOptions& run) {
  return Json{{"tool", "kqfactor"}, {"version", kToolVersion}, {"command", run.command},
              {"config_hash", run.config_hash}, {"seed", run.seed}};
}

void add_common_meta(CsvTable& t, const RunOptions& run) {
  t.add_meta("tool", std::string("kqfactor ") + kToolVersion);
  t.add_meta("command", run.command);
  t.add_meta("config_hash", run.config_hash);
  t.add_meta("seed", std::to_string(run.seed));
}

void write_svg(const RunOptions& run, const std::string& name, const std::string& body) {
  // The version comment is the only line allowed to differ between releases.
  std::string text = body;
  const auto pos = text.find('\n');
  text.insert(pos + 1, std::string("<!-- kqfactor ") + kToolVersion + " -->\n");
  write_text(run.out / name, text);
}

Index positive_index(const Config& cfg, const std::string& s, const std::string& key, Index fallback) {
  const std::int64_t v = cfg.get_int(s, key, fallback);
  if (v < 1) throw ConfigError("[" + s + "] " + key + " must be positive");
  return static_cast<Index>(v);
}

double dual_of(const Matrix& g, NormKind norm, Index k, Index q, const TpiConfig& tpi) {
  switch (norm) {
    case NormKind::l1: return g.cwiseAbs().maxCoeff();
    case NormKind::trace: return operator_norm(g);
    case NormKind::omega_kq: return omega_dual_tpi(g, k, q, tpi).value;
  }
  return 0.0;
}

TpiConfig tpi_from(const Config& cfg, const std::string& s, const RunOptions& run) {
  TpiConfig tpi;
  tpi.restarts = static_cast<int>(cfg.get_int(s, "restarts", tpi.restarts));
  tpi.seed = run.seed;
  tpi.threads = run.threads;
  tpi.validate();
  return tpi;
}

}  // namespace

RunOptions resolve_run_options(Config& cfg, const std::string& command, const Overrides& o,
                               const fs::path& config_dir) {
  if (o.seed) cfg.set("run", "seed", static_cast<std::int64_t>(*o.seed));
  if (o.out) cfg.set("run", "out", *o.out);
  if (o.threads) cfg.set("run", "threads", static_cast<std::int64_t>(*o.threads));
  if (o.svg) cfg.set("run", "svg", true);
  RunOptions run;
  run.command = command;
  run.config_dir = config_dir;
  const std::int64_t seed = cfg.get_int("run", "seed", 0);
  if (seed < 0) throw ConfigError("[run] seed must be nonnegative");
  run.seed = static_cast<std::uint64_t>(seed);
  const std::string out = cfg.get_string("run", "out", "results");
  run.out = o.out ? fs::path(out) : resolve(run, out);
  run.threads = static_cast<int>(cfg.get_int("run", "threads", 1));
  if (run.threads < 1) throw ConfigError("[run] threads must be positive");
  run.svg = cfg.get_bool("run", "svg", false);
  // Output location, thread count and plotting do not change results, so they stay out of the hash.
  Config hashed = cfg;
  hashed.set("run", "out", std::string());
  hashed.set("run", "threads", std::int64_t{1});
  hashed.set("run", "svg", false);
  run.config_hash = fnv1a_hex(command + "\n" + hashed.canonical());
  return run;
}

// ---------------------------------------------------------------- norms

void cmd_norms(const Config& cfg, const RunOptions& run) {
  const std::string S = "norms";
  const auto input = cfg.get_optional_string(S, "input");
  const auto fixture_name = cfg.get_optional_string(S, "fixture");
  const Index k = positive_index(cfg, S, "k", 2);
  const Index q = positive_index(cfg, S, "q", k);
  const Index vk = positive_index(cfg, S, "vector_k", k);
  const double mu = cfg.get_double(S, "mu", 0.5);
  const double primal_max_blocks = cfg.get_double(S, "primal_max_blocks", 5000);
  const int primal_iters = static_cast<int>(cfg.get_int(S, "primal_iters", 20000));
  const TpiConfig tpi = tpi_from(cfg, S, run);
  cfg.reject_unused({"run", S});
  if (input.has_value() == fixture_name.has_value()) throw ConfigError("[norms] set exactly one of input or fixture");
  if (!(mu >= 0.0 && mu <= 1.0)) throw ConfigError("[norms] mu must lie in [0, 1]");

  const Matrix z = fixture_name ? fixture(*fixture_name) : load_matrix(resolve(run, *input));
  require_finite(z, "norms input");
  if (k > z.rows() || q > z.cols()) throw ConfigError("[norms] k and q must not exceed the matrix shape");
  if (vk > z.size()) throw ConfigError("[norms] vector_k exceeds the number of entries");

  const Eigen::Map<const Vector> flat(z.data(), z.size());
  Json report = tool_header(run);
  report["input"] = fixture_name ? "fixture:" + *fixture_name : *input;
  report["rows"] = z.rows();
  report["cols"] = z.cols();
  report["k"] = k;
  report["q"] = q;
  report["vector"] = Json{{"k", vk},
                          {"theta", theta_k(flat, {vk}).value},
                          {"theta_dual", theta_k_dual(flat, {vk})},
                          {"kappa", kappa_k(flat, {vk})},
                          {"kappa_dual", kappa_k_dual(flat, {vk})}};
  report["l1"] = l1_norm(z);
  report["trace"] = nuclear_norm(z);
  report["operator"] = operator_norm(z);
  report["gamma_mu"] = Json{{"mu", mu}, {"value", gamma_mu(z, mu, k, q)}};

  const DualCertificate tpi_cert = omega_dual_tpi(z, k, q, tpi);
  report["omega_dual_tpi"] = certificate_to_json(tpi_cert);
  const double blocks = binomial(z.rows(), k) * binomial(z.cols(), q);
  double dual = tpi_cert.value;
  if (blocks <= kEnumerationGuard) {
    const DualCertificate exact = omega_dual_enumerate(z, k, q);
    report["omega_dual_enumerate"] = certificate_to_json(exact);
    dual = exact.value;
  } else {
    report["omega_dual_enumerate"] = nullptr;
  }
  report["omega_dual"] = dual;
  if (blocks <= primal_max_blocks) {
    const PrimalOracleResult p = omega_primal_oracle(z, k, q, primal_iters);
    report["omega_primal"] = p.value;
    report["omega_primal_lower"] = p.lower;
    report["omega_primal_gap"] = p.gap;
    report["omega_primal_iterations"] = p.iterations;
  } else {
    report["omega_primal"] = nullptr;
  }
  write_text(run.out / "norms.json", report.dump(2) + "\n");
  if (run.svg) write_svg(run, "input.svg", svg_heatmap(z, "input"));
  std::cout << "omega_dual " << format_double(dual);
  if (!report["omega_primal"].is_null()) std::cout << "  omega_primal " << format_double(report["omega_primal"].get<double>());
  std::cout << "\nwrote " << (run.out / "norms.json").string() << "\n";
}

// ---------------------------------------------------------------- denoise

void cmd_denoise(const Config& cfg, const RunOptions& run) {
  const std::string S = "denoise";
  const std::string mode = cfg.get_string(S, "mode", "penalized");
  const NormKind norm = norm_kind_from_string(cfg.get_string(S, "norm", "omega"));
  const auto input = cfg.get_optional_string(S, "input");
  const auto truth_path = cfg.get_optional_string(S, "truth");
  const Index k = positive_index(cfg, S, "k", 10);
  const Index q = positive_index(cfg, S, "q", k);
  const Index m1 = positive_index(cfg, S, "m1", 100);
  const Index m2 = positive_index(cfg, S, "m2", m1);
  const Index atoms = positive_index(cfg, S, "atoms", 1);
  const Index overlap = static_cast<Index>(cfg.get_int(S, "overlap", 0));
  const double sigma = cfg.get_double(S, "sigma", 1.0);
  const auto lambda_value = cfg.get_optional_double(S, "lambda");
  const std::string lambda_rule = cfg.get_string(S, "lambda_rule", lambda_value ? "fixed" : "dual");
  const double lambda_scale = cfg.get_double(S, "lambda_scale", 1.0);
  const auto radius_value = cfg.get_optional_double(S, "radius");
  SolverOptions solver;
  solver.tpi = tpi_from(cfg, S, run);
  solver.tol_inner = cfg.get_double(S, "tol_inner", solver.tol_inner);
  solver.max_outer = static_cast<int>(cfg.get_int(S, "max_outer", solver.max_outer));
  cfg.reject_unused({"run", S});
  if (mode != "penalized" && mode != "constrained") throw ConfigError("[denoise] mode must be penalized or constrained");
  if (!(sigma >= 0.0)) throw ConfigError("[denoise] sigma must be nonnegative");
  if (lambda_rule != "fixed" && lambda_rule != "dual") throw ConfigError("[denoise] lambda_rule must be fixed or dual");
  if (lambda_rule == "fixed" && !lambda_value) throw ConfigError("[denoise] lambda_rule = fixed needs lambda");

  // Observation, optional truth and, when known, the noise matrix G with Y = Z* + sigma G.
  Matrix y, truth, noise;
  AtomicDecomposition truth_decomposition;
  bool have_truth = false, have_decomposition = false, have_noise = false;
  if (input) {
    y = load_matrix(resolve(run, *input));
    if (truth_path) {
      truth = load_matrix(resolve(run, *truth_path), &truth_decomposition);
      if (truth.rows() != y.rows() || truth.cols() != y.cols()) throw ConfigError("[denoise] truth shape differs from input");
      have_truth = true;
      have_decomposition = !truth_decomposition.terms.empty();
      if (sigma > 0.0) {
        noise = (y - truth) / sigma;
        have_noise = true;
      }
    }
  } else {
    if (truth_path) throw ConfigError("[denoise] truth without input; omit both to generate data");
    GroundTruthSpec g;
    g.rows = m1;
    g.cols = m2;
    g.k = k;
    g.q = q;
    g.atoms = atoms;
    g.overlap = overlap;
    g.seed = run.seed;
    g.validate();
    GroundTruth gt = sample_ground_truth(g);
    truth = gt.matrix;
    truth_decomposition = gt.decomposition;
    noise = gaussian_matrix(m1, m2, mix_seed(run.seed + 1));
    y = truth + sigma * noise;
    have_truth = have_decomposition = have_noise = true;
  }
  require_finite(y, "denoise input");
  if (k > y.rows() || q > y.cols()) throw ConfigError("[denoise] k and q must not exceed the matrix shape");

  Json report = tool_header(run);
  report["mode"] = mode;
  report["norm"] = to_string(norm);
  report["rows"] = y.rows();
  report["cols"] = y.cols();
  report["k"] = k;
  report["q"] = q;
  report["sigma"] = sigma;

  auto norm_of_truth = [&]() -> std::optional<double> {
    switch (norm) {
      case NormKind::l1: return l1_norm(truth);
      case NormKind::trace: return nuclear_norm(truth);
      case NormKind::omega_kq:
        if (have_decomposition) return omega_value_from_decomposition(truth_decomposition, k, q);
        return std::nullopt;
    }
    return std::nullopt;
  };

  DenoiseResult result;
  std::optional<SolveReport> solve_report;
  double dual_estimate = NAN;
  if (have_noise) dual_estimate = dual_of(noise, norm, k, q, solver.tpi);
  if (mode == "penalized") {
    double lambda = lambda_value.value_or(0.0);
    if (lambda_rule == "dual") {
      if (!have_noise) throw ConfigError("[denoise] lambda_rule = dual needs the noise (generated data or truth with sigma > 0)");
      lambda = lambda_scale * sigma * dual_estimate;
    }
    if (!(lambda >= 0.0)) throw ConfigError("[denoise] lambda must be nonnegative");
    if (norm == NormKind::omega_kq && lambda > 0.0) {
      const SolveResult s = prox_omega_kq(y, lambda, k, q, false, solver);
      result.z = s.z;
      result.decomposition = s.report.atoms;
      result.norm_value = s.report.atoms.weight_sum();
      result.lambda = lambda;
      result.prox_solves = 1;
      solve_report = s.report;
    } else {
      result = penalized_denoise(y, norm, lambda, k, q, solver);
    }
  } else {
    DenoiserSpec spec;
    spec.norm = norm;
    spec.k = k;
    spec.q = q;
    spec.sigma = sigma;
    spec.solver = solver;
    if (radius_value) {
      spec.radius = *radius_value;
    } else {
      const auto r = have_truth ? norm_of_truth() : std::nullopt;
      if (!r) throw ConfigError("[denoise] constrained mode needs radius or a truth with a known norm");
      spec.radius = *r;
    }
    result = constrained_denoise(y, spec);
    report["radius"] = spec.radius;
  }
  report["lambda"] = result.lambda;
  report["norm_value"] = result.norm_value;
  report["prox_solves"] = result.prox_solves;
  if (solve_report) report["solve"] = solve_report_to_json(*solve_report);
  if (norm == NormKind::omega_kq) report["decomposition"] = decomposition_to_json(result.decomposition);
  if (have_truth) {
    const double err = (result.z - truth).squaredNorm();
    report["error"] = Json{{"squared_error", err}, {"relative_error", relative_error(result.z, truth)}};
  }
  if (have_noise) report["dual_estimate"] = dual_estimate;
  if (mode == "penalized" && have_truth && have_noise) {
    const auto nt = norm_of_truth();
    const bool applies = result.lambda >= sigma * dual_estimate;
    Json check{{"lambda", result.lambda}, {"sigma_dual", sigma * dual_estimate}, {"applies", applies}};
    if (applies && nt) {
      const double bound = 4.0 * result.lambda * *nt;
      const double err = (result.z - truth).squaredNorm();
      check["norm_truth"] = *nt;
      check["bound"] = bound;
      check["squared_error"] = err;
      check["satisfied"] = err <= bound;
    }
    report["bound_check"] = check;
  }

  write_matrix_csv(run.out / "zhat.csv", result.z);
  if (norm == NormKind::omega_kq) {
    write_text(run.out / "decomposition.json", decomposition_to_json(result.decomposition).dump(2) + "\n");
  }
  write_text(run.out / "report.json", report.dump(2) + "\n");
  if (run.svg) {
    write_svg(run, "observed.svg", svg_heatmap(y, "observed"));
    write_svg(run, "estimate.svg", svg_heatmap(result.z, "estimate (" + to_string(norm) + ")"));
    if (have_truth) write_svg(run, "truth.svg", svg_heatmap(truth, "truth"));
  }
  std::cout << "lambda " << format_double(result.lambda) << "  norm " << format_double(result.norm_value);
  if (have_truth) std::cout << "  squared_error " << format_double(report["error"]["squared_error"].get<double>());
  if (report.contains("bound_check") && report["bound_check"].contains("satisfied")) {
    std::cout << "  bound " << format_double(report["bound_check"]["bound"].get<double>())
              << (report["bound_check"]["satisfied"].get<bool>() ? " (holds)" : " (VIOLATED)");
  }
  std::cout << "\nwrote " << run.out.string() << "\n";
}

// ---------------------------------------------------------------- spca

SpcaOutcome run_spca(const SpcaParams& params, std::uint64_t seed, int threads, bool verbose) {
  SpcaOutcome outcome;
  for (int r = 0; r < params.runs; ++r) {
    const std::uint64_t run_seed = mix_seed(seed + static_cast<std::uint64_t>(r));
    const CovarianceModel model = sample_covariance_model(params.p, params.n, params.k, params.blocks, params.overlap,
                                                          params.sigma, run_seed);
    if (r == 0) {
      outcome.sigma_star = model.sigma_star;
      outcome.sigma_hat = model.sigma_hat;
    }
    for (SpcaMethod m : params.methods) {
      SpcaEstimatorSpec base;
      base.method = m;
      base.k = params.k;
      base.r = params.blocks;
      base.solver.tpi.seed = run_seed;
      base.solver.tpi.threads = threads;
      const auto t0 = Clock::now();
      TunedEstimate best = tune_oracle(model.sigma_hat, model.sigma_star, base, default_grid(m), params.patience);
      SpcaRecord rec;
      rec.run = r;
      rec.method = m;
      rec.params = best.spec.describe();
      rec.relative_error = best.relative_error;
      rec.wall_ms = params.timing ? elapsed_ms(t0) : 0.0;
      if (r == 0) rec.estimate = best.result.estimate;
      if (verbose) {
        std::cerr << "run " << r + 1 << "/" << params.runs << "  " << to_string(m) << "  error "
                  << format_double(best.relative_error) << "\n";
      }
      outcome.records.push_back(std::move(rec));
    }
  }
  return outcome;
}

void cmd_spca(const Config& cfg, const RunOptions& run) {
  const std::string S = "spca";
  SpcaParams params;
  params.p = positive_index(cfg, S, "p", params.p);
  params.n = positive_index(cfg, S, "n", params.n);
  params.k = positive_index(cfg, S, "k", params.k);
  params.blocks = positive_index(cfg, S, "blocks", params.blocks);
  params.overlap = static_cast<Index>(cfg.get_int(S, "overlap", params.overlap));
  params.sigma = cfg.get_double(S, "sigma", params.sigma);
  params.runs = static_cast<int>(positive_index(cfg, S, "runs", params.runs));
  params.patience = static_cast<int>(positive_index(cfg, S, "patience", params.patience));
  params.timing = cfg.get_bool(S, "timing", false);
  std::vector<std::string> all;
  for (SpcaMethod m : all_spca_methods()) all.push_back(to_string(m));
  params.methods.clear();
  for (const auto& name : cfg.get_string_list(S, "methods", all)) params.methods.push_back(spca_method_from_string(name));
  cfg.reject_unused({"run", S});
  if (params.overlap < 0 || params.overlap >= params.k) throw ConfigError("[spca] overlap must lie in [0, k)");
  if (params.blocks * params.k - (params.blocks - 1) * params.overlap > params.p) {
    throw ConfigError("[spca] blocks do not fit in p");
  }
  if (!(params.sigma >= 0.0)) throw ConfigError("[spca] sigma must be nonnegative");

  const SpcaOutcome outcome = run_spca(params, run.seed, run.threads, true);

  CsvTable runs({"run", "method", "params", "relative_error", "wall_ms"});
  add_common_meta(runs, run);
  for (const auto& r : outcome.records) {
    runs.add_row({std::to_string(r.run), to_string(r.method), r.params, format_double(r.relative_error),
                  format_double(r.wall_ms)});
  }
  runs.write(run.out / "spca_runs.csv");

  CsvTable summary({"method", "params", "relative_error_mean", "relative_error_std", "wall_ms"});
  add_common_meta(summary, run);
  summary.add_meta("p", std::to_string(params.p));
  summary.add_meta("n", std::to_string(params.n));
  summary.add_meta("k", std::to_string(params.k));
  summary.add_meta("blocks", std::to_string(params.blocks));
  summary.add_meta("overlap", std::to_string(params.overlap));
  summary.add_meta("sigma", format_double(params.sigma));
  summary.add_meta("runs", std::to_string(params.runs));
  summary.add_meta("tuning", "oracle (best grid cell by true relative error)");
  std::cout << "method               mean    std\n";
  for (SpcaMethod m : params.methods) {
    std::vector<double> errs;
    double ms = 0.0;
    std::map<std::string, int> votes;
    for (const auto& r : outcome.records) {
      if (r.method != m) continue;
      errs.push_back(r.relative_error);
      ms += r.wall_ms;
      ++votes[r.params];
    }
    const double mean = std::accumulate(errs.begin(), errs.end(), 0.0) / static_cast<double>(errs.size());
    double var = 0.0;
    for (double e : errs) var += (e - mean) * (e - mean);
    const double sd = errs.size() > 1 ? std::sqrt(var / static_cast<double>(errs.size() - 1)) : 0.0;
    // Most frequent tuned setting; ties go to the lexicographically smallest.
    std::string params_mode;
    int best_votes = 0;
    for (const auto& [p, v] : votes) {
      if (v > best_votes) params_mode = p, best_votes = v;
    }
    summary.add_row({to_string(m), params_mode, format_double(mean), format_double(sd),
                     format_double(ms / static_cast<double>(errs.size()))});
    char line[96];
    std::snprintf(line, sizeof(line), "%-18s %6.3f %6.3f\n", to_string(m).c_str(), mean, sd);
    std::cout << line;
  }
  summary.write(run.out / "spca.csv");

  if (run.svg) {
    write_svg(run, "sigma_star.svg", svg_heatmap(outcome.sigma_star, "true covariance"));
    write_svg(run, "sigma_hat.svg", svg_heatmap(outcome.sigma_hat, "sample covariance"));
    for (const auto& r : outcome.records) {
      if (r.run != 0) continue;
      write_svg(run, "estimate_" + to_string(r.method) + ".svg", svg_heatmap(r.estimate, to_string(r.method)));
      if (r.method == SpcaMethod::omega_k_psd || r.method == SpcaMethod::sequential) {
        const Matrix mask = (r.estimate.array().abs() > 0.0).cast<double>().matrix();
        write_svg(run, "support_" + to_string(r.method) + ".svg",
                  svg_heatmap(mask, "support of " + to_string(r.method)));
      }
    }
  }
  std::cout << "wrote " << (run.out / "spca.csv").string() << "\n";
}

// ---------------------------------------------------------------- statdim

void cmd_statdim(const Config& cfg, const RunOptions& run) {
  const std::string S = "statdim";
  StatDimExperiment exp;
  GroundTruthSpec& g = exp.ground_truth;
  const Index m = positive_index(cfg, S, "m", 200);
  g.rows = positive_index(cfg, S, "m1", m);
  g.cols = positive_index(cfg, S, "m2", m);
  g.k = positive_index(cfg, S, "k", 10);
  g.q = positive_index(cfg, S, "q", g.k);
  g.atoms = positive_index(cfg, S, "atoms", 1);
  g.overlap = static_cast<Index>(cfg.get_int(S, "overlap", 0));
  g.seed = run.seed;
  exp.sigma = cfg.get_double(S, "sigma", exp.sigma);
  exp.repeats = static_cast<int>(positive_index(cfg, S, "repeats", exp.repeats));
  exp.seed = run.seed;
  exp.denoiser.solver.tpi.threads = run.threads;
  const std::string projection = cfg.get_string(S, "projection", "lambda_search");
  SweepSpec sweep;
  sweep.variable = sweep_variable_from_string(cfg.get_string(S, "sweep", "k"));
  sweep.name = cfg.get_string(S, "name", "sweep_" + to_string(sweep.variable));
  for (std::int64_t v : cfg.get_int_list(S, "values", {5, 10, 20, 40})) sweep.values.push_back(static_cast<Index>(v));
  std::vector<NormKind> norms;
  for (const auto& n : cfg.get_string_list(S, "norms", {"l1", "trace", "omega"})) norms.push_back(norm_kind_from_string(n));
  const bool timing = cfg.get_bool(S, "timing", false);
  cfg.reject_unused({"run", S});
  if (projection == "lambda_search") {
    exp.denoiser.projection = OmegaProjection::lambda_search;
  } else if (projection == "small_lambda") {
    exp.denoiser.projection = OmegaProjection::small_lambda;
  } else {
    throw ConfigError("[statdim] projection must be lambda_search or small_lambda");
  }

  const std::vector<SweepRow> rows = run_statdim_sweep(exp, sweep, norms);
  for (const auto& r : rows) {
    std::cerr << sweep.name << " " << r.sweep_value << "  " << to_string(r.norm) << "  " << format_double(r.estimate)
              << " +- " << format_double(r.std_error) << "\n";
  }

  CsvTable table({"sweep_name", "sweep_value", "norm", "estimate", "stderr", "bound_name", "bound_value", "seed",
                  "wall_ms"});
  add_common_meta(table, run);
  table.add_meta("m1", std::to_string(g.rows));
  table.add_meta("m2", std::to_string(g.cols));
  table.add_meta("sigma", format_double(exp.sigma));
  table.add_meta("repeats", std::to_string(exp.repeats));
  table.add_meta("projection", projection);
  for (const auto& r : rows) {
    table.add_row({r.sweep_name, std::to_string(r.sweep_value), to_string(r.norm), format_double(r.estimate),
                   format_double(r.std_error), r.bound_name, r.bound_value ? format_double(*r.bound_value) : "",
                   std::to_string(r.seed), format_double(timing ? r.wall_ms : 0.0)});
  }
  table.write(run.out / "statdim.csv");

  if (run.svg) {
    std::vector<Series> series;
    for (NormKind n : norms) {
      Series s{to_string(n), {}, {}, false};
      Series b{"", {}, {}, true};
      for (const auto& r : rows) {
        if (r.norm != n) continue;
        s.x.push_back(static_cast<double>(r.sweep_value));
        s.y.push_back(r.estimate);
        if (r.bound_value) {
          b.label = r.bound_name + " bound";
          b.x.push_back(static_cast<double>(r.sweep_value));
          b.y.push_back(*r.bound_value);
        }
      }
      series.push_back(std::move(s));
      if (!b.x.empty()) series.push_back(std::move(b));
    }
    write_svg(run, "statdim.svg",
              svg_line_plot(series, "NMSE estimate, m1=" + std::to_string(g.rows) + " m2=" + std::to_string(g.cols),
                            to_string(sweep.variable), "estimate"));
  }
  std::cout << "wrote " << (run.out / "statdim.csv").string() << "\n";
}

// ---------------------------------------------------------------- main

int run_main(int argc, char** argv) {
  CLI::App app{"Sparse low-rank matrix estimation with the (k,q)-trace norm"};
  app.set_version_flag("--version", std::string("kqfactor ") + kToolVersion);
  app.require_subcommand(1, 1);
  std::string config_path;
  Overrides o;
  std::uint64_t seed = 0;
  std::string out;
  int threads = 1;
  for (const char* name : {"norms", "denoise", "spca", "statdim"}) {
    CLI::App* sub = app.add_subcommand(name, std::string("run the ") + name + " command");
    sub->add_option("--config", config_path, "configuration file")->required();
    sub->add_option("--seed", seed, "random seed (overrides [run] seed)");
    sub->add_option("--out", out, "output directory (overrides [run] out)");
    sub->add_option("--threads", threads, "worker threads (overrides [run] threads)");
    sub->add_flag("--svg", o.svg, "write SVG plots");
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitConfig;
  }
  const std::string command = app.get_subcommands().front()->get_name();
  const CLI::App* sub = app.get_subcommands().front();
  if (sub->count("--seed")) o.seed = seed;
  if (sub->count("--out")) o.out = out;
  if (sub->count("--threads")) o.threads = threads;

  try {
    Config cfg = Config::load(config_path);
    const RunOptions run = resolve_run_options(cfg, command, o, fs::path(config_path).parent_path());
    if (command == "norms") cmd_norms(cfg, run);
    else if (command == "denoise") cmd_denoise(cfg, run);
    else if (command == "spca") cmd_spca(cfg, run);
    else cmd_statdim(cfg, run);
    return kExitOk;
  } catch (const ConvergenceError& e) {
    std::cerr << "kqfactor: solver failure: " << e.what() << "\n";
    return kExitSolver;
  } catch (const SolveError& e) {
    std::cerr << "kqfactor: solver failure: " << e.what() << "\n";
    return kExitSolver;
  } catch (const StatDimError& e) {
    std::cerr << "kqfactor: solver failure: " << e.what() << "\n";
    return kExitSolver;
  } catch (const ConfigError& e) {
    std::cerr << "kqfactor: config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::invalid_argument& e) {
    std::cerr << "kqfactor: invalid input: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::logic_error& e) {
    std::cerr << "kqfactor: internal error: " << e.what() << "\n";
    return kExitSolver;
  } catch (const std::exception& e) {
    std::cerr << "kqfactor: " << e.what() << "\n";
    return kExitConfig;
  }
}

}  // namespace kqf::cli
