#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "config.hpp"
#include "kqfactor/estimators.hpp"

namespace kqf::cli {

inline constexpr const char* kToolVersion = "0.1.0";

enum ExitCode { kExitOk = 0, kExitConfig = 2, kExitSolver = 3 };

/// Settings shared by every command; flags win over the [run] section.
struct RunOptions {
  std::string command;
  std::filesystem::path config_dir;  // relative input paths resolve against it
  std::uint64_t seed = 0;
  std::filesystem::path out = "results";
  int threads = 1;
  bool svg = false;
  std::string config_hash;
};

struct Overrides {
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out;
  std::optional<int> threads;
  bool svg = false;
};

/// Reads [run], applies overrides and stores them back so the hash covers them.
RunOptions resolve_run_options(Config& cfg, const std::string& command, const Overrides& o,
                               const std::filesystem::path& config_dir);

struct SpcaParams {
  Index p = 200;
  Index n = 80;
  Index k = 10;
  Index blocks = 3;
  Index overlap = 3;
  double sigma = 0.8;
  int runs = 10;
  std::vector<SpcaMethod> methods = all_spca_methods();
  int patience = 3;
  bool timing = false;
};

struct SpcaRecord {
  int run = 0;
  SpcaMethod method = SpcaMethod::sample_cov;
  std::string params;
  double relative_error = 0.0;
  double wall_ms = 0.0;
  Matrix estimate;  // kept for run 0 only
};

struct SpcaOutcome {
  std::vector<SpcaRecord> records;
  Matrix sigma_star;  // run 0
  Matrix sigma_hat;   // run 0
};

/// Oracle-tuned comparison of the covariance estimators over independent runs.
SpcaOutcome run_spca(const SpcaParams& params, std::uint64_t seed, int threads, bool verbose);

void cmd_norms(const Config& cfg, const RunOptions& run);
void cmd_denoise(const Config& cfg, const RunOptions& run);
void cmd_spca(const Config& cfg, const RunOptions& run);
void cmd_statdim(const Config& cfg, const RunOptions& run);

/// Full command-line entry point; returns the process exit code.
int run_main(int argc, char** argv);

}  // namespace kqf::cli
