#pragma once

#include <optional>
#include <string>
#include <vector>

#include "kqfactor/atoms.hpp"
#include "kqfactor/estimators.hpp"

namespace kqf {

struct StatDimExperiment {
  GroundTruthSpec ground_truth;
  NormKind norm = NormKind::l1;
  double sigma = 1e-4;
  int repeats = 20;
  std::uint64_t seed = 0;
  /// Options for the omega denoiser; k, q and radius are filled from the ground truth.
  DenoiserSpec denoiser;

  void validate() const;
};

struct StatDimEstimate {
  double estimate = 0.0;
  double std_error = 0.0;
  std::vector<double> samples;
  double wall_ms = 0.0;
};

/// Thrown when a repeat fails; carries the repeats completed so far.
class StatDimError : public std::runtime_error {
 public:
  StatDimError(const std::string& what, StatDimEstimate partial)
      : std::runtime_error(what), partial_(std::move(partial)) {}
  const StatDimEstimate& partial() const noexcept { return partial_; }

 private:
  StatDimEstimate partial_;
};

/// Mean and standard error of ||Zhat - Z||_F^2 / sigma^2 for the constrained
/// denoiser with radius equal to the norm of the ground truth. `cell` selects
/// an independent noise stream.
StatDimEstimate nmse_statdim(const StatDimExperiment& exp, std::uint64_t cell = 0);

enum class BoundKind {
  cut_prop12,
  kq_prop14,
  kappa_lower16,
  kappa_upper16,
  ksupport_17,
  ksupport_atom,
  lasso,
  oymak_lower15,
};

std::string to_string(BoundKind b);
BoundKind bound_kind_from_string(const std::string& s);

struct BoundInputs {
  Index m1 = 0;
  Index m2 = 0;
  Index k = 0;
  Index q = 0;
  Index p = 0;
  Index s = 0;
  std::optional<double> gamma;
  double mu = 0.0;
  Index r = 1;
  /// Vector argument of the general k-support bound.
  std::optional<Vector> w;
  /// Factors of the atom for the order-only Gamma_mu lower bound.
  std::optional<Vector> a;
  std::optional<Vector> b;
};

/// Closed-form statistical-dimension bounds (natural logarithms).
double bound_statdim(BoundKind which, const BoundInputs& in);

/// Atom strength (k min a_i^2) ^ (q min b_j^2) over the supports.
double atom_strength(const Vector& a, const Vector& b, Index k, Index q);

enum class SweepVariable { k, r, overlap };

std::string to_string(SweepVariable v);
SweepVariable sweep_variable_from_string(const std::string& s);

struct SweepSpec {
  std::string name;
  SweepVariable variable = SweepVariable::k;
  std::vector<Index> values;
};

struct SweepRow {
  std::string sweep_name;
  Index sweep_value = 0;
  NormKind norm = NormKind::l1;
  double estimate = 0.0;
  double std_error = 0.0;
  std::string bound_name;
  std::optional<double> bound_value;
  std::uint64_t seed = 0;
  double wall_ms = 0.0;
};

/// One nmse_statdim per (value, norm) cell with bound overlays where defined.
std::vector<SweepRow> run_statdim_sweep(const StatDimExperiment& base, const SweepSpec& sweep,
                                        const std::vector<NormKind>& norms);

struct LineFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r2 = 0.0;
};

/// Ordinary least squares y = slope * x + intercept.
LineFit fit_line(const std::vector<double>& x, const std::vector<double>& y);

}  // namespace kqf
