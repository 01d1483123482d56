#include "kqfactor/atoms.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "kqfactor/rng.hpp"

namespace kqf {
namespace {

constexpr double kUnitTol = 1e-12;

void check_support(const std::vector<Index>& support, Index dim, Index expected, const char* side) {
  if (static_cast<Index>(support.size()) != expected) {
    throw std::invalid_argument(std::string("flat atom: ") + side + " support size mismatch");
  }
  for (std::size_t i = 0; i < support.size(); ++i) {
    if (support[i] < 0 || support[i] >= dim) throw std::invalid_argument("flat atom: index out of range");
    if (i > 0 && support[i] <= support[i - 1]) throw std::invalid_argument("flat atom: support must be sorted and unique");
  }
}

std::vector<Index> nonzero_pattern(const Vector& v) {
  std::vector<Index> out;
  for (Index i = 0; i < v.size(); ++i)
    if (v(i) != 0.0) out.push_back(i);
  return out;
}

std::vector<Index> window(Index start, Index len) {
  std::vector<Index> out(static_cast<std::size_t>(len));
  std::iota(out.begin(), out.end(), start);
  return out;
}

}  // namespace

void Atom::validate(Index k, Index q) const {
  if (std::abs(left.norm() - 1.0) > kUnitTol || std::abs(right.norm() - 1.0) > kUnitTol) {
    throw std::invalid_argument("atom: factors must have unit norm");
  }
  if (static_cast<Index>(left_support.size()) > k || static_cast<Index>(right_support.size()) > q) {
    throw std::invalid_argument("atom: support exceeds sparsity budget");
  }
  auto outside_zero = [](const Vector& v, const std::vector<Index>& s) {
    std::vector<bool> in(static_cast<std::size_t>(v.size()), false);
    for (Index i : s) in[i] = true;
    for (Index i = 0; i < v.size(); ++i)
      if (!in[i] && v(i) != 0.0) return false;
    return true;
  };
  if (!outside_zero(left, left_support) || !outside_zero(right, right_support)) {
    throw std::invalid_argument("atom: nonzero entry outside declared support");
  }
  if (flat) {
    const double lm = 1.0 / std::sqrt(static_cast<double>(left_support.size()));
    const double rm = 1.0 / std::sqrt(static_cast<double>(right_support.size()));
    for (Index i : left_support)
      if (std::abs(std::abs(left(i)) - lm) > kUnitTol) throw std::invalid_argument("atom: not flat");
    for (Index j : right_support)
      if (std::abs(std::abs(right(j)) - rm) > kUnitTol) throw std::invalid_argument("atom: not flat");
  }
}

Atom make_flat_atom(Index rows, Index cols, Index k, Index q, const std::vector<Index>& left_support,
                    const std::vector<Index>& right_support, const std::vector<int>& left_signs,
                    const std::vector<int>& right_signs) {
  check_support(left_support, rows, k, "left");
  check_support(right_support, cols, q, "right");
  if (!left_signs.empty() && static_cast<Index>(left_signs.size()) != k) throw std::invalid_argument("flat atom: sign count mismatch");
  if (!right_signs.empty() && static_cast<Index>(right_signs.size()) != q) throw std::invalid_argument("flat atom: sign count mismatch");
  Atom a;
  a.left = Vector::Zero(rows);
  a.right = Vector::Zero(cols);
  const double lm = 1.0 / std::sqrt(static_cast<double>(k));
  const double rm = 1.0 / std::sqrt(static_cast<double>(q));
  for (Index i = 0; i < k; ++i) {
    const int s = left_signs.empty() ? 1 : left_signs[i];
    if (s != 1 && s != -1) throw std::invalid_argument("flat atom: signs must be +-1");
    a.left(left_support[i]) = s * lm;
  }
  for (Index j = 0; j < q; ++j) {
    const int s = right_signs.empty() ? 1 : right_signs[j];
    if (s != 1 && s != -1) throw std::invalid_argument("flat atom: signs must be +-1");
    a.right(right_support[j]) = s * rm;
  }
  a.left_support = left_support;
  a.right_support = right_support;
  a.flat = true;
  return a;
}

Atom make_atom(const Vector& left, const Vector& right) {
  Atom a;
  a.left = left;
  a.right = right;
  a.left_support = nonzero_pattern(left);
  a.right_support = nonzero_pattern(right);
  return a;
}

Matrix AtomicDecomposition::materialize() const {
  Matrix out = Matrix::Zero(rows, cols);
  for (const auto& t : terms) out.noalias() += t.weight * t.atom.left * t.atom.right.transpose();
  return out;
}

double AtomicDecomposition::weight_sum() const {
  double s = 0.0;
  for (const auto& t : terms) s += t.weight;
  return s;
}

void AtomicDecomposition::sort_terms() {
  std::stable_sort(terms.begin(), terms.end(),
                   [](const DecompositionTerm& a, const DecompositionTerm& b) { return a.weight > b.weight; });
}

void GroundTruthSpec::validate() const {
  if (rows <= 0 || cols <= 0 || k <= 0 || q <= 0 || atoms <= 0) {
    throw std::invalid_argument("ground truth: dimensions, sparsity and atom count must be positive");
  }
  if (overlap < 0 || overlap >= std::min(k, q)) {
    throw std::invalid_argument("ground truth: overlap must lie in [0, min(k, q))");
  }
  if (atoms * k - (atoms - 1) * overlap > rows || atoms * q - (atoms - 1) * overlap > cols) {
    throw std::invalid_argument("ground truth: supports do not fit in the matrix");
  }
}

GroundTruth sample_ground_truth(const GroundTruthSpec& spec) {
  spec.validate();
  Pcg32 rng(spec.seed);
  GroundTruth gt;
  gt.decomposition.rows = spec.rows;
  gt.decomposition.cols = spec.cols;
  const Index row_span = spec.atoms * spec.k - (spec.atoms - 1) * spec.overlap;
  const Index col_span = spec.atoms * spec.q - (spec.atoms - 1) * spec.overlap;
  Index row_offset = 0;
  Index col_offset = 0;
  if (spec.random_placement) {
    row_offset = rng.below(static_cast<std::uint32_t>(spec.rows - row_span + 1));
    col_offset = rng.below(static_cast<std::uint32_t>(spec.cols - col_span + 1));
  }
  for (Index i = 0; i < spec.atoms; ++i) {
    const auto rs = window(row_offset + i * (spec.k - spec.overlap), spec.k);
    const auto cs = window(col_offset + i * (spec.q - spec.overlap), spec.q);
    std::vector<int> lsign, rsign;
    if (spec.random_signs) {
      for (Index j = 0; j < spec.k; ++j) lsign.push_back(rng.below(2) ? -1 : 1);
      for (Index j = 0; j < spec.q; ++j) rsign.push_back(rng.below(2) ? -1 : 1);
    }
    Atom atom = make_flat_atom(spec.rows, spec.cols, spec.k, spec.q, rs, cs, lsign, rsign);
    if (!spec.flat) {
      // Non-flat variant: random positive magnitudes on the same supports.
      for (Index r : rs) atom.left(r) *= 0.5 + rng.uniform();
      for (Index c : cs) atom.right(c) *= 0.5 + rng.uniform();
      atom.left.normalize();
      atom.right.normalize();
      atom.flat = false;
    }
    gt.decomposition.terms.push_back({1.0, std::move(atom)});
  }
  gt.matrix = gt.decomposition.materialize();
  return gt;
}

CovarianceModel sample_covariance_model(Index p, Index n, Index k, Index blocks, Index overlap, double sigma,
                                        std::uint64_t seed) {
  if (p <= 0 || n <= 0 || k <= 0 || blocks <= 0 || sigma < 0) {
    throw std::invalid_argument("covariance model: invalid parameters");
  }
  if (overlap < 0 || overlap >= k || blocks * k - (blocks - 1) * overlap > p) {
    throw std::invalid_argument("covariance model: blocks do not fit in dimension p");
  }
  CovarianceModel out;
  out.sigma_star = Matrix::Zero(p, p);
  const double mag = 1.0 / std::sqrt(static_cast<double>(k));
  for (Index b = 0; b < blocks; ++b) {
    Vector a = Vector::Zero(p);
    a.segment(b * (k - overlap), k).setConstant(mag);
    out.sigma_star.noalias() += a * a.transpose();
    out.factors.push_back(std::move(a));
  }
  // x = sum_b a_b z_b + sigma * eps  has covariance Sigma* + sigma^2 I.
  Pcg32 rng(seed);
  out.samples = Matrix::Zero(n, p);
  for (Index i = 0; i < n; ++i) {
    for (Index b = 0; b < blocks; ++b) {
      const double z = rng.normal();
      out.samples.row(i) += z * out.factors[b].transpose();
    }
    for (Index j = 0; j < p; ++j) out.samples(i, j) += sigma * rng.normal();
  }
  out.sigma_hat = out.samples.transpose() * out.samples / static_cast<double>(n);
  out.sigma_hat = (0.5 * (out.sigma_hat + out.sigma_hat.transpose())).eval();
  return out;
}

Matrix fixture(std::string_view name) {
  if (name == "ones3") return Matrix::Ones(3, 3);
  if (name == "half_ones4") return Matrix::Constant(4, 4, 0.5);
  if (name == "psd_example") {
    Matrix z(3, 3);
    z << 1, 1, 0, 1, 2, 1, 0, 1, 1;
    return z;
  }
  throw std::invalid_argument("unknown fixture: " + std::string(name));
}

Index count_nonzeros(const Matrix& m) { return (m.array() != 0.0).count(); }

}  // namespace kqf
