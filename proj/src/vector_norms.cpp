#include "kqfactor/vector_norms.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "kqfactor/simplex_lp.hpp"

namespace kqf {

void SparsityLevel::check(Index dim) const {
  if (k < 1 || k > dim) {
    throw std::invalid_argument("sparsity level " + std::to_string(k) + " outside [1, " +
                                std::to_string(dim) + "]");
  }
}

std::vector<Index> top_k_indices(const Vector& v, Index k) {
  std::vector<Index> order(v.size());
  std::iota(order.begin(), order.end(), Index{0});
  std::stable_sort(order.begin(), order.end(),
                   [&v](Index a, Index b) { return std::abs(v(a)) > std::abs(v(b)); });
  order.resize(static_cast<std::size_t>(std::min<Index>(k, v.size())));
  return order;
}

namespace {

std::vector<Index> sorted_by_magnitude(const Vector& v) { return top_k_indices(v, v.size()); }

double top_k_sum_sq(const Vector& s, Index k) {
  double acc = 0.0;
  for (Index i : top_k_indices(s, k)) acc += s(i) * s(i);
  return acc;
}

double top_k_sum_abs(const Vector& s, Index k) {
  double acc = 0.0;
  for (Index i : top_k_indices(s, k)) acc += std::abs(s(i));
  return acc;
}

}  // namespace

ThetaResult theta_k(const Vector& w, SparsityLevel level) {
  const Index p = w.size();
  level.check(p);
  const Index k = level.k;
  const std::vector<Index> order = sorted_by_magnitude(w);
  // bar[i] = |w| sorted, 1-based with bar[0] = +inf.
  std::vector<double> bar(static_cast<std::size_t>(p) + 1);
  bar[0] = std::numeric_limits<double>::infinity();
  for (Index i = 0; i < p; ++i) bar[i + 1] = std::abs(w(order[i]));
  // suffix[i] = sum_{j >= i} bar[j]
  std::vector<double> suffix(static_cast<std::size_t>(p) + 2, 0.0);
  for (Index i = p; i >= 1; --i) suffix[i] = suffix[i + 1] + bar[i];

  const double slack = Tolerances::theta_boundary_slack * std::max(1.0, bar.size() > 1 ? bar[1] : 0.0);
  Index chosen = -1;
  double best_violation = std::numeric_limits<double>::infinity();
  Index fallback = 0;
  for (Index r = 0; r < k; ++r) {
    const double mid = suffix[k - r] / static_cast<double>(r + 1);
    const double left = bar[k - r - 1];
    const double right = bar[k - r];
    if (left > mid - slack && mid >= right - slack) {
      chosen = r;
      break;
    }
    const double violation = std::max(0.0, mid - left) + std::max(0.0, right - mid);
    if (violation < best_violation) {
      best_violation = violation;
      fallback = r;
    }
  }
  if (chosen < 0) chosen = fallback;

  ThetaResult out;
  out.r = chosen;
  const Index head_len = k - chosen - 1;
  double head_sq = 0.0;
  for (Index i = 1; i <= head_len; ++i) head_sq += bar[i] * bar[i];
  const double tail = suffix[k - chosen];
  out.value = std::sqrt(head_sq + tail * tail / static_cast<double>(chosen + 1));
  for (Index i = 0; i < p; ++i) {
    if (i < head_len) {
      out.head.push_back(order[i]);
    } else if (w(order[i]) != 0.0) {
      out.tail_nonzero.push_back(order[i]);
    } else {
      out.tail_zero.push_back(order[i]);
    }
  }
  return out;
}

Vector theta_k_subgradient(const Vector& w, SparsityLevel level) {
  const ThetaResult t = theta_k(w, level);
  Vector alpha = Vector::Zero(w.size());
  if (t.value == 0.0) return alpha;
  double tail_l1 = 0.0;
  for (Index i : t.tail_nonzero) tail_l1 += std::abs(w(i));
  for (Index i : t.head) alpha(i) = w(i) / t.value;
  const double scale = tail_l1 / (static_cast<double>(t.r + 1) * t.value);
  for (Index i : t.tail_nonzero) alpha(i) = std::copysign(scale, w(i));
  return alpha;
}

double theta_k_dual(const Vector& s, SparsityLevel level) {
  level.check(s.size());
  return std::sqrt(top_k_sum_sq(s, level.k));
}

double kappa_k(const Vector& w, SparsityLevel level) {
  level.check(w.size());
  const double k = static_cast<double>(level.k);
  const double linf = w.size() ? w.cwiseAbs().maxCoeff() : 0.0;
  return std::sqrt(k) * std::max(linf, w.lpNorm<1>() / k);
}

double kappa_k_dual(const Vector& s, SparsityLevel level) {
  level.check(s.size());
  return top_k_sum_abs(s, level.k) / std::sqrt(static_cast<double>(level.k));
}

namespace {

// Calls fn(subset) for every size-k subset of {0..p-1} in lexicographic order.
template <typename Fn>
void for_each_subset(Index p, Index k, Fn&& fn) {
  std::vector<Index> idx(static_cast<std::size_t>(k));
  std::iota(idx.begin(), idx.end(), Index{0});
  for (;;) {
    fn(idx);
    Index i = k - 1;
    while (i >= 0 && idx[i] == p - k + i) --i;
    if (i < 0) return;
    ++idx[i];
    for (Index j = i + 1; j < k; ++j) idx[j] = idx[j - 1] + 1;
  }
}

}  // namespace

double dual_oracle_enumerate(const Vector& s, SparsityLevel level, VectorDual which) {
  const Index p = s.size();
  if (p > 20) throw std::invalid_argument("dual_oracle_enumerate: dimension above 20");
  level.check(p);
  double best = 0.0;
  for_each_subset(p, level.k, [&](const std::vector<Index>& subset) {
    double v = 0.0;
    if (which == VectorDual::theta) {
      for (Index i : subset) v += s(i) * s(i);
      v = std::sqrt(v);
    } else {
      for (Index i : subset) v += std::abs(s(i));
      v /= std::sqrt(static_cast<double>(level.k));
    }
    best = std::max(best, v);
  });
  return best;
}

double gauge_oracle_lp(const Vector& w, SparsityLevel level) {
  const Index p = w.size();
  if (p > 8 || level.k > 4) throw std::invalid_argument("gauge_oracle_lp: requires p <= 8 and k <= 4");
  level.check(p);
  if (w.isZero(0.0)) return 0.0;
  const Index k = level.k;
  const double mag = 1.0 / std::sqrt(static_cast<double>(k));
  std::vector<Vector> atoms;
  for_each_subset(p, k, [&](const std::vector<Index>& subset) {
    for (unsigned signs = 0; signs < (1u << k); ++signs) {
      Vector a = Vector::Zero(p);
      for (Index j = 0; j < k; ++j) a(subset[j]) = ((signs >> j) & 1u) ? -mag : mag;
      atoms.push_back(std::move(a));
    }
  });
  Matrix a(p, static_cast<Index>(atoms.size()));
  for (std::size_t j = 0; j < atoms.size(); ++j) a.col(static_cast<Index>(j)) = atoms[j];
  const Vector cost = Vector::Ones(a.cols());
  return solve_standard_lp(a, w, cost).objective;
}

}  // namespace kqf
