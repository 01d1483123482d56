#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <string>

#include <doctest.h>

#include "kqfactor/linalg.hpp"
#include "kqfactor/rng.hpp"

namespace kqf::test {

/// Runs `body(rng, case_index)` for `cases` independently seeded cases.
/// A failing case is reported with the seed that reproduces it.
inline void for_cases(int cases, std::uint64_t seed, const std::function<void(Pcg32&, int)>& body) {
  for (int c = 0; c < cases; ++c) {
    const std::uint64_t s = mix_seed(seed + static_cast<std::uint64_t>(c));
    INFO("property case " << c << " (seed " << s << ")");
    Pcg32 rng(s);
    body(rng, c);
  }
}

inline Vector random_vector(Pcg32& rng, Index n, double scale = 1.0) {
  Vector v(n);
  for (Index i = 0; i < n; ++i) v(i) = scale * rng.normal();
  return v;
}

inline Matrix random_matrix(Pcg32& rng, Index r, Index c, double scale = 1.0) {
  Matrix m(r, c);
  for (Index j = 0; j < c; ++j)
    for (Index i = 0; i < r; ++i) m(i, j) = scale * rng.normal();
  return m;
}

inline Matrix random_symmetric(Pcg32& rng, Index n) {
  const Matrix a = random_matrix(rng, n, n);
  return 0.5 * (a + a.transpose());
}

/// Integer in [lo, hi].
inline Index uniform_int(Pcg32& rng, Index lo, Index hi) {
  return lo + static_cast<Index>(rng.below(static_cast<std::uint32_t>(hi - lo + 1)));
}

/// Vector with some coordinates zeroed and some magnitudes tied, to hit
/// the boundary cases of sorting-based closed forms.
inline Vector structured_vector(Pcg32& rng, Index n) {
  Vector v = random_vector(rng, n);
  for (Index i = 0; i < n; ++i) {
    const double u = rng.uniform();
    if (u < 0.15) v(i) = 0.0;
    else if (u < 0.3) v(i) = (rng.uniform() < 0.5 ? -1.0 : 1.0);
  }
  return v;
}

}  // namespace kqf::test
