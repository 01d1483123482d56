#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "support.hpp"

#include "kqfactor/kq_norm.hpp"
#include "kqfactor/tpi.hpp"

using namespace kqf;
using kqf::test::for_cases;

namespace {

Index nnz(const Vector& v) { return (v.array() != 0.0).count(); }

void check_feasible(const Matrix& a, const TpiResult& r, Index k, Index q) {
  CHECK(r.left.norm() == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(r.right.norm() == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(nnz(r.left) <= k);
  CHECK(nnz(r.right) <= q);
  CHECK(static_cast<Index>(r.supports.rows.size()) == k);
  CHECK(static_cast<Index>(r.supports.cols.size()) == q);
  for (Index i = 0; i < r.left.size(); ++i)
    if (r.left(i) != 0.0) CHECK(std::binary_search(r.supports.rows.begin(), r.supports.rows.end(), i));
  for (Index j = 0; j < r.right.size(); ++j)
    if (r.right(j) != 0.0) CHECK(std::binary_search(r.supports.cols.begin(), r.supports.cols.end(), j));
  CHECK(std::abs(r.rayleigh - r.left.dot(a * r.right)) <= 1e-10 * std::max(1.0, a.norm()));
}

}  // namespace

TEST_CASE("truncate_top_k examples") {
  Vector v(3);
  v << 3, -5, 1;
  Vector e(3);
  e << 0, -5, 0;
  CHECK(truncate_top_k(v, 1) == e);
  CHECK(truncate_top_k(v, 3) == v);
  Vector tie(3);
  tie << 2, 2, 1;
  Vector te(3);
  te << 2, 0, 0;
  CHECK(truncate_top_k(tie, 1) == te);
  CHECK_THROWS_AS(truncate_top_k(v, 0), std::invalid_argument);
  CHECK_THROWS_AS(truncate_top_k(v, 4), std::invalid_argument);
}

TEST_CASE("truncate_top_k keeps exactly the k largest magnitudes") {
  for_cases(150, 61, [](Pcg32& rng, int) {
    const Index p = test::uniform_int(rng, 1, 15);
    const Index k = test::uniform_int(rng, 1, p);
    const Vector v = test::structured_vector(rng, p);
    const Vector t = truncate_top_k(v, k);
    // Oracle: stable sort of indices by decreasing magnitude.
    std::vector<Index> idx(p);
    for (Index i = 0; i < p; ++i) idx[i] = i;
    std::stable_sort(idx.begin(), idx.end(), [&](Index x, Index y) { return std::abs(v(x)) > std::abs(v(y)); });
    Vector expect = Vector::Zero(p);
    for (Index i = 0; i < k; ++i) expect(idx[i]) = v(idx[i]);
    CHECK(t == expect);
  });
}

TEST_CASE("ssvd_tpi examples") {
  Vector a = Vector::Zero(8), b = Vector::Zero(7);
  a.segment(2, 3) << 1, -2, 2;
  b.segment(1, 2) << 3, 4;
  a.normalize();
  b.normalize();
  const TpiResult r = ssvd_tpi(7.0 * a * b.transpose(), 3, 2);
  CHECK(r.rayleigh == doctest::Approx(7.0).epsilon(1e-12));
  CHECK(r.supports.rows == std::vector<Index>{2, 3, 4});
  CHECK(r.supports.cols == std::vector<Index>{1, 2});
  CHECK(r.converged);
  CHECK(r.iterations <= 3);
  // Sign convention: the largest-magnitude entry of left is positive.
  Index imax = 0;
  r.left.cwiseAbs().maxCoeff(&imax);
  CHECK(r.left(imax) > 0.0);

  Matrix d = Matrix::Zero(3, 3);
  d.diagonal() << 5, 3, 1;
  const TpiResult rd = ssvd_tpi(d, 1, 1);
  CHECK(rd.rayleigh == doctest::Approx(5.0).epsilon(1e-12));
  CHECK(rd.supports.rows == std::vector<Index>{0});
  CHECK(rd.supports.cols == std::vector<Index>{0});

  CHECK_THROWS_AS(ssvd_tpi(Matrix::Zero(3, 3), 1, 1), std::invalid_argument);
  CHECK_THROWS_AS(ssvd_tpi(d, 4, 1), std::invalid_argument);
  TpiConfig bad;
  bad.restarts = 0;
  CHECK_THROWS_AS(ssvd_tpi(d, 1, 1, bad), std::invalid_argument);
  bad = {};
  bad.eps = 0.0;
  CHECK_THROWS_AS(ssvd_tpi(d, 1, 1, bad), std::invalid_argument);
}

TEST_CASE("ssvd_tpi feasibility, one-sidedness and monotone runs") {
  for_cases(200, 62, [](Pcg32& rng, int) {
    const Index m1 = test::uniform_int(rng, 2, 7), m2 = test::uniform_int(rng, 2, 7);
    const Index k = test::uniform_int(rng, 1, m1), q = test::uniform_int(rng, 1, m2);
    const Matrix a = test::random_matrix(rng, m1, m2);
    TpiConfig cfg;
    cfg.seed = rng.next_u32();
    const TpiResult r = ssvd_tpi(a, k, q, cfg);
    check_feasible(a, r, k, q);
    CHECK(r.monotone_violations == 0);
    CHECK(std::abs(r.rayleigh) <= omega_dual_enumerate(a, k, q).value + 1e-9);
  });
}

TEST_CASE("ssvd_tpi is deterministic and independent of the thread count") {
  for_cases(100, 63, [](Pcg32& rng, int) {
    const Matrix a = test::random_matrix(rng, 9, 8);
    TpiConfig cfg;
    cfg.seed = rng.next_u32();
    cfg.restarts = 12;
    const TpiResult one = ssvd_tpi(a, 3, 2, cfg);
    cfg.threads = 3;
    const TpiResult three = ssvd_tpi(a, 3, 2, cfg);
    const TpiResult again = ssvd_tpi(a, 3, 2, cfg);
    CHECK(one.left == three.left);
    CHECK(one.right == three.right);
    CHECK(one.rayleigh == three.rayleigh);
    CHECK(one.run == three.run);
    CHECK(three.left == again.left);
  });
}

TEST_CASE("spca_tpi_psd examples") {
  Vector a = Vector::Zero(6);
  a.segment(1, 3) << 2, -1, 2;
  a.normalize();
  const SpcaTpiResult r = spca_tpi_psd(4.0 * a * a.transpose(), 3);
  CHECK(r.rayleigh == doctest::Approx(4.0).epsilon(1e-12));
  CHECK(std::abs(std::abs(r.vector.dot(a)) - 1.0) <= 1e-12);

  Matrix d = Matrix::Zero(3, 3);
  d.diagonal() << 5, 3, 1;
  const SpcaTpiResult rd = spca_tpi_psd(d, 2);
  CHECK(rd.rayleigh == doctest::Approx(5.0).epsilon(1e-12));
  CHECK(std::find(rd.support.begin(), rd.support.end(), 0) != rd.support.end());

  for (Index k = 1; k <= 4; ++k) CHECK(spca_tpi_psd(Matrix::Identity(4, 4), k).rayleigh == doctest::Approx(1.0).epsilon(1e-12));

  Matrix asym = Matrix::Identity(3, 3);
  asym(0, 1) = 1.0;
  CHECK_THROWS_AS(spca_tpi_psd(asym, 1), std::invalid_argument);
}

TEST_CASE("spca_tpi_psd on PSD matrices: feasible, monotone, below the sparse optimum") {
  for_cases(150, 64, [](Pcg32& rng, int) {
    const Index p = test::uniform_int(rng, 2, 8);
    const Index k = test::uniform_int(rng, 1, p);
    const Matrix g = test::random_matrix(rng, p, p + 2);
    const Matrix s = g * g.transpose();
    TpiConfig cfg;
    cfg.seed = rng.next_u32();
    const SpcaTpiResult r = spca_tpi_psd(s, k, cfg);
    CHECK(r.vector.norm() == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(nnz(r.vector) <= k);
    CHECK(static_cast<Index>(r.support.size()) == k);
    CHECK(r.monotone_violations == 0);
    CHECK(std::abs(r.rayleigh - r.vector.dot(s * r.vector)) <= 1e-10 * std::max(1.0, s.norm()));
    // Oracle: the best k-sparse Rayleigh quotient is the largest top eigenvalue of a k x k principal submatrix.
    double best = 0.0;
    for_each_combination(p, k, [&](const std::vector<Index>& sup) {
      best = std::max(best, operator_norm(s(sup, sup)));
    });
    CHECK(r.rayleigh <= best + 1e-9 * std::max(1.0, best));
  });
}
