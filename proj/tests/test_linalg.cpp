#include <doctest.h>

#include <cmath>

#include "accel/dense.hpp"
#include "accel/errors.hpp"
#include "accel/qr.hpp"
#include "test_support.hpp"

#if ACCEL_HAVE_EIGEN
#include <Eigen/Dense>
#endif

using namespace accel;
using test_support::max_abs_diff;
using test_support::qr_product_error;
using test_support::random_matrix;
using test_support::random_vec;

namespace {

dense_matrix from_rows(std::size_t rows, std::size_t cols,
                       std::initializer_list<double> vals) {
  return dense_matrix(rows, cols, std::vector<double>(vals));
}

} // namespace

TEST_SUITE("linalg") {

TEST_CASE("vector kernels") {
  vec x{1.0, 2.0, 3.0}, y{4.0, -5.0, 6.0};
  CHECK(dot(x, y) == doctest::Approx(12.0).epsilon(1e-15));
  CHECK(nrm2(vec{3.0, 4.0}) == doctest::Approx(5.0).epsilon(1e-15));
  vec z = y;
  axpy(2.0, x, z); // z = y + 2x
  CHECK(z[0] == 6.0);
  CHECK(z[1] == -1.0);
  CHECK(z[2] == 12.0);
  scal(0.5, z);
  CHECK(z[2] == 6.0);
  CHECK(all_finite(x));
  vec bad{1.0, std::nan("")};
  CHECK_FALSE(all_finite(bad));
}

TEST_CASE("matvec row-major layout") {
  dense_matrix m = from_rows(2, 3, {1, 2, 3, 4, 5, 6});
  vec x{1.0, 1.0, 1.0};
  vec mx = matvec(m, x);
  CHECK(mx == vec{6.0, 15.0});
  vec y{1.0, 1.0};
  vec mty = matvec_t(m, y);
  CHECK(mty == vec{5.0, 7.0, 9.0});
}

TEST_CASE("max_col_norm handles empty windows") {
  dense_matrix empty(3, 0);
  CHECK(max_col_norm(empty) == 0.0);
  dense_matrix m = from_rows(2, 2, {3, 0, 4, 1});
  CHECK(max_col_norm(m) == doctest::Approx(5.0).epsilon(1e-15));
}

TEST_CASE("qr_factor identity") {
  qr_factors f = qr_factor(dense_matrix::identity(2));
  CHECK(f.rank == 2);
  for (std::size_t i = 0; i < 2; ++i) {
    for (std::size_t j = 0; j < 2; ++j) {
      CHECK(f.q(i, j) == doctest::Approx(i == j ? 1.0 : 0.0).epsilon(1e-15));
      CHECK(f.r(i, j) == doctest::Approx(i == j ? 1.0 : 0.0).epsilon(1e-15));
    }
  }
}

TEST_CASE("qr_factor single repeated-entry column") {
  dense_matrix m = from_rows(2, 1, {1, 1});
  qr_factors f = qr_factor(m);
  CHECK(f.rank == 1);
  CHECK(f.r(0, 0) == doctest::Approx(std::sqrt(2.0)).epsilon(1e-15));
}

TEST_CASE("qr_factor collinear columns have rank 1") {
  dense_matrix m = from_rows(3, 2, {1, 2, 2, 4, 3, 6});
  qr_factors f = qr_factor(m);
  CHECK(f.rank == 1);
  CHECK(qr_product_error(f.q, f.r, m) <= 1e-10);
}

TEST_CASE("qr_factor rejects non-finite input") {
  dense_matrix m = from_rows(2, 1, {1, std::numeric_limits<double>::infinity()});
  CHECK_THROWS_AS(qr_factor(m), input_error);
}

TEST_CASE("qr_factor randomized reconstruction and orthonormality") {
  for (unsigned seed = 0; seed < 10; ++seed) {
    std::size_t rows = 4 + seed % 13, cols = 1 + seed % std::min<std::size_t>(rows, 7);
    dense_matrix m = random_matrix(rows, cols, seed);
    qr_factors f = qr_factor(m);
    CHECK(qr_product_error(f.q, f.r, m) <= 1e-10);
    // q^T q = I within 1e-12
    for (std::size_t a = 0; a < f.q.cols(); ++a) {
      for (std::size_t b = 0; b <= a; ++b) {
        double s = 0.0;
        for (std::size_t i = 0; i < rows; ++i) s += f.q(i, a) * f.q(i, b);
        CHECK(std::abs(s - (a == b ? 1.0 : 0.0)) <= 1e-12);
      }
    }
    // upper triangular
    for (std::size_t i = 1; i < f.r.rows(); ++i)
      for (std::size_t j = 0; j < std::min<std::size_t>(i, f.r.cols()); ++j)
        CHECK(f.r(i, j) == 0.0);
  }
}

TEST_CASE("least squares: orthogonal residual example") {
  dense_matrix m = from_rows(3, 2, {1, 0, 0, 1, 0, 0});
  lstsq_solution s = least_squares_min_norm(m, vec{1, 2, 3});
  CHECK(s.coeffs[0] == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(s.coeffs[1] == doctest::Approx(2.0).epsilon(1e-14));
  CHECK(s.residual_norm == doctest::Approx(3.0).epsilon(1e-14));
  CHECK(s.rank == 2);
}

TEST_CASE("least squares: single column normal equation") {
  dense_matrix m = from_rows(2, 1, {1, -1});
  lstsq_solution s = least_squares_min_norm(m, vec{1, 0});
  CHECK(s.coeffs[0] == doctest::Approx(0.5).epsilon(1e-14));
  CHECK(s.residual_norm == doctest::Approx(std::sqrt(2.0) / 2.0).epsilon(1e-14));
}

TEST_CASE("least squares: zero column gives the minimal-norm zero") {
  dense_matrix m(2, 1); // zeros
  lstsq_solution s = least_squares_min_norm(m, vec{1, 0});
  CHECK(s.coeffs[0] == 0.0);
  CHECK(s.residual_norm == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(s.rank == 0);
}

TEST_CASE("least squares: dimension mismatch rejected") {
  dense_matrix m = from_rows(2, 1, {1, 1});
  CHECK_THROWS_AS(least_squares_min_norm(m, vec{1, 2, 3}), input_error);
}

TEST_CASE("least squares residual never exceeds the rhs norm") {
  for (unsigned seed = 100; seed < 120; ++seed) {
    std::size_t rows = 3 + seed % 10, cols = 1 + seed % 6;
    dense_matrix m = random_matrix(rows, cols, seed);
    if (seed % 3 == 0 && cols >= 2) m.set_col(1, m.col(0)); // force deficiency
    vec rhs = random_vec(rows, seed + 1);
    lstsq_solution s = least_squares_min_norm(m, rhs);
    CHECK(s.residual_norm <= nrm2(rhs) * (1.0 + 1e-12));
    // reported residual matches a recomputation
    vec r = rhs;
    axpy(-1.0, matvec(m, s.coeffs), r);
    CHECK(std::abs(nrm2(r) - s.residual_norm) <= 1e-10 * (1.0 + nrm2(rhs)));
  }
}

#if ACCEL_HAVE_EIGEN
TEST_CASE("least squares matches the pseudoinverse solution (oracle)") {
  for (unsigned seed = 40; seed < 52; ++seed) {
    std::size_t rows = 4 + seed % 9, cols = 1 + seed % 5;
    dense_matrix m = random_matrix(rows, cols, seed);
    if (seed % 2 == 0 && cols >= 2) {
      // duplicated direction: exercises the rank-deficient branch
      vec c0 = m.col(0);
      scal(-2.0, c0);
      m.set_col(cols - 1, c0);
    }
    vec rhs = random_vec(rows, seed + 7);
    Eigen::MatrixXd em(rows, cols);
    for (std::size_t i = 0; i < rows; ++i)
      for (std::size_t j = 0; j < cols; ++j) em(i, j) = m(i, j);
    Eigen::VectorXd eb(rows);
    for (std::size_t i = 0; i < rows; ++i) eb(i) = rhs[i];
    Eigen::VectorXd ref = em.completeOrthogonalDecomposition().solve(eb);
    lstsq_solution s = least_squares_min_norm(m, rhs);
    for (std::size_t j = 0; j < cols; ++j) {
      CHECK(std::abs(s.coeffs[j] - ref(j)) <= 1e-9 * (1.0 + std::abs(ref(j))));
    }
  }
}
#endif

TEST_CASE("qr_update append examples") {
  qr_factors f = qr_factor(dense_matrix(3, 0));
  vec e1{1, 0, 0};
  qr_factors g = qr_update(f, &e1, false);
  CHECK(g.rank == 1);
  CHECK(g.r(0, 0) == doctest::Approx(1.0).epsilon(1e-15));

  qr_factors h = qr_update(g, nullptr, true);
  CHECK(h.rank == 0);
  CHECK(h.r.cols() == 0);
  CHECK_THROWS_AS(qr_update(h, nullptr, true), state_error);
}

TEST_CASE("qr_update sliding window equals recompute") {
  // Random windows up to 8 columns and 64 rows, slid one column at a time.
  for (unsigned seed = 0; seed < 6; ++seed) {
    std::size_t rows = 8 + (seed * 11) % 57;
    std::size_t window = 2 + seed % 7;
    std::vector<vec> stream;
    for (unsigned k = 0; k < window + 6; ++k)
      stream.push_back(random_vec(rows, 1000 * seed + k));
    // occasionally a dependent column
    if (window >= 3) stream[window + 1] = stream[window];

    qr_factors f = qr_factor(dense_matrix(rows, 0));
    std::vector<vec> held;
    for (std::size_t k = 0; k < stream.size(); ++k) {
      bool drop = held.size() == window;
      f = qr_update(f, &stream[k], drop);
      if (drop) held.erase(held.begin());
      held.push_back(stream[k]);

      dense_matrix m(rows, held.size());
      for (std::size_t j = 0; j < held.size(); ++j) m.set_col(j, held[j]);
      CHECK(qr_product_error(f.q, f.r, m) <= 1e-10);
      qr_factors full = qr_factor(m);
      CHECK(f.rank == full.rank);
    }
  }
}

TEST_CASE("project_complement examples") {
  dense_matrix e1 = from_rows(2, 1, {1, 0});
  CHECK(max_abs_diff(project_complement(e1, vec{1, 2}), vec{0, 2}) <= 1e-15);

  dense_matrix zero(2, 2);
  CHECK(max_abs_diff(project_complement(zero, vec{1, 2}), vec{1, 2}) == 0.0);

  const double s = 1.0 / std::sqrt(2.0);
  dense_matrix diag = from_rows(2, 1, {s, s});
  vec p = project_complement(diag, vec{1, 0});
  CHECK(p[0] == doctest::Approx(0.5).epsilon(1e-14));
  CHECK(p[1] == doctest::Approx(-0.5).epsilon(1e-14));

  CHECK_THROWS_AS(project_complement(e1, vec{1, 2, 3}), input_error);
}

TEST_CASE("projection idempotence, non-expansiveness, orthogonality") {
  for (unsigned seed = 300; seed < 312; ++seed) {
    std::size_t rows = 5 + seed % 8, cols = 1 + seed % 4;
    dense_matrix m = random_matrix(rows, cols, seed);
    vec v = random_vec(rows, seed + 13);
    vec p = project_complement(m, v);
    vec pp = project_complement(m, p);
    CHECK(max_abs_diff(p, pp) <= 1e-10 * (1.0 + nrm2(v)));
    CHECK(nrm2(p) <= nrm2(v) * (1.0 + 1e-14));
    for (std::size_t j = 0; j < cols; ++j) {
      CHECK(std::abs(dot(m.col(j), p)) <= 1e-10 * nrm2(v) * nrm2(m.col(j)));
    }
  }
}

TEST_CASE("smallest_live_diag reads the rank-revealing diagonal") {
  dense_matrix m = from_rows(3, 2, {2, 0, 0, 0.5, 0, 0});
  qr_factors f = qr_factor(m);
  CHECK(smallest_live_diag(f) == doctest::Approx(0.5).epsilon(1e-14));
  qr_factors z = qr_factor(dense_matrix(3, 0));
  CHECK(smallest_live_diag(z) == 0.0);
}

} // TEST_SUITE
