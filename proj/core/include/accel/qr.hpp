#pragma once

#include <cstddef>

#include "accel/dense.hpp"

namespace accel {

// Thin QR: q has orthonormal columns (rows x k), r is upper
// triangular/trapezoidal (k x cols), k = min(rows, cols).
// rank counts diagonal entries of r with |r_ii| > tol.
struct qr_factors {
  dense_matrix q;
  dense_matrix r;
  std::size_t rank = 0;
  double tol = 0.0;
};

struct lstsq_solution {
  vec coeffs;
  double residual_norm = 0.0;
  std::size_t rank = 0;
};

// Householder QR. tol == 0 selects the default rank threshold
// max(rows, cols) * eps * (largest column norm).
qr_factors qr_factor(const dense_matrix& m, double tol = 0.0);

// Minimal-norm least squares via column-pivoted QR and a complete
// orthogonal decomposition on rank deficiency (pseudoinverse solution).
lstsq_solution least_squares_min_norm(const dense_matrix& m, const vec& rhs,
                                      double tol = 0.0);

// Incremental window update: optionally drop the oldest (leftmost) column
// via Givens rotations, optionally append a new column on the right.
// Requires a factorization with square r (cols <= rows at creation).
qr_factors qr_update(const qr_factors& f, const vec* append, bool drop_oldest);

// (I - QQ^T) v where Q spans col(m) at rank tolerance tol.
vec project_complement(const dense_matrix& m, const vec& v, double tol = 0.0);

// Smallest above-tolerance |r_ii| of the factorization, or 0 when rank is 0.
// A cheap lower-bound proxy for the least nonzero singular value; feeds the
// conditioning diagnostic only.
double smallest_live_diag(const qr_factors& f);

} // namespace accel
