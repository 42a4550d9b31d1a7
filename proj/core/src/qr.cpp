#include "accel/qr.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "accel/errors.hpp"

namespace accel {

namespace {

constexpr double k_eps = std::numeric_limits<double>::epsilon();

double default_tol(std::size_t rows, std::size_t cols, double max_colnorm) {
  return static_cast<double>(std::max(rows, cols)) * k_eps * max_colnorm;
}

// In-place Householder QR with optional greedy column pivoting.
// On return: work holds R in its upper triangle and reflectors below,
// taus the reflector scalars, perm the column permutation.
struct hh_qr {
  dense_matrix work;
  std::vector<double> taus;
  std::vector<std::size_t> perm;
  std::size_t k; // number of reflectors = min(rows, cols)
};

hh_qr householder(const dense_matrix& m, bool pivot) {
  const std::size_t rows = m.rows(), cols = m.cols();
  hh_qr f{m, {}, {}, std::min(rows, cols)};
  f.taus.assign(f.k, 0.0);
  f.perm.resize(cols);
  std::iota(f.perm.begin(), f.perm.end(), std::size_t{0});
  dense_matrix& a = f.work;

  for (std::size_t j = 0; j < f.k; ++j) {
    if (pivot) {
      // Greedy pivot: bring the remaining column with the largest
      // tail norm to position j. Recomputed norms keep this exact.
      std::size_t best = j;
      double best_n = -1.0;
      for (std::size_t c = j; c < cols; ++c) {
        double s = 0.0;
        for (std::size_t i = j; i < rows; ++i) s += a(i, c) * a(i, c);
        if (s > best_n) {
          best_n = s;
          best = c;
        }
      }
      if (best != j) {
        for (std::size_t i = 0; i < rows; ++i) std::swap(a(i, j), a(i, best));
        std::swap(f.perm[j], f.perm[best]);
      }
    }

    double norm = 0.0;
    for (std::size_t i = j; i < rows; ++i) norm += a(i, j) * a(i, j);
    norm = std::sqrt(norm);
    if (norm == 0.0) {
      f.taus[j] = 0.0;
      continue;
    }
    double alpha = a(j, j) >= 0.0 ? -norm : norm;
    // v = x - alpha e1, normalized so v[0] = 1
    double v0 = a(j, j) - alpha;
    f.taus[j] = -v0 / alpha; // tau = 2 / (v^T v) * v0^2 form, see below
    // store scaled reflector tail
    for (std::size_t i = j + 1; i < rows; ++i) a(i, j) /= v0;
    a(j, j) = alpha;
    // apply H = I - tau v v^T to trailing columns (v = [1; tail])
    for (std::size_t c = j + 1; c < cols; ++c) {
      double s = a(j, c);
      for (std::size_t i = j + 1; i < rows; ++i) s += a(i, j) * a(i, c);
      s *= f.taus[j];
      a(j, c) -= s;
      for (std::size_t i = j + 1; i < rows; ++i) a(i, c) -= s * a(i, j);
    }
  }
  return f;
}

// Apply Q^T (product of stored reflectors) to a vector.
void apply_qt(const hh_qr& f, vec& x) {
  const std::size_t rows = f.work.rows();
  for (std::size_t j = 0; j < f.k; ++j) {
    if (f.taus[j] == 0.0) continue;
    double s = x[j];
    for (std::size_t i = j + 1; i < rows; ++i) s += f.work(i, j) * x[i];
    s *= f.taus[j];
    x[j] -= s;
    for (std::size_t i = j + 1; i < rows; ++i) x[i] -= s * f.work(i, j);
  }
}

// Materialize the thin Q (rows x k).
dense_matrix form_q(const hh_qr& f) {
  const std::size_t rows = f.work.rows();
  dense_matrix q(rows, f.k);
  for (std::size_t c = 0; c < f.k; ++c) {
    vec e(rows, 0.0);
    e[c] = 1.0;
    // Q e_c: apply reflectors in reverse order
    for (std::size_t jj = f.k; jj-- > 0;) {
      if (f.taus[jj] == 0.0) continue;
      double s = e[jj];
      for (std::size_t i = jj + 1; i < rows; ++i) s += f.work(i, jj) * e[i];
      s *= f.taus[jj];
      e[jj] -= s;
      for (std::size_t i = jj + 1; i < rows; ++i) e[i] -= s * f.work(i, jj);
    }
    q.set_col(c, e);
  }
  return q;
}

dense_matrix extract_r(const hh_qr& f) {
  const std::size_t cols = f.work.cols();
  dense_matrix r(std::max<std::size_t>(f.k, 1), cols);
  for (std::size_t i = 0; i < f.k; ++i)
    for (std::size_t j = i; j < cols; ++j) r(i, j) = f.work(i, j);
  return r;
}

std::size_t diag_rank(const dense_matrix& r, double tol) {
  std::size_t n = std::min(r.rows(), r.cols());
  std::size_t rank = 0;
  for (std::size_t i = 0; i < n; ++i)
    if (std::abs(r(i, i)) > tol) ++rank;
  return rank;
}

// For pivoted factors: stop at the first dead diagonal (pivoting sorts
// magnitudes, so the survivors form a leading block).
std::size_t leading_rank(const dense_matrix& r, double tol) {
  std::size_t n = std::min(r.rows(), r.cols());
  std::size_t rank = 0;
  while (rank < n && std::abs(r(rank, rank)) > tol) ++rank;
  return rank;
}

// Forward substitution for S^T u = c with S upper triangular (r x r).
vec solve_lower_from_upper_t(const dense_matrix& s, const vec& c) {
  const std::size_t n = c.size();
  vec u(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    double acc = c[i];
    for (std::size_t j = 0; j < i; ++j) acc -= s(j, i) * u[j];
    u[i] = acc / s(i, i);
  }
  return u;
}

} // namespace

qr_factors qr_factor(const dense_matrix& m, double tol) {
  if (!all_finite(m)) throw input_error("qr_factor: non-finite entries");
  if (m.cols() == 0) {
    qr_factors f;
    f.q = dense_matrix(m.rows(), 0);
    f.r = dense_matrix(1, 0);
    f.rank = 0;
    f.tol = tol;
    return f;
  }
  hh_qr h = householder(m, /*pivot=*/false);
  qr_factors f;
  f.q = form_q(h);
  f.r = extract_r(h);
  // Canonical signs: a nonnegative R diagonal (flip the paired Q column and
  // R row together, leaving the product intact).
  const std::size_t k = std::min(f.r.rows(), f.r.cols());
  for (std::size_t i = 0; i < k; ++i) {
    if (f.r(i, i) < 0.0) {
      for (std::size_t j = i; j < f.r.cols(); ++j) f.r(i, j) = -f.r(i, j);
      for (std::size_t row = 0; row < f.q.rows(); ++row) f.q(row, i) = -f.q(row, i);
    }
  }
  f.tol = tol > 0.0 ? tol : default_tol(m.rows(), m.cols(), max_col_norm(m));
  f.rank = diag_rank(f.r, f.tol);
  return f;
}

lstsq_solution least_squares_min_norm(const dense_matrix& m, const vec& rhs,
                                      double tol) {
  if (rhs.size() != m.rows())
    throw input_error("least_squares_min_norm: dimension mismatch");
  lstsq_solution sol;
  sol.coeffs.assign(m.cols(), 0.0);
  if (m.cols() == 0) {
    sol.residual_norm = nrm2(rhs);
    sol.rank = 0;
    return sol;
  }

  const double t = tol > 0.0 ? tol : default_tol(m.rows(), m.cols(), max_col_norm(m));
  hh_qr h = householder(m, /*pivot=*/true);
  vec c = rhs;
  apply_qt(h, c);
  dense_matrix r = extract_r(h);
  std::size_t rank = leading_rank(r, t);
  sol.rank = rank;

  if (rank > 0) {
    // Complete orthogonal decomposition: factor T^T (cols x rank) where
    // T = r[0..rank, :]; then T = S^T Z^T and min-norm y = Z S^{-T} c_1.
    dense_matrix tt(m.cols(), rank);
    for (std::size_t i = 0; i < rank; ++i)
      for (std::size_t j = 0; j < m.cols(); ++j) tt(j, i) = r(i, j);
    hh_qr hz = householder(tt, /*pivot=*/false);
    dense_matrix z = form_q(hz);    // cols x rank, orthonormal
    dense_matrix s = extract_r(hz); // rank x rank, upper triangular
    vec c1(c.begin(), c.begin() + static_cast<std::ptrdiff_t>(rank));
    vec u = solve_lower_from_upper_t(s, c1);
    // y = Z u, then un-permute
    for (std::size_t j = 0; j < m.cols(); ++j) {
      double acc = 0.0;
      for (std::size_t i = 0; i < rank; ++i) acc += z(j, i) * u[i];
      sol.coeffs[h.perm[j]] = acc;
    }
  }

  vec resid = rhs;
  vec mx = matvec(m, sol.coeffs);
  axpy(-1.0, mx, resid);
  sol.residual_norm = nrm2(resid);
  return sol;
}

vec project_complement(const dense_matrix& m, const vec& v, double tol) {
  if (v.size() != m.rows())
    throw input_error("project_complement: dimension mismatch");
  if (m.cols() == 0) return v;
  const double t = tol > 0.0 ? tol : default_tol(m.rows(), m.cols(), max_col_norm(m));
  hh_qr h = householder(m, /*pivot=*/true);
  dense_matrix q = form_q(h);
  dense_matrix r = extract_r(h);
  std::size_t rank = leading_rank(r, t);
  vec w = v;
  // Two passes keep the result orthogonal to col(m) at working precision.
  for (int pass = 0; pass < 2; ++pass) {
    for (std::size_t c = 0; c < rank; ++c) {
      double s = 0.0;
      for (std::size_t i = 0; i < w.size(); ++i) s += q(i, c) * w[i];
      for (std::size_t i = 0; i < w.size(); ++i) w[i] -= s * q(i, c);
    }
  }
  return w;
}

qr_factors qr_update(const qr_factors& f, const vec* append, bool drop_oldest) {
  if (append == nullptr && !drop_oldest)
    throw input_error("qr_update: nothing requested");
  const std::size_t rows = f.q.rows();
  std::size_t c = f.r.cols();
  if (f.r.rows() != std::max<std::size_t>(c, 1) && c > 0)
    throw state_error("qr_update: requires a square R factor");

  dense_matrix q = f.q;
  dense_matrix r = f.r;

  if (drop_oldest) {
    if (c == 0) throw state_error("qr_update: drop on empty factorization");
    // Remove R's first column; the rest is upper Hessenberg. Givens
    // rotations on adjacent rows restore the triangle; Q absorbs their
    // transposes and sheds its last column.
    dense_matrix h(c, c - 1);
    for (std::size_t i = 0; i < c; ++i)
      for (std::size_t j = 1; j < c; ++j) h(i, j - 1) = r(i, j);
    for (std::size_t j = 0; j + 1 < c; ++j) {
      double a = h(j, j), b = h(j + 1, j);
      double rad = std::hypot(a, b);
      if (rad == 0.0) continue;
      double cs = a / rad, sn = b / rad;
      for (std::size_t k2 = j; k2 + 1 < c; ++k2) {
        double x = h(j, k2), y = h(j + 1, k2);
        h(j, k2) = cs * x + sn * y;
        h(j + 1, k2) = -sn * x + cs * y;
      }
      for (std::size_t i = 0; i < rows; ++i) {
        double x = q(i, j), y = q(i, j + 1);
        q(i, j) = cs * x + sn * y;
        q(i, j + 1) = -sn * x + cs * y;
      }
    }
    dense_matrix q2(rows, c - 1), r2(std::max<std::size_t>(c - 1, 1), c - 1);
    for (std::size_t i = 0; i < rows; ++i)
      for (std::size_t j = 0; j + 1 < c; ++j) q2(i, j) = q(i, j);
    for (std::size_t i = 0; i + 1 < c; ++i)
      for (std::size_t j = i; j + 1 < c; ++j) r2(i, j) = h(i, j);
    q = std::move(q2);
    r = std::move(r2);
    c -= 1;
  }

  if (append != nullptr) {
    const vec& v = *append;
    if (v.size() != rows) throw input_error("qr_update: append dimension mismatch");
    if (!all_finite(v)) throw input_error("qr_update: non-finite column");
    if (c == rows) {
      // Span already complete: the new column is exactly representable,
      // R just grows a column of coordinates.
      vec w(c, 0.0);
      for (std::size_t j = 0; j < c; ++j) {
        double s = 0.0;
        for (std::size_t i = 0; i < rows; ++i) s += q(i, j) * v[i];
        w[j] = s;
      }
      dense_matrix r2(c, c + 1);
      for (std::size_t i = 0; i < c; ++i) {
        for (std::size_t j = 0; j < c; ++j) r2(i, j) = r(i, j);
        r2(i, c) = w[i];
      }
      r = std::move(r2);
      c += 1;
    } else {
      // Gram-Schmidt with one reorthogonalization pass.
      vec w(c, 0.0);
      vec u = v;
      for (int pass = 0; pass < 2; ++pass) {
        for (std::size_t j = 0; j < c; ++j) {
          double s = 0.0;
          for (std::size_t i = 0; i < rows; ++i) s += q(i, j) * u[i];
          w[j] += s;
          for (std::size_t i = 0; i < rows; ++i) u[i] -= s * q(i, j);
        }
      }
      double rho = nrm2(u);
      const double dep_tol =
          static_cast<double>(std::max(rows, c + 1)) * k_eps * std::max(nrm2(v), max_col_norm(r));
      vec qnew(rows, 0.0);
      double diag = rho;
      if (rho > dep_tol) {
        qnew = u;
        scal(1.0 / rho, qnew);
      } else {
        // Dependent column: complete the basis deterministically so the
        // orthonormality invariant survives; the zero diagonal keeps it
        // out of the rank count.
        diag = 0.0;
        std::size_t pick = 0;
        double least = std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i < rows; ++i) {
          double mass = 0.0;
          for (std::size_t j = 0; j < c; ++j) mass += q(i, j) * q(i, j);
          if (mass < least) {
            least = mass;
            pick = i;
          }
        }
        vec e(rows, 0.0);
        e[pick] = 1.0;
        for (int pass = 0; pass < 2; ++pass) {
          for (std::size_t j = 0; j < c; ++j) {
            double s = 0.0;
            for (std::size_t i = 0; i < rows; ++i) s += q(i, j) * e[i];
            for (std::size_t i = 0; i < rows; ++i) e[i] -= s * q(i, j);
          }
        }
        double en = nrm2(e);
        if (en == 0.0) throw state_error("qr_update: basis completion failed");
        qnew = e;
        scal(1.0 / en, qnew);
      }
      dense_matrix q2(rows, c + 1), r2(c + 1, c + 1);
      for (std::size_t i = 0; i < rows; ++i) {
        for (std::size_t j = 0; j < c; ++j) q2(i, j) = q(i, j);
        q2(i, c) = qnew[i];
      }
      for (std::size_t i = 0; i < c; ++i) {
        for (std::size_t j = i; j < c; ++j) r2(i, j) = r(i, j);
        r2(i, c) = w[i];
      }
      r2(c, c) = diag;
      q = std::move(q2);
      r = std::move(r2);
      c += 1;
    }
  }

  qr_factors out;
  out.q = std::move(q);
  out.r = std::move(r);
  // Column norms of R equal those of the represented matrix, so the
  // default threshold can be refreshed without touching the data.
  out.tol = default_tol(rows, std::max<std::size_t>(c, 1), max_col_norm(out.r));
  out.rank = diag_rank(out.r, out.tol);
  return out;
}

double smallest_live_diag(const qr_factors& f) {
  std::size_t n = std::min(f.r.rows(), f.r.cols());
  double best = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    double d = std::abs(f.r(i, i));
    if (d > f.tol && (best == 0.0 || d < best)) best = d;
  }
  return best;
}

} // namespace accel
