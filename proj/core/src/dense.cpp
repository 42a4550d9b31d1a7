#include "accel/dense.hpp"

#include <cmath>

#include "accel/errors.hpp"

namespace accel {

dense_matrix::dense_matrix(std::size_t rows, std::size_t cols)
    : rows_(rows), cols_(cols), a_(rows * cols, 0.0) {
  if (rows == 0) throw input_error("dense_matrix: rows must be >= 1");
}

dense_matrix::dense_matrix(std::size_t rows, std::size_t cols, std::vector<double> entries)
    : rows_(rows), cols_(cols), a_(std::move(entries)) {
  if (rows == 0) throw input_error("dense_matrix: rows must be >= 1");
  if (a_.size() != rows * cols) throw input_error("dense_matrix: entry count mismatch");
}

vec dense_matrix::col(std::size_t j) const {
  vec v(rows_);
  for (std::size_t i = 0; i < rows_; ++i) v[i] = a_[i * cols_ + j];
  return v;
}

void dense_matrix::set_col(std::size_t j, const vec& v) {
  if (v.size() != rows_) throw input_error("set_col: dimension mismatch");
  for (std::size_t i = 0; i < rows_; ++i) a_[i * cols_ + j] = v[i];
}

dense_matrix dense_matrix::identity(std::size_t n) {
  dense_matrix m(n, n);
  for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
  return m;
}

double dot(const vec& x, const vec& y) {
  double s = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) s += x[i] * y[i];
  return s;
}

double nrm2(const vec& x) { return std::sqrt(dot(x, x)); }

void axpy(double a, const vec& x, vec& y) {
  for (std::size_t i = 0; i < x.size(); ++i) y[i] += a * x[i];
}

void scal(double a, vec& x) {
  for (double& v : x) v *= a;
}

vec matvec(const dense_matrix& m, const vec& x) {
  if (x.size() != m.cols()) throw input_error("matvec: dimension mismatch");
  vec y(m.rows(), 0.0);
  for (std::size_t i = 0; i < m.rows(); ++i) {
    double s = 0.0;
    for (std::size_t j = 0; j < m.cols(); ++j) s += m(i, j) * x[j];
    y[i] = s;
  }
  return y;
}

vec matvec_t(const dense_matrix& m, const vec& x) {
  if (x.size() != m.rows()) throw input_error("matvec_t: dimension mismatch");
  vec y(m.cols(), 0.0);
  for (std::size_t i = 0; i < m.rows(); ++i)
    for (std::size_t j = 0; j < m.cols(); ++j) y[j] += m(i, j) * x[i];
  return y;
}

bool all_finite(const vec& x) {
  for (double v : x)
    if (!std::isfinite(v)) return false;
  return true;
}

bool all_finite(const dense_matrix& m) { return all_finite(m.entries()); }

double max_col_norm(const dense_matrix& m) {
  double best = 0.0;
  for (std::size_t j = 0; j < m.cols(); ++j) {
    double s = 0.0;
    for (std::size_t i = 0; i < m.rows(); ++i) {
      double v = m(i, j);
      s += v * v;
    }
    best = std::max(best, std::sqrt(s));
  }
  return best;
}

} // namespace accel
