#pragma once

#include <cstddef>
#include <vector>

namespace accel {

using vec = std::vector<double>;

// Row-major dense matrix. rows >= 1 always; cols may be 0 (empty window).
class dense_matrix {
public:
  dense_matrix() : rows_(1), cols_(0) {}
  dense_matrix(std::size_t rows, std::size_t cols);
  dense_matrix(std::size_t rows, std::size_t cols, std::vector<double> entries);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }

  double operator()(std::size_t i, std::size_t j) const { return a_[i * cols_ + j]; }
  double& operator()(std::size_t i, std::size_t j) { return a_[i * cols_ + j]; }

  const std::vector<double>& entries() const { return a_; }
  std::vector<double>& entries() { return a_; }

  vec col(std::size_t j) const;
  void set_col(std::size_t j, const vec& v);

  static dense_matrix identity(std::size_t n);

private:
  std::size_t rows_, cols_;
  std::vector<double> a_;
};

double dot(const vec& x, const vec& y);
double nrm2(const vec& x);
// y += a*x
void axpy(double a, const vec& x, vec& y);
void scal(double a, vec& x);
vec matvec(const dense_matrix& m, const vec& x);
// m^T x
vec matvec_t(const dense_matrix& m, const vec& x);

bool all_finite(const vec& x);
bool all_finite(const dense_matrix& m);

// max over columns of the Euclidean column norm; 0 for empty matrices
double max_col_norm(const dense_matrix& m);

} // namespace accel
