#include "accel/problems.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <memory>
#include <string>

#include "accel/errors.hpp"
#include "accel/qr.hpp"
#include "accel/rng.hpp"

namespace accel {

namespace {

// A = V diag(lam) V^T for orthogonal V (eigenvectors in columns). The inner
// sum runs in the same order for (i,j) and (j,i), so the result is symmetric
// bit-for-bit.
dense_matrix assemble_spectral(const dense_matrix& v, const vec& lam) {
  const std::size_t d = lam.size();
  dense_matrix a(d, d);
  for (std::size_t i = 0; i < d; ++i) {
    for (std::size_t j = i; j < d; ++j) {
      double s = 0.0;
      for (std::size_t k = 0; k < d; ++k) s += v(i, k) * lam[k] * v(j, k);
      a(i, j) = s;
      a(j, i) = s;
    }
  }
  return a;
}

// Largest eigenvalue of SPD a by power iteration with a deterministic start.
double power_largest(const dense_matrix& a, double rel_tol, std::size_t max_it) {
  const std::size_t d = a.rows();
  vec v(d);
  for (std::size_t i = 0; i < d; ++i) v[i] = 1.0 + double(i) / double(d + 1);
  scal(1.0 / nrm2(v), v);
  double lam = 0.0;
  for (std::size_t it = 0; it < max_it; ++it) {
    vec w = matvec(a, v);
    const double next = dot(v, w);
    const double wn = nrm2(w);
    if (wn == 0.0) return 0.0;
    scal(1.0 / wn, w);
    v = std::move(w);
    if (it > 0 && std::abs(next - lam) <= rel_tol * std::max(std::abs(next), 1e-300)) {
      return next;
    }
    lam = next;
  }
  return lam;
}

// Lower-triangular Cholesky factor of SPD a; numeric_error on a nonpositive
// pivot.
dense_matrix cholesky_lower(const dense_matrix& a) {
  const std::size_t d = a.rows();
  dense_matrix l(d, d);
  for (std::size_t j = 0; j < d; ++j) {
    double s = a(j, j);
    for (std::size_t k = 0; k < j; ++k) s -= l(j, k) * l(j, k);
    if (!(s > 0.0)) throw numeric_error("matrix is not positive definite");
    l(j, j) = std::sqrt(s);
    for (std::size_t i = j + 1; i < d; ++i) {
      double t = a(i, j);
      for (std::size_t k = 0; k < j; ++k) t -= l(i, k) * l(j, k);
      l(i, j) = t / l(j, j);
    }
  }
  return l;
}

vec cholesky_solve(const dense_matrix& l, const vec& b) {
  const std::size_t d = l.rows();
  vec y(d);
  for (std::size_t i = 0; i < d; ++i) {
    double s = b[i];
    for (std::size_t k = 0; k < i; ++k) s -= l(i, k) * y[k];
    y[i] = s / l(i, i);
  }
  vec x(d);
  for (std::size_t ii = d; ii-- > 0;) {
    double s = y[ii];
    for (std::size_t k = ii + 1; k < d; ++k) s -= l(k, ii) * x[k];
    x[ii] = s / l(ii, ii);
  }
  return x;
}

// Smallest eigenvalue of SPD a via inverse power iteration.
double power_smallest(const dense_matrix& a, double rel_tol, std::size_t max_it) {
  const dense_matrix l = cholesky_lower(a);
  const std::size_t d = a.rows();
  vec v(d);
  for (std::size_t i = 0; i < d; ++i) v[i] = 1.0 + double(d - i) / double(d + 1);
  scal(1.0 / nrm2(v), v);
  double lam = 0.0;
  for (std::size_t it = 0; it < max_it; ++it) {
    vec w = cholesky_solve(l, v);
    const double wn = nrm2(w);
    if (wn == 0.0) return 0.0;
    scal(1.0 / wn, w);
    v = w;
    const double next = dot(v, matvec(a, v));
    if (it > 0 && std::abs(next - lam) <= rel_tol * std::max(std::abs(next), 1e-300)) {
      return next;
    }
    lam = next;
  }
  return lam;
}

double log1pexp(double z) {
  if (z > 0.0) return z + std::log1p(std::exp(-z));
  return std::log1p(std::exp(z));
}

double sigmoid(double z) {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : line) {
    if (c == ',') {
      out.push_back(cur);
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  out.push_back(cur);
  return out;
}

double parse_cell(const std::string& cell, std::size_t row, const std::string& col) {
  double value = 0.0;
  const char* first = cell.data();
  const char* last = first + cell.size();
  auto [ptr, ec] = std::from_chars(first, last, value);
  if (cell.empty() || ec != std::errc{} || ptr != last || !std::isfinite(value)) {
    throw format_error("non-numeric value in row " + std::to_string(row) +
                       ", column '" + col + "'");
  }
  return value;
}

} // namespace

quadratic_problem quadratic_generate(std::size_t d, double mu, double l,
                                     std::uint64_t seed) {
  if (d < 2) throw input_error("quadratic_generate requires dimension >= 2");
  if (!(mu > 0.0) || !(l >= mu)) {
    throw input_error("quadratic_generate requires 0 < mu <= l");
  }

  // Haar-distributed orthogonal V: QR of a Gaussian matrix, columns sign-fixed
  // so the R diagonal is positive.
  rng gv(split_seed(seed, 0));
  dense_matrix g(d, d);
  for (std::size_t i = 0; i < d; ++i)
    for (std::size_t j = 0; j < d; ++j) g(i, j) = gv.gaussian();
  qr_factors f = qr_factor(g);
  dense_matrix v = f.q;
  for (std::size_t j = 0; j < d; ++j) {
    if (f.r(j, j) < 0.0) {
      for (std::size_t i = 0; i < d; ++i) v(i, j) = -v(i, j);
    }
  }

  rng ge(split_seed(seed, 1));
  vec lam(d, mu);
  if (mu < l) {
    lam[0] = mu;
    lam[d - 1] = l;
    for (std::size_t k = 1; k + 1 < d; ++k) lam[k] = ge.log_uniform(mu, l);
  }

  rng gb(split_seed(seed, 2));
  vec b(d);
  for (std::size_t i = 0; i < d; ++i) b[i] = gb.gaussian();

  quadratic_problem p;
  p.a = assemble_spectral(v, lam);
  p.b = std::move(b);
  p.mu = mu;
  p.l = l;
  p.seed = seed;
  return p;
}

quadratic_problem quadratic_generate_btb(std::size_t d, std::size_t n,
                                         std::uint64_t seed) {
  if (d < 1) throw input_error("quadratic_generate_btb requires dimension >= 1");
  if (n < d) throw input_error("quadratic_generate_btb requires n >= d");

  rng gv(split_seed(seed, 0));
  dense_matrix bmat(n, d);
  const double s = 1.0 / std::sqrt(double(n));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < d; ++j) bmat(i, j) = s * gv.gaussian();

  dense_matrix a(d, d);
  for (std::size_t i = 0; i < d; ++i) {
    for (std::size_t j = i; j < d; ++j) {
      double acc = 0.0;
      for (std::size_t k = 0; k < n; ++k) acc += bmat(k, i) * bmat(k, j);
      a(i, j) = acc;
      a(j, i) = acc;
    }
  }

  rng gb(split_seed(seed, 2));
  vec b(d);
  for (std::size_t i = 0; i < d; ++i) b[i] = gb.gaussian();

  quadratic_problem p;
  p.a = std::move(a);
  p.b = std::move(b);
  p.l = power_largest(p.a, 1e-10, 100000);
  p.mu = power_smallest(p.a, 1e-10, 100000);
  p.seed = seed;
  return p;
}

std::pair<double, vec> quadratic_eval(const quadratic_problem& p, const vec& x) {
  if (x.size() != p.b.size()) {
    throw input_error("quadratic_eval: point dimension mismatch");
  }
  vec ax = matvec(p.a, x);
  const double f = 0.5 * dot(x, ax) - dot(p.b, x);
  vec g = std::move(ax);
  axpy(-1.0, p.b, g);
  return {f, std::move(g)};
}

std::pair<double, vec> logistic_eval(const dataset& ds, const vec& theta,
                                     double ridge) {
  const std::size_t n = ds.features.rows();
  const std::size_t d = ds.features.cols();
  if (theta.size() != d) throw input_error("logistic_eval: theta dimension mismatch");
  if (ds.labels.size() != n) throw input_error("logistic_eval: label count mismatch");
  if (ridge < 0.0) throw input_error("logistic_eval: ridge must be nonnegative");

  double f = 0.0;
  vec resid(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double y = ds.labels[i];
    if (y != 0.0 && y != 1.0) throw input_error("logistic_eval: labels must be 0 or 1");
    double z = 0.0;
    for (std::size_t j = 0; j < d; ++j) z += ds.features(i, j) * theta[j];
    f += log1pexp(z) - y * z;
    resid[i] = sigmoid(z) - y;
  }
  vec g = matvec_t(ds.features, resid);
  if (ridge > 0.0) {
    f += 0.5 * ridge * dot(theta, theta);
    axpy(ridge, theta, g);
  }
  return {f, std::move(g)};
}

dataset load_dataset_csv(const std::string& path, const std::string& label_column,
                         bool standardize) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw io_error("cannot open dataset file '" + path + "'");

  std::string line;
  if (!std::getline(in, line)) throw format_error("dataset file is empty");
  if (line.size() >= 3 && (unsigned char)line[0] == 0xEF &&
      (unsigned char)line[1] == 0xBB && (unsigned char)line[2] == 0xBF) {
    line.erase(0, 3);
  }
  if (!line.empty() && line.back() == '\r') line.pop_back();

  const std::vector<std::string> header = split_csv_line(line);
  std::size_t label_idx = header.size();
  for (std::size_t j = 0; j < header.size(); ++j) {
    if (header[j] == label_column) {
      label_idx = j;
      break;
    }
  }
  if (label_idx == header.size()) {
    throw format_error("label column '" + label_column + "' not found in header");
  }
  if (header.size() < 2) throw format_error("dataset needs at least one feature column");

  std::vector<vec> rows;
  vec labels;
  std::size_t row_no = 0;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    ++row_no;
    const std::vector<std::string> cells = split_csv_line(line);
    if (cells.size() != header.size()) {
      throw format_error("row " + std::to_string(row_no) + " has " +
                         std::to_string(cells.size()) + " fields, expected " +
                         std::to_string(header.size()));
    }
    vec feats;
    feats.reserve(header.size() - 1);
    for (std::size_t j = 0; j < cells.size(); ++j) {
      const double value = parse_cell(cells[j], row_no, header[j]);
      if (j == label_idx) {
        if (value != 0.0 && value != 1.0) {
          throw format_error("label in row " + std::to_string(row_no) +
                             " must be 0 or 1");
        }
        labels.push_back(value);
      } else {
        feats.push_back(value);
      }
    }
    rows.push_back(std::move(feats));
  }
  if (rows.empty()) throw format_error("dataset has no data rows");

  dataset ds;
  const std::size_t n = rows.size();
  const std::size_t d = header.size() - 1;
  ds.features = dense_matrix(n, d);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < d; ++j) ds.features(i, j) = rows[i][j];
  ds.labels = std::move(labels);
  for (std::size_t j = 0; j < header.size(); ++j) {
    if (j != label_idx) ds.feature_names.push_back(header[j]);
  }

  if (standardize) {
    for (std::size_t j = 0; j < d; ++j) {
      double mean = 0.0;
      for (std::size_t i = 0; i < n; ++i) mean += ds.features(i, j);
      mean /= double(n);
      double var = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        const double c = ds.features(i, j) - mean;
        var += c * c;
      }
      var /= double(n);
      const double sd = std::sqrt(var);
      for (std::size_t i = 0; i < n; ++i) {
        ds.features(i, j) = sd > 0.0 ? (ds.features(i, j) - mean) / sd : 0.0;
      }
    }
  }
  return ds;
}

dataset with_intercept(const dataset& ds) {
  const std::size_t n = ds.features.rows();
  const std::size_t d = ds.features.cols();
  dataset out;
  out.features = dense_matrix(n, d + 1);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < d; ++j) out.features(i, j) = ds.features(i, j);
    out.features(i, d) = 1.0;
  }
  out.labels = ds.labels;
  out.feature_names = ds.feature_names;
  out.feature_names.push_back("intercept");
  return out;
}

std::pair<double, double> estimate_smoothness(const dataset& ds, double ridge) {
  const std::size_t n = ds.features.rows();
  const std::size_t d = ds.features.cols();
  if (n == 0 || d == 0) return {ridge, ridge};

  dense_matrix gram(d, d);
  for (std::size_t i = 0; i < d; ++i) {
    for (std::size_t j = i; j < d; ++j) {
      double s = 0.0;
      for (std::size_t k = 0; k < n; ++k) s += ds.features(k, i) * ds.features(k, j);
      gram(i, j) = s;
      gram(j, i) = s;
    }
  }
  const double lam_max = power_largest(gram, 1e-6, 100000);
  return {ridge, 0.25 * lam_max + ridge};
}

double solver_mu_floor(double ridge, double l_est) {
  return std::max(ridge, 1e-6 * l_est);
}

objective make_objective(const quadratic_problem& p) {
  auto shared = std::make_shared<quadratic_problem>(p);
  objective o;
  o.dim = shared->b.size();
  o.eval_fn = [shared](const vec& x) { return quadratic_eval(*shared, x); };
  o.value_fn = [shared](const vec& x) { return quadratic_eval(*shared, x).first; };
  o.grad_fn = [shared](const vec& x) { return quadratic_eval(*shared, x).second; };
  o.known_mu = p.mu;
  o.known_l = p.l;
  return o;
}

objective make_objective(const dataset& ds, double ridge) {
  auto shared = std::make_shared<dataset>(ds);
  objective o;
  o.dim = shared->features.cols();
  o.eval_fn = [shared, ridge](const vec& x) { return logistic_eval(*shared, x, ridge); };
  o.value_fn = [shared, ridge](const vec& x) {
    return logistic_eval(*shared, x, ridge).first;
  };
  o.grad_fn = [shared, ridge](const vec& x) {
    return logistic_eval(*shared, x, ridge).second;
  };
  return o;
}

} // namespace accel
