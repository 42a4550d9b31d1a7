#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "accel/dense.hpp"

namespace accel {

// f(x) = 0.5 x^T A x - b^T x with spectrum(A) inside [mu, l].
struct quadratic_problem {
  dense_matrix a;
  vec b;
  double mu = 0.0;
  double l = 0.0;
  std::uint64_t seed = 0;
};

struct dataset {
  dense_matrix features; // n x d
  vec labels;            // {0, 1}
  std::vector<std::string> feature_names;
};

struct objective {
  std::size_t dim = 0;
  // Single-pass (f, grad); value_fn/grad_fn are conveniences built on it.
  std::function<std::pair<double, vec>(const vec&)> eval_fn;
  std::function<double(const vec&)> value_fn;
  std::function<vec(const vec&)> grad_fn;
  std::optional<double> known_mu;
  std::optional<double> known_l;
};

// Prescribed-spectrum SPD instance: A = V^T diag(lam) V, Haar-random V
// (seeded QR of a Gaussian matrix), eigenvalues mu and l exactly at the
// endpoints and log-uniform in between. b standard Gaussian.
// d >= 2 so both endpoints can be pinned.
quadratic_problem quadratic_generate(std::size_t d, double mu, double l,
                                     std::uint64_t seed);

// Fidelity-mode instance A = B^T B with Gaussian B (n x d, scaled 1/sqrt(n));
// mu and l are measured by power/inverse-power iteration. Requires n >= d.
quadratic_problem quadratic_generate_btb(std::size_t d, std::size_t n,
                                         std::uint64_t seed);

// (f, grad) at x.
std::pair<double, vec> quadratic_eval(const quadratic_problem& p, const vec& x);

// Ridge-regularized logistic negative log-likelihood and gradient.
// Stable for |theta . x_i| up to ~700.
std::pair<double, vec> logistic_eval(const dataset& ds, const vec& theta,
                                     double ridge);

// CSV ingestion: UTF-8, comma separators, header row, no quoting. The
// label column is removed from features and coerced to {0, 1}.
// standardize shifts/scales every feature column to mean 0, variance 1
// (population variance; constant columns become 0).
dataset load_dataset_csv(const std::string& path, const std::string& label_column,
                         bool standardize);

// Appends an all-ones feature column named "intercept".
dataset with_intercept(const dataset& ds);

// (mu_est, l_est): l_est = 0.25 * lambda_max(X^T X) + ridge via power
// iteration (1e-6 relative), mu_est = ridge.
std::pair<double, double> estimate_smoothness(const dataset& ds, double ridge);

// Positive curvature floor for solvers that need mu > 0 on logistic
// problems: max(ridge, 1e-6 * l_est).
double solver_mu_floor(double ridge, double l_est);

objective make_objective(const quadratic_problem& p);
objective make_objective(const dataset& ds, double ridge);

} // namespace accel
