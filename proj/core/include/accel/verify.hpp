#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "accel/chebyshev.hpp"
#include "accel/problems.hpp"
#include "accel/solvers.hpp"

namespace accel {

struct oracle_record {
  std::size_t t = 0;
  double lhs = 0.0;
  double rhs = 0.0;
  double slack = 0.0; // rhs - lhs
};

struct oracle_report {
  std::string name;
  std::vector<oracle_record> records;
  bool pass = false;      // iff min slack >= -tolerance
  double tolerance = 0.0;
  std::vector<std::string> notes;
};

struct general_bound_params {
  double gamma = 0.0;       // Hessian Lipschitz constant along the trajectory
  double mu = 0.0;
  double l = 0.0;
  double beta = 1.0;        // constant damping assumed by the envelope
  double kappa_tilde = 0.0; // max conditioning diagnostic over the run
};

// Runs the windowed solver (lambda = 1) on the quadratic side by side with
// the explicit residual recursion F_{t+1} = (I - beta_t A) P_t F_t, where P_t
// projects onto the orthogonal complement of the residual differences.
// Records the per-step discrepancy against 1e-9 * ||F_1||.
oracle_report check_residual_recursion(const quadratic_problem& p, const vec& x0,
                                       std::size_t m, const beta_schedule& betas,
                                       std::size_t horizon);

// Full-window beta=1, lambda=1 runs from the origin: checks
// x_{t+1} (window solver) = G(x_t (minimal-residual Krylov solver)) at
// 1e-8 (1 + ||x_t||), excluding steps where the Krylov residual stagnates.
oracle_report check_gmres_equivalence(const quadratic_problem& p, std::size_t horizon);

// End-of-schedule damping bound: ||grad f(x_{T+1})|| against
// 2 q^{T/2} ||grad f(x_1)||, q = (sqrt(kappa)-1)/(sqrt(kappa)+1), with
// 1e-9 relative slack. Hard assertion for window 0 traces; informational
// (noted) otherwise. The per-step profile is reported in the notes.
oracle_report check_cheby_bound(const quadratic_problem& p, const run_trace& trace);

// Per-step contraction || grad f(x_{t+1}) || <= (1 - 2 mu/(l+mu)) ||grad  f(x_t)||
// + 1e-12 ||grad f(x_1)|| for beta=1, lambda=2/(l+mu) traces on quadratics.
oracle_report check_linear_contraction(const quadratic_problem& p,
                                       const run_trace& trace);

// Linear-quadratic envelope: ||grad f(x_{t+1})|| against
// c1 D_t^2 + c2 D_t ||grad f(x_t)|| + (1-c3) ||grad f(x_t)||, with
// c1 = 3 kt^2 gamma m / (l+mu)^2, c2 = 2 kt beta gamma sqrt(m) / (l+mu)^2,
// c3 = 2 beta mu / (l+mu), and D_t the max distance from x_t to the window's
// earlier iterates. Needs iterate snapshots; informational.
oracle_report check_general_bound(const run_trace& trace,
                                  const general_bound_params& params,
                                  std::size_t m);

} // namespace accel
