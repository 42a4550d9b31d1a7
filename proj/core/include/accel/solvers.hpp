#pragma once

#include <cstddef>
#include <deque>
#include <optional>
#include <variant>
#include <vector>

#include "accel/chebyshev.hpp"
#include "accel/dense.hpp"
#include "accel/problems.hpp"
#include "accel/qr.hpp"

namespace accel {

// ---------------------------------------------------------------------------
// Configuration
// ---------------------------------------------------------------------------

// Order in which a damping schedule's values are consumed. stable applies the
// root reordering that keeps intermediate amplification bounded; natural
// consumes the schedule as stored.
enum class schedule_order { stable, natural };

struct constant_mixing {
  double beta = 1.0;
};

struct chebyshev_mixing {
  beta_schedule schedule;
  schedule_order ordering = schedule_order::stable;
};

using mixing_spec = std::variant<constant_mixing, chebyshev_mixing>;

struct solver_config {
  std::size_t m = 5;            // history window size (0 = plain gradient step)
  std::optional<double> lambda; // unset: 1 with a damping schedule, else
                                // 2/(l+mu) when both are known, else 1
  mixing_spec mixing = constant_mixing{};
  std::optional<std::size_t> horizon;  // number of mixing steps after bootstrap
  std::optional<double> grad_tol;      // stop when the gradient norm reaches it
  double rank_tol = 0.0;               // 0: default QR rank tolerance
};

// Throws input_error when the configuration is unusable (horizon and grad_tol
// both unset, nonpositive lambda, negative rank_tol, ...).
void validate_config(const solver_config& cfg);

// Step multiplier actually used when cfg.lambda is unset.
double resolve_lambda(const solver_config& cfg, const objective& obj);

// Damping factor for mixing step `step` >= 1; schedules repeat cyclically
// once the run goes past their horizon.
double beta_for_step(const solver_config& cfg, std::size_t step);

// Schedule values in consumption order.
std::vector<double> ordered_betas(const beta_schedule& s, schedule_order ord);

// ---------------------------------------------------------------------------
// Traces
// ---------------------------------------------------------------------------

enum class run_status { converged, horizon_reached, diverged };

struct trace_row {
  std::size_t t = 0;          // iterate index, strictly increasing from 0
  std::optional<vec> x;       // snapshot when requested
  double grad_norm = 0.0;     // always finite in recorded rows
  double f = 0.0;
  double beta_used = 0.0;     // damping of the step that produced this iterate
                              // (0 for the start row and non-mixing steps)
  vec alpha;                  // affine weights of the step, alpha_0 first;
                              // empty for non-mixing rows
  double kappa_tilde = 0.0;   // conditioning diagnostic of the step that
                              // produced this iterate (0 when undefined)
  double lambda_r = 0.0;      // extrapolation regularizer (rmpe rows only)
  bool rmpe_fallback = false; // extrapolation fell back to the last iterate
};

struct run_trace {
  std::vector<trace_row> rows;
  run_status status = run_status::horizon_reached;
  vec final_x;
  double lambda_used = 0.0;
  std::size_t window_m = 0;
};

// ---------------------------------------------------------------------------
// History window
// ---------------------------------------------------------------------------

// Sliding window of the last min(m, t)+1 iterates and residuals, oldest
// first, plus an incrementally maintained QR factorization of the matrix of
// consecutive residual differences
//   D = [F_{t-m_t+1} - F_{t-m_t}, ..., F_t - F_{t-1}].
// The difference matrix the mixing step needs, with columns F_t - F_{t-i},
// is D postmultiplied by a 0/1 matrix, so its least-squares systems reduce
// to small triangular ones on D's R factor.
struct history_window {
  std::size_t m = 0;
  double rank_tol = 0.0;
  std::deque<vec> xs;
  std::deque<vec> fs;
  qr_factors diff_qr;

  history_window(std::size_t m_, double rank_tol_, std::size_t dim);

  std::size_t m_t() const { return xs.empty() ? 0 : xs.size() - 1; }

  // Appends (x, f), updating the QR factorization and shedding the oldest
  // entry once more than m+1 are held.
  void push(const vec& x, const vec& f);
};

// ---------------------------------------------------------------------------
// Core steps
// ---------------------------------------------------------------------------

// (g, f_res) with f_res = -lambda * grad f(x) and g = x + f_res, so g is the
// damped-gradient fixed-point map. Throws numeric_error on a non-finite
// gradient.
std::pair<vec, vec> fixed_point_map(const objective& obj, double lambda,
                                    const vec& x);

// Affine weights (alpha_0, ..., alpha_{m_t}): the tail is the minimal-norm
// minimizer of || F_t - sum_i alpha_i (F_t - F_{t-i}) || and alpha_0 is
// 1 minus the left-to-right sum of the tail, so the weights sum to 1 exactly.
vec mixing_coefficients(const history_window& h);

// Smallest above-tolerance diagonal magnitude of the R factor of the
// difference matrix [F_t - F_{t-1}, ..., F_t - F_{t-m_t}]; 0 when the window
// holds no differences or the matrix is numerically rank 0. Lower bound proxy
// for its least nonzero singular value.
double window_mu_tilde(const history_window& h);

// One mixing step: x_next = sum_i alpha_i x_{t-i} + beta_t sum_i alpha_i
// F_{t-i}. The stored pairs fully determine the result; obj and lambda are
// accepted for signature uniformity with the map above. Throws numeric_error
// when the result is non-finite.
std::pair<vec, vec> anderson_step(const objective& obj, const history_window& h,
                                  double beta_t, double lambda);

// ---------------------------------------------------------------------------
// Drivers
// ---------------------------------------------------------------------------

// Windowed fixed-point acceleration: x_1 = G(x_0), then mixing steps until
// grad_tol, the horizon, or divergence (gradient norm above 1e8 times its
// initial value, or any non-finite quantity). Non-finite results mark the
// trace diverged; rows always hold finite values.
run_trace run_anderson(const objective& obj, const vec& x0,
                       const solver_config& cfg, bool snapshot_iterates = false);

// Constant-step gradient descent; exactly the m=0, beta=1 special case above
// (and implemented as such). step unset: 2/(l+mu) when both are known.
run_trace run_gd(const objective& obj, const vec& x0, std::optional<double> step,
                 std::optional<std::size_t> horizon, std::optional<double> grad_tol,
                 bool snapshot_iterates = false);

// Strongly convex momentum scheme: gradient step 1/l from the lookahead
// point, momentum (sqrt(kappa)-1)/(sqrt(kappa)+1). Rows record the main
// iterates.
run_trace run_nagd(const objective& obj, const vec& x0, double mu, double l,
                   std::optional<std::size_t> horizon, std::optional<double> grad_tol,
                   bool snapshot_iterates = false);

// Restarted extrapolation: k+1 gradient steps at 1/l, then an affine
// combination of the round's first k+1 points with weights from the
// regularized normal system (U^T U + lambda_r I) z = 1, alpha = z / sum z.
// lambda_r = 1e-10 * ||U^T U||_F per round, recorded in the trace; a vanishing
// sum falls back to the last iterate (flagged).
run_trace run_rmpe(const objective& obj, const vec& x0, std::size_t k,
                   std::optional<std::size_t> horizon, std::optional<double> grad_tol,
                   bool snapshot_iterates = false);

// Weights-only extrapolation step on points x^(0..k+1); lambda_r = 0 solves
// the constrained minimization exactly (minimal-norm), matching the scalar
// closed form.
vec rmpe_extrapolate(const std::vector<vec>& points, double lambda_r);

// Minimal-residual Krylov iterates x_0..x_s for A x = b (Arnoldi with
// reorthogonalization); stops early on breakdown, which signals an exact
// solution. steps must not exceed the dimension.
std::vector<vec> gmres_solve(const dense_matrix& a, const vec& b, const vec& x0,
                             std::size_t steps);

} // namespace accel
