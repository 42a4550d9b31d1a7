#include "accel/solvers.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <utility>

#include "accel/errors.hpp"

namespace accel {

namespace {

constexpr std::size_t k_unbounded_cap = 1000000;
constexpr double k_divergence_factor = 1e8;

struct mixing_result {
  vec alpha;      // alpha_0 first
  double mu_tilde = 0.0;
};

// Small system for the window's least squares: with D = Q R the matrix of
// consecutive residual differences (oldest first) and column i of the mixing
// matrix equal to the sum of D's last i+1 columns, the mixing matrix is
// Q (R W) with W_{j,i} = 1 iff j >= c-1-i. Minimizing over gamma reduces to
// the c x c system (R W) gamma ~= Q^T F_t, and minimal-norm solutions agree
// because Q has orthonormal columns.
dense_matrix small_mixing_matrix(const qr_factors& f) {
  const std::size_t c = f.r.cols();
  dense_matrix small(std::max<std::size_t>(c, 1), c);
  for (std::size_t a = 0; a < c; ++a) {
    for (std::size_t i = 0; i < c; ++i) {
      double s = 0.0;
      for (std::size_t j = c - 1 - i; j < c; ++j) s += f.r(a, j);
      small(a, i) = s;
    }
  }
  return small;
}

mixing_result mixing_with_diag(const history_window& h) {
  mixing_result out;
  const std::size_t c = h.m_t() == 0 ? 0 : h.diff_qr.r.cols();
  if (c == 0) {
    out.alpha = {1.0};
    return out;
  }
  const vec& ft = h.fs.back();
  vec rhs(c, 0.0);
  for (std::size_t j = 0; j < c; ++j) {
    double s = 0.0;
    for (std::size_t i = 0; i < ft.size(); ++i) s += h.diff_qr.q(i, j) * ft[i];
    rhs[j] = s;
  }
  dense_matrix small = small_mixing_matrix(h.diff_qr);
  lstsq_solution sol = least_squares_min_norm(small, rhs, h.rank_tol);

  out.alpha.resize(c + 1);
  double tail = 0.0;
  for (std::size_t i = 0; i < c; ++i) {
    out.alpha[i + 1] = sol.coeffs[i];
    tail += sol.coeffs[i];
  }
  out.alpha[0] = 1.0 - tail;

  qr_factors small_f = qr_factor(small, h.rank_tol);
  out.mu_tilde = smallest_live_diag(small_f);
  return out;
}

vec combine_step(const history_window& h, const vec& alpha, double beta_t) {
  const std::size_t c = h.m_t();
  const std::size_t n = h.xs.back().size();
  vec x_next(n, 0.0);
  for (std::size_t i = 0; i < alpha.size(); ++i) {
    const std::size_t idx = c - i; // x_{t-i}, newest stored last
    axpy(alpha[i], h.xs[idx], x_next);
    axpy(beta_t * alpha[i], h.fs[idx], x_next);
  }
  if (!all_finite(x_next)) throw numeric_error("mixing step produced non-finite iterate");
  return x_next;
}

struct eval_point {
  double f = 0.0;
  vec grad;
  double grad_norm = 0.0;
  bool finite = false;
};

eval_point eval_at(const objective& obj, const vec& x) {
  eval_point e;
  auto fg = obj.eval_fn(x);
  e.f = fg.first;
  e.grad = std::move(fg.second);
  e.grad_norm = nrm2(e.grad);
  e.finite = std::isfinite(e.f) && std::isfinite(e.grad_norm) && all_finite(e.grad);
  return e;
}

trace_row make_row(std::size_t t, const vec& x, const eval_point& e, double beta,
                   bool snapshot) {
  trace_row row;
  row.t = t;
  if (snapshot) row.x = x;
  row.grad_norm = e.grad_norm;
  row.f = e.f;
  row.beta_used = beta;
  return row;
}

} // namespace

void validate_config(const solver_config& cfg) {
  if (!cfg.horizon.has_value() && !cfg.grad_tol.has_value()) {
    throw input_error("solver config: horizon and grad_tol cannot both be unset");
  }
  if (cfg.lambda.has_value() && !(*cfg.lambda > 0.0)) {
    throw input_error("solver config: lambda must be positive");
  }
  if (cfg.grad_tol.has_value() && !(*cfg.grad_tol >= 0.0)) {
    throw input_error("solver config: grad_tol must be nonnegative");
  }
  if (!(cfg.rank_tol >= 0.0)) {
    throw input_error("solver config: rank_tol must be nonnegative");
  }
  if (const auto* cm = std::get_if<constant_mixing>(&cfg.mixing)) {
    if (!std::isfinite(cm->beta)) throw input_error("solver config: beta must be finite");
  } else {
    const auto& ch = std::get<chebyshev_mixing>(cfg.mixing);
    if (ch.schedule.horizon < 1 || ch.schedule.betas.size() != ch.schedule.horizon) {
      throw input_error("solver config: damping schedule is empty or inconsistent");
    }
  }
}

double resolve_lambda(const solver_config& cfg, const objective& obj) {
  if (cfg.lambda.has_value()) return *cfg.lambda;
  if (std::holds_alternative<chebyshev_mixing>(cfg.mixing)) return 1.0;
  if (obj.known_mu.has_value() && obj.known_l.has_value() &&
      *obj.known_mu + *obj.known_l > 0.0) {
    return 2.0 / (*obj.known_mu + *obj.known_l);
  }
  return 1.0;
}

std::vector<double> ordered_betas(const beta_schedule& s, schedule_order ord) {
  if (ord == schedule_order::natural) return s.betas;
  const std::vector<std::size_t> perm = stable_order(s.horizon);
  std::vector<double> out(s.betas.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = s.betas[perm[i]];
  return out;
}

double beta_for_step(const solver_config& cfg, std::size_t step) {
  if (step < 1) throw input_error("beta_for_step: steps are 1-based");
  if (const auto* cm = std::get_if<constant_mixing>(&cfg.mixing)) return cm->beta;
  const auto& ch = std::get<chebyshev_mixing>(cfg.mixing);
  const std::vector<double> seq = ordered_betas(ch.schedule, ch.ordering);
  return seq[(step - 1) % seq.size()];
}

history_window::history_window(std::size_t m_, double rank_tol_, std::size_t dim)
    : m(m_), rank_tol(rank_tol_), diff_qr(qr_factor(dense_matrix(dim, 0), rank_tol_)) {}

void history_window::push(const vec& x, const vec& f) {
  if (m == 0) {
    xs.clear();
    fs.clear();
    xs.push_back(x);
    fs.push_back(f);
    return;
  }
  if (!xs.empty()) {
    vec diff = f;
    axpy(-1.0, fs.back(), diff);
    const bool drop = diff_qr.r.cols() == m; // at capacity: slide the window
    diff_qr = qr_update(diff_qr, &diff, drop);
  }
  xs.push_back(x);
  fs.push_back(f);
  if (xs.size() > m + 1) {
    xs.pop_front();
    fs.pop_front();
  }
}

std::pair<vec, vec> fixed_point_map(const objective& obj, double lambda,
                                    const vec& x) {
  if (x.size() != obj.dim) throw input_error("fixed_point_map: dimension mismatch");
  vec g = obj.grad_fn(x);
  if (!all_finite(g)) throw numeric_error("fixed_point_map: non-finite gradient");
  vec f_res = g;
  scal(-lambda, f_res);
  vec gx = x;
  axpy(1.0, f_res, gx);
  return {std::move(gx), std::move(f_res)};
}

vec mixing_coefficients(const history_window& h) {
  if (h.xs.empty()) throw input_error("mixing_coefficients: empty window");
  return mixing_with_diag(h).alpha;
}

double window_mu_tilde(const history_window& h) {
  if (h.xs.empty()) return 0.0;
  return mixing_with_diag(h).mu_tilde;
}

std::pair<vec, vec> anderson_step(const objective&, const history_window& h,
                                  double beta_t, double /*lambda*/) {
  if (h.xs.empty()) throw input_error("anderson_step: empty window");
  vec alpha = mixing_coefficients(h);
  vec x_next = combine_step(h, alpha, beta_t);
  return {std::move(x_next), std::move(alpha)};
}

run_trace run_anderson(const objective& obj, const vec& x0,
                       const solver_config& cfg, bool snapshot_iterates) {
  validate_config(cfg);
  if (!obj.eval_fn) throw input_error("run_anderson: objective has no evaluator");
  if (x0.size() != obj.dim) throw input_error("run_anderson: dimension mismatch");

  run_trace trace;
  trace.window_m = cfg.m;
  const double lambda = resolve_lambda(cfg, obj);
  trace.lambda_used = lambda;
  trace.final_x = x0;

  eval_point e0 = eval_at(obj, x0);
  if (!e0.finite) {
    trace.status = run_status::diverged;
    return trace;
  }
  trace.rows.push_back(make_row(0, x0, e0, 0.0, snapshot_iterates));
  const double guard = e0.grad_norm > 0.0
                           ? k_divergence_factor * e0.grad_norm
                           : std::numeric_limits<double>::infinity();
  if (cfg.grad_tol.has_value() && e0.grad_norm <= *cfg.grad_tol) {
    trace.status = run_status::converged;
    return trace;
  }

  history_window win(cfg.m, cfg.rank_tol, obj.dim);
  vec x = x0;
  vec f_res = e0.grad;
  scal(-lambda, f_res);
  win.push(x, f_res);

  // Bootstrap: x_1 = G(x_0), a full damped-gradient step.
  {
    vec x1 = x;
    axpy(1.0, f_res, x1);
    if (!all_finite(x1)) {
      trace.status = run_status::diverged;
      return trace;
    }
    eval_point e1 = eval_at(obj, x1);
    if (!e1.finite) {
      trace.status = run_status::diverged;
      return trace;
    }
    trace_row row = make_row(1, x1, e1, 1.0, snapshot_iterates);
    row.alpha = {1.0};
    trace.rows.push_back(std::move(row));
    x = std::move(x1);
    trace.final_x = x;
    f_res = e1.grad;
    scal(-lambda, f_res);
    win.push(x, f_res);
    if (cfg.grad_tol.has_value() && e1.grad_norm <= *cfg.grad_tol) {
      trace.status = run_status::converged;
      return trace;
    }
    if (e1.grad_norm > guard) {
      trace.status = run_status::diverged;
      return trace;
    }
  }

  const std::size_t max_steps = cfg.horizon.value_or(k_unbounded_cap);
  double grad_norm_at_base = trace.rows.back().grad_norm;

  for (std::size_t step = 1; step <= max_steps; ++step) {
    const double beta_t = beta_for_step(cfg, step);
    mixing_result mix;
    vec x_next;
    try {
      mix = mixing_with_diag(win);
      x_next = combine_step(win, mix.alpha, beta_t);
    } catch (const numeric_error&) {
      trace.status = run_status::diverged;
      return trace;
    }
    eval_point e = eval_at(obj, x_next);
    if (!e.finite) {
      trace.status = run_status::diverged;
      return trace;
    }

    trace_row row = make_row(step + 1, x_next, e, beta_t, snapshot_iterates);
    row.alpha = mix.alpha;
    row.kappa_tilde = mix.mu_tilde > 0.0 ? grad_norm_at_base / mix.mu_tilde : 0.0;
    trace.rows.push_back(std::move(row));

    x = std::move(x_next);
    trace.final_x = x;
    f_res = e.grad;
    scal(-lambda, f_res);
    win.push(x, f_res);
    grad_norm_at_base = e.grad_norm;

    if (cfg.grad_tol.has_value() && e.grad_norm <= *cfg.grad_tol) {
      trace.status = run_status::converged;
      return trace;
    }
    if (e.grad_norm > guard) {
      trace.status = run_status::diverged;
      return trace;
    }
  }
  trace.status = run_status::horizon_reached;
  return trace;
}

run_trace run_gd(const objective& obj, const vec& x0, std::optional<double> step,
                 std::optional<std::size_t> horizon, std::optional<double> grad_tol,
                 bool snapshot_iterates) {
  solver_config cfg;
  cfg.m = 0;
  cfg.mixing = constant_mixing{1.0};
  // horizon counts gradient steps; the window driver's bootstrap is the first.
  if (horizon.has_value()) {
    if (*horizon < 1) throw input_error("run_gd: horizon must be at least 1");
    cfg.horizon = *horizon - 1;
  }
  cfg.grad_tol = grad_tol;
  if (step.has_value()) {
    cfg.lambda = *step;
  } else if (obj.known_mu.has_value() && obj.known_l.has_value()) {
    cfg.lambda = 2.0 / (*obj.known_mu + *obj.known_l);
  } else {
    throw input_error("run_gd: step required when mu and l are unknown");
  }
  if (!(*cfg.lambda > 0.0)) throw input_error("run_gd: step must be positive");
  return run_anderson(obj, x0, cfg, snapshot_iterates);
}

run_trace run_nagd(const objective& obj, const vec& x0, double mu, double l,
                   std::optional<std::size_t> horizon, std::optional<double> grad_tol,
                   bool snapshot_iterates) {
  if (!(mu > 0.0) || !(l >= mu)) throw input_error("run_nagd: requires 0 < mu <= l");
  if (!horizon.has_value() && !grad_tol.has_value()) {
    throw input_error("run_nagd: horizon and grad_tol cannot both be unset");
  }
  if (!obj.eval_fn) throw input_error("run_nagd: objective has no evaluator");
  if (x0.size() != obj.dim) throw input_error("run_nagd: dimension mismatch");

  const double kappa = l / mu;
  const double rk = std::sqrt(kappa);
  const double momentum = (rk - 1.0) / (rk + 1.0);
  const double step = 1.0 / l;

  run_trace trace;
  trace.lambda_used = step;
  trace.final_x = x0;

  eval_point e0 = eval_at(obj, x0);
  if (!e0.finite) {
    trace.status = run_status::diverged;
    return trace;
  }
  trace.rows.push_back(make_row(0, x0, e0, 0.0, snapshot_iterates));
  const double guard = e0.grad_norm > 0.0
                           ? k_divergence_factor * e0.grad_norm
                           : std::numeric_limits<double>::infinity();
  if (grad_tol.has_value() && e0.grad_norm <= *grad_tol) {
    trace.status = run_status::converged;
    return trace;
  }

  vec x = x0;
  vec y = x0;
  const std::size_t max_steps = horizon.value_or(k_unbounded_cap);
  for (std::size_t k = 1; k <= max_steps; ++k) {
    vec gy = obj.grad_fn(y);
    if (!all_finite(gy)) {
      trace.status = run_status::diverged;
      return trace;
    }
    vec x_next = y;
    axpy(-step, gy, x_next);
    if (!all_finite(x_next)) {
      trace.status = run_status::diverged;
      return trace;
    }
    vec y_next = x_next;
    for (std::size_t i = 0; i < y_next.size(); ++i) {
      y_next[i] += momentum * (x_next[i] - x[i]);
    }
    eval_point e = eval_at(obj, x_next);
    if (!e.finite) {
      trace.status = run_status::diverged;
      return trace;
    }
    trace.rows.push_back(make_row(k, x_next, e, 0.0, snapshot_iterates));
    x = std::move(x_next);
    y = std::move(y_next);
    trace.final_x = x;
    if (grad_tol.has_value() && e.grad_norm <= *grad_tol) {
      trace.status = run_status::converged;
      return trace;
    }
    if (e.grad_norm > guard) {
      trace.status = run_status::diverged;
      return trace;
    }
  }
  trace.status = run_status::horizon_reached;
  return trace;
}

namespace {

// nullopt: degenerate weights (vanishing sum), caller keeps the last iterate.
std::optional<vec> rmpe_weights(const std::vector<vec>& resid, double lambda_r) {
  const std::size_t k = resid.size() - 1;
  vec alpha(k + 1, 0.0);
  if (lambda_r == 0.0) {
    // Constrained exact minimization of ||sum_j alpha_j r_j||, sum alpha = 1:
    // substitute alpha_0 = 1 - sum of the rest.
    const std::size_t n = resid.front().size();
    dense_matrix m(n, k);
    for (std::size_t j = 1; j <= k; ++j) {
      for (std::size_t i = 0; i < n; ++i) m(i, j - 1) = resid[j][i] - resid[0][i];
    }
    vec rhs = resid[0];
    scal(-1.0, rhs);
    lstsq_solution sol = least_squares_min_norm(m, rhs);
    double tail = 0.0;
    for (std::size_t j = 1; j <= k; ++j) {
      alpha[j] = sol.coeffs[j - 1];
      tail += sol.coeffs[j - 1];
    }
    alpha[0] = 1.0 - tail;
    return alpha;
  }
  dense_matrix gram(k + 1, k + 1);
  for (std::size_t a = 0; a <= k; ++a) {
    for (std::size_t b = a; b <= k; ++b) {
      const double s = dot(resid[a], resid[b]);
      gram(a, b) = s;
      gram(b, a) = s;
    }
  }
  for (std::size_t a = 0; a <= k; ++a) gram(a, a) += lambda_r;
  lstsq_solution sol = least_squares_min_norm(gram, vec(k + 1, 1.0));
  double s = 0.0, abs_sum = 0.0;
  for (double z : sol.coeffs) {
    s += z;
    abs_sum += std::abs(z);
  }
  if (!std::isfinite(s) || !(std::abs(s) > 1e-14 * abs_sum)) return std::nullopt;
  for (std::size_t j = 0; j <= k; ++j) alpha[j] = sol.coeffs[j] / s;
  return alpha;
}

std::vector<vec> consecutive_residuals(const std::vector<vec>& points) {
  std::vector<vec> resid(points.size() - 1);
  for (std::size_t j = 0; j + 1 < points.size(); ++j) {
    resid[j] = points[j + 1];
    axpy(-1.0, points[j], resid[j]);
  }
  return resid;
}

} // namespace

vec rmpe_extrapolate(const std::vector<vec>& points, double lambda_r) {
  if (points.size() < 3) {
    throw input_error("rmpe_extrapolate: needs at least three points");
  }
  const std::size_t k = points.size() - 2; // residual columns r_0..r_k
  const std::vector<vec> resid = consecutive_residuals(points);
  const std::optional<vec> alpha = rmpe_weights(resid, lambda_r);
  if (!alpha.has_value()) return points[points.size() - 2];
  vec out(points.front().size(), 0.0);
  for (std::size_t j = 0; j <= k; ++j) axpy((*alpha)[j], points[j], out);
  return out;
}

run_trace run_rmpe(const objective& obj, const vec& x0, std::size_t k,
                   std::optional<std::size_t> horizon, std::optional<double> grad_tol,
                   bool snapshot_iterates) {
  if (k < 1) throw input_error("run_rmpe: k must be at least 1");
  if (!horizon.has_value() && !grad_tol.has_value()) {
    throw input_error("run_rmpe: horizon and grad_tol cannot both be unset");
  }
  if (!obj.known_l.has_value() || !(*obj.known_l > 0.0)) {
    throw input_error("run_rmpe: requires a known smoothness constant l");
  }
  if (!obj.eval_fn) throw input_error("run_rmpe: objective has no evaluator");
  if (x0.size() != obj.dim) throw input_error("run_rmpe: dimension mismatch");

  const double step = 1.0 / *obj.known_l;
  run_trace trace;
  trace.lambda_used = step;
  trace.final_x = x0;

  eval_point e0 = eval_at(obj, x0);
  if (!e0.finite) {
    trace.status = run_status::diverged;
    return trace;
  }
  trace.rows.push_back(make_row(0, x0, e0, 0.0, snapshot_iterates));
  const double guard = e0.grad_norm > 0.0
                           ? k_divergence_factor * e0.grad_norm
                           : std::numeric_limits<double>::infinity();
  if (grad_tol.has_value() && e0.grad_norm <= *grad_tol) {
    trace.status = run_status::converged;
    return trace;
  }

  vec x = x0;
  vec grad = e0.grad;
  std::size_t t = 0;
  const std::size_t budget = horizon.value_or(k_unbounded_cap);

  while (t < budget) {
    std::vector<vec> points;
    points.push_back(x);
    for (std::size_t j = 0; j < k + 1 && t < budget; ++j) {
      vec x_next = x;
      axpy(-step, grad, x_next);
      if (!all_finite(x_next)) {
        trace.status = run_status::diverged;
        return trace;
      }
      eval_point e = eval_at(obj, x_next);
      if (!e.finite) {
        trace.status = run_status::diverged;
        return trace;
      }
      ++t;
      trace.rows.push_back(make_row(t, x_next, e, 0.0, snapshot_iterates));
      x = std::move(x_next);
      grad = std::move(e.grad);
      trace.final_x = x;
      points.push_back(x);
      if (grad_tol.has_value() && e.grad_norm <= *grad_tol) {
        trace.status = run_status::converged;
        return trace;
      }
      if (e.grad_norm > guard) {
        trace.status = run_status::diverged;
        return trace;
      }
    }
    if (points.size() < k + 2 || t >= budget) break; // budget ended mid-round

    // Extrapolation round.
    const std::vector<vec> resid = consecutive_residuals(points);
    double fro2 = 0.0;
    for (std::size_t a = 0; a <= k; ++a) {
      for (std::size_t b = 0; b <= k; ++b) {
        const double s = dot(resid[a], resid[b]);
        fro2 += s * s;
      }
    }
    const double lambda_r = 1e-10 * std::sqrt(fro2);
    const std::optional<vec> alpha = rmpe_weights(resid, lambda_r);
    vec x_plus;
    if (alpha.has_value()) {
      x_plus.assign(obj.dim, 0.0);
      for (std::size_t j = 0; j <= k; ++j) axpy((*alpha)[j], points[j], x_plus);
    } else {
      x_plus = points[points.size() - 2];
    }
    if (!all_finite(x_plus)) {
      trace.status = run_status::diverged;
      return trace;
    }
    eval_point e = eval_at(obj, x_plus);
    if (!e.finite) {
      trace.status = run_status::diverged;
      return trace;
    }
    ++t;
    trace_row row = make_row(t, x_plus, e, 0.0, snapshot_iterates);
    row.lambda_r = lambda_r;
    row.rmpe_fallback = !alpha.has_value();
    trace.rows.push_back(std::move(row));
    x = std::move(x_plus);
    grad = std::move(e.grad);
    trace.final_x = x;
    if (grad_tol.has_value() && e.grad_norm <= *grad_tol) {
      trace.status = run_status::converged;
      return trace;
    }
    if (e.grad_norm > guard) {
      trace.status = run_status::diverged;
      return trace;
    }
  }
  trace.status = run_status::horizon_reached;
  return trace;
}

std::vector<vec> gmres_solve(const dense_matrix& a, const vec& b, const vec& x0,
                             std::size_t steps) {
  const std::size_t n = a.rows();
  if (a.cols() != n) throw input_error("gmres_solve: matrix must be square");
  if (b.size() != n || x0.size() != n) throw input_error("gmres_solve: dimension mismatch");
  if (steps > n) throw input_error("gmres_solve: steps must not exceed the dimension");

  std::vector<vec> iterates;
  iterates.push_back(x0);

  vec r0 = b;
  vec ax0 = matvec(a, x0);
  axpy(-1.0, ax0, r0);
  const double beta = nrm2(r0);
  if (beta == 0.0) return iterates;

  std::vector<vec> basis;
  vec v0 = r0;
  scal(1.0 / beta, v0);
  basis.push_back(std::move(v0));

  // h(i, j) for i <= j+1; stored densely per column.
  std::vector<vec> hcols;

  for (std::size_t j = 0; j < steps; ++j) {
    vec w = matvec(a, basis[j]);
    vec hcol(j + 2, 0.0);
    for (int pass = 0; pass < 2; ++pass) {
      for (std::size_t i = 0; i <= j; ++i) {
        const double s = dot(basis[i], w);
        hcol[i] += s;
        axpy(-s, basis[i], w);
      }
    }
    const double h_sub = nrm2(w);
    hcol[j + 1] = h_sub;
    hcols.push_back(hcol);
    const bool lucky = h_sub <= 1e-14 * beta;
    if (!lucky) {
      vec v_next = w;
      scal(1.0 / h_sub, v_next);
      basis.push_back(std::move(v_next));
    }

    // Least-squares step: min || beta e_1 - H y || over the (j+2) x (j+1)
    // Hessenberg block.
    dense_matrix hmat(j + 2, j + 1);
    for (std::size_t col = 0; col <= j; ++col) {
      for (std::size_t row = 0; row < hcols[col].size(); ++row) {
        hmat(row, col) = hcols[col][row];
      }
    }
    vec rhs(j + 2, 0.0);
    rhs[0] = beta;
    lstsq_solution sol = least_squares_min_norm(hmat, rhs);
    vec xj = x0;
    for (std::size_t col = 0; col <= j; ++col) axpy(sol.coeffs[col], basis[col], xj);
    iterates.push_back(std::move(xj));
    if (lucky) break;
  }
  return iterates;
}

} // namespace accel
